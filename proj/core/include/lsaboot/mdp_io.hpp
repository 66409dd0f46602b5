#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "lsaboot/td_garnet.hpp"

namespace lsaboot {

/// An MDP instance plus the evaluated policy, as stored on disk.
///
/// Text format, one record per line, `#` starts a comment:
///   states N / actions A / branching B / discount g / seed S
///   reward s a r
///   transition s a s' p
///   policy s a p          (optional block)
struct MdpFile {
  GarnetMdp mdp;
  std::optional<Policy> policy;
};

void write_mdp(std::ostream& out, const GarnetMdp& mdp, const Policy* policy = nullptr);
void write_mdp(const std::filesystem::path& path, const GarnetMdp& mdp, const Policy* policy = nullptr);

/// Throws ValidationError with "<source>:<line>: ..." diagnostics.
MdpFile read_mdp(std::istream& in, const std::string& source = "<stream>");
MdpFile read_mdp(const std::filesystem::path& path);

}  // namespace lsaboot
