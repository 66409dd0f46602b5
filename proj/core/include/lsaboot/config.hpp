#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "lsaboot/bootstrap.hpp"
#include "lsaboot/lsa.hpp"

namespace lsaboot {

/// `[section]` / `key = value` text with `#` comments. Keys are addressed as
/// "section.key"; later assignments override earlier ones.
class IniDocument {
 public:
  struct Entry {
    std::string value;
    std::string origin;  // "file:line" or "--set <key>"
  };

  static IniDocument parse(std::istream& in, const std::string& source);
  static IniDocument load(const std::filesystem::path& path);

  /// Applies "section.key=value".
  void set_override(const std::string& assignment);
  void set(const std::string& key, const std::string& value, const std::string& origin);

  const std::map<std::string, Entry>& entries() const noexcept { return entries_; }
  const Entry* find(const std::string& key) const;

 private:
  std::map<std::string, Entry> entries_;
};

enum class ProblemKind { garnet, synthetic, mdp_file };

struct ProblemConfig {
  ProblemKind kind = ProblemKind::garnet;
  int states = 5;
  int actions = 2;
  int branching = 2;
  double discount = 0.8;
  /// 0 for identity features, otherwise random projections to this dimension.
  int feature_dim = 0;
  std::uint64_t seed = 16;
  std::filesystem::path mdp_file;
  // synthetic
  int dim = 3;
  double noise_a = 0.3;
  double noise_b = 1.0;
  double min_real_part = 0.5;
};

enum class Theta0 { zero, star };

struct ExperimentConfig {
  ProblemConfig problem;
  /// Empty means "auto": the largest c0 the stability certificate admits.
  std::optional<double> c0;
  std::vector<double> gammas{0.5};
  std::vector<std::int64_t> n_grid{400, 1600, 6400};
  std::int64_t replicas = 20000;
  std::int64_t reference_sample = 200000;
  BurnIn burn_in = BurnIn::tail();
  Theta0 theta0 = Theta0::zero;
  bool self_test = false;
  std::int64_t b_count = 200;
  std::vector<double> levels{0.9};
  WeightLaw law = WeightLaw::gaussian;
  std::int64_t runs = 500;
  std::uint64_t data_seed = 0;
  std::uint64_t weight_seed = 1;
  unsigned workers = 1;
};

/// Typed view of a document. Unknown keys and malformed values raise
/// ValidationError naming the offending origin.
ExperimentConfig resolve_config(const IniDocument& doc);

/// Canonical text form; resolve_config(parse(to_ini(c))) == c.
std::string to_ini(const ExperimentConfig& config);

}  // namespace lsaboot
