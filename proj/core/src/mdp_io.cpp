#include "lsaboot/mdp_io.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include "lsaboot/error.hpp"
#include "lsaboot/text.hpp"

namespace lsaboot {

void write_mdp(std::ostream& out, const GarnetMdp& mdp, const Policy* policy) {
  out << "states " << mdp.n_states() << '\n'
      << "actions " << mdp.n_actions() << '\n'
      << "branching " << mdp.branching() << '\n'
      << "discount " << format_double(mdp.discount()) << '\n'
      << "seed " << mdp.seed() << '\n';
  for (int s = 0; s < mdp.n_states(); ++s) {
    for (int a = 0; a < mdp.n_actions(); ++a) {
      out << "reward " << s << ' ' << a << ' ' << format_double(mdp.reward(s, a)) << '\n';
    }
  }
  for (int s = 0; s < mdp.n_states(); ++s) {
    for (int a = 0; a < mdp.n_actions(); ++a) {
      for (int t : mdp.successors(s, a)) {
        out << "transition " << s << ' ' << a << ' ' << t << ' ' << format_double(mdp.transition(s, a, t))
            << '\n';
      }
    }
  }
  if (policy != nullptr) {
    for (int s = 0; s < mdp.n_states(); ++s) {
      for (int a = 0; a < mdp.n_actions(); ++a) {
        out << "policy " << s << ' ' << a << ' ' << format_double((*policy)(s, a)) << '\n';
      }
    }
  }
}

void write_mdp(const std::filesystem::path& path, const GarnetMdp& mdp, const Policy* policy) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_mdp(out, mdp, policy);
  if (!out) throw IoError("write failed: " + path.string());
}

namespace {

struct LineError {
  const std::string& source;
  int line;
  [[noreturn]] void operator()(const std::string& msg) const {
    throw ValidationError(source + ":" + std::to_string(line) + ": " + msg);
  }
};

}  // namespace

MdpFile read_mdp(std::istream& in, const std::string& source) {
  std::optional<std::int64_t> states, actions, branching;
  std::optional<double> discount;
  std::uint64_t seed = 0;
  struct Entry {
    std::int64_t s, a, t;
    double value;
    int line;
  };
  std::vector<Entry> rewards, transitions, policy;

  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const LineError fail{source, line_no};
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto fields = split(line, ' ');
    if (fields.empty()) continue;
    const std::string& key = fields[0];
    auto expect = [&](std::size_t count) {
      if (fields.size() != count) {
        fail("'" + key + "' expects " + std::to_string(count - 1) + " values, got " +
             std::to_string(fields.size() - 1));
      }
    };
    try {
      if (key == "states") {
        expect(2);
        states = parse_int(fields[1]);
      } else if (key == "actions") {
        expect(2);
        actions = parse_int(fields[1]);
      } else if (key == "branching") {
        expect(2);
        branching = parse_int(fields[1]);
      } else if (key == "discount") {
        expect(2);
        discount = parse_double(fields[1]);
      } else if (key == "seed") {
        expect(2);
        seed = parse_uint(fields[1]);
      } else if (key == "reward" || key == "policy") {
        expect(4);
        Entry e{parse_int(fields[1]), parse_int(fields[2]), 0, parse_double(fields[3]), line_no};
        (key == "reward" ? rewards : policy).push_back(e);
      } else if (key == "transition") {
        expect(5);
        transitions.push_back(
            {parse_int(fields[1]), parse_int(fields[2]), parse_int(fields[3]), parse_double(fields[4]), line_no});
      } else {
        fail("unknown record '" + key + "'");
      }
    } catch (const ValidationError& e) {
      const std::string what = e.what();
      if (what.rfind(source + ":", 0) == 0) throw;
      fail(what);
    }
  }
  if (!in.eof()) throw IoError("read failed: " + source);

  const LineError at_end{source, line_no};
  if (!states || !actions || !branching || !discount) {
    at_end("missing one of states/actions/branching/discount");
  }
  const std::int64_t ns = *states;
  const std::int64_t na = *actions;
  if (ns < 1 || na < 1 || ns > 100000 || na > 100000) at_end("states and actions must be positive");

  auto check_index = [&](const Entry& e, bool has_next) {
    const LineError fail{source, e.line};
    if (e.s < 0 || e.s >= ns) fail("state " + std::to_string(e.s) + " out of range");
    if (e.a < 0 || e.a >= na) fail("action " + std::to_string(e.a) + " out of range");
    if (has_next && (e.t < 0 || e.t >= ns)) fail("next state " + std::to_string(e.t) + " out of range");
  };

  Matrix reward = Matrix::Constant(ns, na, std::numeric_limits<double>::quiet_NaN());
  for (const auto& e : rewards) {
    check_index(e, false);
    reward(e.s, e.a) = e.value;
  }
  if (reward.hasNaN()) at_end("every (state, action) needs a reward record");

  std::vector<double> table(static_cast<std::size_t>(ns * na * ns), 0.0);
  for (const auto& e : transitions) {
    check_index(e, true);
    table[static_cast<std::size_t>((e.s * na + e.a) * ns + e.t)] = e.value;
  }

  MdpFile file{GarnetMdp(static_cast<int>(ns), static_cast<int>(na), static_cast<int>(*branching), *discount,
                         std::move(table), std::move(reward), seed),
               std::nullopt};
  if (!policy.empty()) {
    Matrix probs = Matrix::Zero(ns, na);
    for (const auto& e : policy) {
      check_index(e, false);
      probs(e.s, e.a) = e.value;
    }
    file.policy = Policy(std::move(probs));
  }
  return file;
}

MdpFile read_mdp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_mdp(in, path.string());
}

}  // namespace lsaboot
