#include "lsaboot/config.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>

#include "lsaboot/error.hpp"
#include "lsaboot/text.hpp"

namespace lsaboot {

IniDocument IniDocument::parse(std::istream& in, const std::string& source) {
  IniDocument doc;
  std::string section;
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string origin = source + ":" + std::to_string(line_no);
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ValidationError(origin + ": unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section.empty()) throw ValidationError(origin + ": empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ValidationError(origin + ": expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    if (key.empty()) throw ValidationError(origin + ": empty key");
    const std::string full = section.empty() ? key : section + "." + key;
    doc.set(full, std::string(trim(line.substr(eq + 1))), origin);
  }
  if (!in.eof()) throw IoError("read failed: " + source);
  return doc;
}

IniDocument IniDocument::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config " + path.string());
  return parse(in, path.string());
}

void IniDocument::set_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ValidationError("--set " + assignment + ": expected section.key=value");
  const std::string key(trim(std::string_view(assignment).substr(0, eq)));
  if (key.empty()) throw ValidationError("--set " + assignment + ": empty key");
  set(key, std::string(trim(std::string_view(assignment).substr(eq + 1))), "--set " + key);
}

void IniDocument::set(const std::string& key, const std::string& value, const std::string& origin) {
  entries_[key] = Entry{value, origin};
}

const IniDocument::Entry* IniDocument::find(const std::string& key) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? nullptr : &it->second;
}

namespace {

template <typename T>
std::vector<T> parse_list(const std::string& text, T (*parse_one)(std::string_view)) {
  std::vector<T> out;
  for (const auto& piece : split(text, ',')) out.push_back(parse_one(piece));
  return out;
}

double parse_double_sv(std::string_view s) { return parse_double(s); }
std::int64_t parse_int_sv(std::string_view s) { return parse_int(s); }

bool parse_bool(std::string_view s) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw ValidationError("expected a boolean, got '" + std::string(s) + "'");
}

int parse_small_int(std::string_view s) {
  const std::int64_t v = parse_int(s);
  if (v < 0 || v > 1'000'000) throw ValidationError("value " + std::string(s) + " out of range");
  return static_cast<int>(v);
}

}  // namespace

ExperimentConfig resolve_config(const IniDocument& doc) {
  ExperimentConfig c;
  ProblemConfig& p = c.problem;
  std::map<std::string, std::function<void(const std::string&)>> handlers{
      {"problem.kind",
       [&](const std::string& v) {
         if (v == "garnet") {
           p.kind = ProblemKind::garnet;
         } else if (v == "synthetic") {
           p.kind = ProblemKind::synthetic;
         } else if (v == "mdp_file") {
           p.kind = ProblemKind::mdp_file;
         } else {
           throw ValidationError("unknown problem kind '" + v + "'");
         }
       }},
      {"problem.states", [&](const std::string& v) { p.states = parse_small_int(v); }},
      {"problem.actions", [&](const std::string& v) { p.actions = parse_small_int(v); }},
      {"problem.branching", [&](const std::string& v) { p.branching = parse_small_int(v); }},
      {"problem.discount", [&](const std::string& v) { p.discount = parse_double(v); }},
      {"problem.features",
       [&](const std::string& v) {
         if (v == "identity") {
           p.feature_dim = 0;
         } else if (v.rfind("random:", 0) == 0) {
           p.feature_dim = parse_small_int(std::string_view(v).substr(7));
           if (p.feature_dim < 1) throw ValidationError("random feature dimension must be >= 1");
         } else {
           throw ValidationError("features must be 'identity' or 'random:<d>'");
         }
       }},
      {"problem.seed", [&](const std::string& v) { p.seed = parse_uint(v); }},
      {"problem.file", [&](const std::string& v) { p.mdp_file = v; }},
      {"problem.dim", [&](const std::string& v) { p.dim = parse_small_int(v); }},
      {"problem.noise_a", [&](const std::string& v) { p.noise_a = parse_double(v); }},
      {"problem.noise_b", [&](const std::string& v) { p.noise_b = parse_double(v); }},
      {"problem.min_real_part", [&](const std::string& v) { p.min_real_part = parse_double(v); }},
      {"schedule.c0",
       [&](const std::string& v) {
         if (v == "auto") {
           c.c0.reset();
         } else {
           c.c0 = parse_double(v);
         }
       }},
      {"schedule.gammas", [&](const std::string& v) { c.gammas = parse_list<double>(v, parse_double_sv); }},
      {"run.n_grid", [&](const std::string& v) { c.n_grid = parse_list<std::int64_t>(v, parse_int_sv); }},
      {"run.replicas", [&](const std::string& v) { c.replicas = parse_int(v); }},
      {"run.reference_sample", [&](const std::string& v) { c.reference_sample = parse_int(v); }},
      {"run.burn_in",
       [&](const std::string& v) {
         if (v == "tail") {
           c.burn_in = BurnIn::tail();
         } else if (v.rfind("fixed:", 0) == 0) {
           c.burn_in = BurnIn::fixed(parse_int(std::string_view(v).substr(6)));
         } else {
           throw ValidationError("burn_in must be 'tail' or 'fixed:<k>'");
         }
       }},
      {"run.theta0",
       [&](const std::string& v) {
         if (v == "zero") {
           c.theta0 = Theta0::zero;
         } else if (v == "star") {
           c.theta0 = Theta0::star;
         } else {
           throw ValidationError("theta0 must be 'zero' or 'star'");
         }
       }},
      {"run.self_test", [&](const std::string& v) { c.self_test = parse_bool(v); }},
      {"run.workers", [&](const std::string& v) { c.workers = static_cast<unsigned>(parse_small_int(v)); }},
      {"bootstrap.b", [&](const std::string& v) { c.b_count = parse_int(v); }},
      {"bootstrap.levels", [&](const std::string& v) { c.levels = parse_list<double>(v, parse_double_sv); }},
      {"bootstrap.law", [&](const std::string& v) { c.law = parse_weight_law(v); }},
      {"bootstrap.runs", [&](const std::string& v) { c.runs = parse_int(v); }},
      {"seeds.data", [&](const std::string& v) { c.data_seed = parse_uint(v); }},
      {"seeds.weight", [&](const std::string& v) { c.weight_seed = parse_uint(v); }},
  };

  for (const auto& [key, entry] : doc.entries()) {
    const auto it = handlers.find(key);
    if (it == handlers.end()) throw ValidationError(entry.origin + ": unknown key '" + key + "'");
    try {
      it->second(entry.value);
    } catch (const ValidationError& e) {
      throw ValidationError(entry.origin + ": " + key + ": " + e.what());
    }
  }

  auto fail = [&](const std::string& key, const std::string& msg) {
    const auto* e = doc.find(key);
    throw ValidationError((e != nullptr ? e->origin + ": " : std::string()) + key + ": " + msg);
  };
  if (c.n_grid.empty()) fail("run.n_grid", "must not be empty");
  for (std::size_t i = 0; i < c.n_grid.size(); ++i) {
    if (c.n_grid[i] < 1) fail("run.n_grid", "entries must be >= 1");
    if (i > 0 && c.n_grid[i] <= c.n_grid[i - 1]) fail("run.n_grid", "must be strictly increasing");
  }
  if (c.gammas.empty()) fail("schedule.gammas", "must not be empty");
  for (double g : c.gammas) {
    if (!(g >= 0.5 && g < 1.0)) fail("schedule.gammas", "each gamma must lie in [0.5, 1)");
  }
  if (c.c0 && !(*c.c0 > 0.0)) fail("schedule.c0", "must be positive or 'auto'");
  if (c.replicas < 1) fail("run.replicas", "must be >= 1");
  if (c.reference_sample < 1) fail("run.reference_sample", "must be >= 1");
  if (c.b_count < 1) fail("bootstrap.b", "must be >= 1");
  if (c.runs < 1) fail("bootstrap.runs", "must be >= 1");
  if (c.levels.empty()) fail("bootstrap.levels", "must not be empty");
  for (double l : c.levels) {
    if (!(l > 0.0 && l < 1.0)) fail("bootstrap.levels", "each level must lie in (0, 1)");
  }
  if (c.workers < 1) fail("run.workers", "must be >= 1");
  if (p.kind == ProblemKind::mdp_file && p.mdp_file.empty()) fail("problem.file", "required for kind mdp_file");
  return c;
}

namespace {

template <typename T, typename F>
std::string join(const std::vector<T>& values, F format) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ", ";
    out += format(values[i]);
  }
  return out;
}

}  // namespace

std::string to_ini(const ExperimentConfig& c) {
  const ProblemConfig& p = c.problem;
  std::ostringstream os;
  os << "[problem]\n";
  switch (p.kind) {
    case ProblemKind::garnet:
      os << "kind = garnet\n"
         << "states = " << p.states << "\n"
         << "actions = " << p.actions << "\n"
         << "branching = " << p.branching << "\n"
         << "discount = " << format_double(p.discount) << "\n"
         << "features = " << (p.feature_dim == 0 ? std::string("identity") : "random:" + std::to_string(p.feature_dim))
         << "\n"
         << "seed = " << p.seed << "\n";
      break;
    case ProblemKind::mdp_file:
      os << "kind = mdp_file\n"
         << "file = " << p.mdp_file.string() << "\n"
         << "features = " << (p.feature_dim == 0 ? std::string("identity") : "random:" + std::to_string(p.feature_dim))
         << "\n"
         << "seed = " << p.seed << "\n";
      break;
    case ProblemKind::synthetic:
      os << "kind = synthetic\n"
         << "dim = " << p.dim << "\n"
         << "noise_a = " << format_double(p.noise_a) << "\n"
         << "noise_b = " << format_double(p.noise_b) << "\n"
         << "min_real_part = " << format_double(p.min_real_part) << "\n"
         << "seed = " << p.seed << "\n";
      break;
  }
  os << "\n[schedule]\n"
     << "c0 = " << (c.c0 ? format_double(*c.c0) : std::string("auto")) << "\n"
     << "gammas = " << join(c.gammas, format_double) << "\n"
     << "\n[run]\n"
     << "n_grid = " << join(c.n_grid, [](std::int64_t v) { return std::to_string(v); }) << "\n"
     << "replicas = " << c.replicas << "\n"
     << "reference_sample = " << c.reference_sample << "\n"
     << "burn_in = "
     << (c.burn_in.fixed_steps > 0 ? "fixed:" + std::to_string(c.burn_in.fixed_steps) : std::string("tail")) << "\n"
     << "theta0 = " << (c.theta0 == Theta0::zero ? "zero" : "star") << "\n"
     << "self_test = " << (c.self_test ? "true" : "false") << "\n"
     << "\n[bootstrap]\n"
     << "b = " << c.b_count << "\n"
     << "levels = " << join(c.levels, format_double) << "\n"
     << "law = " << to_string(c.law) << "\n"
     << "runs = " << c.runs << "\n"
     << "\n[seeds]\n"
     << "data = " << c.data_seed << "\n"
     << "weight = " << c.weight_seed << "\n";
  return os.str();
}

}  // namespace lsaboot
