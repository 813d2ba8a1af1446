#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dsb/diagnostics.hpp"
#include "dsb/errors.hpp"
#include "dsb/io.hpp"
#include "dsb/mixture.hpp"

namespace dsb {

// Sectioned key-value run configuration: `[section]` headers, `key = value`
// lines, comma-separated lists, `#` comments, LF or CRLF. Unknown keys and
// duplicate sections are hard errors; the seed is mandatory.

namespace config_detail {

inline std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

struct RawConfig {
  // section -> key -> value, plus deterministic section/key listing
  std::map<std::string, std::map<std::string, std::string>> sections;
};

inline RawConfig parse_raw(const std::string& text, std::vector<std::string>& errors) {
  RawConfig raw;
  std::string current;
  bool have_section = false;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        errors.push_back("line " + std::to_string(lineno) + ": malformed section header");
        continue;
      }
      current = trim(line.substr(1, line.size() - 2));
      if (current.empty()) {
        errors.push_back("line " + std::to_string(lineno) + ": empty section name");
        continue;
      }
      if (raw.sections.count(current)) {
        errors.push_back("duplicate section [" + current + "]");
        continue;
      }
      raw.sections[current];
      have_section = true;
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      errors.push_back("line " + std::to_string(lineno) + ": expected key = value");
      continue;
    }
    if (!have_section) {
      errors.push_back("line " + std::to_string(lineno) + ": key outside any [section]");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      errors.push_back("line " + std::to_string(lineno) + ": empty key");
      continue;
    }
    auto& sec = raw.sections[current];
    if (sec.count(key)) {
      errors.push_back("duplicate key [" + current + "] " + key);
      continue;
    }
    sec[key] = value;
  }
  return raw;
}

// Typed access with consumed-key tracking so leftovers surface as errors.
class SectionReader {
 public:
  SectionReader(const std::string& name, const std::map<std::string, std::string>* kv,
                std::vector<std::string>& errors)
      : name_(name), kv_(kv), errors_(&errors) {}

  bool present() const { return kv_ != nullptr; }

  bool has(const std::string& key) const { return kv_ && kv_->count(key); }

  std::string get_string(const std::string& key, const std::string& fallback) {
    consumed_.insert(key);
    if (!has(key)) return fallback;
    return kv_->at(key);
  }

  double get_double(const std::string& key, double fallback) {
    consumed_.insert(key);
    if (!has(key)) return fallback;
    return parse_double(key, kv_->at(key));
  }

  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback, bool* found = nullptr) {
    consumed_.insert(key);
    if (!has(key)) {
      if (found) *found = false;
      return fallback;
    }
    if (found) *found = true;
    const std::string& v = kv_->at(key);
    try {
      std::size_t pos = 0;
      const std::uint64_t r = std::stoull(v, &pos);
      if (pos != v.size()) throw std::invalid_argument("trailing");
      return r;
    } catch (...) {
      error(key, "expected unsigned integer, got '" + v + "'");
      return fallback;
    }
  }

  int get_int(const std::string& key, int fallback) {
    consumed_.insert(key);
    if (!has(key)) return fallback;
    const std::string& v = kv_->at(key);
    try {
      std::size_t pos = 0;
      const int r = std::stoi(v, &pos);
      if (pos != v.size()) throw std::invalid_argument("trailing");
      return r;
    } catch (...) {
      error(key, "expected integer, got '" + v + "'");
      return fallback;
    }
  }

  bool get_bool(const std::string& key, bool fallback) {
    consumed_.insert(key);
    if (!has(key)) return fallback;
    const std::string& v = kv_->at(key);
    if (v == "true") return true;
    if (v == "false") return false;
    error(key, "expected true/false, got '" + v + "'");
    return fallback;
  }

  std::vector<double> get_double_list(const std::string& key, std::vector<double> fallback) {
    consumed_.insert(key);
    if (!has(key)) return fallback;
    std::vector<double> out;
    for (const std::string& item : split(kv_->at(key))) out.push_back(parse_double(key, item));
    return out;
  }

  std::vector<int> get_int_list(const std::string& key, std::vector<int> fallback) {
    consumed_.insert(key);
    if (!has(key)) return fallback;
    std::vector<int> out;
    for (const std::string& item : split(kv_->at(key))) {
      try {
        std::size_t pos = 0;
        out.push_back(std::stoi(item, &pos));
        if (pos != item.size()) throw std::invalid_argument("trailing");
      } catch (...) {
        error(key, "expected integer list entry, got '" + item + "'");
      }
    }
    return out;
  }

  std::vector<std::string> get_string_list(const std::string& key,
                                           std::vector<std::string> fallback) {
    consumed_.insert(key);
    if (!has(key)) return fallback;
    return split(kv_->at(key));
  }

  void error(const std::string& key, const std::string& message) {
    errors_->push_back("[" + name_ + "] " + key + ": " + message);
  }

  void finish() {
    if (!kv_) return;
    for (const auto& [key, value] : *kv_) {
      if (!consumed_.count(key)) errors_->push_back("[" + name_ + "] unknown key '" + key + "'");
    }
  }

 private:
  static std::vector<std::string> split(const std::string& value) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(value);
    while (std::getline(in, item, ',')) out.push_back(trim(item));
    if (!value.empty() && value.back() == ',') out.push_back("");
    return out;
  }

  double parse_double(const std::string& key, const std::string& v) {
    try {
      std::size_t pos = 0;
      const double r = std::stod(v, &pos);
      if (pos != v.size()) throw std::invalid_argument("trailing");
      return r;
    } catch (...) {
      error(key, "expected number, got '" + v + "'");
      return 0.0;
    }
  }

  std::string name_;
  const std::map<std::string, std::string>* kv_;
  std::vector<std::string>* errors_;
  std::set<std::string> consumed_;
};

}  // namespace config_detail

struct SpaceBlock {
  int dim = 1;
  std::vector<double> lo{0.0};
  std::vector<double> hi{1.0};
  std::vector<int> grid{5};
  std::vector<double> x0{0.0};
  std::vector<double> ladder;
  int axis = 0;
};

struct ProcessBlock {
  Variant variant = Variant::thetaDDP;
  double alpha = 1.0;
  int sticks = 0;              // 0 = resolve from target_tail
  double target_tail = 1e-6;
  double sigma0 = 1.0;
  double tau = 1.0;
  double mu = 0.0;
};

struct AtomsBlock {
  int dim = 1;
  std::string marginal = "normal";
  double mean = 0.0;
  double scale = 1.0;
  double a = 0.0;
  double b = 1.0;
  double sigma0 = 1.0;
  double tau = 1.0;
  double mu = 0.0;
  bool circle = false;
};

struct PanelBlock {
  std::vector<double> theta_lo{-3.0};
  std::vector<double> theta_hi{3.0};
  int bumps = 5;
  int cosines = 2;
};

struct MixtureBlock {
  MixtureFamily family = MixtureFamily::gaussian_loc;
  std::vector<double> gamma{1.0};
  double y_lo = -8.0;
  double y_hi = 8.0;
  int y_nodes = kDefaultQuadNodes;
  double beta_max = 5.0;
  double alpha_max = 50.0;
  double gamma0 = 1.0;
  double y0 = 0.0;
  double epsilon = 0.01;
  std::vector<double> shells;
};

struct ProbeBlock {
  std::vector<std::string> which;
  int n = 2000;
  double level = 0.01;
  double epsilon = 0.25;
  double kl_epsilon = 0.1;
  std::vector<double> b_lo{0.0};
  std::vector<double> b_hi{1.0};
  double far = 0.0;
  double final_fraction = 0.25;
  double tv_upper = 0.2;
  double tv_lower = 1.9;
  std::vector<double> gamma_offsets;
};

struct OutputBlock {
  std::string dir = "out";
  std::vector<std::string> formats{"csv", "json"};
};

struct RunConfig {
  std::uint64_t seed = 0;
  int threads = 0;  // 0 = machine parallelism
  SpaceBlock space;
  ProcessBlock process;
  AtomsBlock atoms;
  PanelBlock panel;
  MixtureBlock mixture;
  ProbeBlock probe;
  OutputBlock output;
  std::set<std::string> present_sections;
};

inline Variant parse_variant(const std::string& name) {
  if (name == "DDP") return Variant::DDP;
  if (name == "wDDP") return Variant::wDDP;
  if (name == "thetaDDP") return Variant::thetaDDP;
  throw config_error("unknown variant '" + name + "' (expected DDP, wDDP or thetaDDP)");
}

inline MixtureFamily parse_family(const std::string& name) {
  if (name == "gaussian_loc") return MixtureFamily::gaussian_loc;
  if (name == "beta_constrained") return MixtureFamily::beta_constrained;
  if (name == "beta_free") return MixtureFamily::beta_free;
  throw config_error("unknown mixture family '" + name + "'");
}

// Parses and validates the full configuration text; throws config_error with
// every collected problem, one per line, naming the offending keys.
inline RunConfig parse_config(const std::string& text) {
  std::vector<std::string> errors;
  const config_detail::RawConfig raw = config_detail::parse_raw(text, errors);

  auto reader = [&](const char* name) {
    const auto it = raw.sections.find(name);
    return config_detail::SectionReader(
        name, it == raw.sections.end() ? nullptr : &it->second, errors);
  };

  static const std::set<std::string> known_sections{"run",   "space",   "process", "atoms",
                                                    "panel", "mixture", "probe",   "output"};
  for (const auto& [name, kv] : raw.sections) {
    if (!known_sections.count(name)) errors.push_back("unknown section [" + name + "]");
  }

  RunConfig cfg;
  for (const auto& [name, kv] : raw.sections) cfg.present_sections.insert(name);

  {
    auto run = reader("run");
    bool seed_found = false;
    cfg.seed = run.get_u64("seed", 0, &seed_found);
    if (!seed_found)
      errors.push_back("[run] seed: mandatory key missing (seeds make runs reproducible)");
    cfg.threads = run.get_int("threads", 0);
    run.finish();
  }
  {
    auto space = reader("space");
    cfg.space.dim = space.get_int("dim", 1);
    if (cfg.space.dim < 1) space.error("dim", "must be >= 1");
    cfg.space.lo = space.get_double_list("lo", {0.0});
    cfg.space.hi = space.get_double_list("hi", {1.0});
    cfg.space.grid = space.get_int_list("grid", {5});
    cfg.space.x0 = space.get_double_list("x0", cfg.space.lo);
    cfg.space.ladder = space.get_double_list("ladder", {});
    cfg.space.axis = space.get_int("axis", 0);
    space.finish();
    const std::size_t d = static_cast<std::size_t>(std::max(1, cfg.space.dim));
    auto check_len = [&](const char* key, std::size_t got) {
      if (got != d)
        errors.push_back(std::string("[space] ") + key + ": expected " + std::to_string(d) +
                         " entries, got " + std::to_string(got));
    };
    check_len("lo", cfg.space.lo.size());
    check_len("hi", cfg.space.hi.size());
    check_len("grid", cfg.space.grid.size());
    check_len("x0", cfg.space.x0.size());
    if (cfg.space.axis < 0 || cfg.space.axis >= cfg.space.dim)
      errors.push_back("[space] axis: out of range");
    for (std::size_t i = 1; i < cfg.space.ladder.size(); ++i) {
      if (!(cfg.space.ladder[i] < cfg.space.ladder[i - 1])) {
        errors.push_back("[space] ladder: must be strictly decreasing");
        break;
      }
    }
  }
  {
    auto process = reader("process");
    const std::string v = process.get_string("variant", "thetaDDP");
    try {
      cfg.process.variant = parse_variant(v);
    } catch (const config_error& e) {
      process.error("variant", e.what());
    }
    cfg.process.alpha = process.get_double("alpha", 1.0);
    if (!(cfg.process.alpha > 0.0))
      process.error("alpha", "must be > 0: Beta(1,0) is degenerate and the quantile map "
                             "undefined (alpha_min requirement)");
    cfg.process.sticks = process.get_int("sticks", 0);
    if (process.has("sticks") && cfg.process.sticks < 1)
      process.error("sticks", "must be >= 1 when given");
    cfg.process.target_tail = process.get_double("target_tail", 1e-6);
    if (!(cfg.process.target_tail > 0.0) || !(cfg.process.target_tail < 1.0))
      process.error("target_tail", "must lie in (0,1)");
    cfg.process.sigma0 = process.get_double("sigma0", 1.0);
    if (!(cfg.process.sigma0 > 0.0)) process.error("sigma0", "must be > 0");
    cfg.process.tau = process.get_double("tau", 1.0);
    if (!(cfg.process.tau > 0.0)) process.error("tau", "must be > 0");
    cfg.process.mu = process.get_double("mu", 0.0);
    process.finish();
  }
  {
    auto atoms = reader("atoms");
    cfg.atoms.dim = atoms.get_int("dim", 1);
    if (cfg.atoms.dim < 1) atoms.error("dim", "must be >= 1");
    cfg.atoms.marginal = atoms.get_string("marginal", "normal");
    if (cfg.atoms.marginal != "normal" && cfg.atoms.marginal != "uniform")
      atoms.error("marginal", "expected normal or uniform");
    cfg.atoms.mean = atoms.get_double("mean", 0.0);
    cfg.atoms.scale = atoms.get_double("scale", 1.0);
    if (!(cfg.atoms.scale > 0.0)) atoms.error("scale", "must be > 0");
    cfg.atoms.a = atoms.get_double("a", 0.0);
    cfg.atoms.b = atoms.get_double("b", 1.0);
    if (cfg.atoms.marginal == "uniform" && !(cfg.atoms.a < cfg.atoms.b))
      atoms.error("a", "uniform marginal needs a < b (zero-width interval rejected)");
    cfg.atoms.sigma0 = atoms.get_double("sigma0", 1.0);
    if (!(cfg.atoms.sigma0 > 0.0)) atoms.error("sigma0", "must be > 0");
    cfg.atoms.tau = atoms.get_double("tau", 1.0);
    if (!(cfg.atoms.tau > 0.0)) atoms.error("tau", "must be > 0");
    cfg.atoms.mu = atoms.get_double("mu", 0.0);
    cfg.atoms.circle = atoms.get_bool("circle", false);
    if (cfg.atoms.circle && cfg.atoms.dim != 1)
      atoms.error("circle", "circle atoms require dim = 1");
    atoms.finish();
  }
  {
    auto panel = reader("panel");
    cfg.panel.theta_lo = panel.get_double_list("theta_lo", {-3.0});
    cfg.panel.theta_hi = panel.get_double_list("theta_hi", {3.0});
    cfg.panel.bumps = panel.get_int("bumps", 5);
    cfg.panel.cosines = panel.get_int("cosines", 2);
    if (cfg.panel.bumps < 1) panel.error("bumps", "must be >= 1");
    if (cfg.panel.cosines < 0) panel.error("cosines", "must be >= 0");
    panel.finish();
    if (cfg.panel.theta_lo.size() != cfg.panel.theta_hi.size())
      errors.push_back("[panel] theta_lo/theta_hi: length mismatch");
  }
  {
    auto mixture = reader("mixture");
    const std::string fam = mixture.get_string("family", "gaussian_loc");
    try {
      cfg.mixture.family = parse_family(fam);
    } catch (const config_error& e) {
      mixture.error("family", e.what());
    }
    cfg.mixture.gamma = mixture.get_double_list("gamma", {1.0});
    cfg.mixture.y_lo = mixture.get_double("y_lo", -8.0);
    cfg.mixture.y_hi = mixture.get_double("y_hi", 8.0);
    cfg.mixture.y_nodes = mixture.get_int("y_nodes", kDefaultQuadNodes);
    if (cfg.mixture.y_nodes < 2) mixture.error("y_nodes", "must be >= 2");
    cfg.mixture.beta_max = mixture.get_double("beta_max", 5.0);
    cfg.mixture.alpha_max = mixture.get_double("alpha_max", 50.0);
    cfg.mixture.gamma0 = mixture.get_double("gamma0", cfg.mixture.gamma.empty()
                                                          ? 1.0
                                                          : cfg.mixture.gamma.front());
    cfg.mixture.y0 = mixture.get_double("y0", 0.5 * (cfg.mixture.y_lo + cfg.mixture.y_hi));
    cfg.mixture.epsilon = mixture.get_double("epsilon", 0.01);
    if (!(cfg.mixture.epsilon > 0.0)) mixture.error("epsilon", "must be > 0");
    cfg.mixture.shells = mixture.get_double_list("shells", {});
    mixture.finish();
    if (cfg.mixture.family != MixtureFamily::gaussian_loc) {
      cfg.mixture.y_lo = 0.0;
      cfg.mixture.y_hi = 1.0;
    }
    if (!(cfg.mixture.y_lo < cfg.mixture.y_hi)) errors.push_back("[mixture] y_lo/y_hi: need lo < hi");
  }
  {
    auto probe = reader("probe");
    cfg.probe.which = probe.get_string_list("which", {});
    cfg.probe.n = probe.get_int("n", 2000);
    cfg.probe.level = probe.get_double("level", 0.01);
    cfg.probe.epsilon = probe.get_double("epsilon", 0.25);
    cfg.probe.kl_epsilon = probe.get_double("kl_epsilon", 0.1);
    cfg.probe.b_lo = probe.get_double_list("b_lo", {0.0});
    cfg.probe.b_hi = probe.get_double_list("b_hi", {1.0});
    cfg.probe.far = probe.get_double("far", 0.0);
    cfg.probe.final_fraction = probe.get_double("final_fraction", 0.25);
    cfg.probe.tv_upper = probe.get_double("tv_upper", 0.2);
    cfg.probe.tv_lower = probe.get_double("tv_lower", 1.9);
    cfg.probe.gamma_offsets = probe.get_double_list("gamma_offsets", {});
    probe.finish();
    static const std::set<std::string> known_probes{
        "marginal", "continuity", "tv_contrast", "association",
        "support",  "kl_support", "mixture_tv"};
    for (const auto& p : cfg.probe.which) {
      if (!known_probes.count(p)) errors.push_back("[probe] which: unknown probe '" + p + "'");
    }
    if (cfg.probe.n < 100) errors.push_back("[probe] n: replicate count must be >= 100");
  }
  {
    auto output = reader("output");
    cfg.output.dir = output.get_string("dir", "out");
    cfg.output.formats = output.get_string_list("formats", {"csv", "json"});
    output.finish();
    for (const auto& f : cfg.output.formats) {
      if (f != "csv" && f != "json")
        errors.push_back("[output] formats: unknown format '" + f + "'");
    }
  }

  if (!errors.empty()) {
    std::string all = "configuration errors:";
    for (const auto& e : errors) all += "\n  - " + e;
    throw config_error(all);
  }
  return cfg;
}

// Blocks the chosen command requires; mixture pipelines reject beta_free,
// which exists only for the negative decay test.
inline void validate_for_command(const RunConfig& cfg, const std::string& command) {
  auto require = [&](const char* section) {
    if (!cfg.present_sections.count(section))
      throw config_error("command '" + command + "' requires a [" + std::string(section) +
                         "] section");
  };
  require("run");
  if (command == "simulate" || command == "probe" || command == "mixture") {
    require("space");
    require("process");
  }
  if (command == "mixture") require("mixture");
  if (command == "decay-check") require("mixture");
  if (command == "probe") {
    require("probe");
    if (cfg.probe.which.empty())
      throw config_error("[probe] which: at least one probe must be named");
  }
  const bool mixes = command == "mixture" ||
                     (command == "probe" &&
                      std::any_of(cfg.probe.which.begin(), cfg.probe.which.end(),
                                  [](const std::string& p) {
                                    return p == "kl_support" || p == "mixture_tv";
                                  }));
  if (mixes && cfg.mixture.family == MixtureFamily::beta_free)
    throw config_error("[mixture] family: beta_free fails the decay condition and is "
                       "rejected in assemble-and-mix pipelines (decay-check only)");
}

// --- Builders: config blocks -> library objects ---------------------------------

inline LocationSetPtr make_locations(const SpaceBlock& space) {
  return build_grid_ptr(Box(space.lo, space.hi), space.grid);
}

inline StickSpec make_stick_spec(const ProcessBlock& p) {
  StickSpec spec;
  spec.alpha = AlphaField::constant(p.alpha);
  spec.kernel = CovKernelSpec(p.sigma0, p.tau, p.mu);
  spec.truncation =
      p.sticks >= 1 ? Truncation::sticks(p.sticks) : Truncation::target_tail(p.target_tail);
  return spec;
}

inline AtomSpec make_atom_spec(const AtomsBlock& a, Variant variant) {
  std::vector<Marginal> marginals;
  for (int j = 0; j < a.dim; ++j) {
    marginals.push_back(a.marginal == "normal" ? Marginal::normal(a.mean, a.scale)
                                               : Marginal::uniform(a.a, a.b));
  }
  AtomVariant hint = variant == Variant::thetaDDP ? AtomVariant::iid : AtomVariant::field;
  if (a.circle) hint = AtomVariant::circle;
  return AtomSpec(a.dim, std::move(marginals), CovKernelSpec(a.sigma0, a.tau, a.mu), hint);
}

inline PanelSpec make_panel_spec(const PanelBlock& p, int theta_dim) {
  PanelSpec spec;
  const auto broadcast = [&](const std::vector<double>& v) {
    Eigen::VectorXd out(theta_dim);
    if (v.size() == 1) {
      out.setConstant(v[0]);
    } else if (static_cast<int>(v.size()) == theta_dim) {
      for (int i = 0; i < theta_dim; ++i) out(i) = v[static_cast<std::size_t>(i)];
    } else {
      throw config_error("[panel] theta bounds: expected 1 or " + std::to_string(theta_dim) +
                         " entries");
    }
    return out;
  };
  spec.theta_lo = broadcast(p.theta_lo);
  spec.theta_hi = broadcast(p.theta_hi);
  spec.bumps_per_axis = p.bumps;
  spec.cosine_max_frequency = p.cosines;
  return spec;
}

inline MixtureKernelSpec make_mixture_kernel(const MixtureBlock& m) {
  switch (m.family) {
    case MixtureFamily::gaussian_loc:
      return MixtureKernelSpec::gaussian(m.y_lo, m.y_hi);
    case MixtureFamily::beta_constrained:
      return MixtureKernelSpec::beta_constrained(m.beta_max, m.alpha_max);
    case MixtureFamily::beta_free:
      return MixtureKernelSpec::beta_free();
  }
  throw config_error("unreachable mixture family");
}

inline ProbeConfig make_probe_config(const RunConfig& cfg, Variant variant) {
  ProbeConfig probe;
  probe.variant = variant;
  probe.stick = make_stick_spec(cfg.process);
  probe.atoms = make_atom_spec(cfg.atoms, variant);
  probe.locations = make_locations(cfg.space);
  probe.ladder.x0 = IndexPoint(cfg.space.x0);
  probe.ladder.distances = cfg.space.ladder;
  probe.ladder.axis = cfg.space.axis;
  probe.replicates = cfg.probe.n;
  probe.seed = cfg.seed;
  probe.panel = make_panel_spec(cfg.panel, cfg.atoms.dim);
  probe.epsilons = {cfg.probe.epsilon, cfg.probe.kl_epsilon};
  probe.threads = cfg.threads;
  return probe;
}

// Canonical serialization of the semantic configuration; [output], threads
// and anything execution-related stay out so reruns into different
// directories digest identically.
inline std::string config_digest(const RunConfig& cfg, const std::string& command) {
  std::string s = "command=" + command + "\n";
  s += "run.seed=" + std::to_string(cfg.seed) + "\n";
  auto list = [](const std::vector<double>& v) {
    std::string out;
    for (double x : v) out += format_double(x) + ",";
    return out;
  };
  auto ilist = [](const std::vector<int>& v) {
    std::string out;
    for (int x : v) out += std::to_string(x) + ",";
    return out;
  };
  s += "space=" + std::to_string(cfg.space.dim) + "|" + list(cfg.space.lo) + "|" +
       list(cfg.space.hi) + "|" + ilist(cfg.space.grid) + "|" + list(cfg.space.x0) + "|" +
       list(cfg.space.ladder) + "|" + std::to_string(cfg.space.axis) + "\n";
  s += std::string("process=") + variant_name(cfg.process.variant) + "|" +
       format_double(cfg.process.alpha) + "|" + std::to_string(cfg.process.sticks) + "|" +
       format_double(cfg.process.target_tail) + "|" + format_double(cfg.process.sigma0) + "|" +
       format_double(cfg.process.tau) + "|" + format_double(cfg.process.mu) + "\n";
  s += "atoms=" + std::to_string(cfg.atoms.dim) + "|" + cfg.atoms.marginal + "|" +
       format_double(cfg.atoms.mean) + "|" + format_double(cfg.atoms.scale) + "|" +
       format_double(cfg.atoms.a) + "|" + format_double(cfg.atoms.b) + "|" +
       format_double(cfg.atoms.sigma0) + "|" + format_double(cfg.atoms.tau) + "|" +
       format_double(cfg.atoms.mu) + "|" + (cfg.atoms.circle ? "circle" : "line") + "\n";
  s += "panel=" + list(cfg.panel.theta_lo) + "|" + list(cfg.panel.theta_hi) + "|" +
       std::to_string(cfg.panel.bumps) + "|" + std::to_string(cfg.panel.cosines) + "\n";
  s += std::string("mixture=") + family_name(cfg.mixture.family) + "|" + list(cfg.mixture.gamma) +
       "|" + format_double(cfg.mixture.y_lo) + "|" + format_double(cfg.mixture.y_hi) + "|" +
       std::to_string(cfg.mixture.y_nodes) + "|" + format_double(cfg.mixture.beta_max) + "|" +
       format_double(cfg.mixture.alpha_max) + "|" + format_double(cfg.mixture.gamma0) + "|" +
       format_double(cfg.mixture.y0) + "|" + format_double(cfg.mixture.epsilon) + "|" +
       list(cfg.mixture.shells) + "\n";
  std::string which;
  for (const auto& p : cfg.probe.which) which += p + ",";
  s += "probe=" + which + "|" + std::to_string(cfg.probe.n) + "|" +
       format_double(cfg.probe.level) + "|" + format_double(cfg.probe.epsilon) + "|" +
       format_double(cfg.probe.kl_epsilon) + "|" + list(cfg.probe.b_lo) + "|" +
       list(cfg.probe.b_hi) + "|" + format_double(cfg.probe.far) + "|" +
       format_double(cfg.probe.final_fraction) + "|" + format_double(cfg.probe.tv_upper) + "|" +
       format_double(cfg.probe.tv_lower) + "|" + list(cfg.probe.gamma_offsets) + "\n";
  return hex64(fnv1a64(s));
}

}  // namespace dsb
