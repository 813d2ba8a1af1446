#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dsb/ddp_core.hpp"
#include "dsb/errors.hpp"
#include "dsb/io.hpp"
#include "dsb/mixture.hpp"
#include "dsb/parallel.hpp"
#include "dsb/rng.hpp"
#include "dsb/stats.hpp"

namespace dsb {

// --- Probe configuration -----------------------------------------------------

struct PanelSpec {
  Eigen::VectorXd theta_lo;
  Eigen::VectorXd theta_hi;
  int bumps_per_axis = 5;
  int cosine_max_frequency = 2;

  TestFunctionPanel build() const {
    return default_panel(theta_lo, theta_hi, bumps_per_axis, cosine_max_frequency);
  }
};

// Ladder of probe distances away from an anchor point along one axis.
// Distances are strictly decreasing; a trailing 0 maps back to the anchor.
struct LadderSpec {
  IndexPoint x0;
  std::vector<double> distances;
  int axis = 0;
};

struct ProbeConfig {
  Variant variant = Variant::thetaDDP;
  StickSpec stick;
  AtomSpec atoms;
  LocationSetPtr locations;
  LadderSpec ladder;
  int replicates = 100;
  std::uint64_t seed = 0;
  PanelSpec panel;
  std::vector<double> epsilons;
  int threads = 1;

  void validate() const {
    if (replicates < 100) throw config_error("ProbeConfig: replicate count must be >= 100");
    if (!locations || locations->size() == 0)
      throw config_error("ProbeConfig: locations missing");
    for (std::size_t i = 1; i < ladder.distances.size(); ++i) {
      if (!(ladder.distances[i] < ladder.distances[i - 1]))
        throw config_error("ProbeConfig: ladder must be strictly decreasing");
    }
    for (double d : ladder.distances) {
      if (d < 0.0) throw config_error("ProbeConfig: ladder distances must be >= 0");
    }
    for (double e : epsilons) {
      if (!(e > 0.0)) throw config_error("ProbeConfig: epsilon must be > 0");
    }
  }
};

inline std::uint64_t fnv1a64(const std::string& text) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : text) {
    h ^= static_cast<std::uint64_t>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[v & 0xF];
    v >>= 4;
  }
  return out;
}

// Canonical content digest of a probe configuration; thread count is an
// execution detail and stays out.
inline std::string probe_config_digest(const ProbeConfig& cfg) {
  std::string s;
  s += variant_name(cfg.variant);
  s += "|alpha=" + format_double(cfg.stick.alpha.lower_bound()) +
       (cfg.stick.alpha.is_constant() ? "c" : "f");
  s += "|sk=" + format_double(cfg.stick.kernel.sigma0) + "," +
       format_double(cfg.stick.kernel.tau) + "," + format_double(cfg.stick.kernel.mean);
  s += "|N=" + std::to_string(cfg.stick.resolve_sticks());
  s += "|ad=" + std::to_string(cfg.atoms.theta_dim);
  for (const auto& m : cfg.atoms.marginals) {
    s += m.family() == Marginal::Family::normal ? "|mn=" : "|mu=";
    s += format_double(m.param_a()) + "," + format_double(m.param_b());
  }
  s += "|ak=" + format_double(cfg.atoms.kernel.sigma0) + "," +
       format_double(cfg.atoms.kernel.tau) + "," + format_double(cfg.atoms.kernel.mean);
  s += "|av=" + std::to_string(static_cast<int>(cfg.atoms.variant_hint));
  s += "|locs=";
  for (std::size_t i = 0; i < cfg.locations->size(); ++i) {
    for (std::size_t a = 0; a < cfg.locations->dim(); ++a)
      s += format_double(cfg.locations->point(i)[a]) + ",";
    s += ";";
  }
  s += "|x0=";
  for (double c : cfg.ladder.x0.coords) s += format_double(c) + ",";
  s += "|ladder=";
  for (double d : cfg.ladder.distances) s += format_double(d) + ",";
  s += "|axis=" + std::to_string(cfg.ladder.axis);
  s += "|panel=";
  for (Eigen::Index i = 0; i < cfg.panel.theta_lo.size(); ++i)
    s += format_double(cfg.panel.theta_lo(i)) + ":" + format_double(cfg.panel.theta_hi(i)) + ",";
  s += std::to_string(cfg.panel.bumps_per_axis) + "," +
       std::to_string(cfg.panel.cosine_max_frequency);
  s += "|n=" + std::to_string(cfg.replicates);
  s += "|seed=" + std::to_string(cfg.seed);
  s += "|eps=";
  for (double e : cfg.epsilons) s += format_double(e) + ",";
  return hex64(fnv1a64(s));
}

// --- Reports -------------------------------------------------------------------

struct ReportRow {
  std::string label;
  double estimate = 0.0;
  double stderr_of_estimate = 0.0;
  std::size_t n = 0;
};

struct Verdict {
  std::string check;
  double tolerance = 0.0;
  bool pass = false;
};

struct DiagnosticsReport {
  std::string probe;
  std::string config_digest;
  std::vector<ReportRow> rows;
  std::vector<Verdict> verdicts;
  std::uint64_t seed = 0;
  double runtime_seconds = 0.0;
  bool inconclusive = false;
  std::string note;

  bool all_pass() const {
    for (const auto& v : verdicts) {
      if (!v.pass) return false;
    }
    return true;
  }

  const ReportRow& row(const std::string& label) const {
    for (const auto& r : rows) {
      if (r.label == label) return r;
    }
    throw input_error("DiagnosticsReport: no row labeled " + label);
  }
};

class ProbeTimer {
 public:
  ProbeTimer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

namespace probe_detail {

// Evaluation set [x0, x0 + d e_axis, ...]; a zero distance maps to index 0
// instead of creating a duplicate point.
struct LadderLocations {
  LocationSetPtr set;
  std::vector<std::size_t> index_of_distance;  // parallel to ladder.distances
};

inline LadderLocations build_ladder_locations(const Box& domain, const LadderSpec& ladder) {
  std::vector<IndexPoint> points{ladder.x0};
  std::vector<std::size_t> index;
  for (double d : ladder.distances) {
    if (d == 0.0) {
      index.push_back(0);
      continue;
    }
    std::vector<double> coords = ladder.x0.coords;
    coords[static_cast<std::size_t>(ladder.axis)] += d;
    IndexPoint p(std::move(coords));
    if (!domain.contains(p, 1e-12))
      throw input_error("ladder point at distance " + format_double(d) +
                        " falls outside the domain");
    index.push_back(points.size());
    points.push_back(std::move(p));
  }
  LadderLocations out;
  out.set = std::make_shared<const LocationSet>(domain, std::move(points));
  out.index_of_distance = std::move(index);
  return out;
}

inline void
append_monotone_verdict(DiagnosticsReport& report, const std::vector<MeanStderr>& by_step,
                        const std::string& check, double se_multiplier = 2.0) {
  bool pass = true;
  for (std::size_t k = 0; k + 1 < by_step.size(); ++k) {
    const double slack = se_multiplier * std::sqrt(by_step[k].stderr_of_mean *
                                                       by_step[k].stderr_of_mean +
                                                   by_step[k + 1].stderr_of_mean *
                                                       by_step[k + 1].stderr_of_mean);
    if (by_step[k + 1].mean > by_step[k].mean + slack) pass = false;
  }
  report.verdicts.push_back({check, se_multiplier, pass});
}

}  // namespace probe_detail

// --- Marginal probe -------------------------------------------------------------

// KS check of the first stick variable V_{1,x} against Beta(1, alpha(x)) at
// every location; the construction promises the marginal law exactly.
inline DiagnosticsReport marginal_beta_probe(const ProbeConfig& cfg, double level = 0.01) {
  cfg.validate();
  if (cfg.replicates < 1000)
    throw config_error("marginal_beta_probe: asymptotic KS p-values need n >= 1000");
  ProbeTimer timer;
  const LocationSet& locs = *cfg.locations;
  const std::size_t n_locs = locs.size();
  const int n = cfg.replicates;

  std::vector<std::vector<double>> v_samples(n_locs, std::vector<double>(
                                                         static_cast<std::size_t>(n)));
  if (cfg.variant == Variant::wDDP) {
    const double alpha = cfg.stick.alpha.lower_bound();
    parallel_replicates(n, cfg.threads, [&](int r) {
      StreamKey key{cfg.seed, stream_context::kMarginalProbe, static_cast<std::uint64_t>(r)};
      RngStream s = make_stream(key, stream_role::kSharedStick, 0);
      const double v = beta_quantile(s.uniform01(), alpha);
      for (std::size_t l = 0; l < n_locs; ++l) v_samples[l][static_cast<std::size_t>(r)] = v;
    });
  } else {
    const GaussianSampler sampler(cfg.stick.kernel, cfg.locations);
    parallel_replicates(n, cfg.threads, [&](int r) {
      StreamKey key{cfg.seed, stream_context::kMarginalProbe, static_cast<std::uint64_t>(r)};
      RngStream s = make_stream(key, stream_role::kStickField, 0);
      const LatentField field = sampler.sample(s);
      const Eigen::VectorXd v = gauss_to_stick(field, cfg.stick);
      for (std::size_t l = 0; l < n_locs; ++l)
        v_samples[l][static_cast<std::size_t>(r)] = v(static_cast<Eigen::Index>(l));
    });
  }

  DiagnosticsReport report;
  report.probe = "marginal_beta";
  report.config_digest = probe_config_digest(cfg);
  report.seed = cfg.seed;
  bool all_pass = true;
  for (std::size_t l = 0; l < n_locs; ++l) {
    const double alpha = cfg.stick.alpha(locs.point(l));
    const double stat =
        ks_statistic(v_samples[l], [alpha](double v) { return beta_cdf(v, alpha); });
    const double p = ks_asymptotic_pvalue(stat, static_cast<std::size_t>(n));
    report.rows.push_back({"ks_stat[loc=" + std::to_string(l) + "]", stat, 0.0,
                           static_cast<std::size_t>(n)});
    report.rows.push_back({"ks_pvalue[loc=" + std::to_string(l) + "]", p, 0.0,
                           static_cast<std::size_t>(n)});
    all_pass = all_pass && p > level;
  }
  report.verdicts.push_back({"ks_all_locations_pass", level, all_pass});
  report.runtime_seconds = timer.seconds();
  return report;
}

// --- Continuity modulus probe -----------------------------------------------------

// E[weak_panel_distance(G_x, G_x0)] along the ladder: the empirical modulus
// of weak continuity of the sample paths.
inline DiagnosticsReport continuity_modulus_probe(const ProbeConfig& cfg,
                                                  double final_fraction = 0.25) {
  cfg.validate();
  if (cfg.ladder.distances.empty())
    throw config_error("continuity_modulus_probe: ladder required");
  ProbeTimer timer;
  const auto ladder = probe_detail::build_ladder_locations(cfg.locations->domain(), cfg.ladder);
  const PathSampler sampler(cfg.variant, cfg.stick, cfg.atoms, ladder.set);
  const TestFunctionPanel panel = cfg.panel.build();
  const int n = cfg.replicates;
  const std::size_t steps = cfg.ladder.distances.size();

  std::vector<std::vector<double>> dist(steps,
                                        std::vector<double>(static_cast<std::size_t>(n)));
  parallel_replicates(n, cfg.threads, [&](int r) {
    StreamKey key{cfg.seed, stream_context::kContinuityProbe, static_cast<std::uint64_t>(r)};
    const MeasureField path = sampler.sample(key);
    for (std::size_t k = 0; k < steps; ++k) {
      const std::size_t idx = ladder.index_of_distance[k];
      dist[k][static_cast<std::size_t>(r)] =
          idx == 0 ? 0.0 : weak_panel_distance(path.measures[idx], path.measures[0], panel);
    }
  });

  DiagnosticsReport report;
  report.probe = "continuity_modulus";
  report.config_digest = probe_config_digest(cfg);
  report.seed = cfg.seed;
  std::vector<MeanStderr> by_step;
  for (std::size_t k = 0; k < steps; ++k) {
    const MeanStderr ms = mean_stderr(dist[k]);
    by_step.push_back(ms);
    report.rows.push_back({"wpd[d=" + format_double(cfg.ladder.distances[k]) + "]", ms.mean,
                           ms.stderr_of_mean, ms.n});
  }
  probe_detail::append_monotone_verdict(report, by_step, "nonincreasing_within_2se");
  if (steps >= 2 && by_step.front().mean > 0.0) {
    report.verdicts.push_back({"final_below_fraction_of_first", final_fraction,
                               by_step.back().mean < final_fraction * by_step.front().mean});
  }
  report.runtime_seconds = timer.seconds();
  return report;
}

// --- TV contrast probe ---------------------------------------------------------------

// Paired E[tv_distance(G_x, G_x0)] tables across variants: total variation
// collapses along the ladder for the thetaDDP but stays pinned near 2 for
// variants whose atoms move, because distinct locations almost surely carry
// distinct atoms.
inline DiagnosticsReport tv_contrast_probe(const std::vector<ProbeConfig>& variant_cfgs,
                                           double theta_final_upper = 0.2,
                                           double moving_atom_lower = 1.9) {
  if (variant_cfgs.empty()) throw config_error("tv_contrast_probe: no variant configs");
  ProbeTimer timer;
  DiagnosticsReport report;
  report.probe = "tv_contrast";
  report.config_digest = probe_config_digest(variant_cfgs.front());
  report.seed = variant_cfgs.front().seed;

  for (std::size_t vi = 0; vi < variant_cfgs.size(); ++vi) {
    const ProbeConfig& cfg = variant_cfgs[vi];
    cfg.validate();
    if (cfg.ladder.distances.empty())
      throw config_error("tv_contrast_probe: ladder required");
    const auto ladder = probe_detail::build_ladder_locations(cfg.locations->domain(), cfg.ladder);
    const PathSampler sampler(cfg.variant, cfg.stick, cfg.atoms, ladder.set);
    const int n = cfg.replicates;
    const std::size_t steps = cfg.ladder.distances.size();
    const std::uint64_t context = stream_context::kTvContrastProbe * 256 + vi;

    std::vector<std::vector<double>> dist(steps,
                                          std::vector<double>(static_cast<std::size_t>(n)));
    parallel_replicates(n, cfg.threads, [&](int r) {
      StreamKey key{cfg.seed, context, static_cast<std::uint64_t>(r)};
      const MeasureField path = sampler.sample(key);
      for (std::size_t k = 0; k < steps; ++k) {
        const std::size_t idx = ladder.index_of_distance[k];
        dist[k][static_cast<std::size_t>(r)] =
            idx == 0 ? 0.0 : tv_distance(path.measures[idx], path.measures[0]);
      }
    });

    const std::string name = variant_name(cfg.variant);
    std::vector<MeanStderr> by_step;
    for (std::size_t k = 0; k < steps; ++k) {
      const MeanStderr ms = mean_stderr(dist[k]);
      by_step.push_back(ms);
      report.rows.push_back({"tv[" + name + ",d=" + format_double(cfg.ladder.distances[k]) + "]",
                             ms.mean, ms.stderr_of_mean, ms.n});
    }
    if (cfg.variant == Variant::thetaDDP) {
      probe_detail::append_monotone_verdict(report, by_step,
                                            std::string(name) + "_decreasing_within_2se");
      double final_positive = by_step.back().mean;
      for (std::size_t k = steps; k-- > 0;) {
        if (cfg.ladder.distances[k] > 0.0) {
          final_positive = by_step[k].mean;
          break;
        }
      }
      report.verdicts.push_back(
          {std::string(name) + "_final_below", theta_final_upper,
           final_positive < theta_final_upper});
    } else {
      bool above = true;
      for (std::size_t k = 0; k < steps; ++k) {
        if (cfg.ladder.distances[k] > 0.0) above = above && by_step[k].mean >= moving_atom_lower;
      }
      report.verdicts.push_back({std::string(name) + "_stays_above", moving_atom_lower, above});
    }
  }
  report.runtime_seconds = timer.seconds();
  return report;
}

// --- Association probe ------------------------------------------------------------------

struct ThetaBox {
  Eigen::VectorXd lo;
  Eigen::VectorXd hi;

  std::string label() const {
    std::string s = "[";
    for (Eigen::Index i = 0; i < lo.size(); ++i) {
      if (i) s += ";";
      s += format_double(lo(i)) + "," + format_double(hi(i));
    }
    return s + "]";
  }
};

// Pearson correlation of (G_{x0}(B), G_{x0+d}(B)) across replicates, with a
// leave-one-out jackknife standard error, for every ladder distance. The
// continuity of these estimates in the anchor points holds for the
// Gaussian-pushforward atom fields shipped here; user-supplied atom laws
// must bring the corresponding joint-probability continuity themselves.
inline DiagnosticsReport association_probe(const ProbeConfig& cfg, const ThetaBox& box) {
  cfg.validate();
  if (cfg.ladder.distances.empty()) throw config_error("association_probe: ladder required");
  ProbeTimer timer;
  const auto ladder = probe_detail::build_ladder_locations(cfg.locations->domain(), cfg.ladder);
  const PathSampler sampler(cfg.variant, cfg.stick, cfg.atoms, ladder.set);
  const int n = cfg.replicates;
  const std::size_t n_locs = ladder.set->size();

  std::vector<std::vector<double>> mass(n_locs, std::vector<double>(static_cast<std::size_t>(n)));
  parallel_replicates(n, cfg.threads, [&](int r) {
    StreamKey key{cfg.seed, stream_context::kAssociationProbe, static_cast<std::uint64_t>(r)};
    const MeasureField path = sampler.sample(key);
    for (std::size_t l = 0; l < n_locs; ++l)
      mass[l][static_cast<std::size_t>(r)] = path.measures[l].box_mass(box.lo, box.hi);
  });

  DiagnosticsReport report;
  report.probe = "association";
  report.config_digest = probe_config_digest(cfg);
  report.seed = cfg.seed;
  std::vector<double> estimates, stderrs;
  try {
    for (std::size_t k = 0; k < cfg.ladder.distances.size(); ++k) {
      const std::size_t idx = ladder.index_of_distance[k];
      const double rho = pearson_correlation(mass[idx], mass[0]);
      const double se = idx == 0 ? 0.0 : jackknife_correlation_stderr(mass[idx], mass[0]);
      report.rows.push_back({"rho[d=" + format_double(cfg.ladder.distances[k]) + "]", rho, se,
                             static_cast<std::size_t>(n)});
      estimates.push_back(rho);
      stderrs.push_back(se);
    }
  } catch (const probe_error&) {
    throw probe_error("association_probe: degenerate variance of G_x(B) for B = " + box.label());
  }

  // Verdicts: exact unity at zero distance, decorrelation at the far end,
  // and estimates rising (within 2 se) as the distance halves.
  for (std::size_t k = 0; k < cfg.ladder.distances.size(); ++k) {
    if (cfg.ladder.distances[k] == 0.0) {
      report.verdicts.push_back({"rho_at_zero_exactly_one", 0.0, estimates[k] == 1.0});
      break;
    }
  }
  if (!cfg.ladder.distances.empty() && cfg.ladder.distances.front() > 0.0) {
    report.verdicts.push_back({"far_distance_within_3se_of_zero", 3.0,
                               std::fabs(estimates.front()) < 3.0 * stderrs.front()});
  }
  bool increasing = true;
  for (std::size_t k = 0; k + 1 < cfg.ladder.distances.size(); ++k) {
    if (cfg.ladder.distances[k + 1] == 0.0) break;
    const double slack =
        2.0 * std::sqrt(stderrs[k] * stderrs[k] + stderrs[k + 1] * stderrs[k + 1]);
    if (estimates[k + 1] < estimates[k] - slack) increasing = false;
  }
  report.verdicts.push_back({"increasing_as_distance_halves_within_2se", 2.0, increasing});
  report.runtime_seconds = timer.seconds();
  return report;
}

// --- Support probe ------------------------------------------------------------------------

// Hit frequency of the product-weak neighborhood: fraction of replicates with
// max over locations of weak_panel_distance(G_x, target_x) < epsilon.
inline DiagnosticsReport support_probe(const ProbeConfig& cfg, const MeasureField& target,
                                       double epsilon) {
  cfg.validate();
  if (!(epsilon >= 0.0)) throw config_error("support_probe: epsilon must be >= 0");
  if (!target.locations || target.locations->size() != cfg.locations->size())
    throw input_error("support_probe: target locations do not match the probe locations");
  for (std::size_t l = 0; l < cfg.locations->size(); ++l) {
    if (!(target.locations->point(l) == cfg.locations->point(l)))
      throw input_error("support_probe: target locations do not match the probe locations");
  }
  for (const auto& m : target.measures) {
    for (const auto& atom : m.atoms) {
      for (Eigen::Index j = 0; j < atom.size(); ++j) {
        if (atom(j) < cfg.panel.theta_lo(j) || atom(j) > cfg.panel.theta_hi(j))
          throw input_error("support_probe: target atom outside the configured Theta box");
      }
    }
  }

  ProbeTimer timer;
  const PathSampler sampler(cfg.variant, cfg.stick, cfg.atoms, cfg.locations);
  const TestFunctionPanel panel = cfg.panel.build();
  const int n = cfg.replicates;
  const std::size_t n_locs = cfg.locations->size();

  std::vector<double> max_dist(static_cast<std::size_t>(n));
  parallel_replicates(n, cfg.threads, [&](int r) {
    StreamKey key{cfg.seed, stream_context::kSupportProbe, static_cast<std::uint64_t>(r)};
    const MeasureField path = sampler.sample(key);
    double worst = 0.0;
    for (std::size_t l = 0; l < n_locs; ++l) {
      worst = std::max(worst,
                       weak_panel_distance(path.measures[l], target.measures[l], panel));
    }
    max_dist[static_cast<std::size_t>(r)] = worst;
  });

  std::size_t hits = 0;
  double smallest = std::numeric_limits<double>::infinity();
  for (double d : max_dist) {
    if (d < epsilon) ++hits;
    smallest = std::min(smallest, d);
  }
  const BinomialCI ci = clopper_pearson(hits, static_cast<std::size_t>(n));
  const double freq = static_cast<double>(hits) / static_cast<double>(n);

  DiagnosticsReport report;
  report.probe = "support";
  report.config_digest = probe_config_digest(cfg);
  report.seed = cfg.seed;
  report.rows.push_back({"hit_frequency", freq,
                         std::sqrt(freq * (1.0 - freq) / static_cast<double>(n)),
                         static_cast<std::size_t>(n)});
  report.rows.push_back({"hits", static_cast<double>(hits), 0.0, static_cast<std::size_t>(n)});
  report.rows.push_back({"ci_lower", ci.lower, 0.0, static_cast<std::size_t>(n)});
  report.rows.push_back({"ci_upper", ci.upper, 0.0, static_cast<std::size_t>(n)});
  report.rows.push_back({"min_observed_distance", smallest, 0.0, static_cast<std::size_t>(n)});
  if (hits == 0) {
    report.inconclusive = true;
    report.note = "no replicate entered the epsilon neighborhood; smallest observed distance " +
                  format_double(smallest);
  } else {
    report.verdicts.push_back({"support_evidence_ci_lower_positive", epsilon, ci.lower > 0.0});
  }
  report.runtime_seconds = timer.seconds();
  return report;
}

// --- KL support probe ----------------------------------------------------------------------

// Target conditional density field on a (gamma, location) grid.
struct DensityField {
  std::vector<double> gammas;
  QuadGrid grid;
  LocationSetPtr locations;
  std::vector<std::vector<Eigen::VectorXd>> values;  // [gamma][location]
};

inline DensityField make_density_field(const MeasureField& path, const MixtureKernelSpec& kernel,
                                       const std::vector<double>& gammas, const QuadGrid& grid) {
  DensityField out;
  out.gammas = gammas;
  out.grid = grid;
  out.locations = path.locations;
  out.values.resize(gammas.size());
  for (std::size_t g = 0; g < gammas.size(); ++g) {
    out.values[g].reserve(path.measures.size());
    for (const auto& m : path.measures)
      out.values[g].push_back(mixture_density(m, kernel, gammas[g], grid));
  }
  return out;
}

inline std::vector<double> default_decay_shells(const MixtureKernelSpec& kernel) {
  if (kernel.family == MixtureFamily::gaussian_loc) {
    const double hw = 0.5 * (kernel.y_hi - kernel.y_lo);
    return {hw, 2.0 * hw, 4.0 * hw, 8.0 * hw};
  }
  std::vector<double> shells{2.0, 4.0, 8.0};
  shells.push_back(std::max(16.0, kernel.beta_max));
  return shells;
}

// Hit frequency of sup over the (gamma, x) grid of KL(q0 || rho^G) < epsilon.
// Refuses to run when the kernel fails the decay condition that the KL
// neighborhood argument relies on.
inline DiagnosticsReport kl_support_probe(const ProbeConfig& cfg, const MixtureKernelSpec& kernel,
                                          const DensityField& target, double epsilon,
                                          double decay_epsilon = 0.01) {
  cfg.validate();
  if (!(epsilon > 0.0)) throw config_error("kl_support_probe: epsilon must be > 0");
  if (target.gammas.empty()) throw config_error("kl_support_probe: empty gamma grid");
  if (!target.locations || target.locations->size() != cfg.locations->size())
    throw input_error("kl_support_probe: target locations do not match the probe locations");
  for (const auto& per_gamma : target.values) {
    for (const auto& q : per_gamma) {
      if ((q.array() <= 0.0).any())
        throw support_error("kl_support_probe: target density must be strictly positive "
                            "on the grid");
    }
  }
  const double y_mid = 0.5 * (kernel.y_lo + kernel.y_hi);
  const DecayReport decay = check_decay_condition(kernel, y_mid, target.gammas.front(),
                                                  decay_epsilon, default_decay_shells(kernel));
  if (!decay.passed) {
    throw probe_error(std::string("kl_support_probe: kernel family ") +
                      family_name(kernel.family) +
                      " fails the decay-at-infinity condition the KL neighborhood probe "
                      "relies on; refusing to run");
  }

  ProbeTimer timer;
  const PathSampler sampler(cfg.variant, cfg.stick, cfg.atoms, cfg.locations);
  const int n = cfg.replicates;
  const std::size_t n_locs = cfg.locations->size();

  std::vector<double> sup_kl(static_cast<std::size_t>(n));
  parallel_replicates(n, cfg.threads, [&](int r) {
    StreamKey key{cfg.seed, stream_context::kKlSupportProbe, static_cast<std::uint64_t>(r)};
    const MeasureField path = sampler.sample(key);
    double worst = 0.0;
    for (std::size_t g = 0; g < target.gammas.size(); ++g) {
      for (std::size_t l = 0; l < n_locs; ++l) {
        const Eigen::VectorXd rho =
            mixture_density(path.measures[l], kernel, target.gammas[g], target.grid);
        worst = std::max(worst, kl_divergence(target.values[g][l], rho, target.grid));
      }
    }
    sup_kl[static_cast<std::size_t>(r)] = worst;
  });

  std::size_t hits = 0;
  for (double v : sup_kl) {
    if (v < epsilon) ++hits;
  }
  std::vector<double> sorted = sup_kl;
  std::sort(sorted.begin(), sorted.end());
  const BinomialCI ci = clopper_pearson(hits, static_cast<std::size_t>(n));
  const double freq = static_cast<double>(hits) / static_cast<double>(n);

  DiagnosticsReport report;
  report.probe = "kl_support";
  report.config_digest = probe_config_digest(cfg);
  report.seed = cfg.seed;
  report.rows.push_back({"hit_frequency", freq,
                         std::sqrt(freq * (1.0 - freq) / static_cast<double>(n)),
                         static_cast<std::size_t>(n)});
  report.rows.push_back({"hits", static_cast<double>(hits), 0.0, static_cast<std::size_t>(n)});
  report.rows.push_back({"ci_lower", ci.lower, 0.0, static_cast<std::size_t>(n)});
  report.rows.push_back({"ci_upper", ci.upper, 0.0, static_cast<std::size_t>(n)});
  report.rows.push_back({"sup_kl_min", sorted.front(), 0.0, static_cast<std::size_t>(n)});
  report.rows.push_back(
      {"sup_kl_median", sorted[sorted.size() / 2], 0.0, static_cast<std::size_t>(n)});
  report.rows.push_back({"sup_kl_max", sorted.back(), 0.0, static_cast<std::size_t>(n)});
  if (hits == 0) {
    report.inconclusive = true;
    report.note = "no replicate entered the KL neighborhood; smallest sup-KL " +
                  format_double(sorted.front());
  } else {
    report.verdicts.push_back({"kl_support_evidence_ci_lower_positive", epsilon, ci.lower > 0.0});
  }
  report.runtime_seconds = timer.seconds();
  return report;
}

// --- Mixture TV modulus probe -----------------------------------------------------------------

// E[L1 distance] between mixed densities along an x ladder at gamma0 and a
// gamma ladder at x0. The L1 grid distance is the TV analogue for densities;
// it keeps falling for the DDP even though the mixing-measure TV sits at 2,
// which is the regularizing contrast.
inline DiagnosticsReport mixture_tv_modulus_probe(const ProbeConfig& cfg,
                                                  const MixtureKernelSpec& kernel, double gamma0,
                                                  const std::vector<double>& gamma_offsets,
                                                  const QuadGrid& grid) {
  cfg.validate();
  if (cfg.ladder.distances.empty())
    throw config_error("mixture_tv_modulus_probe: ladder required");
  for (std::size_t i = 1; i < gamma_offsets.size(); ++i) {
    if (!(gamma_offsets[i] < gamma_offsets[i - 1]))
      throw config_error("mixture_tv_modulus_probe: gamma offsets must be strictly decreasing");
  }
  const double y_mid = 0.5 * (kernel.y_lo + kernel.y_hi);
  const DecayReport decay =
      check_decay_condition(kernel, y_mid, gamma0, 0.01, default_decay_shells(kernel));
  if (!decay.passed)
    throw probe_error("mixture_tv_modulus_probe: kernel fails the decay check");

  ProbeTimer timer;
  const auto ladder = probe_detail::build_ladder_locations(cfg.locations->domain(), cfg.ladder);
  const PathSampler sampler(cfg.variant, cfg.stick, cfg.atoms, ladder.set);
  const int n = cfg.replicates;
  const std::size_t x_steps = cfg.ladder.distances.size();
  const std::size_t g_steps = gamma_offsets.size();

  std::vector<std::vector<double>> x_dist(x_steps,
                                          std::vector<double>(static_cast<std::size_t>(n)));
  std::vector<std::vector<double>> g_dist(g_steps,
                                          std::vector<double>(static_cast<std::size_t>(n)));
  parallel_replicates(n, cfg.threads, [&](int r) {
    StreamKey key{cfg.seed, stream_context::kMixtureTvProbe, static_cast<std::uint64_t>(r)};
    const MeasureField path = sampler.sample(key);
    const Eigen::VectorXd base = mixture_density(path.measures[0], kernel, gamma0, grid);
    for (std::size_t k = 0; k < x_steps; ++k) {
      const std::size_t idx = ladder.index_of_distance[k];
      x_dist[k][static_cast<std::size_t>(r)] =
          idx == 0 ? 0.0
                   : l1_distance(mixture_density(path.measures[idx], kernel, gamma0, grid), base,
                                 grid);
    }
    for (std::size_t k = 0; k < g_steps; ++k) {
      const double gamma = gamma0 + gamma_offsets[k];
      g_dist[k][static_cast<std::size_t>(r)] =
          gamma == gamma0
              ? 0.0
              : l1_distance(mixture_density(path.measures[0], kernel, gamma, grid), base, grid);
    }
  });

  DiagnosticsReport report;
  report.probe = "mixture_tv_modulus";
  report.config_digest = probe_config_digest(cfg);
  report.seed = cfg.seed;
  std::vector<MeanStderr> by_x;
  for (std::size_t k = 0; k < x_steps; ++k) {
    const MeanStderr ms = mean_stderr(x_dist[k]);
    by_x.push_back(ms);
    report.rows.push_back({"l1[d=" + format_double(cfg.ladder.distances[k]) + "]", ms.mean,
                           ms.stderr_of_mean, ms.n});
  }
  probe_detail::append_monotone_verdict(report, by_x, "x_ladder_decreasing_within_2se");
  if (!gamma_offsets.empty()) {
    std::vector<MeanStderr> by_g;
    for (std::size_t k = 0; k < g_steps; ++k) {
      const MeanStderr ms = mean_stderr(g_dist[k]);
      by_g.push_back(ms);
      report.rows.push_back({"l1[gamma_off=" + format_double(gamma_offsets[k]) + "]", ms.mean,
                             ms.stderr_of_mean, ms.n});
    }
    probe_detail::append_monotone_verdict(report, by_g, "gamma_ladder_decreasing_within_2se");
  }
  report.runtime_seconds = timer.seconds();
  return report;
}

}  // namespace dsb
