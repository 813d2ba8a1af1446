#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dsb/config.hpp"
#include "dsb/diagnostics.hpp"
#include "dsb/errors.hpp"
#include "dsb/io.hpp"
#include "dsb/version.hpp"

namespace dsb {

struct RunManifest {
  std::string command;
  std::string config_digest;
  std::vector<std::string> artifacts;
  std::vector<Verdict> verdicts;
  std::vector<std::string> inconclusive_probes;
  double runtime_seconds = 0.0;
  int exit_status = 0;
};

namespace runner_detail {

inline nlohmann::json verdicts_json(const std::vector<Verdict>& verdicts) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& v : verdicts) {
    arr.push_back({{"check", v.check}, {"tolerance", v.tolerance}, {"pass", v.pass}});
  }
  return arr;
}

// Probe report artifact; runtime lives in the manifest only so reruns stay
// byte-identical.
inline std::string report_json(const DiagnosticsReport& report) {
  nlohmann::json j;
  j["probe"] = report.probe;
  j["config_digest"] = report.config_digest;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    rows.push_back(
        {{"label", r.label}, {"estimate", r.estimate}, {"stderr", r.stderr_of_estimate},
         {"n", r.n}});
  }
  j["rows"] = rows;
  j["verdicts"] = verdicts_json(report.verdicts);
  j["seed"] = report.seed;
  j["inconclusive"] = report.inconclusive;
  if (!report.note.empty()) j["note"] = report.note;
  return j.dump(2) + "\n";
}

inline std::string report_csv(const DiagnosticsReport& report) {
  std::string out = csv_row({"probe", "label", "estimate", "stderr", "n"});
  for (const auto& r : report.rows) {
    out += csv_row({report.probe, r.label, format_double(r.estimate),
                    format_double(r.stderr_of_estimate), std::to_string(r.n)});
  }
  return out;
}

inline std::string report_text(const DiagnosticsReport& report) {
  std::ostringstream os;
  os << "probe " << report.probe << " (seed " << report.seed << ", digest "
     << report.config_digest << ")\n";
  for (const auto& r : report.rows) {
    os << "  " << r.label << " = " << format_double(r.estimate) << " +/- "
       << format_double(r.stderr_of_estimate) << "  (n=" << r.n << ")\n";
  }
  for (const auto& v : report.verdicts) {
    os << "  [" << (v.pass ? "PASS" : "FAIL") << "] " << v.check
       << " (tolerance " << format_double(v.tolerance) << ")\n";
  }
  if (report.inconclusive) os << "  [INCONCLUSIVE] " << report.note << "\n";
  os << "  runtime " << format_double(report.runtime_seconds) << " s\n";
  return os.str();
}

inline bool wants(const RunConfig& cfg, const std::string& format) {
  for (const auto& f : cfg.output.formats) {
    if (f == format) return true;
  }
  return false;
}

}  // namespace runner_detail

// Shared location grid + sampler for the configured process.
inline PathSampler make_path_sampler(const RunConfig& cfg, Variant variant) {
  return PathSampler(variant, make_stick_spec(cfg.process), make_atom_spec(cfg.atoms, variant),
                     make_locations(cfg.space));
}

// Runs one probe by name against the run configuration.
inline DiagnosticsReport run_one_probe(const RunConfig& cfg, const std::string& name) {
  if (name == "marginal") {
    return marginal_beta_probe(make_probe_config(cfg, cfg.process.variant), cfg.probe.level);
  }
  if (name == "continuity") {
    return continuity_modulus_probe(make_probe_config(cfg, cfg.process.variant),
                                    cfg.probe.final_fraction);
  }
  if (name == "tv_contrast") {
    std::vector<ProbeConfig> cfgs;
    cfgs.push_back(make_probe_config(cfg, Variant::thetaDDP));
    cfgs.push_back(make_probe_config(cfg, Variant::DDP));
    cfgs.push_back(make_probe_config(cfg, Variant::wDDP));
    return tv_contrast_probe(cfgs, cfg.probe.tv_upper, cfg.probe.tv_lower);
  }
  if (name == "association") {
    ProbeConfig pc = make_probe_config(cfg, cfg.process.variant);
    std::vector<double> distances;
    if (cfg.probe.far > 0.0) distances.push_back(cfg.probe.far);
    for (double d : cfg.space.ladder) {
      if (cfg.probe.far > 0.0 && !(d < cfg.probe.far))
        throw config_error("[probe] far: must exceed every ladder distance");
      distances.push_back(d);
    }
    distances.push_back(0.0);
    pc.ladder.distances = std::move(distances);
    ThetaBox box;
    const auto broadcast = [&](const std::vector<double>& v) {
      Eigen::VectorXd out(cfg.atoms.dim);
      if (v.size() == 1) {
        out.setConstant(v[0]);
      } else if (static_cast<int>(v.size()) == cfg.atoms.dim) {
        for (int i = 0; i < cfg.atoms.dim; ++i) out(i) = v[static_cast<std::size_t>(i)];
      } else {
        throw config_error("[probe] b_lo/b_hi: expected 1 or " + std::to_string(cfg.atoms.dim) +
                           " entries");
      }
      return out;
    };
    box.lo = broadcast(cfg.probe.b_lo);
    box.hi = broadcast(cfg.probe.b_hi);
    return association_probe(pc, box);
  }
  if (name == "support") {
    ProbeConfig pc = make_probe_config(cfg, cfg.process.variant);
    const PathSampler sampler = make_path_sampler(cfg, cfg.process.variant);
    const MeasureField target =
        sampler.sample(StreamKey{cfg.seed, stream_context::kTargetFreeze, 0});
    return support_probe(pc, target, cfg.probe.epsilon);
  }
  if (name == "kl_support") {
    ProbeConfig pc = make_probe_config(cfg, cfg.process.variant);
    const MixtureKernelSpec kernel = make_mixture_kernel(cfg.mixture);
    const QuadGrid grid = QuadGrid::uniform(cfg.mixture.y_lo, cfg.mixture.y_hi,
                                            cfg.mixture.y_nodes);
    const PathSampler sampler = make_path_sampler(cfg, cfg.process.variant);
    const MeasureField target =
        sampler.sample(StreamKey{cfg.seed, stream_context::kTargetFreeze, 0});
    const DensityField field = make_density_field(target, kernel, cfg.mixture.gamma, grid);
    return kl_support_probe(pc, kernel, field, cfg.probe.kl_epsilon, cfg.mixture.epsilon);
  }
  if (name == "mixture_tv") {
    ProbeConfig pc = make_probe_config(cfg, cfg.process.variant);
    const MixtureKernelSpec kernel = make_mixture_kernel(cfg.mixture);
    const QuadGrid grid = QuadGrid::uniform(cfg.mixture.y_lo, cfg.mixture.y_hi,
                                            cfg.mixture.y_nodes);
    return mixture_tv_modulus_probe(pc, kernel, cfg.mixture.gamma0, cfg.probe.gamma_offsets,
                                    grid);
  }
  throw config_error("unknown probe '" + name + "'");
}

inline std::string densities_csv(const RunConfig& cfg) {
  const MixtureKernelSpec kernel = make_mixture_kernel(cfg.mixture);
  const QuadGrid grid =
      QuadGrid::uniform(cfg.mixture.y_lo, cfg.mixture.y_hi, cfg.mixture.y_nodes);
  const PathSampler sampler = make_path_sampler(cfg, cfg.process.variant);
  const MeasureField path = sampler.sample(StreamKey{cfg.seed, stream_context::kSimulate, 0});
  std::string out = csv_row({"y", "gamma", "loc_index", "density"});
  for (double gamma : cfg.mixture.gamma) {
    for (std::size_t l = 0; l < path.measures.size(); ++l) {
      const Eigen::VectorXd rho = mixture_density(path.measures[l], kernel, gamma, grid);
      for (int i = 0; i < grid.size(); ++i) {
        out += csv_row({format_double(grid.nodes(i)), format_double(gamma), std::to_string(l),
                        format_double(rho(i))});
      }
    }
  }
  return out;
}

// Executes a command against a parsed configuration, writing artifacts and a
// manifest under out_dir. Returns the process exit status: 0 when every
// verdict passed (or the command carries none); inconclusive probes do not
// fail the run.
inline RunManifest execute_run(const RunConfig& cfg, const std::string& command,
                               const std::filesystem::path& out_dir, bool quiet = false) {
  validate_for_command(cfg, command);
  const auto start = std::chrono::steady_clock::now();
  std::filesystem::create_directories(out_dir);

  RunManifest manifest;
  manifest.command = command;
  manifest.config_digest = config_digest(cfg, command);

  auto emit = [&](const std::string& name, const std::string& content) {
    write_file_atomic(out_dir / name, content);
    manifest.artifacts.push_back(name);
  };

  if (command == "simulate") {
    const PathSampler sampler = make_path_sampler(cfg, cfg.process.variant);
    const MeasureField path = sampler.sample(StreamKey{cfg.seed, stream_context::kSimulate, 0});
    if (runner_detail::wants(cfg, "csv")) emit("path.csv", measure_field_table(path));
    if (!quiet) {
      std::cout << "simulate: wrote truncated path (" << path.measures.size() << " locations, "
                << (path.measures.empty() ? 0 : path.measures.front().size())
                << " atoms); weights renormalized, raw tail mass max "
                << format_double(path.tail_record.maxCoeff()) << "\n";
    }
  } else if (command == "mixture") {
    if (runner_detail::wants(cfg, "csv")) emit("densities.csv", densities_csv(cfg));
    if (!quiet) std::cout << "mixture: wrote density field\n";
  } else if (command == "decay-check") {
    const MixtureKernelSpec kernel = make_mixture_kernel(cfg.mixture);
    const std::vector<double> shells =
        cfg.mixture.shells.empty() ? default_decay_shells(kernel) : cfg.mixture.shells;
    const DecayReport report = check_decay_condition(kernel, cfg.mixture.y0, cfg.mixture.gamma0,
                                                     cfg.mixture.epsilon, shells);
    nlohmann::json j;
    j["family"] = report.family;
    j["epsilon"] = report.epsilon;
    j["passed"] = report.passed;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : report.rows) {
      rows.push_back({{"radius", row.radius},
                      {"sup", row.sup},
                      {"complement_empty", row.complement_empty}});
    }
    j["rows"] = rows;
    if (runner_detail::wants(cfg, "json")) emit("decay_report.json", j.dump(2) + "\n");
    if (runner_detail::wants(cfg, "csv")) {
      std::string csv = csv_row({"radius", "sup", "complement_empty"});
      for (const auto& row : report.rows) {
        csv += csv_row({format_double(row.radius), format_double(row.sup),
                        row.complement_empty ? "true" : "false"});
      }
      emit("decay_rows.csv", csv);
    }
    manifest.verdicts.push_back({"decay_condition", report.epsilon, report.passed});
    if (!quiet) {
      std::cout << "decay-check " << report.family << ": "
                << (report.passed ? "PASS" : "FAIL") << "\n";
      for (const auto& row : report.rows) {
        std::cout << "  shell radius " << format_double(row.radius) << ": sup psi = "
                  << format_double(row.sup) << (row.complement_empty ? " (complement empty)" : "")
                  << "\n";
      }
    }
  } else if (command == "probe") {
    for (const auto& name : cfg.probe.which) {
      const DiagnosticsReport report = run_one_probe(cfg, name);
      if (runner_detail::wants(cfg, "json"))
        emit(name + "_report.json", runner_detail::report_json(report));
      if (runner_detail::wants(cfg, "csv"))
        emit(name + "_rows.csv", runner_detail::report_csv(report));
      for (const auto& v : report.verdicts)
        manifest.verdicts.push_back({name + ":" + v.check, v.tolerance, v.pass});
      if (report.inconclusive) manifest.inconclusive_probes.push_back(name);
      if (!quiet) std::cout << runner_detail::report_text(report);
    }
  } else {
    throw config_error("unknown command '" + command + "'");
  }

  manifest.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  bool all_pass = true;
  for (const auto& v : manifest.verdicts) all_pass = all_pass && v.pass;
  manifest.exit_status = all_pass ? 0 : 1;

  nlohmann::json mj;
  mj["command"] = manifest.command;
  mj["config_digest"] = manifest.config_digest;
  mj["artifacts"] = manifest.artifacts;
  mj["versions"] = {{kProjectName, kVersion}};
  mj["runtime_seconds"] = manifest.runtime_seconds;
  mj["verdicts"] = runner_detail::verdicts_json(manifest.verdicts);
  mj["inconclusive"] = manifest.inconclusive_probes;
  mj["exit_status"] = manifest.exit_status;
  write_file_atomic(out_dir / "manifest.json", mj.dump(2) + "\n");

  if (!quiet) {
    std::cout << "manifest: digest " << manifest.config_digest << ", exit "
              << manifest.exit_status << "\n";
  }
  return manifest;
}

}  // namespace dsb
