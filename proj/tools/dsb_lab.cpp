#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "dsb/config.hpp"
#include "dsb/runner.hpp"
#include "dsb/version.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw dsb::config_error("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct CommonOpts {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_given = false;
  bool quiet = false;
  int threads = -1;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
  cmd->add_option("--config", opts.config_path, "run configuration file")->required();
  cmd->add_option("--out", opts.out_dir, "output directory (overrides [output] dir)");
  cmd->add_option("--seed", opts.seed, "seed override")->each([&](const std::string&) {
    opts.seed_given = true;
  });
  cmd->add_flag("--quiet", opts.quiet, "suppress the text summary");
  cmd->add_option("--threads", opts.threads, "worker cap (DSB_LAB_THREADS as fallback)");
}

int run_command(const std::string& command, const CommonOpts& opts) {
  dsb::RunConfig cfg = dsb::parse_config(read_file(opts.config_path));
  if (opts.seed_given) cfg.seed = opts.seed;
  if (opts.threads >= 0) {
    cfg.threads = opts.threads;
  } else if (cfg.threads == 0) {
    if (const char* env = std::getenv("DSB_LAB_THREADS")) {
      try {
        cfg.threads = std::stoi(env);
      } catch (...) {
        throw dsb::config_error("DSB_LAB_THREADS: expected an integer");
      }
    }
  }
  const std::filesystem::path out = opts.out_dir.empty() ? cfg.output.dir : opts.out_dir;
  const dsb::RunManifest manifest = dsb::execute_run(cfg, command, out, opts.quiet);
  return manifest.exit_status;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string(dsb::kProjectName) +
               " - dependent Dirichlet process simulation and property probes"};
  app.set_version_flag("--version", dsb::kVersion);
  app.require_subcommand(1);

  CommonOpts simulate_opts, probe_opts, mixture_opts, decay_opts;
  CLI::App* simulate = app.add_subcommand("simulate", "sample one truncated path and dump it");
  add_common(simulate, simulate_opts);
  CLI::App* probe = app.add_subcommand("probe", "run Monte Carlo property probes");
  add_common(probe, probe_opts);
  CLI::App* mixture = app.add_subcommand("mixture", "evaluate induced mixture densities");
  add_common(mixture, mixture_opts);
  CLI::App* decay = app.add_subcommand("decay-check", "check the kernel decay condition");
  add_common(decay, decay_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) return run_command("simulate", simulate_opts);
    if (probe->parsed()) return run_command("probe", probe_opts);
    if (mixture->parsed()) return run_command("mixture", mixture_opts);
    if (decay->parsed()) return run_command("decay-check", decay_opts);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
