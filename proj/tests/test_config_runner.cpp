#include <filesystem>
#include <fstream>
#include <sstream>

#include <catch2/catch_amalgamated.hpp>

#include "dsb/config.hpp"
#include "dsb/runner.hpp"

using namespace dsb;

namespace {

const char* kMinimalSimulate = R"cfg(
# minimal theta-DDP simulation
[run]
seed = 42
[space]
dim = 1
lo = 0
hi = 1
grid = 5
[process]
variant = thetaDDP
alpha = 1.0
sticks = 50
)cfg";

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::filesystem::path temp_dir(const std::string& tag) {
  const auto dir = std::filesystem::temp_directory_path() / ("dsb_test_" + tag);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("minimal simulate config parses") {
  const RunConfig cfg = parse_config(kMinimalSimulate);
  CHECK(cfg.seed == 42);
  CHECK(cfg.process.variant == Variant::thetaDDP);
  CHECK(cfg.process.sticks == 50);
  CHECK(cfg.space.grid == std::vector<int>{5});
  CHECK_NOTHROW(validate_for_command(cfg, "simulate"));
}

TEST_CASE("alpha zero is rejected citing alpha_min") {
  const std::string text = std::string("[run]\nseed = 1\n[process]\nalpha = 0\n");
  try {
    parse_config(text);
    FAIL("expected config_error");
  } catch (const config_error& e) {
    const std::string what = e.what();
    CHECK(what.find("alpha") != std::string::npos);
    CHECK(what.find("alpha_min") != std::string::npos);
  }
}

TEST_CASE("duplicate section is named") {
  const std::string text = "[run]\nseed = 1\n[run]\nseed = 2\n";
  try {
    parse_config(text);
    FAIL("expected config_error");
  } catch (const config_error& e) {
    CHECK(std::string(e.what()).find("duplicate section [run]") != std::string::npos);
  }
}

TEST_CASE("unknown keys are errors, not warnings") {
  const std::string text = "[run]\nseed = 1\nbanana = 3\n";
  try {
    parse_config(text);
    FAIL("expected config_error");
  } catch (const config_error& e) {
    CHECK(std::string(e.what()).find("unknown key 'banana'") != std::string::npos);
  }
}

TEST_CASE("missing seed is an error") {
  CHECK_THROWS_AS(parse_config("[run]\nthreads = 2\n"), config_error);
}

TEST_CASE("crlf and comments are accepted") {
  const std::string text = "[run]\r\nseed = 7 # lucky\r\n\r\n[space]\r\ndim = 1\r\n";
  const RunConfig cfg = parse_config(text);
  CHECK(cfg.seed == 7);
}

TEST_CASE("list values parse") {
  const std::string text =
      "[run]\nseed = 1\n[space]\ndim = 2\nlo = 0, 0\nhi = 1, 2\ngrid = 3, 4\nx0 = 0, 0\n";
  const RunConfig cfg = parse_config(text);
  CHECK(cfg.space.grid == std::vector<int>{3, 4});
  CHECK(cfg.space.hi == std::vector<double>{1.0, 2.0});
}

TEST_CASE("beta_free rejected in mix pipelines but fine for decay-check") {
  const std::string text =
      "[run]\nseed = 1\n[space]\ndim = 1\n[process]\nvariant = thetaDDP\n"
      "[mixture]\nfamily = beta_free\n[probe]\nwhich = kl_support\n";
  const RunConfig cfg = parse_config(text);
  CHECK_THROWS_AS(validate_for_command(cfg, "probe"), config_error);
  CHECK_NOTHROW(validate_for_command(cfg, "decay-check"));
}

TEST_CASE("simulate run writes the path table and manifest") {
  const RunConfig cfg = parse_config(kMinimalSimulate);
  const auto dir = temp_dir("simulate");
  const RunManifest manifest = execute_run(cfg, "simulate", dir, true);
  CHECK(manifest.exit_status == 0);
  CHECK(std::filesystem::exists(dir / "path.csv"));
  CHECK(std::filesystem::exists(dir / "manifest.json"));
  const std::string table = read_file(dir / "path.csv");
  CHECK(table.rfind("loc_index,x0,theta0,weight\n", 0) == 0);
  // 5 locations x 50 atoms + header
  CHECK(std::count(table.begin(), table.end(), '\n') == 1 + 5 * 50);
  std::filesystem::remove_all(dir);
}

TEST_CASE("identical configs produce byte-identical artifacts") {
  const std::string probe_cfg =
      "[run]\nseed = 9\n[space]\ndim = 1\nlo = 0\nhi = 4\ngrid = 3\nx0 = 0\n"
      "ladder = 1, 0.5, 0.25\n[process]\nvariant = thetaDDP\nsticks = 30\n"
      "[probe]\nwhich = continuity\nn = 200\n";
  const RunConfig cfg = parse_config(probe_cfg);
  const auto dir1 = temp_dir("repro1");
  const auto dir2 = temp_dir("repro2");
  execute_run(cfg, "probe", dir1, true);
  execute_run(cfg, "probe", dir2, true);
  CHECK(read_file(dir1 / "continuity_report.json") == read_file(dir2 / "continuity_report.json"));
  CHECK(read_file(dir1 / "continuity_rows.csv") == read_file(dir2 / "continuity_rows.csv"));
  CHECK_FALSE(read_file(dir1 / "continuity_report.json").empty());
  std::filesystem::remove_all(dir1);
  std::filesystem::remove_all(dir2);
}

TEST_CASE("tv_contrast report carries all three variant columns") {
  const std::string text =
      "[run]\nseed = 12\n[space]\ndim = 1\nlo = 0\nhi = 4\ngrid = 3\nx0 = 0\n"
      "ladder = 1, 0.25\n[process]\nvariant = thetaDDP\nsticks = 30\n"
      "[probe]\nwhich = tv_contrast\nn = 150\n";
  const auto dir = temp_dir("tv_columns");
  execute_run(parse_config(text), "probe", dir, true);
  const std::string json = read_file(dir / "tv_contrast_report.json");
  CHECK(json.find("tv[thetaDDP,d=1]") != std::string::npos);
  CHECK(json.find("tv[DDP,d=1]") != std::string::npos);
  CHECK(json.find("tv[wDDP,d=1]") != std::string::npos);
  std::filesystem::remove_all(dir);
}

TEST_CASE("truncation resolves from target_tail when sticks is absent") {
  const std::string text = "[run]\nseed = 2\n[process]\nalpha = 1.0\n";
  const RunConfig cfg = parse_config(text);
  const StickSpec spec = make_stick_spec(cfg.process);
  CHECK(spec.resolve_sticks() == 20);  // (1/2)^20 < 1e-6 default target

  const std::string with_tail = "[run]\nseed = 2\n[process]\nalpha = 1.0\ntarget_tail = 1e-3\n";
  CHECK(make_stick_spec(parse_config(with_tail).process).resolve_sticks() == 10);

  const std::string with_sticks = "[run]\nseed = 2\n[process]\nsticks = 7\n";
  CHECK(make_stick_spec(parse_config(with_sticks).process).resolve_sticks() == 7);
}

TEST_CASE("config digest tracks semantics, not execution details") {
  RunConfig a = parse_config(kMinimalSimulate);
  RunConfig b = a;
  b.threads = 8;
  b.output.dir = "elsewhere";
  CHECK(config_digest(a, "simulate") == config_digest(b, "simulate"));
  RunConfig c = a;
  c.seed = 43;
  CHECK(config_digest(a, "simulate") != config_digest(c, "simulate"));
  RunConfig d = a;
  d.process.alpha = 2.0;
  CHECK(config_digest(a, "simulate") != config_digest(d, "simulate"));
}

TEST_CASE("decay-check run: gaussian passes, beta_free fails") {
  const std::string good =
      "[run]\nseed = 3\n[mixture]\nfamily = gaussian_loc\ny_lo = -8\ny_hi = 8\n"
      "gamma0 = 1.0\ny0 = 0\nepsilon = 0.01\nshells = 1, 2, 4, 8, 16\n";
  const auto dir = temp_dir("decay");
  const RunManifest pass = execute_run(parse_config(good), "decay-check", dir, true);
  CHECK(pass.exit_status == 0);
  CHECK(std::filesystem::exists(dir / "decay_report.json"));

  const std::string bad =
      "[run]\nseed = 3\n[mixture]\nfamily = beta_free\ny0 = 0.5\nepsilon = 0.01\n"
      "shells = 2, 8, 32, 128\n";
  const RunManifest fail = execute_run(parse_config(bad), "decay-check", dir, true);
  CHECK(fail.exit_status == 1);  // a fail verdict is a valid report, nonzero exit
  std::filesystem::remove_all(dir);
}

TEST_CASE("mixture run writes the density field CSV") {
  const std::string text =
      "[run]\nseed = 5\n[space]\ndim = 1\nlo = 0\nhi = 1\ngrid = 2\n"
      "[process]\nvariant = thetaDDP\nsticks = 20\n"
      "[mixture]\nfamily = gaussian_loc\ngamma = 0.5, 1.0\ny_lo = -8\ny_hi = 8\ny_nodes = 101\n";
  const auto dir = temp_dir("mixture");
  const RunManifest manifest = execute_run(parse_config(text), "mixture", dir, true);
  CHECK(manifest.exit_status == 0);
  const std::string csv = read_file(dir / "densities.csv");
  CHECK(csv.rfind("y,gamma,loc_index,density\n", 0) == 0);
  // header + 2 gammas x 2 locations x 101 nodes
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 2 * 2 * 101);
  std::filesystem::remove_all(dir);
}

TEST_CASE("runner covers every probe name") {
  const std::string text =
      "[run]\nseed = 88\n[space]\ndim = 1\nlo = 0\nhi = 25\ngrid = 3\nx0 = 0\n"
      "ladder = 1, 0.5, 0.25\n[process]\nvariant = thetaDDP\nsticks = 30\n"
      "[atoms]\nmarginal = uniform\na = -2\nb = 2\n"
      "[mixture]\nfamily = gaussian_loc\ngamma = 1.0\ny_lo = -9\ny_hi = 9\ny_nodes = 301\n"
      "gamma0 = 0.5\n"
      "[probe]\nwhich = support, kl_support, mixture_tv\nn = 200\nepsilon = 2.0\n"
      "kl_epsilon = 1e6\ngamma_offsets = 0.4, 0.2\n";
  const auto dir = temp_dir("all_probes");
  const RunManifest m1 = execute_run(parse_config(text), "probe", dir, true);
  CHECK(m1.exit_status == 0);
  CHECK(std::filesystem::exists(dir / "support_report.json"));
  CHECK(std::filesystem::exists(dir / "kl_support_report.json"));
  CHECK(std::filesystem::exists(dir / "mixture_tv_report.json"));

  const std::string assoc =
      "[run]\nseed = 89\n[space]\ndim = 1\nlo = 0\nhi = 25\ngrid = 2\nx0 = 0\n"
      "ladder = 1, 0.5\n[process]\nvariant = DDP\nsticks = 30\n"
      "[probe]\nwhich = association\nn = 300\nb_lo = 0\nb_hi = 1\nfar = 20\n";
  const RunManifest m2 = execute_run(parse_config(assoc), "probe", dir, true);
  CHECK(std::filesystem::exists(dir / "association_report.json"));
  bool exact_unity = false;
  for (const auto& v : m2.verdicts) {
    if (v.check == "association:rho_at_zero_exactly_one") exact_unity = v.pass;
  }
  CHECK(exact_unity);

  const std::string marginal =
      "[run]\nseed = 90\n[space]\ndim = 1\nlo = 0\nhi = 4\ngrid = 3\n"
      "[process]\nvariant = thetaDDP\nsticks = 30\n"
      "[probe]\nwhich = marginal\nn = 1000\n";
  const RunManifest m3 = execute_run(parse_config(marginal), "probe", dir, true);
  CHECK(m3.exit_status == 0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("support probe through the runner can be inconclusive yet exit zero") {
  const std::string text =
      "[run]\nseed = 91\n[space]\ndim = 1\nlo = 0\nhi = 1\ngrid = 2\n"
      "[process]\nvariant = thetaDDP\nsticks = 30\n"
      "[atoms]\nmarginal = uniform\na = -2\nb = 2\n"
      "[probe]\nwhich = support\nn = 150\nepsilon = 1e-9\n";
  const auto dir = temp_dir("inconclusive");
  const RunManifest manifest = execute_run(parse_config(text), "probe", dir, true);
  CHECK(manifest.exit_status == 0);
  REQUIRE(manifest.inconclusive_probes.size() == 1);
  CHECK(manifest.inconclusive_probes[0] == "support");
  std::filesystem::remove_all(dir);
}

TEST_CASE("probe command aggregates verdicts into the exit status") {
  const std::string text =
      "[run]\nseed = 10\n[space]\ndim = 1\nlo = 0\nhi = 4\ngrid = 3\nx0 = 0\n"
      "ladder = 1, 0.5, 0.25, 0.125\n[process]\nvariant = thetaDDP\nsticks = 40\n"
      "[probe]\nwhich = continuity\nn = 400\n";
  const auto dir = temp_dir("verdicts");
  const RunManifest manifest = execute_run(parse_config(text), "probe", dir, true);
  CHECK(manifest.exit_status == 0);
  CHECK_FALSE(manifest.verdicts.empty());
  std::filesystem::remove_all(dir);
}

TEST_CASE("circle atoms and 2-D index space through the config path") {
  const std::string circle =
      "[run]\nseed = 15\n[space]\ndim = 1\nlo = 0\nhi = 1\ngrid = 3\n"
      "[process]\nvariant = DDP\nsticks = 10\n"
      "[atoms]\nmarginal = normal\nmean = 0\nscale = 2\ncircle = true\n";
  const auto dir = temp_dir("circle");
  execute_run(parse_config(circle), "simulate", dir, true);
  {
    std::istringstream table(read_file(dir / "path.csv"));
    std::string line;
    std::getline(table, line);  // header
    while (std::getline(table, line)) {
      const auto first = line.find(',');
      const auto second = line.find(',', first + 1);
      const auto third = line.find(',', second + 1);
      const double theta = std::stod(line.substr(second + 1, third - second - 1));
      CHECK(theta >= 0.0);
      CHECK(theta < 6.2831853071795865);
    }
  }

  const std::string planar =
      "[run]\nseed = 16\n[space]\ndim = 2\nlo = 0, 0\nhi = 1, 2\ngrid = 2, 2\nx0 = 0, 0\n"
      "[process]\nvariant = thetaDDP\nsticks = 10\n";
  execute_run(parse_config(planar), "simulate", dir, true);
  CHECK(read_file(dir / "path.csv").rfind("loc_index,x0,x1,theta0,weight\n", 0) == 0);
  std::filesystem::remove_all(dir);
}

TEST_CASE("csv number formatting uses exponents below 1e-4") {
  // shortest round-trip form: below 1e-4 scientific is always strictly
  // shorter than fixed, so the exponent rule holds; the boundary value
  // itself may print either way
  CHECK(format_double(0.00005) == "5e-05");
  CHECK(format_double(0.00009999) == "9.999e-05");
  CHECK(format_double(0.000123456789) == "0.000123456789");
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(-1.25e-7) == "-1.25e-07");
  CHECK(format_double(2.0) == "2");
}

TEST_CASE("beta_constrained mixture pipeline") {
  const std::string text =
      "[run]\nseed = 14\n[space]\ndim = 1\nlo = 0\nhi = 1\ngrid = 2\n"
      "[process]\nvariant = thetaDDP\nsticks = 20\n"
      "[atoms]\nmarginal = uniform\na = 1\nb = 5\n"
      "[mixture]\nfamily = beta_constrained\ngamma = 2.0\nbeta_max = 5\ny_nodes = 2001\n";
  const auto dir = temp_dir("beta_mix");
  const RunManifest manifest = execute_run(parse_config(text), "mixture", dir, true);
  CHECK(manifest.exit_status == 0);
  // density CSV spans [0,1] and every evaluated density kept its unit mass
  const std::string csv = read_file(dir / "densities.csv");
  CHECK(csv.rfind("y,gamma,loc_index,density\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1 + 1 * 2 * 2001);
  std::filesystem::remove_all(dir);
}
