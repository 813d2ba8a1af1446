#include <cmath>

#include <catch2/catch_amalgamated.hpp>

#include "dsb/ddp_core.hpp"
#include "dsb/io.hpp"

using namespace dsb;

namespace {

Eigen::VectorXd theta1(double v) {
  Eigen::VectorXd t(1);
  t << v;
  return t;
}

DiscreteMeasure dirac(double v) {
  return DiscreteMeasure({theta1(v)}, Eigen::VectorXd::Ones(1));
}

DiscreteMeasure two_atoms(double a, double b, double wa, double wb) {
  Eigen::VectorXd w(2);
  w << wa, wb;
  return DiscreteMeasure({theta1(a), theta1(b)}, w);
}

StickSpec unit_stick_spec() {
  StickSpec s;
  s.alpha = AlphaField::constant(1.0);
  s.kernel = CovKernelSpec(1.0, 1.0, 0.0);
  s.truncation = Truncation::sticks(20);
  return s;
}

AtomSpec field_atom_spec() {
  return AtomSpec(1, {Marginal::normal(0.0, 1.0)}, CovKernelSpec(1.0, 1.0, 0.0),
                  AtomVariant::field);
}

AtomSpec iid_atom_spec() {
  return AtomSpec(1, {Marginal::normal(0.0, 1.0)}, CovKernelSpec(1.0, 1.0, 0.0),
                  AtomVariant::iid);
}

}  // namespace

TEST_CASE("discrete measure invariants") {
  CHECK_THROWS_AS(two_atoms(0.0, 1.0, 0.6, 0.6), input_error);
  CHECK_THROWS_AS(two_atoms(0.0, 1.0, 1.2, -0.2), input_error);
  const DiscreteMeasure m = two_atoms(0.0, 1.0, 0.25, 0.75);
  CHECK(m.size() == 2);
  CHECK(m.box_mass(theta1(-0.5), theta1(0.5)) == 0.25);
}

TEST_CASE("assemble: single degenerate stick gives a Dirac path") {
  Eigen::MatrixXd v(1, 2);
  v << 1.0, 1.0;
  const TruncatedWeights w = stick_weights(v);
  const AtomField atoms = sample_iid_atoms(iid_atom_spec(), 1, 2, StreamKey{1, 1, 1});
  const auto locs = build_grid_ptr(Box::interval(0.0, 1.0), {2});
  const MeasureField field = assemble_path(w, atoms, Variant::thetaDDP, locs);
  for (const auto& m : field.measures) {
    REQUIRE(m.size() == 1);
    CHECK(m.weights(0) == 1.0);
  }
  CHECK(field.tail_record(0) == 0.0);
}

TEST_CASE("assemble: renormalization arithmetic") {
  Eigen::MatrixXd v(3, 1);
  v << 0.5, 0.5, 0.5;
  const TruncatedWeights w = stick_weights(v);
  const AtomField atoms = sample_iid_atoms(iid_atom_spec(), 3, 1, StreamKey{2, 2, 2});
  const auto locs = build_grid_ptr(Box::interval(0.0, 1.0), {1});
  const MeasureField field = assemble_path(w, atoms, Variant::thetaDDP, locs);
  CHECK(field.measures[0].weights(0) == Catch::Approx(4.0 / 7.0).epsilon(1e-12));
  CHECK(field.measures[0].weights(1) == Catch::Approx(2.0 / 7.0).epsilon(1e-12));
  CHECK(field.measures[0].weights(2) == Catch::Approx(1.0 / 7.0).epsilon(1e-12));
  CHECK(field.tail_record(0) == 0.125);
}

TEST_CASE("assemble: thetaDDP keeps one atom list across locations") {
  const auto locs = build_grid_ptr(Box::interval(0.0, 1.0), {3});
  const PathSampler sampler(Variant::thetaDDP, unit_stick_spec(), iid_atom_spec(), locs);
  const MeasureField field = sampler.sample(StreamKey{5, 5, 5});
  for (std::size_t l = 1; l < field.measures.size(); ++l) {
    for (std::size_t i = 0; i < field.measures[0].size(); ++i)
      CHECK(field.measures[l].atoms[i](0) == field.measures[0].atoms[i](0));
  }
}

TEST_CASE("assemble rejects structure mismatches") {
  Eigen::MatrixXd v(2, 2);
  v << 0.5, 0.4, 0.5, 0.5;  // weights differ across locations
  const TruncatedWeights w = stick_weights(v);
  const AtomField field_atoms = [&] {
    const auto locs = build_grid_ptr(Box::interval(0.0, 1.0), {2});
    const GaussianSampler g(CovKernelSpec(1.0, 1.0, 0.0), locs);
    return sample_atom_field(field_atom_spec(), g, 2, StreamKey{3, 3, 3});
  }();
  const auto locs = build_grid_ptr(Box::interval(0.0, 1.0), {2});
  CHECK_THROWS_AS(assemble_path(w, field_atoms, Variant::wDDP, locs), input_error);
  CHECK_THROWS_AS(assemble_path(w, field_atoms, Variant::thetaDDP, locs), input_error);
}

TEST_CASE("integrate basics") {
  const DiscreteMeasure m = two_atoms(0.0, 1.0, 0.5, 0.5);
  CHECK(integrate(m, make_constant(1.0)) == 1.0);
  CHECK(integrate(dirac(0.3), make_cosine(0, 1)) == std::cos(0.3));
  // weights {0.5, 0.5} on f-values {0, 1} average to 0.5
  PanelFunction step = make_bump(theta1(1.0), 1e-3);
  CHECK(integrate(m, step) == Catch::Approx(0.5).margin(1e-12));
}

TEST_CASE("tv_distance merged-atom arithmetic") {
  const DiscreteMeasure m = two_atoms(0.0, 1.0, 0.6, 0.4);
  CHECK(tv_distance(m, m) == 0.0);
  CHECK(tv_distance(dirac(0.0), dirac(1.0)) == 2.0);
  CHECK(tv_distance(m, two_atoms(0.0, 1.0, 0.5, 0.5)) == Catch::Approx(0.2).epsilon(1e-12));
}

TEST_CASE("tv_distance metric properties on shared atom sets") {
  RngStream stream(314);
  for (int rep = 0; rep < 100; ++rep) {
    auto random_measure = [&](int atoms) {
      std::vector<Eigen::VectorXd> a;
      Eigen::VectorXd w(atoms);
      for (int i = 0; i < atoms; ++i) {
        a.push_back(theta1(static_cast<double>(i)));
        w(i) = stream.uniform01() + 1e-3;
      }
      w /= w.sum();
      Eigen::Index imax = 0;
      w.maxCoeff(&imax);
      w(imax) += 1.0 - w.sum();
      return DiscreteMeasure(a, w);
    };
    const DiscreteMeasure p = random_measure(6);
    const DiscreteMeasure q = random_measure(6);
    const DiscreteMeasure r = random_measure(6);
    const double pq = tv_distance(p, q);
    CHECK(pq == tv_distance(q, p));
    CHECK(pq >= 0.0);
    CHECK(pq <= 2.0 + 1e-12);
    CHECK(pq <= tv_distance(p, r) + tv_distance(r, q) + 1e-12);
  }
}

TEST_CASE("weak panel distance bounded by total variation") {
  const auto locs = build_grid_ptr(Box::interval(0.0, 1.0), {2});
  const PathSampler sampler(Variant::DDP, unit_stick_spec(), field_atom_spec(), locs);
  const TestFunctionPanel panel =
      default_panel(Eigen::VectorXd::Constant(1, -3.0), Eigen::VectorXd::Constant(1, 3.0));
  for (int rep = 0; rep < 50; ++rep) {
    const MeasureField f = sampler.sample(StreamKey{40, 4, static_cast<std::uint64_t>(rep)});
    const double wpd = weak_panel_distance(f.measures[0], f.measures[1], panel);
    const double tv = tv_distance(f.measures[0], f.measures[1]);
    CHECK(wpd >= 0.0);
    CHECK(wpd <= tv + 1e-12);
  }
  CHECK(weak_panel_distance(dirac(0.5), dirac(0.5), panel) == 0.0);
}

TEST_CASE("panel blindness: distant Diracs invisible to bumps") {
  // Atoms far outside every bump's support, cosines excluded: the panel sees
  // nothing although TV is 2. Documents the weak-vs-TV gap.
  TestFunctionPanel bumps_only;
  for (int b = 0; b < 5; ++b)
    bumps_only.push_back(make_bump(theta1(-3.0 + 6.0 * b / 4.0), 1.5));
  const DiscreteMeasure a = dirac(500.0);
  const DiscreteMeasure b = dirac(-500.0);
  CHECK(tv_distance(a, b) == 2.0);
  CHECK(weak_panel_distance(a, b, bumps_only) < 1e-12);
}

TEST_CASE("partition weights: hats, coverage and the exact sum") {
  const auto nodes = build_grid(Box::interval(0.0, 1.0), {5});
  // query at a node, all others farther than r
  const std::vector<double> at_node = partition_weights(nodes, 0.2, IndexPoint({0.5}));
  CHECK(at_node[2] == 1.0);
  CHECK(at_node[0] == 0.0);
  // query equidistant between two nodes
  const std::vector<double> mid = partition_weights(nodes, 0.3, IndexPoint({0.125}));
  CHECK(mid[0] == 0.5);
  CHECK(mid[1] == 0.5);
  // exact unit sum at random queries
  RngStream stream(8);
  for (int rep = 0; rep < 1000; ++rep) {
    const double q = stream.uniform01();
    const std::vector<double> w = partition_weights(nodes, 0.26, IndexPoint({q}));
    double sum = 0.0;
    for (double x : w) sum += x;
    CHECK(sum == 1.0);
  }
  CHECK_THROWS_AS(partition_weights(build_grid(Box::interval(0.0, 1.0), {2}), 0.1,
                                    IndexPoint({0.5})),
                  coverage_error);
}

TEST_CASE("interpolate_measure_field reproduces node measures") {
  const auto nodes = build_grid(Box::interval(0.0, 1.0), {3});
  const std::vector<DiscreteMeasure> ms{dirac(0.0), dirac(1.0), dirac(2.0)};
  // single covering node
  const DiscreteMeasure only = interpolate_measure_field(nodes, ms, 0.3, IndexPoint({0.05}));
  REQUIRE(only.size() == 1);
  CHECK(only.atoms[0](0) == 0.0);
  CHECK(only.weights(0) == 1.0);
  // equidistant query mixes equally
  const DiscreteMeasure mix = interpolate_measure_field(nodes, ms, 0.5, IndexPoint({0.25}));
  REQUIRE(mix.size() == 2);
  CHECK(mix.weights(0) == 0.5);
  CHECK(mix.weights(1) == 0.5);
  // query at a node with the rest out of range
  const DiscreteMeasure exact = interpolate_measure_field(nodes, ms, 0.4, IndexPoint({0.5}));
  REQUIRE(exact.size() == 1);
  CHECK(exact.atoms[0](0) == 1.0);
  CHECK(exact.weights(0) == 1.0);
}

TEST_CASE("interpolated box mass is Lipschitz in the query point") {
  const auto nodes = build_grid(Box::interval(0.0, 1.0), {11});  // spacing 0.1
  std::vector<DiscreteMeasure> ms;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const double x = nodes.point(k)[0];
    ms.push_back(two_atoms(0.0, 1.0, 0.2 + 0.6 * x, 0.8 - 0.6 * x));
  }
  const Eigen::VectorXd blo = theta1(-0.5), bhi = theta1(0.5);
  const double radius = 0.15;
  // sweep the query and bound the difference quotient of x -> P-bar_x(B)
  double prev_mass = 0.0;
  const int sweep = 400;
  for (int i = 0; i <= sweep; ++i) {
    const double x = static_cast<double>(i) / sweep;
    const DiscreteMeasure m = interpolate_measure_field(nodes, ms, radius, IndexPoint({x}));
    const double mass = m.box_mass(blo, bhi);
    if (i > 0) {
      const double quotient = std::fabs(mass - prev_mass) / (1.0 / sweep);
      CHECK(quotient < 50.0);  // bounded slope, no jumps
    }
    prev_mass = mass;
  }
}

TEST_CASE("path sampler determinism and variant structure") {
  const auto locs = build_grid_ptr(Box::interval(0.0, 1.0), {3});

  const PathSampler theta(Variant::thetaDDP, unit_stick_spec(), iid_atom_spec(), locs);
  const MeasureField t1 = theta.sample(StreamKey{123, 9, 0});
  const MeasureField t2 = theta.sample(StreamKey{123, 9, 0});
  for (std::size_t l = 0; l < t1.measures.size(); ++l) {
    for (std::size_t i = 0; i < t1.measures[l].size(); ++i) {
      CHECK(t1.measures[l].weights(static_cast<Eigen::Index>(i)) ==
            t2.measures[l].weights(static_cast<Eigen::Index>(i)));
      CHECK(t1.measures[l].atoms[i](0) == t2.measures[l].atoms[i](0));
    }
  }

  const PathSampler wddp(Variant::wDDP, unit_stick_spec(), field_atom_spec(), locs);
  const MeasureField w = wddp.sample(StreamKey{5, 6, 7});
  for (std::size_t l = 1; l < w.measures.size(); ++l) {
    for (std::size_t i = 0; i < w.measures[l].size(); ++i)
      CHECK(w.measures[l].weights(static_cast<Eigen::Index>(i)) ==
            w.measures[0].weights(static_cast<Eigen::Index>(i)));
  }

  // variant/atom-structure mismatches are rejected up front
  CHECK_THROWS_AS(PathSampler(Variant::thetaDDP, unit_stick_spec(), field_atom_spec(), locs),
                  input_error);
  CHECK_THROWS_AS(PathSampler(Variant::DDP, unit_stick_spec(), iid_atom_spec(), locs),
                  input_error);
  StickSpec varying = unit_stick_spec();
  varying.alpha = AlphaField::function([](const IndexPoint& x) { return 1.0 + x[0]; }, 1.0);
  CHECK_THROWS_AS(PathSampler(Variant::wDDP, varying, field_atom_spec(), locs), input_error);
}

TEST_CASE("circle atoms flow through the path sampler") {
  const auto locs = build_grid_ptr(Box::interval(0.0, 1.0), {3});
  const AtomSpec circle_iid(1, {Marginal::normal(0.0, 2.0)}, CovKernelSpec(1.0, 1.0, 0.0),
                            AtomVariant::circle);
  const PathSampler theta(Variant::thetaDDP, unit_stick_spec(), circle_iid, locs);
  const MeasureField t = theta.sample(StreamKey{3, 3, 3});
  for (const auto& m : t.measures) {
    for (const auto& atom : m.atoms) {
      CHECK(atom(0) >= 0.0);
      CHECK(atom(0) < kTwoPi);
    }
  }
  // for thetaDDP the wrapped atoms stay location-constant
  for (std::size_t i = 0; i < t.measures[0].size(); ++i)
    CHECK(t.measures[1].atoms[i](0) == t.measures[0].atoms[i](0));

  const PathSampler ddp(Variant::DDP, unit_stick_spec(), circle_iid, locs);
  const MeasureField d = ddp.sample(StreamKey{4, 4, 4});
  for (const auto& m : d.measures) {
    for (const auto& atom : m.atoms) {
      CHECK(atom(0) >= 0.0);
      CHECK(atom(0) < kTwoPi);
    }
  }
}

TEST_CASE("two-dimensional index space paths") {
  const auto locs = build_grid_ptr(Box({0.0, 0.0}, {1.0, 1.0}), {2, 2});
  const PathSampler sampler(Variant::DDP, unit_stick_spec(), field_atom_spec(), locs);
  const MeasureField field = sampler.sample(StreamKey{6, 6, 6});
  REQUIRE(field.measures.size() == 4);
  for (const auto& m : field.measures)
    CHECK(std::fabs(m.weights.sum() - 1.0) <= kWeightSumTolerance);
  const std::string table = measure_field_table(field);
  CHECK(table.rfind("loc_index,x0,x1,theta0,weight\n", 0) == 0);
}

TEST_CASE("multi-dimensional atoms with a mixed marginal panel") {
  const auto locs = build_grid_ptr(Box::interval(0.0, 1.0), {2});
  const AtomSpec atoms2(2, {Marginal::normal(0.0, 1.0), Marginal::uniform(-1.0, 1.0)},
                        CovKernelSpec(1.0, 1.0, 0.0), AtomVariant::field);
  const PathSampler sampler(Variant::DDP, unit_stick_spec(), atoms2, locs);
  const MeasureField field = sampler.sample(StreamKey{8, 8, 8});
  CHECK(field.measures[0].dim() == 2);
  const TestFunctionPanel panel = default_panel(Eigen::VectorXd::Constant(2, -3.0),
                                                Eigen::VectorXd::Constant(2, 3.0));
  CHECK(panel.size() == 2 * (5 + 2));  // 5 bumps + 2 cosines per coordinate
  const double wpd = weak_panel_distance(field.measures[0], field.measures[1], panel);
  CHECK(wpd >= 0.0);
  CHECK(wpd <= tv_distance(field.measures[0], field.measures[1]) + 1e-12);
  // uniform coordinate stays inside its range
  for (const auto& m : field.measures) {
    for (const auto& atom : m.atoms) {
      CHECK(atom(1) >= -1.0);
      CHECK(atom(1) <= 1.0);
    }
  }
}

TEST_CASE("path dump table format") {
  const auto locs = build_grid_ptr(Box::interval(0.0, 1.0), {2});
  StickSpec spec = unit_stick_spec();
  spec.truncation = Truncation::sticks(2);
  const PathSampler sampler(Variant::thetaDDP, spec, iid_atom_spec(), locs);
  const MeasureField field = sampler.sample(StreamKey{77, 7, 7});
  const std::string table = measure_field_table(field);
  CHECK(table.rfind("loc_index,x0,theta0,weight\n", 0) == 0);
  // one header + one row per (location, atom)
  const auto lines = std::count(table.begin(), table.end(), '\n');
  CHECK(lines == 1 + 2 * 2);
}
