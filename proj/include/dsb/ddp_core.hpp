#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "dsb/atom_process.hpp"
#include "dsb/errors.hpp"
#include "dsb/index_space.hpp"
#include "dsb/stick_process.hpp"

namespace dsb {

constexpr double kWeightSumTolerance = 1e-12;

// Finitely supported probability measure on Theta.
struct DiscreteMeasure {
  std::vector<Eigen::VectorXd> atoms;
  Eigen::VectorXd weights;

  DiscreteMeasure() = default;
  DiscreteMeasure(std::vector<Eigen::VectorXd> atoms_in, Eigen::VectorXd weights_in)
      : atoms(std::move(atoms_in)), weights(std::move(weights_in)) {
    if (atoms.empty() || static_cast<Eigen::Index>(atoms.size()) != weights.size())
      throw input_error("DiscreteMeasure: atoms/weights size mismatch");
    double sum = 0.0;
    for (Eigen::Index i = 0; i < weights.size(); ++i) {
      if (!(weights(i) >= 0.0)) throw input_error("DiscreteMeasure: negative weight");
      sum += weights(i);
    }
    if (std::fabs(sum - 1.0) > kWeightSumTolerance)
      throw input_error("DiscreteMeasure: weights sum to " + std::to_string(sum) +
                        ", expected 1 within 1e-12");
  }

  std::size_t size() const { return atoms.size(); }
  int dim() const { return atoms.empty() ? 0 : static_cast<int>(atoms.front().size()); }

  // Mass of an axis-aligned box.
  double box_mass(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi) const {
    if (lo.size() != hi.size() || lo.size() != static_cast<Eigen::Index>(dim()))
      throw input_error("box_mass: box dimension does not match the atoms");
    double mass = 0.0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      bool inside = true;
      for (Eigen::Index j = 0; j < lo.size() && inside; ++j) {
        inside = atoms[i](j) >= lo(j) && atoms[i](j) <= hi(j);
      }
      if (inside) mass += weights(static_cast<Eigen::Index>(i));
    }
    return mass;
  }
};

enum class Variant { DDP, wDDP, thetaDDP };

inline const char* variant_name(Variant v) {
  switch (v) {
    case Variant::DDP: return "DDP";
    case Variant::wDDP: return "wDDP";
    case Variant::thetaDDP: return "thetaDDP";
  }
  return "?";
}

// A truncated sample path x -> G_x with the raw pre-renormalization tail
// recorded per location. thetaDDP paths share one atom list across
// locations; wDDP paths share one weight list.
struct MeasureField {
  LocationSetPtr locations;
  std::vector<DiscreteMeasure> measures;
  Variant variant = Variant::thetaDDP;
  Eigen::VectorXd tail_record;
};

// Assembles per-location measures from truncated weights and an atom field.
// Weights are renormalized by 1/(1-tail); the raw tail goes to tail_record.
// The TV perturbation of renormalizing is at most 2*tail/(1-tail).
inline MeasureField assemble_path(const TruncatedWeights& weights, const AtomField& atoms,
                                  Variant variant, LocationSetPtr locations) {
  const int n_sticks = weights.sticks();
  const int n_locs = weights.locations();
  if (atoms.sticks() != n_sticks)
    throw input_error("assemble_path: stick count mismatch between weights and atoms");
  if (atoms.locations() != n_locs)
    throw input_error("assemble_path: location count mismatch between weights and atoms");
  if (!locations || static_cast<int>(locations->size()) != n_locs)
    throw input_error("assemble_path: location set does not match weight columns");

  if (variant == Variant::thetaDDP) {
    for (const auto& plane : atoms.planes()) {
      for (int c = 1; c < n_locs; ++c) {
        if ((plane.col(c).array() != plane.col(0).array()).any())
          throw input_error("assemble_path: thetaDDP requires location-constant atoms");
      }
    }
  }
  if (variant == Variant::wDDP) {
    for (int c = 1; c < n_locs; ++c) {
      if ((weights.weights.col(c).array() != weights.weights.col(0).array()).any())
        throw input_error("assemble_path: wDDP requires location-constant weights");
    }
  }

  MeasureField field;
  field.locations = std::move(locations);
  field.variant = variant;
  field.tail_record = weights.tail;
  field.measures.reserve(static_cast<std::size_t>(n_locs));
  for (int c = 0; c < n_locs; ++c) {
    const double tail = weights.tail(c);
    const double kept = 1.0 - tail;
    if (!(kept > 0.0))
      throw input_error("assemble_path: truncation tail is 1 at location " + std::to_string(c) +
                        " (no mass broken)");
    std::vector<Eigen::VectorXd> atom_list;
    atom_list.reserve(static_cast<std::size_t>(n_sticks));
    Eigen::VectorXd w(n_sticks);
    for (int i = 0; i < n_sticks; ++i) {
      atom_list.push_back(atoms.atom(i, c));
      w(i) = weights.weights(i, c) / kept;
    }
    // Absorb the renormalization residual into the largest weight so the
    // measure invariant holds bitwise-tight.
    const double sum = w.sum();
    Eigen::Index imax = 0;
    w.maxCoeff(&imax);
    w(imax) += 1.0 - sum;
    if (w(imax) < 0.0) w(imax) = 0.0;
    field.measures.emplace_back(std::move(atom_list), std::move(w));
  }
  return field;
}

// --- Test function panel -------------------------------------------------

// Bounded continuous test functions with recorded sup-norm and Lipschitz
// constants; the finite panel stands in for C_b(Theta) in all weak-topology
// probes, which makes it a harness choice rather than a metric.
struct PanelFunction {
  enum class Kind { bump, cosine, constant };
  Kind kind = Kind::bump;
  Eigen::VectorXd center;  // bump
  double width = 1.0;      // bump
  int axis = 0;            // cosine
  int frequency = 1;       // cosine
  double value = 1.0;      // constant
  double sup_bound = 1.0;
  double lipschitz = 1.0;

  double operator()(const Eigen::VectorXd& theta) const {
    switch (kind) {
      case Kind::bump: {
        if (theta.size() != center.size())
          throw input_error("PanelFunction: atom dimension does not match the bump center");
        const double sq = (theta - center).squaredNorm();
        return std::exp(-sq / (width * width));
      }
      case Kind::cosine:
        if (axis < 0 || axis >= theta.size())
          throw input_error("PanelFunction: cosine axis out of range for this atom");
        return std::cos(static_cast<double>(frequency) * theta(axis));
      case Kind::constant:
        return value;
    }
    return 0.0;
  }

  std::string label() const {
    switch (kind) {
      case Kind::bump: {
        std::string s = "bump(";
        for (Eigen::Index i = 0; i < center.size(); ++i) {
          if (i) s += ",";
          s += std::to_string(center(i));
        }
        return s + ";w=" + std::to_string(width) + ")";
      }
      case Kind::cosine:
        return "cos(" + std::to_string(frequency) + "*theta[" + std::to_string(axis) + "])";
      case Kind::constant:
        return "const(" + std::to_string(value) + ")";
    }
    return "?";
  }
};

using TestFunctionPanel = std::vector<PanelFunction>;

inline PanelFunction make_bump(Eigen::VectorXd center, double width) {
  if (!(width > 0.0)) throw input_error("make_bump: width must be > 0");
  PanelFunction f;
  f.kind = PanelFunction::Kind::bump;
  f.center = std::move(center);
  f.width = width;
  f.sup_bound = 1.0;
  // max |grad| of exp(-r^2/w^2) over r is sqrt(2/e)/w.
  f.lipschitz = std::sqrt(2.0 / std::exp(1.0)) / width;
  return f;
}

inline PanelFunction make_cosine(int axis, int frequency) {
  PanelFunction f;
  f.kind = PanelFunction::Kind::cosine;
  f.axis = axis;
  f.frequency = frequency;
  f.sup_bound = 1.0;
  f.lipschitz = static_cast<double>(frequency);
  return f;
}

inline PanelFunction make_constant(double value) {
  if (std::fabs(value) > 1.0)
    throw input_error("make_constant: panel members are bounded by 1");
  PanelFunction f;
  f.kind = PanelFunction::Kind::constant;
  f.value = value;
  f.sup_bound = std::fabs(value);
  f.lipschitz = 0.0;
  return f;
}

// Default panel over a Theta box: per coordinate, 5 bumps with centers evenly
// spaced along that axis (other coordinates at the box midpoint) and width of
// a quarter box side, plus cosines cos(k*theta_j) for k in {1,2}.
inline TestFunctionPanel default_panel(const Eigen::VectorXd& theta_lo,
                                       const Eigen::VectorXd& theta_hi, int bumps_per_axis = 5,
                                       int cosine_max_frequency = 2) {
  if (theta_lo.size() != theta_hi.size() || theta_lo.size() < 1)
    throw input_error("default_panel: bad Theta box");
  for (Eigen::Index j = 0; j < theta_lo.size(); ++j) {
    if (!(theta_lo(j) < theta_hi(j))) throw input_error("default_panel: degenerate Theta box");
  }
  TestFunctionPanel panel;
  const Eigen::VectorXd mid = 0.5 * (theta_lo + theta_hi);
  for (Eigen::Index j = 0; j < theta_lo.size(); ++j) {
    const double side = theta_hi(j) - theta_lo(j);
    const double width = side / 4.0;
    for (int b = 0; b < bumps_per_axis; ++b) {
      Eigen::VectorXd c = mid;
      const double t = bumps_per_axis == 1
                           ? 0.5
                           : static_cast<double>(b) / static_cast<double>(bumps_per_axis - 1);
      c(j) = theta_lo(j) + t * side;
      panel.push_back(make_bump(std::move(c), width));
    }
    for (int k = 1; k <= cosine_max_frequency; ++k)
      panel.push_back(make_cosine(static_cast<int>(j), k));
  }
  return panel;
}

inline double integrate(const DiscreteMeasure& m, const PanelFunction& f) {
  // Constants integrate to their value exactly under any probability measure.
  if (f.kind == PanelFunction::Kind::constant) return f.value;
  double acc = 0.0;
  for (std::size_t i = 0; i < m.atoms.size(); ++i)
    acc += m.weights(static_cast<Eigen::Index>(i)) * f(m.atoms[i]);
  return acc;
}

// --- Distances ------------------------------------------------------------

namespace detail {
// Merged weight table keyed by exact atom coordinates; std::map keeps the
// fold order deterministic.
inline std::map<std::vector<double>, std::pair<double, double>> merge_atoms(
    const DiscreteMeasure& m1, const DiscreteMeasure& m2) {
  std::map<std::vector<double>, std::pair<double, double>> merged;
  for (std::size_t i = 0; i < m1.atoms.size(); ++i) {
    std::vector<double> key(m1.atoms[i].data(), m1.atoms[i].data() + m1.atoms[i].size());
    merged[key].first += m1.weights(static_cast<Eigen::Index>(i));
  }
  for (std::size_t i = 0; i < m2.atoms.size(); ++i) {
    std::vector<double> key(m2.atoms[i].data(), m2.atoms[i].data() + m2.atoms[i].size());
    merged[key].second += m2.weights(static_cast<Eigen::Index>(i));
  }
  return merged;
}
}  // namespace detail

// Total variation distance sum |w1 - w2| over the merged atom set; equals 2
// on disjoint supports. Atoms merge under exact coordinate equality: measures
// sharing an atom field compare correctly, and continuous-law collisions have
// probability zero.
inline double tv_distance(const DiscreteMeasure& m1, const DiscreteMeasure& m2) {
  double acc = 0.0;
  for (const auto& [key, w] : detail::merge_atoms(m1, m2)) acc += std::fabs(w.first - w.second);
  return acc;
}

// Panel surrogate for the weak topology: max_f |int f dm1 - int f dm2|.
// Bounded by tv_distance since every member has sup-norm <= 1.
inline double weak_panel_distance(const DiscreteMeasure& m1, const DiscreteMeasure& m2,
                                  const TestFunctionPanel& panel) {
  if (panel.empty()) throw input_error("weak_panel_distance: empty panel");
  double best = 0.0;
  for (const auto& f : panel) best = std::max(best, std::fabs(integrate(m1, f) - integrate(m2, f)));
  return best;
}

// --- Partition-of-unity interpolant ----------------------------------------

// Normalized hat weights phi_k(x) = max(0, 1 - d(x, x_k)/r) / sum. The last
// positive weight absorbs the normalization residual so the returned weights
// sum to 1 bitwise.
inline std::vector<double> partition_weights(const LocationSet& nodes, double radius,
                                             const IndexPoint& query) {
  if (!(radius > 0.0)) throw input_error("partition_weights: radius must be > 0");
  std::vector<double> hats(nodes.size(), 0.0);
  double total = 0.0;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const double d = distance(query, nodes.point(k));
    hats[k] = std::max(0.0, 1.0 - d / radius);
    total += hats[k];
  }
  if (!(total > 0.0))
    throw coverage_error("partition_weights: no node within radius of the query point");
  std::size_t last_positive = 0;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (hats[k] > 0.0) last_positive = k;
  }
  double partial = 0.0;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (hats[k] <= 0.0) {
      hats[k] = 0.0;
      continue;
    }
    if (k == last_positive) {
      hats[k] = 1.0 - partial;
    } else {
      hats[k] /= total;
      partial += hats[k];
    }
  }
  return hats;
}

// P-bar_x = sum_k phi_k(x) P_{x_k}: mixture of node measures under the hat
// partition. Exact-duplicate atoms across nodes merge.
inline DiscreteMeasure interpolate_measure_field(const LocationSet& nodes,
                                                 const std::vector<DiscreteMeasure>& node_measures,
                                                 double radius, const IndexPoint& query) {
  if (node_measures.size() != nodes.size())
    throw input_error("interpolate_measure_field: one measure per node required");
  const std::vector<double> phi = partition_weights(nodes, radius, query);
  std::map<std::vector<double>, double> merged;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    if (phi[k] == 0.0) continue;
    const DiscreteMeasure& m = node_measures[k];
    for (std::size_t i = 0; i < m.atoms.size(); ++i) {
      std::vector<double> key(m.atoms[i].data(), m.atoms[i].data() + m.atoms[i].size());
      merged[key] += phi[k] * m.weights(static_cast<Eigen::Index>(i));
    }
  }
  std::vector<Eigen::VectorXd> atoms;
  atoms.reserve(merged.size());
  Eigen::VectorXd weights(static_cast<Eigen::Index>(merged.size()));
  Eigen::Index i = 0;
  for (const auto& [key, w] : merged) {
    atoms.push_back(Eigen::Map<const Eigen::VectorXd>(key.data(),
                                                      static_cast<Eigen::Index>(key.size())));
    weights(i++) = w;
  }
  // Rounding from the phi * w products can leave the sum a few ulps off 1.
  const double sum = weights.sum();
  if (std::fabs(sum - 1.0) > kWeightSumTolerance)
    throw numerical_error("interpolate_measure_field: interpolated mass drifted from 1");
  Eigen::Index imax = 0;
  weights.maxCoeff(&imax);
  weights(imax) += 1.0 - sum;
  return DiscreteMeasure(std::move(atoms), std::move(weights));
}

// --- Path sampling ---------------------------------------------------------

// Draws truncated sample paths for the three variants. Covariance factors are
// computed once; each stick (and each atom coordinate) consumes its own
// stream, so replicates parallelize and reproduce bit-for-bit.
class PathSampler {
 public:
  PathSampler(Variant variant, StickSpec stick_spec, AtomSpec atom_spec, LocationSetPtr locs)
      : variant_(variant),
        stick_spec_(std::move(stick_spec)),
        atom_spec_(std::move(atom_spec)),
        locs_(std::move(locs)),
        n_sticks_(stick_spec_.resolve_sticks()) {
    if (!locs_ || locs_->size() == 0) throw input_error("PathSampler: empty location set");
    if (variant_ == Variant::wDDP && !stick_spec_.alpha.is_constant())
      throw input_error("PathSampler: wDDP requires a constant alpha");
    if (variant_ == Variant::thetaDDP) {
      if (atom_spec_.variant_hint == AtomVariant::field)
        throw input_error("PathSampler: thetaDDP uses iid atoms, not a field");
    } else {
      if (atom_spec_.variant_hint == AtomVariant::iid)
        throw input_error("PathSampler: " + std::string(variant_name(variant_)) +
                          " uses a location-dependent atom field");
    }
    if (variant_ != Variant::wDDP)
      stick_sampler_ = std::make_shared<GaussianSampler>(stick_spec_.kernel, locs_);
    if (variant_ != Variant::thetaDDP)
      atom_sampler_ = std::make_shared<GaussianSampler>(atom_spec_.kernel, locs_);
  }

  int sticks() const { return n_sticks_; }
  Variant variant() const { return variant_; }
  const LocationSetPtr& locations() const { return locs_; }
  const StickSpec& stick_spec() const { return stick_spec_; }
  const AtomSpec& atom_spec() const { return atom_spec_; }

  // Stick variables V for one replicate (sticks x locations).
  Eigen::MatrixXd sample_sticks(const StreamKey& key) const {
    const int n_locs = static_cast<int>(locs_->size());
    Eigen::MatrixXd v(n_sticks_, n_locs);
    if (variant_ == Variant::wDDP) {
      const double alpha = stick_spec_.alpha.lower_bound();
      for (int i = 0; i < n_sticks_; ++i) {
        RngStream s = make_stream(key, stream_role::kSharedStick, static_cast<std::uint64_t>(i));
        const double vi = beta_quantile(s.uniform01(), alpha);
        v.row(i).setConstant(vi);
      }
    } else {
      for (int i = 0; i < n_sticks_; ++i) {
        RngStream s = make_stream(key, stream_role::kStickField, static_cast<std::uint64_t>(i));
        const LatentField f = stick_sampler_->sample(s);
        v.row(i) = gauss_to_stick(f, stick_spec_).transpose();
      }
    }
    return v;
  }

  AtomField sample_atoms(const StreamKey& key) const {
    const int n_locs = static_cast<int>(locs_->size());
    AtomField atoms = variant_ == Variant::thetaDDP
                          ? sample_iid_atoms(atom_spec_, n_sticks_, n_locs, key)
                          : sample_atom_field(atom_spec_, *atom_sampler_, n_sticks_, key);
    if (atom_spec_.variant_hint == AtomVariant::circle) return wrap_to_circle(atoms);
    return atoms;
  }

  MeasureField sample(const StreamKey& key) const {
    const TruncatedWeights weights = stick_weights(sample_sticks(key));
    const AtomField atoms = sample_atoms(key);
    return assemble_path(weights, atoms, variant_, locs_);
  }

 private:
  Variant variant_;
  StickSpec stick_spec_;
  AtomSpec atom_spec_;
  LocationSetPtr locs_;
  int n_sticks_;
  std::shared_ptr<GaussianSampler> stick_sampler_;
  std::shared_ptr<GaussianSampler> atom_sampler_;
};

}  // namespace dsb
