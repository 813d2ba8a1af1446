#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dsb/errors.hpp"
#include "dsb/index_space.hpp"
#include "dsb/latent_field.hpp"
#include "dsb/rng.hpp"

namespace dsb {

constexpr double kTwoPi = 6.283185307179586476925;

// Marginal atom law per coordinate. Both families have closed-form quantile
// maps, so Gaussian pushforwards hit the marginal exactly.
class Marginal {
 public:
  enum class Family { normal, uniform };

  static Marginal normal(double mean, double scale) {
    if (!(scale > 0.0) || !std::isfinite(scale) || !std::isfinite(mean))
      throw input_error("Marginal: normal requires finite mean and scale > 0");
    Marginal m;
    m.family_ = Family::normal;
    m.a_ = mean;
    m.b_ = scale;
    return m;
  }

  static Marginal uniform(double lo, double hi) {
    if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi))
      throw input_error("Marginal: uniform requires finite lo < hi");
    Marginal m;
    m.family_ = Family::uniform;
    m.a_ = lo;
    m.b_ = hi;
    return m;
  }

  Family family() const { return family_; }
  double param_a() const { return a_; }
  double param_b() const { return b_; }

  double cdf(double v) const {
    if (family_ == Family::normal) return standard_cdf((v - a_) / b_);
    if (v <= a_) return 0.0;
    if (v >= b_) return 1.0;
    return (v - a_) / (b_ - a_);
  }

  // Image of a standard normal variate under the marginal's quantile of
  // Phi(w). For the normal family this is the exact affine map m + s*w, which
  // avoids Phi/Phi^{-1} round trips in the tails.
  double push_standard_normal(double w) const {
    if (family_ == Family::normal) return a_ + b_ * w;
    return a_ + (b_ - a_) * standard_cdf(w);
  }

  double mean() const {
    return family_ == Family::normal ? a_ : 0.5 * (a_ + b_);
  }
  double variance() const {
    return family_ == Family::normal ? b_ * b_ : (b_ - a_) * (b_ - a_) / 12.0;
  }

 private:
  Family family_ = Family::normal;
  double a_ = 0.0;
  double b_ = 1.0;
};

enum class AtomVariant { iid, field, circle };

struct AtomSpec {
  int theta_dim = 1;
  std::vector<Marginal> marginals;  // one per coordinate
  CovKernelSpec kernel;             // drives the latent atom fields
  AtomVariant variant_hint = AtomVariant::iid;

  AtomSpec() : marginals{Marginal::normal(0.0, 1.0)} {}
  AtomSpec(int dim, std::vector<Marginal> margs, CovKernelSpec k, AtomVariant hint)
      : theta_dim(dim), marginals(std::move(margs)), kernel(k), variant_hint(hint) {
    if (theta_dim < 1) throw input_error("AtomSpec: theta_dim must be >= 1");
    if (marginals.size() != static_cast<std::size_t>(theta_dim))
      throw input_error("AtomSpec: need one marginal per coordinate");
    if (variant_hint == AtomVariant::circle && theta_dim != 1)
      throw input_error("AtomSpec: circle variant requires theta_dim = 1");
  }
};

// Atom sequences theta_i(x): one plane of sticks x locations per coordinate.
// iid rows are constant across locations; circle coordinates live in [0,2pi).
class AtomField {
 public:
  AtomField(AtomVariant variant, int sticks, int locations,
            std::vector<Eigen::MatrixXd> planes)
      : variant_(variant), sticks_(sticks), locations_(locations), planes_(std::move(planes)) {
    if (planes_.empty()) throw input_error("AtomField: needs at least one coordinate plane");
    for (const auto& p : planes_) {
      if (p.rows() != sticks_ || p.cols() != locations_)
        throw input_error("AtomField: plane shape mismatch");
      if (!p.allFinite()) throw input_error("AtomField: non-finite atom coordinate");
    }
  }

  AtomVariant variant() const { return variant_; }
  int sticks() const { return sticks_; }
  int locations() const { return locations_; }
  int dim() const { return static_cast<int>(planes_.size()); }
  const std::vector<Eigen::MatrixXd>& planes() const { return planes_; }

  Eigen::VectorXd atom(int stick, int location) const {
    Eigen::VectorXd theta(dim());
    for (int j = 0; j < dim(); ++j) theta(j) = planes_[static_cast<std::size_t>(j)](stick, location);
    return theta;
  }

 private:
  AtomVariant variant_;
  int sticks_;
  int locations_;
  std::vector<Eigen::MatrixXd> planes_;
};

// N iid draws from G0, each replicated across all locations. Per-stick
// streams keep atom rows independent and the sampling parallelizable.
inline AtomField sample_iid_atoms(const AtomSpec& spec, int count, int locations,
                                  const StreamKey& key) {
  if (count < 1) throw input_error("sample_iid_atoms: count must be >= 1");
  if (locations < 1) throw input_error("sample_iid_atoms: locations must be >= 1");
  std::vector<Eigen::MatrixXd> planes(static_cast<std::size_t>(spec.theta_dim));
  for (auto& p : planes) p.resize(count, locations);
  for (int i = 0; i < count; ++i) {
    RngStream stream = make_stream(key, stream_role::kIidAtom, static_cast<std::uint64_t>(i));
    for (int j = 0; j < spec.theta_dim; ++j) {
      const double w = stream.normal();
      const double theta = spec.marginals[static_cast<std::size_t>(j)].push_standard_normal(w);
      planes[static_cast<std::size_t>(j)].row(i).setConstant(theta);
    }
  }
  return AtomField(AtomVariant::iid, count, locations, std::move(planes));
}

// Location-dependent atoms: each (stick, coordinate) pair is an independent
// latent field pushed through the marginal quantile, so the marginal law at
// every location is exact and rows are continuous in x.
inline AtomField sample_atom_field(const AtomSpec& spec, const GaussianSampler& sampler,
                                   int count, const StreamKey& key) {
  if (count < 1) throw input_error("sample_atom_field: count must be >= 1");
  const int locations = static_cast<int>(sampler.locations()->size());
  const double sd = sampler.kernel().stddev();
  const double mu = sampler.kernel().mean;
  std::vector<Eigen::MatrixXd> planes(static_cast<std::size_t>(spec.theta_dim));
  for (auto& p : planes) p.resize(count, locations);
  for (int i = 0; i < count; ++i) {
    for (int j = 0; j < spec.theta_dim; ++j) {
      RngStream stream = make_stream(key, stream_role::kAtomField,
                                     static_cast<std::uint64_t>(i) *
                                             static_cast<std::uint64_t>(spec.theta_dim) +
                                         static_cast<std::uint64_t>(j));
      const LatentField field = sampler.sample(stream);
      const Marginal& marg = spec.marginals[static_cast<std::size_t>(j)];
      for (int l = 0; l < locations; ++l) {
        const double w = (field.values(l) - mu) / sd;
        planes[static_cast<std::size_t>(j)](i, l) = marg.push_standard_normal(w);
      }
    }
  }
  return AtomField(AtomVariant::field, count, locations, std::move(planes));
}

inline double wrap_angle(double x) {
  double r = std::fmod(x, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r = 0.0;
  return r;
}

// Quotient map R -> S^1 = R / 2pi Z applied coordinate-wise; rows stay
// continuous through the quotient.
inline AtomField wrap_to_circle(const AtomField& field) {
  if (field.dim() != 1) throw input_error("wrap_to_circle: requires theta_dim = 1");
  std::vector<Eigen::MatrixXd> planes = field.planes();
  for (auto& p : planes) {
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      for (Eigen::Index l = 0; l < p.cols(); ++l) p(i, l) = wrap_angle(p(i, l));
    }
  }
  return AtomField(AtomVariant::circle, field.sticks(), field.locations(), std::move(planes));
}

// Arc-length distance on S^1.
inline double circle_distance(double a, double b) {
  const double d = std::fabs(wrap_angle(a) - wrap_angle(b));
  return std::min(d, kTwoPi - d);
}

}  // namespace dsb
