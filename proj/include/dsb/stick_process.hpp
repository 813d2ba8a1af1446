#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "dsb/errors.hpp"
#include "dsb/index_space.hpp"
#include "dsb/latent_field.hpp"

namespace dsb {

// Concentration alpha(x): a positive constant or a continuous function with a
// declared positive lower bound. alpha = 0 is rejected; Beta(1,0) is
// degenerate and the quantile map undefined.
class AlphaField {
 public:
  static AlphaField constant(double alpha) {
    if (!(alpha > 0.0) || !std::isfinite(alpha))
      throw input_error("AlphaField: alpha must be > 0 (alpha_min requirement)");
    AlphaField a;
    a.constant_ = alpha;
    a.min_ = alpha;
    return a;
  }

  static AlphaField function(std::function<double(const IndexPoint&)> fn, double alpha_min) {
    if (!(alpha_min > 0.0) || !std::isfinite(alpha_min))
      throw input_error("AlphaField: alpha_min must be > 0");
    if (!fn) throw input_error("AlphaField: empty function");
    AlphaField a;
    a.fn_ = std::move(fn);
    a.min_ = alpha_min;
    return a;
  }

  double operator()(const IndexPoint& x) const {
    if (fn_) {
      const double v = fn_(x);
      if (!(v >= min_))
        throw input_error("AlphaField: alpha(x) fell below the declared alpha_min");
      return v;
    }
    return constant_;
  }

  bool is_constant() const { return !fn_; }
  double lower_bound() const { return min_; }

 private:
  std::function<double(const IndexPoint&)> fn_;
  double constant_ = 1.0;
  double min_ = 1.0;
};

// Truncation level: an explicit stick count, or a target expected tail mass
// resolved through expected_tail() under inf_x alpha(x).
struct Truncation {
  static Truncation sticks(int n) {
    if (n < 1) throw input_error("Truncation: stick count must be >= 1");
    Truncation t;
    t.n_ = n;
    return t;
  }
  static Truncation target_tail(double mass) {
    if (!(mass > 0.0) || !(mass < 1.0))
      throw input_error("Truncation: target tail mass must lie in (0,1)");
    Truncation t;
    t.target_ = mass;
    return t;
  }

  int explicit_sticks() const { return n_; }      // 0 when resolved from target
  double target_mass() const { return target_; }  // NaN when explicit

 private:
  int n_ = 0;
  double target_ = std::numeric_limits<double>::quiet_NaN();
};

// Expected leftover mass after n sticks: E[1-V]^n = (alpha/(1+alpha))^n.
inline double expected_tail(double alpha, int n) {
  if (n < 0) throw input_error("expected_tail: n must be >= 0");
  if (!(alpha > 0.0)) throw input_error("expected_tail: alpha must be > 0");
  return std::pow(alpha / (1.0 + alpha), n);
}

constexpr int kTruncationCap = 1000;

struct StickSpec {
  AlphaField alpha = AlphaField::constant(1.0);
  CovKernelSpec kernel;
  Truncation truncation = Truncation::sticks(50);

  int resolve_sticks() const {
    if (truncation.explicit_sticks() > 0) return truncation.explicit_sticks();
    const double target = truncation.target_mass();
    const double a = alpha.lower_bound();
    for (int n = 1; n <= kTruncationCap; ++n) {
      if (expected_tail(a, n) < target) return n;
    }
    return kTruncationCap;
  }
};

// Quantile of Beta(1, alpha): F^{-1}(t) = 1 - (1-t)^(1/alpha). Written with
// log1p/expm1 to keep precision near both endpoints.
inline double beta_quantile(double t, double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw input_error("beta_quantile: alpha must be > 0");
  if (!(t >= 0.0) || !(t <= 1.0)) throw input_error("beta_quantile: t must lie in [0,1]");
  if (t == 1.0) return 1.0;
  return -std::expm1(std::log1p(-t) / alpha);
}

// Beta(1, alpha) c.d.f., the inverse of beta_quantile.
inline double beta_cdf(double v, double alpha) {
  if (!(alpha > 0.0)) throw input_error("beta_cdf: alpha must be > 0");
  if (v <= 0.0) return 0.0;
  if (v >= 1.0) return 1.0;
  return -std::expm1(alpha * std::log1p(-v));
}

// V_x = F_B^{-1}(F_Z(Z_x)): push the Gaussian field through its own c.d.f.
// and then through the beta quantile, location by location. The survival form
// keeps the upper tail of F_Z accurate, so V underflows cleanly to 0 deep in
// the lower tail.
inline Eigen::VectorXd gauss_to_stick(const LatentField& field, const StickSpec& spec) {
  if (!field.locations) throw input_error("gauss_to_stick: field has no locations");
  const LocationSet& locs = *field.locations;
  if (static_cast<std::size_t>(field.values.size()) != locs.size())
    throw input_error("gauss_to_stick: field values misaligned with locations");
  const double sd = spec.kernel.stddev();
  Eigen::VectorXd v(field.values.size());
  for (Eigen::Index i = 0; i < field.values.size(); ++i) {
    const double w = (field.values(i) - spec.kernel.mean) / sd;
    const double sf = standard_sf(w);  // 1 - Phi(w)
    const double a = spec.alpha(locs.point(static_cast<std::size_t>(i)));
    // 1 - sf^(1/a), evaluated as -expm1(log(sf)/a); sf == 0 maps to V = 1.
    v(i) = (sf > 0.0) ? -std::expm1(std::log(sf) / a) : 1.0;
    if (v(i) < 0.0) v(i) = 0.0;
    if (v(i) > 1.0) v(i) = 1.0;
  }
  return v;
}

// Truncated stick-breaking weights: pi_1 = V_1, pi_i = V_i prod_{j<i}(1-V_j),
// plus the explicit leftover mass per column.
struct TruncatedWeights {
  Eigen::MatrixXd weights;  // sticks x locations
  Eigen::VectorXd tail;     // per location

  int sticks() const { return static_cast<int>(weights.rows()); }
  int locations() const { return static_cast<int>(weights.cols()); }
};

inline TruncatedWeights stick_weights(const Eigen::MatrixXd& v) {
  if (v.rows() < 1 || v.cols() < 1) throw input_error("stick_weights: empty V matrix");
  if ((v.array() < 0.0).any() || (v.array() > 1.0).any())
    throw input_error("stick_weights: entries must lie in [0,1]");
  TruncatedWeights out;
  out.weights.resize(v.rows(), v.cols());
  out.tail.resize(v.cols());
  for (Eigen::Index c = 0; c < v.cols(); ++c) {
    double remaining = 1.0;
    for (Eigen::Index i = 0; i < v.rows(); ++i) {
      out.weights(i, c) = v(i, c) * remaining;
      remaining *= 1.0 - v(i, c);
    }
    out.tail(c) = remaining;
  }
  return out;
}

}  // namespace dsb
