#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "dsb/errors.hpp"
#include "dsb/index_space.hpp"
#include "dsb/rng.hpp"

namespace dsb {

// Squared-exponential covariance sigma0 * exp(-d(x1,x2)^2 / tau^2) with a
// constant mean. This is the only kernel the harness ships: its RKHS is rich
// enough for the support probes to stand on.
struct CovKernelSpec {
  double sigma0 = 1.0;  // marginal variance
  double tau = 1.0;     // length scale
  double mean = 0.0;

  CovKernelSpec() = default;
  CovKernelSpec(double sigma0_in, double tau_in, double mean_in)
      : sigma0(sigma0_in), tau(tau_in), mean(mean_in) {
    if (!(sigma0 > 0.0) || !std::isfinite(sigma0))
      throw input_error("CovKernelSpec: sigma0 must be positive and finite");
    if (!(tau > 0.0) || !std::isfinite(tau))
      throw input_error("CovKernelSpec: tau must be positive and finite");
    if (!std::isfinite(mean)) throw input_error("CovKernelSpec: mean must be finite");
  }

  double stddev() const { return std::sqrt(sigma0); }
};

// Entry (i,j) = sigma0 * exp(-d(x_i,x_j)^2/tau^2); bitwise symmetric, exact
// sigma0 on the diagonal.
inline Eigen::MatrixXd cov_matrix(const CovKernelSpec& kernel, const LocationSet& locs) {
  const Eigen::Index n = static_cast<Eigen::Index>(locs.size());
  Eigen::MatrixXd cov(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    cov(i, i) = kernel.sigma0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double d = distance(locs.point(static_cast<std::size_t>(i)),
                                locs.point(static_cast<std::size_t>(j)));
      const double v = kernel.sigma0 * std::exp(-(d * d) / (kernel.tau * kernel.tau));
      cov(i, j) = v;
      cov(j, i) = v;
    }
  }
  return cov;
}

// One realization of the base Gaussian process on a finite location set.
struct LatentField {
  LocationSetPtr locations;
  Eigen::VectorXd values;
  std::uint64_t seed_tag = 0;
};

// Factors the covariance once and samples N(mean, cov + jitter I) repeatedly.
// Jitter starts at 1e-10 * sigma0 and escalates by x10 at most four times
// before giving up with condition diagnostics.
class GaussianSampler {
 public:
  GaussianSampler(const CovKernelSpec& kernel, LocationSetPtr locs)
      : kernel_(kernel), locs_(std::move(locs)) {
    if (!locs_ || locs_->size() == 0) throw input_error("GaussianSampler: empty location set");
    const Eigen::MatrixXd cov = cov_matrix(kernel_, *locs_);
    const double base_jitter = 1e-10 * kernel_.sigma0;
    double jitter = base_jitter;
    for (int attempt = 0; attempt <= 4; ++attempt) {
      Eigen::MatrixXd work = cov;
      work.diagonal().array() += jitter;
      Eigen::LLT<Eigen::MatrixXd> llt(work);
      if (llt.info() == Eigen::Success) {
        chol_lower_ = llt.matrixL();
        jitter_ = jitter;
        return;
      }
      jitter *= 10.0;
    }
    throw numerical_error(
        "GaussianSampler: Cholesky failed after jitter escalation (sigma0=" +
        std::to_string(kernel_.sigma0) + ", tau=" + std::to_string(kernel_.tau) +
        ", points=" + std::to_string(locs_->size()) +
        ", last jitter=" + std::to_string(jitter / 10.0) + ")");
  }

  LatentField sample(RngStream& stream, std::uint64_t seed_tag = 0) const {
    const Eigen::Index n = chol_lower_.rows();
    Eigen::VectorXd z(n);
    for (Eigen::Index i = 0; i < n; ++i) z(i) = stream.normal();
    LatentField field;
    field.locations = locs_;
    field.values = chol_lower_ * z;
    field.values.array() += kernel_.mean;
    field.seed_tag = seed_tag;
    return field;
  }

  const CovKernelSpec& kernel() const { return kernel_; }
  const LocationSetPtr& locations() const { return locs_; }
  double jitter() const { return jitter_; }

 private:
  CovKernelSpec kernel_;
  LocationSetPtr locs_;
  Eigen::MatrixXd chol_lower_;
  double jitter_ = 0.0;
};

inline LatentField sample_field(const CovKernelSpec& kernel, LocationSetPtr locs,
                                RngStream& stream, std::uint64_t seed_tag = 0) {
  return GaussianSampler(kernel, std::move(locs)).sample(stream, seed_tag);
}

// Standard normal c.d.f. through the complementary error function.
inline double standard_cdf(double z) {
  if (!std::isfinite(z)) throw input_error("standard_cdf: argument must be finite");
  return 0.5 * std::erfc(-z / std::sqrt(2.0));
}

// Survival function 1 - Phi(z), accurate in the upper tail.
inline double standard_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

}  // namespace dsb
