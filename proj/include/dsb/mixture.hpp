#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dsb/ddp_core.hpp"
#include "dsb/errors.hpp"

namespace dsb {

// --- Quadrature -------------------------------------------------------------

// Uniform trapezoid grid on an interval of Y.
struct QuadGrid {
  Eigen::VectorXd nodes;
  Eigen::VectorXd node_weights;

  static QuadGrid uniform(double lo, double hi, int count) {
    if (!(lo < hi)) throw input_error("QuadGrid: lo must be < hi");
    if (count < 2) throw input_error("QuadGrid: need at least 2 nodes");
    QuadGrid g;
    g.nodes.resize(count);
    g.node_weights.resize(count);
    const double h = (hi - lo) / static_cast<double>(count - 1);
    for (int i = 0; i < count; ++i) g.nodes(i) = lo + h * static_cast<double>(i);
    g.nodes(count - 1) = hi;
    g.node_weights.setConstant(h);
    g.node_weights(0) = 0.5 * h;
    g.node_weights(count - 1) = 0.5 * h;
    return g;
  }

  int size() const { return static_cast<int>(nodes.size()); }
  double lo() const { return nodes(0); }
  double hi() const { return nodes(nodes.size() - 1); }

  double integrate(const Eigen::VectorXd& values) const {
    if (values.size() != nodes.size()) throw input_error("QuadGrid: value size mismatch");
    return (node_weights.array() * values.array()).sum();
  }
};

constexpr int kDefaultQuadNodes = 2001;
constexpr double kDensityMassTolerance = 1e-6;

// A density stored on a grid; construction validates unit mass.
struct DensityGrid {
  QuadGrid grid;
  Eigen::VectorXd values;

  DensityGrid() = default;
  DensityGrid(QuadGrid g, Eigen::VectorXd v) : grid(std::move(g)), values(std::move(v)) {
    if (values.size() != grid.nodes.size()) throw input_error("DensityGrid: size mismatch");
    if ((values.array() < 0.0).any()) throw input_error("DensityGrid: negative density value");
    const double mass = grid.integrate(values);
    if (std::fabs(mass - 1.0) > kDensityMassTolerance)
      throw input_error("DensityGrid: stored density integrates to " + std::to_string(mass));
  }
};

// --- Mixture kernels ---------------------------------------------------------

enum class MixtureFamily { gaussian_loc, beta_constrained, beta_free };

inline const char* family_name(MixtureFamily f) {
  switch (f) {
    case MixtureFamily::gaussian_loc: return "gaussian_loc";
    case MixtureFamily::beta_constrained: return "beta_constrained";
    case MixtureFamily::beta_free: return "beta_free";
  }
  return "?";
}

inline double log_beta_function(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

// Beta(alpha, beta) density on [0,1] with the boundary conventions for
// alpha, beta >= 1 (exponent 0 means the boundary factor is 1).
inline double beta_density(double y, double alpha, double beta) {
  if (y < 0.0 || y > 1.0) return 0.0;
  double log_num = 0.0;
  if (alpha > 1.0) {
    if (y == 0.0) return 0.0;
    log_num += (alpha - 1.0) * std::log(y);
  }
  if (beta > 1.0) {
    if (y == 1.0) return 0.0;
    log_num += (beta - 1.0) * std::log1p(-y);
  }
  return std::exp(log_num - log_beta_function(alpha, beta));
}

// psi(1/2, t, t) = 1 / (2^(2t-2) B(t,t)); grows like (2^{3/2}/sqrt(2 pi)) t^{1/2}.
inline double beta_diagonal_density(double t) {
  if (!(t > 0.0)) throw input_error("beta_diagonal_density: t must be > 0");
  return std::exp(-(2.0 * t - 2.0) * std::log(2.0) - log_beta_function(t, t));
}

// Mixture kernel psi(y, gamma, theta). Families:
//   gaussian_loc     : theta = location in R, gamma = scale > 0, Y an interval
//   beta_constrained : theta = beta in [1, beta_max], gamma = alpha in [1, alpha_max]
//   beta_free        : theta = (alpha, beta) in [1,inf)^2, no gamma; exists to
//                      exhibit the decay failure and is rejected in pipelines
struct MixtureKernelSpec {
  MixtureFamily family = MixtureFamily::gaussian_loc;
  double y_lo = -1.0;
  double y_hi = 1.0;
  double gamma_min = 0.0;
  double gamma_max = std::numeric_limits<double>::infinity();
  double beta_max = 1.0;  // beta_constrained only

  static MixtureKernelSpec gaussian(double y_lo, double y_hi) {
    if (!(y_lo < y_hi)) throw input_error("MixtureKernelSpec: need y_lo < y_hi");
    MixtureKernelSpec s;
    s.family = MixtureFamily::gaussian_loc;
    s.y_lo = y_lo;
    s.y_hi = y_hi;
    s.gamma_min = 0.0;  // exclusive
    s.gamma_max = std::numeric_limits<double>::infinity();
    s.validate_unit_mass();
    return s;
  }

  static MixtureKernelSpec beta_constrained(double beta_max, double alpha_max = 50.0) {
    if (!(beta_max >= 1.0)) throw input_error("MixtureKernelSpec: beta_max must be >= 1");
    if (!(alpha_max >= 1.0)) throw input_error("MixtureKernelSpec: alpha_max must be >= 1");
    MixtureKernelSpec s;
    s.family = MixtureFamily::beta_constrained;
    s.y_lo = 0.0;
    s.y_hi = 1.0;
    s.gamma_min = 1.0;
    s.gamma_max = alpha_max;
    s.beta_max = beta_max;
    s.validate_unit_mass();
    return s;
  }

  static MixtureKernelSpec beta_free() {
    MixtureKernelSpec s;
    s.family = MixtureFamily::beta_free;
    s.y_lo = 0.0;
    s.y_hi = 1.0;
    s.gamma_min = 0.0;
    s.gamma_max = std::numeric_limits<double>::infinity();
    s.validate_unit_mass();
    return s;
  }

  int theta_dim() const { return family == MixtureFamily::beta_free ? 2 : 1; }

  bool gamma_in_bounds(double gamma) const {
    if (family == MixtureFamily::gaussian_loc) return gamma > 0.0 && std::isfinite(gamma);
    if (family == MixtureFamily::beta_constrained)
      return gamma >= gamma_min && gamma <= gamma_max;
    return true;  // beta_free carries no gamma
  }

  bool theta_in_bounds(const Eigen::VectorXd& theta) const {
    if (static_cast<int>(theta.size()) != theta_dim()) return false;
    switch (family) {
      case MixtureFamily::gaussian_loc:
        return std::isfinite(theta(0));
      case MixtureFamily::beta_constrained:
        return theta(0) >= 1.0 && theta(0) <= beta_max;
      case MixtureFamily::beta_free:
        return theta(0) >= 1.0 && theta(1) >= 1.0;
    }
    return false;
  }

  double psi(double y, double gamma, const Eigen::VectorXd& theta) const {
    switch (family) {
      case MixtureFamily::gaussian_loc: {
        const double z = (y - theta(0)) / gamma;
        return std::exp(-0.5 * z * z) / (gamma * std::sqrt(2.0 * RngStream::pi()));
      }
      case MixtureFamily::beta_constrained:
        return beta_density(y, gamma, theta(0));
      case MixtureFamily::beta_free:
        return beta_density(y, theta(0), theta(1));
    }
    return 0.0;
  }

 private:
  // Checked once at construction: psi(., gamma, theta) integrates to 1 over Y
  // at representative parameters, tolerance 1e-6.
  void validate_unit_mass() const {
    Eigen::VectorXd theta(theta_dim());
    double gamma = 1.0;
    double lo = y_lo, hi = y_hi;
    if (family == MixtureFamily::gaussian_loc) {
      theta(0) = 0.5 * (y_lo + y_hi);
      gamma = (y_hi - y_lo) / 16.0;
    } else if (family == MixtureFamily::beta_constrained) {
      theta(0) = std::min(beta_max, 2.0);
      gamma = 2.0;
    } else {
      theta(0) = 2.0;
      theta(1) = 2.0;
    }
    const QuadGrid grid = QuadGrid::uniform(lo, hi, 4001);
    Eigen::VectorXd values(grid.size());
    for (int i = 0; i < grid.size(); ++i) values(i) = psi(grid.nodes(i), gamma, theta);
    const double mass = grid.integrate(values);
    if (std::fabs(mass - 1.0) > kDensityMassTolerance)
      throw input_error(std::string("MixtureKernelSpec: ") + family_name(family) +
                        " fails the unit-mass check (integral=" + std::to_string(mass) + ")");
  }
};

// --- Mixture density evaluation ----------------------------------------------

// rho(y) = sum_i w_i psi(y, gamma, theta_i) on the grid nodes. Errors out if
// the grid captures less than 0.999 of the mass.
inline Eigen::VectorXd mixture_density(const DiscreteMeasure& m, const MixtureKernelSpec& kernel,
                                       double gamma, const QuadGrid& grid) {
  if (!kernel.gamma_in_bounds(gamma))
    throw input_error(std::string("mixture_density: gamma out of bounds for ") +
                      family_name(kernel.family));
  for (const auto& theta : m.atoms) {
    if (!kernel.theta_in_bounds(theta))
      throw input_error(std::string("mixture_density: atom outside Theta for ") +
                        family_name(kernel.family));
  }
  Eigen::VectorXd values = Eigen::VectorXd::Zero(grid.size());
  for (std::size_t i = 0; i < m.atoms.size(); ++i) {
    const double w = m.weights(static_cast<Eigen::Index>(i));
    if (w == 0.0) continue;
    for (int n = 0; n < grid.size(); ++n)
      values(n) += w * kernel.psi(grid.nodes(n), gamma, m.atoms[i]);
  }
  const double mass = grid.integrate(values);
  if (mass < 0.999)
    throw coverage_error("mixture_density: grid covers only " + std::to_string(mass) +
                         " of the mass (missing " + std::to_string(1.0 - mass) + ")");
  return values;
}

// --- Density distances --------------------------------------------------------

// d_H = sqrt(1 - int sqrt(p q)); symmetric, in [0,1] for densities.
inline double hellinger(const Eigen::VectorXd& p, const Eigen::VectorXd& q, const QuadGrid& grid) {
  if (p.size() != q.size() || p.size() != grid.nodes.size())
    throw input_error("hellinger: grids do not match");
  const double overlap = grid.integrate((p.array() * q.array()).sqrt().matrix());
  return std::sqrt(std::max(0.0, 1.0 - overlap));
}

inline double sup_distance(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  if (p.size() != q.size()) throw input_error("sup_distance: grids do not match");
  return (p - q).cwiseAbs().maxCoeff();
}

inline double l1_distance(const Eigen::VectorXd& p, const Eigen::VectorXd& q,
                          const QuadGrid& grid) {
  if (p.size() != q.size() || p.size() != grid.nodes.size())
    throw input_error("l1_distance: grids do not match");
  return grid.integrate((p - q).cwiseAbs());
}

// KL(p || q) = int p log(p/q) with 0 log 0 = 0. q is never floored: a zero q
// under positive p is a support violation, not a rounding problem.
inline double kl_divergence(const Eigen::VectorXd& p, const Eigen::VectorXd& q,
                            const QuadGrid& grid) {
  if (p.size() != q.size() || p.size() != grid.nodes.size())
    throw input_error("kl_divergence: grids do not match");
  double acc = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p(i) == 0.0) continue;
    if (q(i) <= 0.0)
      throw support_error("kl_divergence: q vanishes at node " + std::to_string(i) +
                          " where p > 0");
    acc += grid.node_weights(i) * p(i) * std::log(p(i) / q(i));
  }
  return acc;
}

// Hellinger distance with grid-doubling refinement: doubles the node count
// until two successive values differ by < 1e-6, at most 3 refinements.
inline double hellinger_refined(const std::function<double(double)>& p,
                                const std::function<double(double)>& q, double y_lo, double y_hi,
                                int base_nodes = kDefaultQuadNodes) {
  auto eval = [&](int count) {
    const QuadGrid grid = QuadGrid::uniform(y_lo, y_hi, count);
    Eigen::VectorXd pv(grid.size()), qv(grid.size());
    for (int i = 0; i < grid.size(); ++i) {
      pv(i) = p(grid.nodes(i));
      qv(i) = q(grid.nodes(i));
    }
    return hellinger(pv, qv, grid);
  };
  int count = base_nodes;
  double h = eval(count);
  for (int r = 0; r < 3; ++r) {
    count = 2 * count - 1;
    const double h2 = eval(count);
    if (std::fabs(h2 - h) < 1e-6) return h2;
    h = h2;
  }
  return h;
}

// --- Decay condition -------------------------------------------------------

struct DecayShellRow {
  double radius = 0.0;
  double sup = 0.0;
  bool complement_empty = false;
};

struct DecayReport {
  bool passed = false;
  double epsilon = 0.0;
  std::string family;
  std::vector<DecayShellRow> rows;
};

namespace decay_detail {

inline std::vector<double> log_spaced(double lo, double hi, int count) {
  std::vector<double> out;
  if (!(hi > lo)) return out;
  out.reserve(static_cast<std::size_t>(count));
  const double llo = std::log(lo), lhi = std::log(hi);
  for (int i = 0; i < count; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(count - 1);
    out.push_back(std::exp(llo + t * (lhi - llo)));
  }
  return out;
}

}  // namespace decay_detail

// Numeric probe of the decay-at-infinity condition: sup of psi over a
// neighborhood of (y0, gamma0) crossed with each shell complement, sampled out
// to four times the shell radius. Shells are nested boxes K_m in Theta given
// by their radii; passes when the sup profile falls below epsilon and is
// nonincreasing from there on (a growing tail signals divergence no matter
// the epsilon). A fail is a valid report, not an error.
inline DecayReport check_decay_condition(const MixtureKernelSpec& kernel, double y0, double gamma0,
                                         double epsilon, const std::vector<double>& shell_radii) {
  if (!(epsilon > 0.0)) throw input_error("check_decay_condition: epsilon must be > 0");
  if (shell_radii.empty()) throw input_error("check_decay_condition: at least one shell required");
  for (std::size_t m = 1; m < shell_radii.size(); ++m) {
    if (!(shell_radii[m] > shell_radii[m - 1]))
      throw input_error("check_decay_condition: shells must be strictly increasing");
  }
  if (kernel.family == MixtureFamily::beta_constrained &&
      shell_radii.back() < kernel.beta_max)
    throw input_error("check_decay_condition: shells must exhaust the compact Theta "
                      "(last radius below beta_max)");

  // Sampled neighborhoods of y0 and gamma0.
  const double y_half = (kernel.y_hi - kernel.y_lo) / 100.0;
  std::vector<double> y_samples;
  for (int i = -4; i <= 4; ++i) {
    const double y = y0 + y_half * static_cast<double>(i) / 4.0;
    if (y >= kernel.y_lo && y <= kernel.y_hi) y_samples.push_back(y);
  }
  std::vector<double> gamma_samples;
  if (kernel.family == MixtureFamily::beta_free) {
    gamma_samples.push_back(1.0);  // unused by psi
  } else {
    const double g_half = std::max(0.01, 0.02 * gamma0);
    for (int i = -2; i <= 2; ++i) {
      const double g = gamma0 + g_half * static_cast<double>(i) / 2.0;
      if (kernel.gamma_in_bounds(g)) gamma_samples.push_back(g);
    }
    if (gamma_samples.empty()) gamma_samples.push_back(gamma0);
  }

  DecayReport report;
  report.epsilon = epsilon;
  report.family = family_name(kernel.family);

  for (double radius : shell_radii) {
    const double horizon = 4.0 * radius;
    // Theta samples in the complement of the shell.
    std::vector<Eigen::VectorXd> thetas;
    switch (kernel.family) {
      case MixtureFamily::gaussian_loc: {
        // Shell K_m = [y0 - radius, y0 + radius]; complement sampled outward.
        for (double t : decay_detail::log_spaced(radius, horizon, 64)) {
          Eigen::VectorXd a(1), b(1);
          a(0) = y0 + t;
          b(0) = y0 - t;
          thetas.push_back(a);
          thetas.push_back(b);
        }
        break;
      }
      case MixtureFamily::beta_constrained: {
        // Shell K_m = [1, min(radius, beta_max)]; compact Theta, so shells
        // eventually cover everything and the complement empties.
        const double cap = kernel.beta_max;
        if (radius < cap) {
          for (double t : decay_detail::log_spaced(radius, cap, 64)) {
            if (t <= radius) continue;
            Eigen::VectorXd a(1);
            a(0) = std::min(t, cap);
            thetas.push_back(a);
          }
        }
        break;
      }
      case MixtureFamily::beta_free: {
        // Shell K_m = [1, radius]^2; the diagonal, the axes and the corner
        // band of the complement carry the growth.
        for (double t : decay_detail::log_spaced(std::max(1.0, radius), horizon, 96)) {
          if (t <= radius) continue;
          Eigen::VectorXd diag(2), ax(2), bx(2);
          diag << t, t;
          ax << t, 1.0;
          bx << 1.0, t;
          thetas.push_back(diag);
          thetas.push_back(ax);
          thetas.push_back(bx);
        }
        break;
      }
    }

    DecayShellRow row;
    row.radius = radius;
    row.complement_empty = thetas.empty();
    double sup = 0.0;
    for (const auto& theta : thetas) {
      for (double g : gamma_samples) {
        for (double y : y_samples) sup = std::max(sup, kernel.psi(y, g, theta));
      }
    }
    row.sup = sup;
    report.rows.push_back(row);
  }

  // Passes when from some shell on every sup is below epsilon and the profile
  // no longer grows. A single trailing shell cannot witness a trend, so the
  // tail must span at least two shells unless its complement is empty
  // (compact Theta fully covered).
  bool passed = false;
  for (std::size_t m = 0; m < report.rows.size() && !passed; ++m) {
    if (m + 1 == report.rows.size() && !report.rows[m].complement_empty) break;
    bool ok = true;
    for (std::size_t k = m; k < report.rows.size(); ++k) {
      ok = ok && report.rows[k].sup < epsilon;
      if (k > m) ok = ok && report.rows[k].sup <= report.rows[k - 1].sup * (1.0 + 1e-9);
    }
    passed = ok;
  }
  report.passed = passed;
  return report;
}

}  // namespace dsb
