#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "dsb/errors.hpp"

namespace dsb {

// Points closer than this are treated as duplicates; protects the Cholesky
// factorization of near-singular covariance matrices downstream.
constexpr double kMinPointSeparation = 1e-12;

// A point of the predictor space, a box in R^p with the Euclidean metric.
struct IndexPoint {
  std::vector<double> coords;

  IndexPoint() = default;
  explicit IndexPoint(std::vector<double> c) : coords(std::move(c)) {
    for (double v : coords) {
      if (!std::isfinite(v)) throw input_error("IndexPoint: coordinates must be finite");
    }
    if (coords.empty()) throw input_error("IndexPoint: dimension must be >= 1");
  }

  std::size_t dim() const { return coords.size(); }
  double operator[](std::size_t i) const { return coords[i]; }
  bool operator==(const IndexPoint& other) const { return coords == other.coords; }
};

inline double distance(const IndexPoint& a, const IndexPoint& b) {
  if (a.dim() != b.dim()) {
    throw input_error("distance: dimension mismatch (" + std::to_string(a.dim()) + " vs " +
                      std::to_string(b.dim()) + ")");
  }
  double sq = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    const double d = a.coords[i] - b.coords[i];
    sq += d * d;
  }
  return std::sqrt(sq);
}

// Axis-aligned box [lo, hi]^p.
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  Box() = default;
  Box(std::vector<double> l, std::vector<double> h) : lo(std::move(l)), hi(std::move(h)) {
    if (lo.empty() || lo.size() != hi.size()) throw input_error("Box: lo/hi size mismatch");
    for (std::size_t i = 0; i < lo.size(); ++i) {
      if (!std::isfinite(lo[i]) || !std::isfinite(hi[i]))
        throw input_error("Box: bounds must be finite");
      if (!(lo[i] < hi[i]))
        throw input_error("Box: degenerate axis " + std::to_string(i) + " (lo >= hi)");
    }
  }

  static Box interval(double lo, double hi) { return Box({lo}, {hi}); }

  std::size_t dim() const { return lo.size(); }

  bool contains(const IndexPoint& p, double slack = 0.0) const {
    if (p.dim() != dim()) return false;
    for (std::size_t i = 0; i < dim(); ++i) {
      if (p.coords[i] < lo[i] - slack || p.coords[i] > hi[i] + slack) return false;
    }
    return true;
  }
};

// Finite ordered set of index points inside a domain box. Immutable after
// construction; the ordering is part of the value.
class LocationSet {
 public:
  LocationSet(Box domain, std::vector<IndexPoint> points)
      : domain_(std::move(domain)), points_(std::move(points)) {
    if (points_.empty()) throw input_error("LocationSet: must contain at least one point");
    for (const auto& p : points_) {
      if (p.dim() != domain_.dim())
        throw input_error("LocationSet: point dimension does not match domain");
      if (!domain_.contains(p, 1e-12))
        throw input_error("LocationSet: point outside the domain box");
    }
    for (std::size_t i = 0; i < points_.size(); ++i) {
      for (std::size_t j = i + 1; j < points_.size(); ++j) {
        if (distance(points_[i], points_[j]) <= kMinPointSeparation) {
          throw input_error("LocationSet: duplicate points at indices " + std::to_string(i) +
                            " and " + std::to_string(j));
        }
      }
    }
  }

  std::size_t size() const { return points_.size(); }
  std::size_t dim() const { return domain_.dim(); }
  const IndexPoint& point(std::size_t i) const { return points_[i]; }
  const std::vector<IndexPoint>& points() const { return points_; }
  const Box& domain() const { return domain_; }

 private:
  Box domain_;
  std::vector<IndexPoint> points_;
};

using LocationSetPtr = std::shared_ptr<const LocationSet>;

// Uniform lattice over a box, endpoints included when resolution >= 2;
// resolution 1 places the axis at the lower corner. Points are ordered with
// the first axis varying slowest (odometer order), deterministically.
inline LocationSet build_grid(const Box& domain, const std::vector<int>& resolution) {
  if (resolution.size() != domain.dim())
    throw input_error("build_grid: resolution list does not match box dimension");
  for (int r : resolution) {
    if (r < 1) throw input_error("build_grid: resolution must be >= 1 per axis");
  }

  std::vector<std::vector<double>> axis_values(domain.dim());
  for (std::size_t a = 0; a < domain.dim(); ++a) {
    const int r = resolution[a];
    axis_values[a].reserve(static_cast<std::size_t>(r));
    if (r == 1) {
      axis_values[a].push_back(domain.lo[a]);
    } else {
      for (int k = 0; k < r; ++k) {
        const double t = static_cast<double>(k) / static_cast<double>(r - 1);
        axis_values[a].push_back(domain.lo[a] + t * (domain.hi[a] - domain.lo[a]));
      }
      axis_values[a].back() = domain.hi[a];
    }
  }

  std::size_t total = 1;
  for (int r : resolution) total *= static_cast<std::size_t>(r);

  std::vector<IndexPoint> points;
  points.reserve(total);
  std::vector<std::size_t> odo(domain.dim(), 0);
  for (std::size_t n = 0; n < total; ++n) {
    std::vector<double> coords(domain.dim());
    for (std::size_t a = 0; a < domain.dim(); ++a) coords[a] = axis_values[a][odo[a]];
    points.emplace_back(std::move(coords));
    for (std::size_t a = domain.dim(); a-- > 0;) {
      if (++odo[a] < axis_values[a].size()) break;
      odo[a] = 0;
    }
  }
  return LocationSet(domain, std::move(points));
}

inline LocationSetPtr build_grid_ptr(const Box& domain, const std::vector<int>& resolution) {
  return std::make_shared<const LocationSet>(build_grid(domain, resolution));
}

}  // namespace dsb
