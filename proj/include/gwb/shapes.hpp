#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "gwb/matrix.hpp"
#include "gwb/rng.hpp"
#include "gwb/spaces.hpp"

namespace gwb {

/// Synthetic 2D shape outlines with Gaussian jitter, used as KNN classes and
/// barycenter targets. All clouds carry uniform weights.
enum class ShapeKind { ring, ellipse, star, cross };

inline PointCloud make_shape(ShapeKind kind, std::size_t n, double jitter,
                             std::uint64_t seed) {
  if (n < 3) throw std::domain_error("shapes need n >= 3 points");
  Rng rng(seed);
  Matrix pts(n, 2);
  const double two_pi = 2.0 * M_PI;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = two_pi * static_cast<double>(i) / static_cast<double>(n);
    double x = 0.0, y = 0.0;
    switch (kind) {
      case ShapeKind::ring:
        x = std::cos(t);
        y = std::sin(t);
        break;
      case ShapeKind::ellipse:
        x = 1.5 * std::cos(t);
        y = 0.6 * std::sin(t);
        break;
      case ShapeKind::star: {
        // Five spikes: radius swings between 0.45 and 1.
        const double radius = 0.725 + 0.275 * std::cos(5.0 * t);
        x = radius * std::cos(t);
        y = radius * std::sin(t);
        break;
      }
      case ShapeKind::cross: {
        // Perimeter of a plus sign with arm half-length 1, half-width 0.3,
        // walked counterclockwise from (a, -w); total length 8a.
        const double a = 1.0, w = 0.3;
        double s = 8.0 * a * static_cast<double>(i) / static_cast<double>(n);
        const double seg[12] = {2 * w, a - w, a - w, 2 * w, a - w, a - w,
                                2 * w, a - w, a - w, 2 * w, a - w, a - w};
        const double px[13] = {a, a, w, w, -w, -w, -a, -a, -w, -w, w, w, a};
        const double py[13] = {-w, w, w, a, a, w, w, -w, -w, -a, -a, -w, -w};
        std::size_t k = 0;
        while (k + 1 < 12 && s > seg[k]) {
          s -= seg[k];
          ++k;
        }
        const double frac = std::min(s / seg[k], 1.0);
        x = px[k] + frac * (px[k + 1] - px[k]);
        y = py[k] + frac * (py[k + 1] - py[k]);
        break;
      }
    }
    pts(i, 0) = x + jitter * rng.normal();
    pts(i, 1) = y + jitter * rng.normal();
  }
  return PointCloud(std::move(pts));
}

inline ShapeKind shape_from_name(const std::string& name) {
  if (name == "ring") return ShapeKind::ring;
  if (name == "ellipse") return ShapeKind::ellipse;
  if (name == "star") return ShapeKind::star;
  if (name == "cross") return ShapeKind::cross;
  throw std::domain_error("unknown shape: " + name);
}

}  // namespace gwb
