#include "crowdnav/cost/obstacle_field.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace crowdnav::cost {

namespace {

// 1-D squared Euclidean distance transform (lower envelope of parabolas).
void edt_1d(const std::vector<double>& f, std::vector<double>& d, std::vector<int>& v,
            std::vector<double>& z) {
  const int n = static_cast<int>(f.size());
  constexpr double kInf = std::numeric_limits<double>::infinity();
  int k = -1;
  for (int q = 0; q < n; ++q) {
    if (!std::isfinite(f[q])) continue;
    if (k < 0) {
      k = 0;
      v[0] = q;
      z[0] = -kInf;
      z[1] = kInf;
      continue;
    }
    double s = 0.0;
    while (true) {
      const int p = v[k];
      s = ((f[q] + q * q) - (f[p] + p * p)) / (2.0 * (q - p));
      if (s <= z[k] && k > 0) {
        --k;
      } else {
        break;
      }
    }
    if (s <= z[k]) {
      // k == 0 and the new parabola dominates everywhere.
      v[0] = q;
      z[0] = -kInf;
      z[1] = kInf;
      continue;
    }
    ++k;
    v[k] = q;
    z[k] = s;
    z[k + 1] = kInf;
  }
  if (k < 0) {
    std::fill(d.begin(), d.end(), kInf);
    return;
  }
  int j = 0;
  for (int q = 0; q < n; ++q) {
    while (z[j + 1] < q) ++j;
    const double dq = q - v[j];
    d[q] = dq * dq + f[v[j]];
  }
}

}  // namespace

ObstacleField::ObstacleField(Vec2 origin, double resolution, int width, int height,
                             std::vector<std::uint8_t> occupancy)
    : origin_(origin),
      resolution_(resolution),
      width_(width),
      height_(height),
      occupancy_(std::move(occupancy)) {
  if (resolution <= 0.0 || width < 0 || height < 0 ||
      occupancy_.size() != static_cast<std::size_t>(width) * height) {
    throw std::invalid_argument("ObstacleField: inconsistent grid dimensions");
  }
  compute_esdf();
}

ObstacleField ObstacleField::from_boxes(Vec2 origin, double resolution, int width, int height,
                                        const std::vector<Box>& boxes) {
  std::vector<std::uint8_t> occ(static_cast<std::size_t>(width) * height, 0);
  for (int iy = 0; iy < height; ++iy) {
    for (int ix = 0; ix < width; ++ix) {
      const Vec2 c = origin + resolution * Vec2(ix + 0.5, iy + 0.5);
      for (const Box& b : boxes) {
        if (c.x() >= b.min.x() && c.x() <= b.max.x() && c.y() >= b.min.y() &&
            c.y() <= b.max.y()) {
          occ[static_cast<std::size_t>(iy) * width + ix] = 1;
          break;
        }
      }
    }
  }
  return ObstacleField(origin, resolution, width, height, std::move(occ));
}

void ObstacleField::compute_esdf() {
  const std::size_t n = occupancy_.size();
  esdf_.assign(n, kFarDistance);
  if (n == 0) return;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i) grid[i] = occupancy_[i] ? 0.0 : kInf;

  const int longest = std::max(width_, height_);
  std::vector<double> f(longest), d(longest), z(longest + 1);
  std::vector<int> v(longest);

  // Columns (along y), then rows (along x).
  f.resize(height_);
  d.resize(height_);
  for (int ix = 0; ix < width_; ++ix) {
    for (int iy = 0; iy < height_; ++iy) f[iy] = grid[idx(ix, iy)];
    edt_1d(f, d, v, z);
    for (int iy = 0; iy < height_; ++iy) grid[idx(ix, iy)] = d[iy];
  }
  f.resize(width_);
  d.resize(width_);
  for (int iy = 0; iy < height_; ++iy) {
    for (int ix = 0; ix < width_; ++ix) f[ix] = grid[idx(ix, iy)];
    edt_1d(f, d, v, z);
    for (int ix = 0; ix < width_; ++ix) grid[idx(ix, iy)] = d[ix];
  }
  for (std::size_t i = 0; i < n; ++i) {
    esdf_[i] = std::isfinite(grid[i]) ? std::min(std::sqrt(grid[i]) * resolution_, kFarDistance)
                                      : kFarDistance;
  }
}

bool ObstacleField::in_bounds(const Vec2& p) const {
  if (empty()) return false;
  const Vec2 rel = (p - origin_) / resolution_;
  return rel.x() >= 0.0 && rel.y() >= 0.0 && rel.x() < width_ && rel.y() < height_;
}

Vec2 ObstacleField::cell_center(int ix, int iy) const {
  return origin_ + resolution_ * Vec2(ix + 0.5, iy + 0.5);
}

bool ObstacleField::occupied_at(const Vec2& p) const {
  if (!in_bounds(p)) return false;
  const Vec2 rel = (p - origin_) / resolution_;
  return cell_occupied(static_cast<int>(rel.x()), static_cast<int>(rel.y()));
}

ObstacleField::Distance ObstacleField::distance(const Vec2& p) const {
  Distance out;
  if (!in_bounds(p)) return out;
  out.in_map = true;
  // Continuous index relative to cell centers; clamped so the outer half
  // cells reuse the edge values.
  double u = (p.x() - origin_.x()) / resolution_ - 0.5;
  double w = (p.y() - origin_.y()) / resolution_ - 0.5;
  bool clamp_u = false, clamp_w = false;
  if (u < 0.0) { u = 0.0; clamp_u = true; }
  if (w < 0.0) { w = 0.0; clamp_w = true; }
  if (u > width_ - 1) { u = width_ - 1; clamp_u = true; }
  if (w > height_ - 1) { w = height_ - 1; clamp_w = true; }
  int i0 = std::min(static_cast<int>(std::floor(u)), std::max(width_ - 2, 0));
  int j0 = std::min(static_cast<int>(std::floor(w)), std::max(height_ - 2, 0));
  const int i1 = std::min(i0 + 1, width_ - 1);
  const int j1 = std::min(j0 + 1, height_ - 1);
  const double fx = u - i0;
  const double fy = w - j0;
  const double d00 = esdf_[idx(i0, j0)], d10 = esdf_[idx(i1, j0)];
  const double d01 = esdf_[idx(i0, j1)], d11 = esdf_[idx(i1, j1)];
  out.value = (1 - fx) * (1 - fy) * d00 + fx * (1 - fy) * d10 + (1 - fx) * fy * d01 + fx * fy * d11;
  const double gx = ((1 - fy) * (d10 - d00) + fy * (d11 - d01)) / resolution_;
  const double gy = ((1 - fx) * (d01 - d00) + fx * (d11 - d10)) / resolution_;
  out.grad = Vec2(clamp_u ? 0.0 : gx, clamp_w ? 0.0 : gy);
  return out;
}

}  // namespace crowdnav::cost
