#pragma once

#include <cstdint>
#include <vector>

#include "crowdnav/common/geometry.hpp"

namespace crowdnav::cost {

// Axis-aligned box [min, max] in world coordinates.
struct Box {
  Vec2 min = Vec2::Zero();
  Vec2 max = Vec2::Zero();
};

// Occupancy grid plus its Euclidean distance field. Cell (ix, iy) covers
// [origin + (ix, iy) * res, origin + (ix + 1, iy + 1) * res).
class ObstacleField {
 public:
  // Distance used when the map holds no occupied cell at all.
  static constexpr double kFarDistance = 100.0;

  ObstacleField() = default;
  ObstacleField(Vec2 origin, double resolution, int width, int height,
                std::vector<std::uint8_t> occupancy);

  // Rasterizes boxes: a cell is occupied if its center lies in a box.
  static ObstacleField from_boxes(Vec2 origin, double resolution, int width, int height,
                                  const std::vector<Box>& boxes);

  const Vec2& origin() const { return origin_; }
  double resolution() const { return resolution_; }
  int width() const { return width_; }
  int height() const { return height_; }
  bool empty() const { return width_ == 0 || height_ == 0; }

  bool in_bounds(const Vec2& p) const;
  bool cell_occupied(int ix, int iy) const { return occupancy_[idx(ix, iy)] != 0; }
  double cell_esdf(int ix, int iy) const { return esdf_[idx(ix, iy)]; }
  Vec2 cell_center(int ix, int iy) const;
  // False outside the map.
  bool occupied_at(const Vec2& p) const;
  const std::vector<std::uint8_t>& occupancy() const { return occupancy_; }

  struct Distance {
    double value = 0.0;
    Vec2 grad = Vec2::Zero();
    bool in_map = false;
  };
  // Bilinear interpolation of the per-cell distance over cell centers.
  Distance distance(const Vec2& p) const;

 private:
  int idx(int ix, int iy) const { return iy * width_ + ix; }
  void compute_esdf();

  Vec2 origin_ = Vec2::Zero();
  double resolution_ = 0.1;
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> occupancy_;
  std::vector<double> esdf_;
};

}  // namespace crowdnav::cost
