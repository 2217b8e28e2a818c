#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace nutsedge {

// Row-major so that (row, col) indexing matches raster scan order.
template <typename Scalar>
using Grid = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Per-pixel real values; used for both annotation maps (P_S) and
/// model-output maps (P_o). Indexed as (v, u) = (row, column). Kept in
/// double precision in memory; the PFM interchange format is float32.
using FloatGrid = Grid<double>;

using Vec2 = Eigen::Vector2d;

struct PixelPoint {
  int u = 0;  // column
  int v = 0;  // row
  friend bool operator==(const PixelPoint&, const PixelPoint&) = default;
};

/// Axis-aligned box over pixel indices, inclusive on all four edges.
/// Origin is top-left: v_bottom is the numerically smaller row index.
struct BoundingBox {
  int u_left = 0;
  int v_bottom = 0;
  int u_right = 0;
  int v_top = 0;

  int width() const { return u_right - u_left + 1; }
  int height() const { return v_top - v_bottom + 1; }
  long area() const { return static_cast<long>(width()) * height(); }
  bool contains(int u, int v) const {
    return u >= u_left && u <= u_right && v >= v_bottom && v <= v_top;
  }
  bool contains(const PixelPoint& p) const { return contains(p.u, p.v); }
  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// 8-bit interleaved RGB raster.
class RasterImage {
 public:
  RasterImage() = default;
  RasterImage(int width, int height, uint8_t fill = 0)
      : width_(width), height_(height) {
    if (width < 1 || height < 1) throw std::invalid_argument("RasterImage: dims must be >= 1");
    pixels_.assign(static_cast<size_t>(width) * height * 3, fill);
  }
  RasterImage(int width, int height, std::vector<uint8_t> rgb)
      : width_(width), height_(height), pixels_(std::move(rgb)) {
    if (width < 1 || height < 1) throw std::invalid_argument("RasterImage: dims must be >= 1");
    if (pixels_.size() != static_cast<size_t>(width) * height * 3)
      throw std::invalid_argument("RasterImage: pixel buffer size mismatch");
  }

  int width() const { return width_; }
  int height() const { return height_; }
  bool inBounds(int u, int v) const { return u >= 0 && u < width_ && v >= 0 && v < height_; }

  uint8_t& at(int u, int v, int c) { return pixels_[(static_cast<size_t>(v) * width_ + u) * 3 + c]; }
  uint8_t at(int u, int v, int c) const { return pixels_[(static_cast<size_t>(v) * width_ + u) * 3 + c]; }

  const std::vector<uint8_t>& pixels() const { return pixels_; }
  std::vector<uint8_t>& pixels() { return pixels_; }

  friend bool operator==(const RasterImage&, const RasterImage&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<uint8_t> pixels_;
};

/// Tightest box containing every point. Throws on an empty set.
BoundingBox bbox_of_pixels(const std::vector<PixelPoint>& points);

inline void require(bool cond, const char* msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace nutsedge
