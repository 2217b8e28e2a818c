#include "nutsedge/losses.hpp"

#include <cmath>

namespace nutsedge {
namespace {

constexpr double kLogFloor = 1e-7;

void check_dims(const FloatGrid& a, const FloatGrid& b, const std::vector<BoundingBox>& region) {
  require(a.rows() == b.rows() && a.cols() == b.cols(), "loss: map dimension mismatch");
  for (const auto& box : region)
    require(box.u_left >= 0 && box.v_bottom >= 0 && box.u_right < a.cols() && box.v_top < a.rows(),
            "loss: box outside map");
}

template <typename PixelTerm>
LossReport accumulate(const std::vector<BoundingBox>& region, PixelTerm&& term) {
  LossReport report;
  for (size_t i = 0; i < region.size(); ++i) {
    const auto& box = region[i];
    double value = 0.0;
    for (int v = box.v_bottom; v <= box.v_top; ++v)
      for (int u = box.u_left; u <= box.u_right; ++u) value += term(u, v);
    report.per_box.emplace_back(static_cast<int>(i), value);
    report.total += value;
    report.pixel_count += box.area();
  }
  require(report.pixel_count > 0, "loss: empty region");
  return report;
}

}  // namespace

LossReport cross_entropy(const FloatGrid& label, const FloatGrid& pred,
                         const std::vector<BoundingBox>& region) {
  check_dims(label, pred, region);
  return accumulate(region, [&](int u, int v) {
    const double p1 = label(v, u);
    require(p1 == 0.0 || p1 == 1.0, "cross_entropy: label map not binary");
    if (p1 == 0.0) return 0.0;
    return -std::log(std::max(static_cast<double>(pred(v, u)), kLogFloor));
  });
}

LossReport kl_divergence(const FloatGrid& label, const FloatGrid& pred,
                         const std::vector<BoundingBox>& region, KlMode mode) {
  check_dims(label, pred, region);
  return accumulate(region, [&](int u, int v) {
    const double p1 = label(v, u);
    const double p2 = pred(v, u);
    require(p1 >= 0.0 && p1 <= 1.0 && p2 >= 0.0 && p2 <= 1.0, "kl_divergence: values outside [0,1]");
    double term = 0.0;
    if (p1 > 0.0)
      term = p1 * std::log(std::max(p1, kLogFloor) / std::max(p2, kLogFloor));
    switch (mode) {
      case KlMode::Standard:
        return term;
      case KlMode::Literal:
        return -term;
      case KlMode::Binary: {
        const double q1 = 1.0 - p1, q2 = 1.0 - p2;
        if (q1 > 0.0) term += q1 * std::log(std::max(q1, kLogFloor) / std::max(q2, kLogFloor));
        return term;
      }
    }
    return term;
  });
}

}  // namespace nutsedge
