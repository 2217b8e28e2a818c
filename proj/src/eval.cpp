#include "nutsedge/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "nutsedge/image_io.hpp"

namespace nutsedge {

double region_iou(const FloatGrid& label_map, const FloatGrid& output_map, double threshold) {
  require(label_map.rows() == output_map.rows() && label_map.cols() == output_map.cols(),
          "region_iou: map dimension mismatch");
  require(threshold > 0.0 && threshold < 1.0, "region_iou: threshold must be in (0,1)");
  const auto in_label = (label_map > threshold).eval();
  const auto in_output = (output_map > threshold).eval();
  const long inter = (in_label && in_output).count();
  const long uni = (in_label || in_output).count();
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double skeleton_similarity(const std::vector<PixelPoint>& s_o, const std::vector<PixelPoint>& s_h,
                           double d) {
  require(d > 0.0, "skeleton_similarity: distance must be > 0");
  require(!s_h.empty(), "skeleton_similarity: empty human skeleton");
  const double d2 = d * d;
  long corresponding = 0;
  for (const auto& p : s_o) {
    for (const auto& q : s_h) {
      const double du = p.u - q.u, dv = p.v - q.v;
      if (du * du + dv * dv <= d2) {
        ++corresponding;
        break;
      }
    }
  }
  return static_cast<double>(corresponding) / static_cast<double>(s_h.size());
}

std::vector<PixelPoint> rasterize_skeleton(const Skeleton& skeleton, int width, int height) {
  std::vector<PixelPoint> pixels;
  Grid<uint8_t> seen = Grid<uint8_t>::Zero(height, width);
  for (const auto& seg : skeleton.segments) {
    const double len = (seg.b - seg.a).norm();
    const int steps = std::max(1, static_cast<int>(std::ceil(len)));
    for (int i = 0; i <= steps; ++i) {
      const Vec2 p = seg.a + (static_cast<double>(i) / steps) * (seg.b - seg.a);
      const int u = static_cast<int>(std::lround(p.x()));
      const int v = static_cast<int>(std::lround(p.y()));
      if (u < 0 || u >= width || v < 0 || v >= height || seen(v, u)) continue;
      seen(v, u) = 1;
      pixels.push_back({u, v});
    }
  }
  return pixels;
}

SetAggregate weighted_aggregates(const std::vector<std::vector<BoxMetrics>>& per_image,
                                 bool normalized) {
  SetAggregate agg;
  double sum_iou = 0.0, sum_cs = 0.0;
  long included = 0;
  for (size_t i = 0; i < per_image.size(); ++i) {
    const auto& boxes = per_image[i];
    long c_is = 0;
    for (const auto& b : boxes) c_is += b.skeleton_pixels;
    if (boxes.empty() || c_is == 0) {
      agg.excluded_images.push_back(static_cast<int>(i));
      continue;
    }
    const double prefix = normalized ? 1.0 : 1.0 / static_cast<double>(boxes.size());
    double r_s_iou = 0.0, c_ss = 0.0;
    for (const auto& b : boxes) {
      const double w = static_cast<double>(b.skeleton_pixels) / static_cast<double>(c_is);
      r_s_iou += w * b.r_iou;
      c_ss += w * b.c_s;
    }
    r_s_iou *= prefix;
    c_ss *= prefix;
    agg.r_s_iou.push_back(r_s_iou);
    agg.c_ss.push_back(c_ss);
    sum_iou += r_s_iou;
    sum_cs += c_ss;
    ++included;
  }
  if (included > 0) {
    agg.mean_r_iou = sum_iou / included;
    agg.mean_c_s = sum_cs / included;
  }
  return agg;
}

PairMetrics pair_metrics(const FloatGrid& label_map, const FloatGrid& output_map,
                         const std::vector<PixelPoint>& s_h_pixels,
                         const Grid<uint8_t>& s_o_mask, const BoundingBox& human_box,
                         const BoundingBox& output_box, double threshold, double corr_dist) {
  require(label_map.rows() == output_map.rows() && label_map.cols() == output_map.cols(),
          "pair_metrics: map dimension mismatch");
  PairMetrics m;

  // r_IoU restricted to the box intersection
  const int u0 = std::max(human_box.u_left, output_box.u_left);
  const int u1 = std::min(human_box.u_right, output_box.u_right);
  const int v0 = std::max(human_box.v_bottom, output_box.v_bottom);
  const int v1 = std::min(human_box.v_top, output_box.v_top);
  long inter = 0, uni = 0;
  if (u0 <= u1 && v0 <= v1) {
    for (int v = v0; v <= v1; ++v)
      for (int u = u0; u <= u1; ++u) {
        const bool a = label_map(v, u) > threshold;
        const bool b = output_map(v, u) > threshold;
        inter += (a && b);
        uni += (a || b);
      }
    m.r_iou = uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
  }

  std::vector<PixelPoint> sh_in_box;
  for (const auto& p : s_h_pixels)
    if (human_box.contains(p)) sh_in_box.push_back(p);
  if (!sh_in_box.empty() && s_o_mask.size() > 0) {
    std::vector<PixelPoint> so_in_box;
    for (int v = std::max(0, output_box.v_bottom);
         v <= std::min<int>(s_o_mask.rows() - 1, output_box.v_top); ++v)
      for (int u = std::max(0, output_box.u_left);
           u <= std::min<int>(s_o_mask.cols() - 1, output_box.u_right); ++u)
        if (s_o_mask(v, u)) so_in_box.push_back({u, v});
    m.c_s = skeleton_similarity(so_in_box, sh_in_box, corr_dist);
  }
  return m;
}

MatchPartition partition_matches(int human_count, int output_count,
                                 const std::vector<std::vector<PairMetrics>>& pairs,
                                 double iou_threshold, double cs_threshold) {
  require(static_cast<int>(pairs.size()) == human_count, "partition_matches: pair matrix rows");
  for (const auto& row : pairs)
    require(static_cast<int>(row.size()) == output_count, "partition_matches: pair matrix cols");

  struct Candidate {
    int h, o;
    double r_iou;
  };
  std::vector<Candidate> candidates;
  for (int h = 0; h < human_count; ++h)
    for (int o = 0; o < output_count; ++o) candidates.push_back({h, o, pairs[h][o].r_iou});
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.r_iou != b.r_iou) return a.r_iou > b.r_iou;
    if (a.h != b.h) return a.h < b.h;
    return a.o < b.o;
  });

  MatchPartition partition;
  std::vector<bool> h_used(human_count, false), o_used(output_count, false);
  for (const auto& c : candidates) {
    if (h_used[c.h] || o_used[c.o]) continue;
    const auto& m = pairs[c.h][c.o];
    if (m.r_iou >= iou_threshold || m.c_s >= cs_threshold) {
      h_used[c.h] = true;
      o_used[c.o] = true;
      partition.consistent.emplace_back(c.h, c.o);
    }
  }
  for (int h = 0; h < human_count; ++h)
    if (!h_used[h]) partition.inconsistent_human.push_back(h);
  for (int o = 0; o < output_count; ++o)
    if (!o_used[o]) partition.inconsistent_output.push_back(o);
  return partition;
}

void save_review_manifest(const std::vector<ReviewCase>& cases,
                          const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_review_manifest: cannot open " + path.string());
  for (const auto& c : cases) {
    out << c.case_id << "," << c.image << "," << c.box.u_left << "," << c.box.v_bottom << ","
        << c.box.u_right << "," << c.box.v_top << "," << c.source << "," << c.verdict << "\n";
  }
}

std::vector<ReviewCase> load_review_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_review_manifest: cannot open " + path.string());
  std::vector<ReviewCase> cases;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() == 7) fields.push_back("");  // empty verdict
    if (fields.size() != 8)
      throw std::runtime_error("load_review_manifest: malformed record: " + line);
    ReviewCase c;
    c.case_id = std::stoi(fields[0]);
    c.image = fields[1];
    c.box = {std::stoi(fields[2]), std::stoi(fields[3]), std::stoi(fields[4]),
             std::stoi(fields[5])};
    c.source = fields[6];
    c.verdict = fields[7];
    cases.push_back(std::move(c));
  }
  return cases;
}

void export_review_queue(const std::vector<ReviewCase>& cases, const RasterImage& image,
                         const std::filesystem::path& dir) {
  require(!cases.empty(), "export_review_queue: empty case list");
  std::filesystem::create_directories(dir);
  for (const auto& c : cases) {
    // crop padded by 20% of the box extent on each side
    const int pad_u = static_cast<int>(std::lround(0.2 * c.box.width()));
    const int pad_v = static_cast<int>(std::lround(0.2 * c.box.height()));
    const int u0 = std::max(0, c.box.u_left - pad_u);
    const int u1 = std::min(image.width() - 1, c.box.u_right + pad_u);
    const int v0 = std::max(0, c.box.v_bottom - pad_v);
    const int v1 = std::min(image.height() - 1, c.box.v_top + pad_v);
    RasterImage crop(u1 - u0 + 1, v1 - v0 + 1);
    for (int v = v0; v <= v1; ++v)
      for (int u = u0; u <= u1; ++u)
        for (int ch = 0; ch < 3; ++ch) crop.at(u - u0, v - v0, ch) = image.at(u, v, ch);
    save_png(crop, dir / ("case_" + std::to_string(c.case_id) + ".png"));
  }
  save_review_manifest(cases, dir / "manifest.csv");
}

FinalRates final_rates(long consistent_count, const std::vector<std::string>& verdicts) {
  long model_fp = 0, model_fn = 0, human_fn = 0, undetermined = 0;
  for (const auto& v : verdicts) {
    if (v == "model_fp") ++model_fp;
    else if (v == "model_fn") ++model_fn;
    else if (v == "human_fn") ++human_fn;
    else if (v == "undetermined") ++undetermined;
    else if (v.empty()) throw std::invalid_argument("final_rates: missing verdict");
    else throw std::invalid_argument("final_rates: unknown verdict '" + v + "'");
  }
  FinalRates rates;
  rates.undetermined = undetermined;
  rates.n_d = consistent_count + model_fn + human_fn;
  require(rates.n_d > 0, "final_rates: empty detection set");
  rates.r_a = static_cast<double>(consistent_count) / static_cast<double>(rates.n_d);
  rates.r_fp = static_cast<double>(model_fp) / static_cast<double>(rates.n_d + model_fp);
  rates.r_fn = static_cast<double>(model_fn) / static_cast<double>(rates.n_d);
  return rates;
}

double density_ratio(const std::vector<BoundingBox>& output_boxes,
                     const Grid<uint8_t>& nutsedge_pixels) {
  require(!output_boxes.empty(), "density_ratio: no output boxes");
  const auto rows = nutsedge_pixels.rows(), cols = nutsedge_pixels.cols();
  long c_s = 0, c_a = 0, c_o = 0;
  for (Eigen::Index v = 0; v < rows; ++v)
    for (Eigen::Index u = 0; u < cols; ++u) {
      const bool weed = nutsedge_pixels(v, u) != 0;
      c_s += weed;
      bool covered = false;
      for (const auto& box : output_boxes)
        if (box.contains(static_cast<int>(u), static_cast<int>(v))) {
          covered = true;
          break;
        }
      if (covered) {
        ++c_o;
        c_a += weed;
      }
    }
  require(c_s > 0, "density_ratio: no nutsedge pixels in image");
  require(c_o > 0, "density_ratio: output boxes cover no pixels");
  const double c_i = static_cast<double>(rows) * cols;
  return (static_cast<double>(c_a) / c_o) / (static_cast<double>(c_s) / c_i);
}

}  // namespace nutsedge
