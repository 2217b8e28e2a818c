#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "nutsedge/annotations.hpp"
#include "nutsedge/types.hpp"

namespace nutsedge {

struct ModelOutput {
  std::vector<std::pair<BoundingBox, double>> boxes;  // box + confidence
  FloatGrid prob_map;
  Grid<uint8_t> skeleton_pixels;  // decoded S_o mask; may be empty
};

/// IoU of the super-threshold pixel sets of the two maps. 1 if both sets
/// are empty, 0 if exactly one is.
double region_iou(const FloatGrid& label_map, const FloatGrid& output_map, double threshold);

/// C_s = |{p in S_o : min-distance(p, S_h) <= d}| / |S_h|. May exceed 1
/// when S_o is denser than S_h; reported unclamped.
double skeleton_similarity(const std::vector<PixelPoint>& s_o, const std::vector<PixelPoint>& s_h,
                           double d);

/// Unit-step sampling of segments, rounded to pixels, deduplicated,
/// clipped to the image.
std::vector<PixelPoint> rasterize_skeleton(const Skeleton& skeleton, int width, int height);

struct BoxMetrics {
  double r_iou = 0.0;
  double c_s = 0.0;
  long skeleton_pixels = 0;  // |S_h| for this box
};

struct SetAggregate {
  std::vector<double> r_s_iou;  // per image
  std::vector<double> c_ss;
  double mean_r_iou = 0.0;  // over included images
  double mean_c_s = 0.0;
  std::vector<int> excluded_images;  // zero labeled skeleton pixels
};

/// Skeleton-size-weighted per-image aggregates and their means. The
/// literal weights are (1/n_b)*(|S_h|/c_IS); `normalized` drops the 1/n_b
/// factor so weights sum to 1.
SetAggregate weighted_aggregates(const std::vector<std::vector<BoxMetrics>>& per_image,
                                 bool normalized = false);

struct PairMetrics {
  double r_iou = 0.0;
  double c_s = 0.0;
};

/// Pairwise metrics for one (human box, output box) pair: r_IoU on the
/// box-intersection region, C_s between the in-box skeleton pixel sets.
PairMetrics pair_metrics(const FloatGrid& label_map, const FloatGrid& output_map,
                         const std::vector<PixelPoint>& s_h_pixels,
                         const Grid<uint8_t>& s_o_mask, const BoundingBox& human_box,
                         const BoundingBox& output_box, double threshold, double corr_dist);

struct MatchPartition {
  std::vector<std::pair<int, int>> consistent;  // R_a: matched (human, output) index pairs
  std::vector<int> inconsistent_human;          // R_c entries from B_h
  std::vector<int> inconsistent_output;         // R_c entries from B_o
};

/// Greedy one-to-one matching by descending r_IoU; a matched pair joins
/// R_a iff (r_IoU >= iou_threshold) or (C_s >= cs_threshold). Everything
/// unmatched lands in R_c.
MatchPartition partition_matches(int human_count, int output_count,
                                 const std::vector<std::vector<PairMetrics>>& pairs,
                                 double iou_threshold = 0.5, double cs_threshold = 0.7);

struct ReviewCase {
  int case_id = 0;
  std::string image;
  BoundingBox box;
  std::string source;   // "human_only" | "model_only"
  std::string verdict;  // empty until review: model_fp | model_fn | human_fn | undetermined
};

/// Writes one padded crop PNG per case plus the manifest
/// (case_id, image, box, source, verdict — one record per line).
void export_review_queue(const std::vector<ReviewCase>& cases, const RasterImage& image,
                         const std::filesystem::path& dir);
void save_review_manifest(const std::vector<ReviewCase>& cases, const std::filesystem::path& path);
std::vector<ReviewCase> load_review_manifest(const std::filesystem::path& path);

struct FinalRates {
  double r_a = 0.0;
  double r_fp = 0.0;
  double r_fn = 0.0;
  long n_d = 0;
  long undetermined = 0;  // excluded from every rate
};

/// N_d = R_a ∪ B^o_FN ∪ B^h_FN. Every review verdict must be filled in.
FinalRates final_rates(long consistent_count, const std::vector<std::string>& verdicts);

/// r_d = (c_a/c_o) / (c_s/c_I): nutsedge density inside the union of the
/// output boxes relative to the whole image.
double density_ratio(const std::vector<BoundingBox>& output_boxes,
                     const Grid<uint8_t>& nutsedge_pixels);

}  // namespace nutsedge
