// Command-line driver: every pipeline stage as a subcommand sharing one
// config format and a deterministic master-seed scheme.
#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

#include "nutsedge/annotations.hpp"
#include "nutsedge/compose.hpp"
#include "nutsedge/config.hpp"
#include "nutsedge/eval.hpp"
#include "nutsedge/image_io.hpp"
#include "nutsedge/losses.hpp"
#include "nutsedge/nspm.hpp"
#include "nutsedge/rng.hpp"
#include "nutsedge/skeldecode.hpp"
#include "nutsedge/texsynth.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace nutsedge;

namespace {

int g_jobs = 1;

void log_line(const std::string& stage, const std::string& event, json extra = json::object()) {
  extra["stage"] = stage;
  extra["event"] = event;
  std::cerr << extra.dump() << "\n";
}

/// Run fn(i) for i in [0, n) on up to g_jobs threads. Work is static by
/// index so results are a pure function of i; callers write results into
/// index-addressed slots, keeping output independent of the thread count.
template <typename Fn>
void parallel_for(long n, Fn&& fn) {
  const int jobs = std::max(1, static_cast<int>(std::min<long>(g_jobs, n)));
  if (jobs == 1) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> workers;
  std::exception_ptr error;
  std::mutex error_mutex;
  for (int w = 0; w < jobs; ++w)
    workers.emplace_back([&, w] {
      try {
        for (long i = w; i < n; i += jobs) fn(i);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  for (auto& t : workers) t.join();
  if (error) std::rethrow_exception(error);
}

std::vector<fs::path> sorted_files(const fs::path& dir, const std::string& extension) {
  if (!fs::is_directory(dir)) throw std::runtime_error("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == extension)
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  return files;
}

std::string zero_pad(long i, int width = 3) {
  std::string s = std::to_string(i);
  while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
  return s;
}

AnnotationSet load_labelme_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  json doc;
  in >> doc;
  return parse_labelme(doc);
}

void write_json(const json& doc, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << doc.dump(2) << "\n";
}

/// Skeleton segments can poke slightly past the image edge when an instance
/// is clipped at the border; the labelme schema requires in-image points.
Vec2 clamp_to_image(const Vec2& p, int width, int height) {
  return Vec2(std::clamp(p.x(), 0.0, static_cast<double>(width - 1)),
              std::clamp(p.y(), 0.0, static_cast<double>(height - 1)));
}

AnnotationSet clamped_annotations(const AnnotationSet& set) {
  AnnotationSet out = set;
  for (auto& [box_index, sk] : out.skeletons) {
    // border-clipped instances keep their full midrib; pull endpoints into
    // the visible box so the annotation stays self-consistent on reload
    const auto& b = set.boxes.at(box_index);
    const auto clamp_to_box = [&](const Vec2& p) {
      const Vec2 q = clamp_to_image(p, set.image_width, set.image_height);
      return Vec2(std::clamp(q.x(), static_cast<double>(b.u_left), static_cast<double>(b.u_right)),
                  std::clamp(q.y(), static_cast<double>(b.v_bottom), static_cast<double>(b.v_top)));
    };
    for (auto& seg : sk.segments) {
      seg.a = clamp_to_box(seg.a);
      seg.b = clamp_to_box(seg.b);
    }
  }
  for (auto& poly : out.polygons)
    for (auto& p : poly) p = clamp_to_image(p, set.image_width, set.image_height);
  return out;
}

void boxes_and_skeletons(const AnnotationSet& set, std::vector<BoundingBox>& boxes,
                         std::vector<Skeleton>& skeletons) {
  for (const auto& [box_index, sk] : set.skeletons) {
    boxes.push_back(set.boxes.at(box_index));
    skeletons.push_back(sk);
  }
}

// ---------------------------------------------------------------- subcommands

int run_sample_strata(const fs::path& images, double fraction, int strata, uint64_t seed,
                      const fs::path& out) {
  const auto files = sorted_files(images, ".png");
  if (files.empty()) throw std::runtime_error("no .png images in " + images.string());
  std::vector<ImageBrightness> brightness(files.size());
  parallel_for(static_cast<long>(files.size()), [&](long i) {
    brightness[i] = {files[i].filename().string(), mean_value_channel(load_png(files[i]))};
  });
  const auto selected = stratified_sample(brightness, strata, fraction, seed);
  std::ofstream out_file(out);
  if (!out_file) throw std::runtime_error("cannot write " + out.string());
  for (const auto& id : selected) out_file << id << "\n";
  log_line("sample-strata", "done",
           {{"images", files.size()}, {"selected", selected.size()}, {"out", out.string()}});
  return 0;
}

int run_extract_templates(const fs::path& image_path, const fs::path& annotations,
                          const fs::path& out) {
  const RasterImage image = load_png(image_path);
  const AnnotationSet set = load_labelme_file(annotations);
  if (set.polygons.size() != set.skeletons.size())
    throw std::runtime_error("extract-templates: need one skeleton per polygon (got " +
                             std::to_string(set.polygons.size()) + " polygons, " +
                             std::to_string(set.skeletons.size()) + " skeletons)");
  fs::create_directories(out);
  for (size_t i = 0; i < set.polygons.size(); ++i) {
    const auto tmpl = extract_template(image, set.polygons[i], set.skeletons[i].second);
    save_template(tmpl, out, "template_" + zero_pad(static_cast<long>(i)));
  }
  log_line("extract-templates", "done", {{"templates", set.polygons.size()}});
  return 0;
}

int run_synth_background(const fs::path& patches_dir, int width, int height, int count,
                         uint64_t seed, int window, double epsilon, const fs::path& out) {
  std::vector<BackgroundPatch> patches;
  for (const auto& file : sorted_files(patches_dir, ".png"))
    patches.push_back({load_png(file), file.string()});
  if (patches.empty()) throw std::runtime_error("no .png patches in " + patches_dir.string());
  fs::create_directories(out);
  parallel_for(count, [&](long i) {
    SynthParams params{window, epsilon, width, height, derive_seed(seed, "synth", i)};
    const RasterImage background = synthesize_background(patches, params);
    save_png(background, out / ("background_" + zero_pad(i) + ".png"));
    log_line("synth-background", "image", {{"index", i}});
  });
  log_line("synth-background", "done", {{"count", count}});
  return 0;
}

int run_compose(const fs::path& backgrounds_dir, const fs::path& templates_dir,
                const fs::path& config_path, const fs::path& out) {
  const PipelineConfig cfg = load_config(config_path);
  const auto background_files = sorted_files(backgrounds_dir, ".png");
  if (background_files.empty())
    throw std::runtime_error("no .png backgrounds in " + backgrounds_dir.string());
  std::vector<RasterImage> backgrounds;
  for (const auto& file : background_files) backgrounds.push_back(load_png(file));
  const auto templates = load_template_library(templates_dir);

  fs::create_directories(out);
  std::vector<ComposeResult> results(cfg.count);
  parallel_for(cfg.count, [&](long i) {
    results[i] = compose_image(backgrounds[i % backgrounds.size()], templates,
                               cfg.composeConfig(), derive_seed(cfg.seed, "compose", i));
    log_line("compose", "image",
             {{"index", i}, {"instances", results[i].instances.size()}});
  });

  std::vector<std::pair<CocoImageRecord, std::vector<PlacedInstance>>> dataset;
  for (long i = 0; i < cfg.count; ++i) {
    const std::string stem = "img_" + zero_pad(i);
    save_png(results[i].image, out / (stem + ".png"));
    AnnotationSet set = results[i].annotations;
    set.image_path = stem + ".png";
    write_json(serialize_labelme(clamped_annotations(set)), out / (stem + ".json"));
    dataset.push_back({{static_cast<int>(i), stem + ".png", results[i].image.width(),
                        results[i].image.height()},
                       results[i].instances});
  }
  write_json(export_coco(dataset), out / "coco.json");
  log_line("compose", "done", {{"count", cfg.count}});
  return 0;
}

int run_nspm(const fs::path& annotations, double sigma, const fs::path& out,
             const fs::path& preview) {
  const AnnotationSet set = load_labelme_file(annotations);
  std::vector<BoundingBox> boxes;
  std::vector<Skeleton> skeletons;
  boxes_and_skeletons(set, boxes, skeletons);
  const FloatGrid map =
      rasterize_nspm(boxes, skeletons, set.image_width, set.image_height, NspmParams{sigma});
  save_pfm(map, out);
  if (!preview.empty()) save_map_preview_png(map, preview);
  log_line("nspm", "done", {{"boxes", boxes.size()}, {"out", out.string()}});
  return 0;
}

int run_estimate_sigma(const fs::path& templates_dir) {
  const auto templates = load_template_library(templates_dir);
  const double sigma = estimate_sigma(templates);
  std::cout << json{{"sigma", sigma}, {"templates", templates.size()}}.dump() << "\n";
  log_line("estimate-sigma", "done", {{"sigma", sigma}});
  return 0;
}

int run_loss(const std::string& mode, const fs::path& label_path, const fs::path& pred_path,
             const fs::path& boxes_path) {
  const FloatGrid label = load_pfm(label_path);
  const FloatGrid pred = load_pfm(pred_path);
  const AnnotationSet set = load_labelme_file(boxes_path);

  LossReport report;
  if (mode == "ce") report = cross_entropy(label, pred, set.boxes);
  else if (mode == "kl") report = kl_divergence(label, pred, set.boxes);
  else if (mode == "kl-literal") report = kl_divergence(label, pred, set.boxes, KlMode::Literal);
  else if (mode == "binary-kl") report = kl_divergence(label, pred, set.boxes, KlMode::Binary);
  else throw std::runtime_error("unknown loss mode: " + mode);

  json per_box = json::array();
  for (const auto& [id, value] : report.per_box) per_box.push_back({id, value});
  std::cout << json{{"mode", mode},
                    {"total", report.total},
                    {"pixel_count", report.pixel_count},
                    {"per_box", per_box}}
                   .dump()
            << "\n";
  return 0;
}

DecodeParams load_decode_params(const fs::path& path) {
  DecodeParams params;
  if (path.empty()) return params;
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::runtime_error("decode params: expected key=value");
    std::istringstream key_stream(line.substr(0, eq));
    std::string key;
    key_stream >> key;
    const std::string value = line.substr(eq + 1);
    if (key == "dilate_radius") params.dilate_radius = std::stoi(value);
    else if (key == "erode_radius") params.erode_radius = std::stoi(value);
    else if (key == "blur_sigma") params.blur_sigma = std::stod(value);
    else if (key == "nms_threshold") params.nms_threshold = std::stod(value);
    else if (key == "min_component") params.min_component = std::stoi(value);
    else throw std::runtime_error("decode params: unknown key '" + key + "'");
  }
  return params;
}

int run_decode(const fs::path& map_path, const fs::path& params_path, const fs::path& out) {
  const FloatGrid map = load_pfm(map_path);
  const DecodeParams params = load_decode_params(params_path);
  const auto decoded = nms_skeleton(smooth_map(map, params), params);
  write_json(json{{"skeleton", skeleton_to_json(decoded.skeleton)},
                  {"pixel_count", decoded.pixel_mask.cast<long>().sum()}},
             out);
  log_line("decode", "done", {{"segments", decoded.skeleton.segments.size()}});
  return 0;
}

struct ImageEvaluation {
  std::string name;
  std::vector<BoxMetrics> box_metrics;  // one per skeleton-labeled human box
  long consistent = 0;
  double density = -1.0;  // < 0 when undefined for the image
  std::vector<ReviewCase> review;
};

ImageEvaluation evaluate_image(const fs::path& annotation_path, const fs::path& model_dir,
                               const PipelineConfig& cfg) {
  ImageEvaluation result;
  result.name = annotation_path.stem().string();
  const AnnotationSet human = load_labelme_file(annotation_path);
  const AnnotationSet model = load_labelme_file(model_dir / (result.name + ".json"));
  const FloatGrid output_map = load_pfm(model_dir / (result.name + ".pfm"));

  std::vector<BoundingBox> h_boxes, o_boxes;
  std::vector<Skeleton> h_skeletons, o_skeletons;
  boxes_and_skeletons(human, h_boxes, h_skeletons);
  boxes_and_skeletons(model, o_boxes, o_skeletons);

  const FloatGrid label_map = rasterize_nspm(h_boxes, h_skeletons, human.image_width,
                                             human.image_height, cfg.nspmParams());

  // decoded output skeleton pixels, pooled over all model instances
  Grid<uint8_t> s_o_mask = Grid<uint8_t>::Zero(human.image_height, human.image_width);
  for (const auto& sk : o_skeletons)
    for (const auto& p : rasterize_skeleton(sk, human.image_width, human.image_height))
      s_o_mask(p.v, p.u) = 1;

  std::vector<std::vector<PixelPoint>> s_h_pixels;
  for (const auto& sk : h_skeletons)
    s_h_pixels.push_back(rasterize_skeleton(sk, human.image_width, human.image_height));

  std::vector<std::vector<PairMetrics>> pairs(h_boxes.size(),
                                              std::vector<PairMetrics>(o_boxes.size()));
  for (size_t h = 0; h < h_boxes.size(); ++h)
    for (size_t o = 0; o < o_boxes.size(); ++o)
      pairs[h][o] = pair_metrics(label_map, output_map, s_h_pixels[h], s_o_mask, h_boxes[h],
                                 o_boxes[o], cfg.threshold_t, cfg.corr_dist_d);

  const auto partition = partition_matches(static_cast<int>(h_boxes.size()),
                                           static_cast<int>(o_boxes.size()), pairs);
  result.consistent = static_cast<long>(partition.consistent.size());

  result.box_metrics.assign(h_boxes.size(), BoxMetrics{});
  for (size_t h = 0; h < h_boxes.size(); ++h)
    result.box_metrics[h].skeleton_pixels = static_cast<long>(s_h_pixels[h].size());
  for (const auto& [h, o] : partition.consistent) {
    result.box_metrics[h].r_iou = pairs[h][o].r_iou;
    result.box_metrics[h].c_s = pairs[h][o].c_s;
  }

  for (int h : partition.inconsistent_human)
    result.review.push_back({0, result.name + ".png", h_boxes[h], "human_only", ""});
  for (int o : partition.inconsistent_output)
    result.review.push_back({0, result.name + ".png", o_boxes[o], "model_only", ""});

  if (!o_boxes.empty()) {
    const Grid<uint8_t> weed = (label_map > cfg.threshold_t).cast<uint8_t>();
    if (weed.cast<long>().sum() > 0) result.density = density_ratio(o_boxes, weed);
  }
  return result;
}

int run_evaluate(const fs::path& annotations_dir, const fs::path& model_dir,
                 const fs::path& config_path, const fs::path& report_path,
                 const fs::path& review_dir) {
  const PipelineConfig cfg = load_config(config_path);
  const auto annotation_files = sorted_files(annotations_dir, ".json");
  if (annotation_files.empty())
    throw std::runtime_error("no .json annotations in " + annotations_dir.string());

  // keep only labelme documents (the directory may also hold dataset-level
  // JSON such as the COCO export)
  std::vector<fs::path> label_files;
  for (const auto& file : annotation_files) {
    std::ifstream in(file);
    json doc;
    in >> doc;
    if (doc.contains("shapes")) label_files.push_back(file);
    else log_line("evaluate", "skip-non-annotation", {{"file", file.filename().string()}});
  }
  if (label_files.empty())
    throw std::runtime_error("no labelme annotations in " + annotations_dir.string());

  std::vector<ImageEvaluation> evaluations(label_files.size());
  parallel_for(static_cast<long>(label_files.size()), [&](long i) {
    evaluations[i] = evaluate_image(label_files[i], model_dir, cfg);
    log_line("evaluate", "image", {{"name", evaluations[i].name}});
  });

  std::vector<std::vector<BoxMetrics>> per_image;
  long consistent = 0;
  std::vector<ReviewCase> review;
  for (auto& ev : evaluations) {
    per_image.push_back(ev.box_metrics);
    consistent += ev.consistent;
    for (auto& c : ev.review) {
      c.case_id = static_cast<int>(review.size()) + 1;
      review.push_back(c);
    }
  }
  const SetAggregate agg = weighted_aggregates(per_image);

  json images = json::array();
  size_t included = 0;
  for (size_t i = 0; i < evaluations.size(); ++i) {
    json record{{"name", evaluations[i].name}};
    const bool excluded = std::find(agg.excluded_images.begin(), agg.excluded_images.end(),
                                    static_cast<int>(i)) != agg.excluded_images.end();
    if (!excluded) {
      record["r_s_iou"] = agg.r_s_iou[included];
      record["c_ss"] = agg.c_ss[included];
      ++included;
    }
    if (evaluations[i].density >= 0.0) record["density_ratio"] = evaluations[i].density;
    images.push_back(record);
  }

  if (!review.empty()) {
    fs::create_directories(review_dir);
    for (const auto& c : review) {
      const fs::path image_path = annotations_dir / c.image;
      if (fs::exists(image_path)) export_review_queue({c}, load_png(image_path), review_dir);
    }
    save_review_manifest(review, review_dir / "manifest.csv");
  }

  write_json(json{{"images", images},
                  {"mean_r_iou", agg.mean_r_iou},
                  {"mean_c_s", agg.mean_c_s},
                  {"consistent", consistent},
                  {"review_cases", review.size()}},
             report_path);
  log_line("evaluate", "done", {{"consistent", consistent}, {"review_cases", review.size()}});
  return 0;
}

int run_finalize(const fs::path& report_path, const fs::path& verdicts_path) {
  std::ifstream in(report_path);
  if (!in) throw std::runtime_error("cannot open " + report_path.string());
  json report;
  in >> report;
  in.close();

  std::vector<std::string> verdicts;
  if (fs::exists(verdicts_path) && fs::file_size(verdicts_path) > 0)
    for (const auto& c : load_review_manifest(verdicts_path)) verdicts.push_back(c.verdict);
  const FinalRates rates = final_rates(report.at("consistent").get<long>(), verdicts);

  report["final_rates"] = {{"r_a", rates.r_a},
                           {"r_fp", rates.r_fp},
                           {"r_fn", rates.r_fn},
                           {"n_d", rates.n_d},
                           {"undetermined", rates.undetermined}};
  write_json(report, report_path);
  std::cout << report["final_rates"].dump() << "\n";
  log_line("finalize", "done", {{"r_a", rates.r_a}});
  return 0;
}

// ---------------------------------------------------------------------- demo

RasterImage make_toy_patch(uint64_t seed, int size, uint8_t base_r, uint8_t base_g,
                           uint8_t base_b) {
  Rng rng(seed);
  RasterImage patch(size, size);
  for (int v = 0; v < size; ++v)
    for (int u = 0; u < size; ++u) {
      const int jitter = static_cast<int>(rng.uniformInt(-25, 25));
      patch.at(u, v, 0) = static_cast<uint8_t>(std::clamp(base_r + jitter, 0, 255));
      patch.at(u, v, 1) = static_cast<uint8_t>(std::clamp(base_g + jitter, 0, 255));
      patch.at(u, v, 2) = static_cast<uint8_t>(std::clamp(base_b + jitter / 2, 0, 255));
    }
  return patch;
}

/// A toy plant: two crossing leaves, mask = pixels within 1.5 px of either
/// midrib, dark-green patch pixels.
NutsedgeTemplate make_toy_template(uint64_t seed, int size) {
  Rng rng(seed);
  NutsedgeTemplate tmpl;
  const double c = (size - 1) / 2.0;
  tmpl.skeleton.segments = {{Vec2(1, c), Vec2(size - 2, c)}, {Vec2(c, 1), Vec2(c, size - 2)}};
  tmpl.mask = Grid<uint8_t>::Zero(size, size);
  tmpl.patch = RasterImage(size, size);
  std::vector<PixelPoint> support;
  for (int v = 0; v < size; ++v)
    for (int u = 0; u < size; ++u) {
      double d = std::numeric_limits<double>::infinity();
      for (const auto& seg : tmpl.skeleton.segments)
        d = std::min(d, point_segment_distance(Vec2(u, v), seg));
      if (d > 1.5) continue;
      tmpl.mask(v, u) = 1;
      support.push_back({u, v});
      const int jitter = static_cast<int>(rng.uniformInt(-15, 15));
      tmpl.patch.at(u, v, 0) = static_cast<uint8_t>(std::clamp(20 + jitter, 0, 255));
      tmpl.patch.at(u, v, 1) = static_cast<uint8_t>(std::clamp(120 + jitter, 0, 255));
      tmpl.patch.at(u, v, 2) = static_cast<uint8_t>(std::clamp(30 + jitter, 0, 255));
    }
  tmpl.box = bbox_of_pixels(support);
  tmpl.polygon = {Vec2(tmpl.box.u_left, tmpl.box.v_bottom), Vec2(tmpl.box.u_right, tmpl.box.v_bottom),
                  Vec2(tmpl.box.u_right, tmpl.box.v_top), Vec2(tmpl.box.u_left, tmpl.box.v_top)};
  return tmpl;
}

int run_demo(uint64_t seed, const fs::path& out) {
  fs::create_directories(out);

  // toy inputs
  const fs::path photos = out / "toy" / "photos";
  const fs::path patches = out / "toy" / "patches";
  const fs::path templates = out / "toy" / "templates";
  fs::create_directories(photos);
  fs::create_directories(patches);
  fs::create_directories(templates);
  for (int i = 0; i < 6; ++i) {
    const auto brightness = static_cast<uint8_t>(40 + 30 * i);
    save_png(make_toy_patch(derive_seed(seed, "photo", i), 32, brightness,
                            static_cast<uint8_t>(brightness + 30), brightness),
             photos / ("photo_" + zero_pad(i) + ".png"));
  }
  save_png(make_toy_patch(derive_seed(seed, "patch", 0), 24, 60, 130, 55), patches / "a.png");
  save_png(make_toy_patch(derive_seed(seed, "patch", 1), 24, 70, 140, 60), patches / "b.png");
  save_template(make_toy_template(derive_seed(seed, "template", 0), 15), templates,
                "template_000");
  save_template(make_toy_template(derive_seed(seed, "template", 1), 19), templates,
                "template_001");
  log_line("demo", "toy-data", {{"out", (out / "toy").string()}});

  run_sample_strata(photos, 0.34, 3, derive_seed(seed, "sample", 0), out / "sample.txt");
  run_synth_background(patches, 64, 64, 1, derive_seed(seed, "background", 0), 9, 0.1,
                       out / "backgrounds");

  PipelineConfig cfg;
  cfg.seed = seed;
  cfg.count = 2;
  cfg.density_min = 300;  // toy image is 64x64; headline densities would round to 0 instances
  cfg.density_max = 600;
  cfg.neighborhood = 9;
  {
    std::ofstream config_file(out / "config.cfg");
    config_file << serialize_config(cfg);
  }
  run_compose(out / "backgrounds", templates, out / "config.cfg", out / "dataset");

  const fs::path maps = out / "maps";
  const fs::path model = out / "model";
  fs::create_directories(maps);
  fs::create_directories(model);
  fs::create_directories(out / "decoded");
  for (const auto& annotation : sorted_files(out / "dataset", ".json")) {
    const std::string stem = annotation.stem().string();
    if (stem == "coco") continue;
    run_nspm(annotation, cfg.sigma, maps / (stem + ".pfm"), maps / (stem + "_preview.png"));
    run_decode(maps / (stem + ".pfm"), "", out / "decoded" / (stem + ".json"));

    // model output for evaluation: the map plus boxes/skeletons decoded from it
    fs::copy_file(maps / (stem + ".pfm"), model / (stem + ".pfm"),
                  fs::copy_options::overwrite_existing);
    std::ifstream decoded_in(out / "decoded" / (stem + ".json"));
    json decoded_doc;
    decoded_in >> decoded_doc;
    const Skeleton decoded = skeleton_from_json(decoded_doc.at("skeleton"));
    const AnnotationSet human = load_labelme_file(annotation);

    // group the decoded polyline into chains (consecutive segments share an
    // endpoint) and emit one box per chain
    AnnotationSet model_set;
    model_set.image_path = stem + ".png";
    model_set.image_width = human.image_width;
    model_set.image_height = human.image_height;
    std::vector<Skeleton> chains;
    for (const auto& seg : decoded.segments) {
      if (chains.empty() || (chains.back().segments.back().b - seg.a).norm() > 1e-9)
        chains.emplace_back();
      chains.back().segments.push_back(seg);
    }
    for (const auto& chain : chains) {
      // box from the clamped, rounded endpoints so every serialized skeleton
      // point falls inside it regardless of segment direction
      std::vector<PixelPoint> endpoints;
      for (const auto& seg : chain.segments)
        for (const Vec2& p : {seg.a, seg.b}) {
          const Vec2 q = clamp_to_image(p, human.image_width, human.image_height);
          endpoints.push_back(
              {static_cast<int>(std::lround(q.x())), static_cast<int>(std::lround(q.y()))});
        }
      const BoundingBox box = bbox_of_pixels(endpoints);
      model_set.skeletons.emplace_back(static_cast<int>(model_set.boxes.size()), chain);
      model_set.boxes.push_back(box);
    }
    write_json(serialize_labelme(clamped_annotations(model_set)), model / (stem + ".json"));
  }

  run_evaluate(out / "dataset", model, out / "config.cfg", out / "report.json", out / "review");

  // a demo has no human reviewer; unresolved cases are filed as undetermined
  const fs::path manifest = out / "review" / "manifest.csv";
  const fs::path verdicts = out / "verdicts.csv";
  if (fs::exists(manifest)) {
    auto cases = load_review_manifest(manifest);
    for (auto& c : cases)
      if (c.verdict.empty()) c.verdict = "undetermined";
    save_review_manifest(cases, verdicts);
  } else {
    std::ofstream(verdicts).flush();
  }
  run_finalize(out / "report.json", verdicts);
  log_line("demo", "done", {{"out", out.string()}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic nutsedge dataset toolkit"};
  app.set_version_flag("--version", "nutsedge 1.0.0");
  app.require_subcommand(1);

  std::string root;
  app.add_option("--root", root, "Directory all relative paths are resolved against");
  app.add_option("--jobs", g_jobs, "Worker thread count (output is identical for any value)")
      ->check(CLI::PositiveNumber);

  std::string images_dir, out_path, image_path, annotations_path, patches_dir, backgrounds_dir;
  std::string templates_dir, config_path, map_path, params_path, label_path, pred_path;
  std::string boxes_path, model_dir, report_path, review_dir, verdicts_path, mode = "ce";
  std::string preview_path;
  double fraction = 0.05, sigma = 12.0, epsilon = 0.1;
  int strata = 3, width = 0, height = 0, count = 1, window = 25;
  uint64_t seed = 0;

  auto* sample = app.add_subcommand("sample-strata", "Stratified image sampling by brightness");
  sample->add_option("--images", images_dir)->required();
  sample->add_option("--fraction", fraction);
  sample->add_option("--strata", strata);
  sample->add_option("--seed", seed);
  sample->add_option("--out", out_path)->required();

  auto* extract = app.add_subcommand("extract-templates", "Cut plant templates out of an image");
  extract->add_option("--image", image_path)->required();
  extract->add_option("--annotations", annotations_path)->required();
  extract->add_option("--out", out_path)->required();

  auto* synth = app.add_subcommand("synth-background", "Synthesize turf backgrounds");
  synth->add_option("--patches", patches_dir)->required();
  synth->add_option("--width", width)->required();
  synth->add_option("--height", height)->required();
  synth->add_option("--count", count);
  synth->add_option("--seed", seed);
  synth->add_option("--window", window);
  synth->add_option("--epsilon", epsilon);
  synth->add_option("--out", out_path)->required();

  auto* compose = app.add_subcommand("compose", "Paste templates onto backgrounds");
  compose->add_option("--backgrounds", backgrounds_dir)->required();
  compose->add_option("--templates", templates_dir)->required();
  compose->add_option("--config", config_path)->required();
  compose->add_option("--out", out_path)->required();

  auto* nspm = app.add_subcommand("nspm", "Rasterize the skeleton probability map");
  nspm->add_option("--annotations", annotations_path)->required();
  nspm->add_option("--sigma", sigma);
  nspm->add_option("--out", out_path)->required();
  nspm->add_option("--preview", preview_path);

  auto* est = app.add_subcommand("estimate-sigma", "Half-normal fit of the Gaussian scale");
  est->add_option("--templates", templates_dir)->required();

  auto* loss = app.add_subcommand("loss", "Compare a label map against a prediction map");
  loss->add_option("--mode", mode)->check(CLI::IsMember({"ce", "kl", "kl-literal", "binary-kl"}));
  loss->add_option("--label", label_path)->required();
  loss->add_option("--pred", pred_path)->required();
  loss->add_option("--boxes", boxes_path)->required();

  auto* decode = app.add_subcommand("decode", "Decode a skeleton from a probability map");
  decode->add_option("--map", map_path)->required();
  decode->add_option("--params", params_path);
  decode->add_option("--out", out_path)->required();

  auto* evaluate = app.add_subcommand("evaluate", "Score model output against human labels");
  evaluate->add_option("--annotations", annotations_path)->required();
  evaluate->add_option("--model-out", model_dir)->required();
  evaluate->add_option("--config", config_path)->required();
  evaluate->add_option("--report", report_path)->required();
  evaluate->add_option("--review-queue", review_dir)->required();

  auto* finalize = app.add_subcommand("finalize", "Fold review verdicts into final rates");
  finalize->add_option("--report", report_path)->required();
  finalize->add_option("--verdicts", verdicts_path)->required();

  auto* demo = app.add_subcommand("demo", "Full pipeline on generated toy data");
  demo->add_option("--seed", seed);
  demo->add_option("--out", out_path)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (!root.empty()) fs::current_path(root);
    if (sample->parsed())
      return run_sample_strata(images_dir, fraction, strata, seed, out_path);
    if (extract->parsed()) return run_extract_templates(image_path, annotations_path, out_path);
    if (synth->parsed())
      return run_synth_background(patches_dir, width, height, count, seed, window, epsilon,
                                  out_path);
    if (compose->parsed())
      return run_compose(backgrounds_dir, templates_dir, config_path, out_path);
    if (nspm->parsed()) return run_nspm(annotations_path, sigma, out_path, preview_path);
    if (est->parsed()) return run_estimate_sigma(templates_dir);
    if (loss->parsed()) return run_loss(mode, label_path, pred_path, boxes_path);
    if (decode->parsed()) return run_decode(map_path, params_path, out_path);
    if (evaluate->parsed())
      return run_evaluate(annotations_path, model_dir, config_path, report_path, review_dir);
    if (finalize->parsed()) return run_finalize(report_path, verdicts_path);
    if (demo->parsed()) return run_demo(seed, out_path);
  } catch (const std::exception& e) {
    std::cerr << json{{"error", e.what()}}.dump() << "\n";
    return 1;
  }
  return 1;
}
