#include "drgen/pipeline.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <mutex>
#include <thread>

#include <nlohmann/json.hpp>

#include "drgen/errors.hpp"
#include "drgen/image_io.hpp"
#include "drgen/labeler.hpp"
#include "drgen/postprocess.hpp"
#include "drgen/renderer.hpp"

namespace drgen {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

void write_text(const fs::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

void make_dirs(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string() + ": " + ec.message());
}

struct Job {
  std::string_view split;
  std::uint64_t index;
  fs::path root;
};

}  // namespace

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw IoError("SHA-256 computation failed");
  }
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < len; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

SceneAssets load_assets(const GenerationConfig& cfg) {
  SceneAssets assets;
  for (std::size_t c = 0; c < cfg.classes.size(); ++c) {
    Mesh mesh = load_mesh(cfg.source_dir / cfg.classes[c].mesh);
    mesh.class_id = static_cast<int>(c);
    validate(mesh);
    assets.meshes.push_back(std::move(mesh));
    assets.class_names.push_back(cfg.classes[c].name);
  }
  if (!cfg.texture_dir.empty()) {
    const fs::path dir = cfg.source_dir / cfg.texture_dir;
    if (!fs::is_directory(dir)) throw IoError("texture directory not found: " + dir.string());
    for (const auto& p : list_textures(dir)) assets.textures.push_back(load_texture(p));
  }
  return assets;
}

std::string image_basename(std::uint64_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06llu", static_cast<unsigned long long>(index));
  return buf;
}

SynthesizedImage synthesize_image(const GenerationConfig& cfg, const SceneAssets& assets,
                                  std::uint64_t master_seed, std::string_view split,
                                  std::uint64_t index) {
  SynthesizedImage out;
  auto t0 = Clock::now();
  out.plan = plan_image(cfg, assets.meshes, assets.textures.size(), master_seed, split, index);
  out.times.sample_ms = ms_since(t0);

  t0 = Clock::now();
  out.frame = render(out.plan, assets.meshes, assets.textures,
                     RenderOptions{cfg.i_type, ground_half_extent(cfg)});
  out.times.render_ms = ms_since(t0);

  t0 = Clock::now();
  out.labels = annotate(out.plan, assets.meshes, cfg.bb_method);
  out.times.annotate_ms = ms_since(t0);

  t0 = Clock::now();
  RandomStream noise = derive_image_streams(master_seed, split, index).noise;
  apply_postprocess(out.frame, cfg.postprocess, noise);
  out.times.postprocess_ms = ms_since(t0);
  return out;
}

double TimingStats::median_total_ms() const {
  if (per_image.empty()) return 0.0;
  std::vector<double> totals;
  for (const auto& t : per_image) totals.push_back(t.total_ms);
  std::sort(totals.begin(), totals.end());
  const std::size_t n = totals.size();
  return n % 2 ? totals[n / 2] : (totals[n / 2 - 1] + totals[n / 2]) / 2.0;
}

namespace {

json stage_summary(const std::vector<StageTimes>& times, double StageTimes::*field) {
  std::vector<double> v;
  for (const auto& t : times) v.push_back(t.*field);
  if (v.empty()) return {{"median", 0.0}, {"mean", 0.0}, {"max", 0.0}};
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  const double median = n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
  double sum = 0.0;
  for (double x : v) sum += x;
  return {{"median", median}, {"mean", sum / static_cast<double>(n)}, {"max", v.back()}};
}

}  // namespace

json to_json(const RunManifest& m) {
  json doc = {
      {"tool_version", m.tool_version},
      {"config_sha256", m.config_digest},
      {"master_seed", m.master_seed},
      {"splits", {{"train", {{"count", m.n_train}, {"first_index", 0}}},
                  {"valid", {{"count", m.n_valid}, {"first_index", m.n_train}}}}},
      {"classes", m.class_names},
      {"i_type", m.i_type},
      {"bb_method", m.bb_method},
  };
  if (!m.groups.empty()) doc["groups"] = m.groups;
  if (m.timing) {
    const auto& t = *m.timing;
    json per_image = json::array();
    for (const auto& s : t.per_image) {
      per_image.push_back({{"sample", s.sample_ms}, {"render", s.render_ms}, {"annotate", s.annotate_ms},
                           {"postprocess", s.postprocess_ms}, {"write", s.write_ms}, {"total", s.total_ms}});
    }
    doc["timing_ms"] = {
        {"workers", t.workers},
        {"stages", {{"sample", stage_summary(t.per_image, &StageTimes::sample_ms)},
                    {"render", stage_summary(t.per_image, &StageTimes::render_ms)},
                    {"annotate", stage_summary(t.per_image, &StageTimes::annotate_ms)},
                    {"postprocess", stage_summary(t.per_image, &StageTimes::postprocess_ms)},
                    {"write", stage_summary(t.per_image, &StageTimes::write_ms)},
                    {"total", stage_summary(t.per_image, &StageTimes::total_ms)}}},
        {"per_image", per_image},
    };
  }
  return doc;
}

RunManifest manifest_from_json(const json& doc) {
  try {
    RunManifest m;
    m.tool_version = doc.at("tool_version").get<std::string>();
    m.config_digest = doc.at("config_sha256").get<std::string>();
    m.master_seed = doc.at("master_seed").get<std::uint64_t>();
    m.n_train = doc.at("splits").at("train").at("count").get<std::size_t>();
    m.n_valid = doc.at("splits").at("valid").at("count").get<std::size_t>();
    m.class_names = doc.at("classes").get<std::vector<std::string>>();
    m.i_type = doc.value("i_type", "RGB");
    m.bb_method = doc.value("bb_method", "AllPoint");
    if (doc.contains("groups")) m.groups = doc.at("groups").get<std::map<std::string, std::string>>();
    if (doc.contains("timing_ms")) {
      TimingStats t;
      const auto& tj = doc.at("timing_ms");
      t.workers = tj.value("workers", 1u);
      for (const auto& s : tj.at("per_image")) {
        t.per_image.push_back({s.at("sample").get<double>(), s.at("render").get<double>(),
                               s.at("annotate").get<double>(), s.at("postprocess").get<double>(),
                               s.at("write").get<double>(), s.at("total").get<double>()});
      }
      m.timing = std::move(t);
    }
    return m;
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed manifest: ") + e.what());
  }
}

RunManifest generate(const GenerationConfig& cfg, const GenerateOptions& options) {
  validate(cfg);
  const SceneAssets assets = load_assets(cfg);

  RunManifest manifest;
  manifest.tool_version = std::string(kToolVersion);
  manifest.config_digest = sha256_hex(canonical_text(cfg));
  manifest.master_seed = options.seed;
  manifest.n_train = options.n_train;
  manifest.n_valid = options.n_valid;
  manifest.class_names = assets.class_names;
  manifest.i_type = to_string(cfg.i_type);
  manifest.bb_method = to_string(cfg.bb_method);

  std::string classes_txt;
  for (const auto& name : assets.class_names) classes_txt += name + "\n";

  std::vector<Job> jobs;
  for (auto [split, first, count] : {std::tuple{kTrainSplit, std::uint64_t{0}, options.n_train},
                                     std::tuple{kValidSplit, std::uint64_t{options.n_train}, options.n_valid}}) {
    const fs::path root = options.out_dir / std::string(split);
    make_dirs(root / "images");
    make_dirs(root / "labels");
    write_text(root / "classes.txt", classes_txt);
    for (std::uint64_t i = 0; i < count; ++i) jobs.push_back({split, first + i, root});
  }

  std::vector<StageTimes> times(jobs.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex error_mutex;
  std::size_t error_job = jobs.size();
  std::string error_message;
  bool error_is_io = false;

  auto worker = [&] {
    for (;;) {
      const std::size_t j = next.fetch_add(1);
      if (j >= jobs.size() || failed.load()) return;
      const Job& job = jobs[j];
      try {
        const auto start = Clock::now();
        SynthesizedImage img = synthesize_image(cfg, assets, options.seed, job.split, job.index);
        const auto write_start = Clock::now();
        const std::string base = image_basename(job.index);
        const fs::path image_dir = job.root / "images";
        if (cfg.i_type == ImageType::D) {
          write_image(img.frame, image_dir / (base + ".png"), ImageKind::Depth16);
        } else {
          write_image(img.frame, image_dir / (base + ".png"), ImageKind::Rgb);
          if (cfg.i_type == ImageType::RGBD) {
            write_image(img.frame, image_dir / (base + "_depth.png"), ImageKind::Depth16);
          }
        }
        write_text(job.root / "labels" / (base + ".txt"), to_yolo_lines(img.labels));
        img.times.write_ms = ms_since(write_start);
        img.times.total_ms = ms_since(start);
        times[j] = img.times;
      } catch (const std::exception& e) {
        std::lock_guard lock(error_mutex);
        failed.store(true);
        if (j < error_job) {
          error_job = j;
          error_is_io = dynamic_cast<const IoError*>(&e) != nullptr;
          error_message = "image " + std::string(job.split) + "/" + image_basename(job.index) +
                          " (index " + std::to_string(job.index) + ", seed " +
                          std::to_string(options.seed) + "): " + e.what();
        }
      }
    }
  };

  const unsigned n_workers = std::max(1u, options.workers);
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  }
  if (failed.load()) {
    if (error_is_io) throw IoError(error_message);
    throw ValidationError(error_message);
  }

  if (options.record_timing) manifest.timing = TimingStats{n_workers, times};

  for (auto split : {kTrainSplit, kValidSplit}) {
    json doc = to_json(manifest);
    doc["split"] = std::string(split);
    write_text(options.out_dir / std::string(split) / "manifest.json", doc.dump(2) + "\n");
  }
  write_text(options.out_dir / "manifest.json", to_json(manifest).dump(2) + "\n");
  return manifest;
}

Rgb8 class_color(int class_id) {
  static constexpr std::array<Rgb8, 10> kPalette{{{230, 25, 75},
                                                  {60, 180, 75},
                                                  {255, 225, 25},
                                                  {0, 130, 200},
                                                  {245, 130, 48},
                                                  {145, 30, 180},
                                                  {70, 240, 240},
                                                  {240, 50, 230},
                                                  {210, 245, 60},
                                                  {250, 190, 212}}};
  const auto n = static_cast<int>(kPalette.size());
  return kPalette[static_cast<std::size_t>(((class_id % n) + n) % n)];
}

std::array<int, 4> outline_pixels(const GroundTruthBox& box, int width, int height) {
  const PixelBox c = box.corners();
  const int x0 = std::clamp(static_cast<int>(std::floor(c.x_min * width)), 0, width - 1);
  const int y0 = std::clamp(static_cast<int>(std::floor(c.y_min * height)), 0, height - 1);
  const int x1 = std::clamp(static_cast<int>(std::ceil(c.x_max * width)) - 1, 0, width - 1);
  const int y1 = std::clamp(static_cast<int>(std::ceil(c.y_max * height)) - 1, 0, height - 1);
  return {x0, y0, std::max(x0, x1), std::max(y0, y1)};
}

Frame render_preview(const GenerationConfig& cfg, const SceneAssets& assets, std::uint64_t master_seed,
                     std::uint64_t index) {
  GenerationConfig rgb_cfg = cfg;
  rgb_cfg.i_type = ImageType::RGB;
  SynthesizedImage img = synthesize_image(rgb_cfg, assets, master_seed, kTrainSplit, index);
  Frame& f = img.frame;
  for (const auto& label : img.labels) {
    const auto [x0, y0, x1, y1] = outline_pixels(label, f.width, f.height);
    const Rgb8 color = class_color(label.class_id);
    for (int x = x0; x <= x1; ++x) {
      f.set_pixel(x, y0, color);
      f.set_pixel(x, y1, color);
    }
    for (int y = y0; y <= y1; ++y) {
      f.set_pixel(x0, y, color);
      f.set_pixel(x1, y, color);
    }
  }
  return std::move(img.frame);
}

void preview(const GenerationConfig& cfg, std::uint64_t master_seed, std::uint64_t index,
             const fs::path& out_png) {
  validate(cfg);
  const SceneAssets assets = load_assets(cfg);
  const Frame frame = render_preview(cfg, assets, master_seed, index);
  if (out_png.has_parent_path()) make_dirs(out_png.parent_path());
  write_image(frame, out_png, ImageKind::Rgb);
}

}  // namespace drgen
