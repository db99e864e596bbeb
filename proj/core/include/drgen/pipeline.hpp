#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "drgen/boxes.hpp"
#include "drgen/config.hpp"
#include "drgen/evaluator.hpp"
#include "drgen/frame.hpp"
#include "drgen/geometry.hpp"
#include "drgen/sampler.hpp"

namespace drgen {

inline constexpr std::string_view kToolVersion = DRGEN_VERSION;
inline constexpr std::string_view kTrainSplit = "train";
inline constexpr std::string_view kValidSplit = "valid";

/// Meshes (index = class id), the sorted texture bank and class names.
struct SceneAssets {
  std::vector<Mesh> meshes;
  std::vector<Texture> textures;
  std::vector<std::string> class_names;
};

/// Resolves mesh and texture paths against cfg.source_dir.
SceneAssets load_assets(const GenerationConfig& cfg);

struct StageTimes {
  double sample_ms = 0.0;
  double render_ms = 0.0;
  double annotate_ms = 0.0;
  double postprocess_ms = 0.0;
  double write_ms = 0.0;
  double total_ms = 0.0;
};

struct SynthesizedImage {
  ScenePlan plan;
  Frame frame;
  std::vector<GroundTruthBox> labels;
  StageTimes times;
};

/// Everything for one image except file output: plan, render, labels,
/// postprocessing. Depends only on (cfg, assets, seed, split, index).
SynthesizedImage synthesize_image(const GenerationConfig& cfg, const SceneAssets& assets,
                                  std::uint64_t master_seed, std::string_view split,
                                  std::uint64_t index);

/// Zero-padded basename of a dataset image, e.g. "000042".
std::string image_basename(std::uint64_t index);

struct GenerateOptions {
  std::filesystem::path out_dir;
  std::size_t n_train = 0;
  std::size_t n_valid = 0;
  std::uint64_t seed = 0;
  unsigned workers = 1;
  // Wall-clock statistics vary run to run; when off the output tree is a
  // pure function of (config, seed, counts).
  bool record_timing = false;
};

struct TimingStats {
  unsigned workers = 1;
  std::vector<StageTimes> per_image;  // in index order, train then valid

  double median_total_ms() const;
};

struct RunManifest {
  std::string tool_version;
  std::string config_digest;  // SHA-256 of canonical_text(config)
  std::uint64_t master_seed = 0;
  std::size_t n_train = 0;
  std::size_t n_valid = 0;
  std::vector<std::string> class_names;
  std::string i_type;
  std::string bb_method;
  std::map<std::string, std::string> groups;  // basename -> tag, optional
  std::optional<TimingStats> timing;
};

nlohmann::json to_json(const RunManifest& manifest);
RunManifest manifest_from_json(const nlohmann::json& doc);

std::string sha256_hex(std::string_view bytes);

/// Writes <out>/train and <out>/valid, each with images/, labels/,
/// classes.txt and manifest.json, plus <out>/manifest.json. Image indices
/// run 0..n_train-1 for train and continue for valid. The tree does not
/// depend on the worker count. A failing image aborts the run with its
/// split, index and seed in the message.
RunManifest generate(const GenerationConfig& cfg, const GenerateOptions& options);

/// Colors used for preview box outlines, by class id modulo the palette.
Rgb8 class_color(int class_id);

/// Train-split image `index` as generated, with each label drawn as a 1-px
/// outline. Always rendered in RGB.
Frame render_preview(const GenerationConfig& cfg, const SceneAssets& assets, std::uint64_t master_seed,
                     std::uint64_t index);
void preview(const GenerationConfig& cfg, std::uint64_t master_seed, std::uint64_t index,
             const std::filesystem::path& out_png);

/// Outline pixel bounds of a label in a width x height image:
/// {x0, y0, x1, y1}, inclusive.
std::array<int, 4> outline_pixels(const GroundTruthBox& box, int width, int height);

/// Loads ground truth (a split root with labels/, or a directory of label
/// files) and predictions, scores them, and writes the JSON report to
/// `report_path` and the text tables next to it with a .txt extension.
EvalReport evaluate_directories(const std::filesystem::path& gt_dir,
                                const std::filesystem::path& pred_dir, EvalOptions options,
                                const std::filesystem::path& report_path);

/// The in-memory image set evaluate_directories scores.
std::vector<EvalImage> load_eval_images(const std::filesystem::path& gt_dir,
                                        const std::filesystem::path& pred_dir,
                                        std::vector<std::string>* class_names);

}  // namespace drgen
