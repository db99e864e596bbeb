#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace drgen {

struct Range {
  double lo = 0.0;
  double hi = 0.0;
  friend bool operator==(const Range&, const Range&) = default;
};

struct IntRange {
  int lo = 0;
  int hi = 0;
  friend bool operator==(const IntRange&, const IntRange&) = default;
};

enum class ImageType { RGB, D, RGBD };
enum class BoxMethod { EightPoint, AllPoint };

inline bool has_rgb(ImageType t) { return t != ImageType::D; }
inline bool has_depth(ImageType t) { return t != ImageType::RGB; }

struct PostprocessConfig {
  double apply_pepper_prob = 1.0;
  double pepper_rate = 0.01;
  double apply_blur_prob = 0.5;
  std::vector<int> blur_kernel_choices{3, 5, 7};
  IntRange cutout_rect_count;
  IntRange cutout_circle_count;
  IntRange cutout_line_count;
  Range cutout_size{0.05, 0.2};
  Range line_thickness{1.0, 5.0};

  // Everything off: apply_postprocess becomes the identity.
  static PostprocessConfig disabled();

  friend bool operator==(const PostprocessConfig&, const PostprocessConfig&) = default;
};

struct LightConfig {
  double ambient = 0.35;
  Range intensity{0.6, 1.0};
  friend bool operator==(const LightConfig&, const LightConfig&) = default;
};

struct ClassSpec {
  std::string name;
  std::string mesh;  // relative to the config file's directory
  double scale = 1.0;
  friend bool operator==(const ClassSpec&, const ClassSpec&) = default;
};

/// Every knob of one generation run. Object-outcome probabilities are
/// ordered {class 0 .. class c-1, distractor, void}.
struct GenerationConfig {
  std::vector<ClassSpec> classes;
  std::string texture_dir;

  int grid_n = 2;
  double grid_d = 0.1;
  double z_pos = 0.05;
  std::array<double, 3> eps_pos{0.1, 0.1, 0.0};
  std::array<Range, 3> eps_rot{};
  std::vector<double> p_objects;
  double p_texture = 0.8;

  std::array<Range, 3> t_pos{};
  std::array<Range, 3> c_pos{};  // yaw (rad), pitch (rad), distance (m)
  IntRange r_width{640, 1300};
  IntRange r_height{640, 1300};
  double fov_deg = 45.0;  // vertical field of view
  double near = 0.01;
  double far = 10.0;
  ImageType i_type = ImageType::RGB;

  std::array<Range, 3> distractor_dims{};
  bool settle_enabled = true;
  LightConfig light;
  PostprocessConfig postprocess;
  BoxMethod bb_method = BoxMethod::AllPoint;

  // Directory the config was loaded from; relative asset paths resolve
  // against it. Not serialized.
  std::filesystem::path source_dir;

  double fov_y() const { return fov_deg * 0.017453292519943295; }
  std::size_t class_count() const { return p_objects.size() >= 2 ? p_objects.size() - 2 : 0; }
  std::size_t distractor_outcome() const { return class_count(); }
  std::size_t void_outcome() const { return class_count() + 1; }

  bool operator==(const GenerationConfig& o) const;
};

/// Throws ValidationError naming the offending key.
void validate(const GenerationConfig& cfg);
void validate(const PostprocessConfig& cfg);

/// Built-in parameterization of the best zero-shot setup for `class_count`
/// classes: 2x2 grid, +-10% horizontal jitter, equal odds for every outcome,
/// texture probability 0.8, camera aimed at the grid center with a 45 degree
/// vertical FOV and pitch within +-0.17 rad, independent image sides in
/// [640, 1300] px, pepper-and-salt always on and blur half the time.
GenerationConfig default_config(std::size_t class_count);

nlohmann::json to_json(const GenerationConfig& cfg);
/// Strict: unknown keys are rejected with their key path.
GenerationConfig config_from_json(const nlohmann::json& doc);

GenerationConfig load_config(const std::filesystem::path& path);
void save_config(const GenerationConfig& cfg, const std::filesystem::path& path);

/// Sorted-key, compact JSON of the config. Hash input for run manifests.
std::string canonical_text(const GenerationConfig& cfg);

std::string to_string(ImageType t);
std::string to_string(BoxMethod m);

}  // namespace drgen
