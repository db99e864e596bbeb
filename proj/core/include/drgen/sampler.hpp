#pragma once

#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "drgen/config.hpp"
#include "drgen/frame.hpp"
#include "drgen/geometry.hpp"
#include "drgen/rng.hpp"

namespace drgen {

struct TextureRef {
  std::size_t index = 0;
  friend bool operator==(const TextureRef&, const TextureRef&) = default;
};

// Either a texture from the bank or a flat random color.
using Appearance = std::variant<TextureRef, Color>;

enum class InstanceKind { Object, Distractor };

struct SceneInstance {
  int slot_i = 0;
  int slot_j = 0;
  InstanceKind kind = InstanceKind::Object;
  int class_id = 0;          // kDistractorClass for distractors
  Vec3 distractor_dims;      // meters; zero for class objects
  Pose pose;
  Appearance appearance;

  friend bool operator==(const SceneInstance&, const SceneInstance&) = default;
};

/// One sampled scene. Void slots are omitted from `instances`.
struct ScenePlan {
  std::vector<SceneInstance> instances;
  CameraModel camera;
  Appearance ground_appearance;
  LightModel light;
  std::uint64_t master_seed = 0;
  std::uint64_t image_index = 0;

  friend bool operator==(const ScenePlan&, const ScenePlan&) = default;
};

/// Per-image random streams, one per purpose so stages never share draws.
struct ImageStreams {
  RandomStream scene;
  RandomStream camera;
  RandomStream light;
  RandomStream noise;
};

/// Streams for image `index` of a split; tags are "<split>/scene" etc.
ImageStreams derive_image_streams(std::uint64_t master_seed, std::string_view split,
                                  std::uint64_t index);

/// Mesh an instance renders and labels with. Class meshes are returned by
/// reference; distractor cuboids are built into `scratch`.
const Mesh& instance_mesh(const SceneInstance& inst, std::span<const Mesh> class_meshes,
                          Mesh& scratch);

Mat4 model_matrix(const SceneInstance& inst);

/// World-space center of the instance's local bounding box.
Vec3 instance_center(const SceneInstance& inst, std::span<const Mesh> class_meshes);

/// World bounding box of the transformed mesh.
Aabb instance_world_aabb(const SceneInstance& inst, std::span<const Mesh> class_meshes);

/// Samples slot contents, poses, appearances and distractor sizes.
/// Draw order per slot (row-major): outcome, position x/y/z, rotation
/// x/y/z, appearance; then the ground appearance; then three sizes for
/// every distractor in slot order. Camera and light are left default.
/// Throws ValidationError if a texture may be drawn from an empty bank or
/// a class with non-zero probability has no mesh.
ScenePlan sample_scene(const GenerationConfig& cfg, std::span<const Mesh> class_meshes,
                       std::size_t texture_count, RandomStream& stream);

inline constexpr int kMaxCameraAttempts = 1000;

/// Samples target, yaw/pitch/distance and image size, rejecting the whole
/// tuple until every center projects strictly inside the image with w > 0
/// and every point in `keep_in_front` lies beyond the near plane.
/// Throws ValidationError after kMaxCameraAttempts rejections.
CameraModel sample_camera(const GenerationConfig& cfg, std::span<const Vec3> centers,
                          std::span<const Vec3> keep_in_front, RandomStream& stream);

/// Directional light from the upper hemisphere (uniform by area) with
/// intensity drawn from the configured range.
LightModel sample_light(const LightConfig& cfg, RandomStream& stream);

/// Quasi-static drop: every instance is shifted along z so its lowest
/// transformed vertex rests on z = 0. Rotation is untouched. Identity
/// when `enabled` is false.
ScenePlan settle(const ScenePlan& plan, std::span<const Mesh> class_meshes, bool enabled);

/// Axis-aligned cuboid centered on the origin, 8 vertices, 12 triangles,
/// outward winding, no uvs (the renderer projects them). Throws
/// ValidationError on a non-positive dimension.
Mesh make_distractor_mesh(const Vec3& dims);

/// Full scene for one image: sample_scene, settle, then camera and light.
ScenePlan plan_image(const GenerationConfig& cfg, std::span<const Mesh> class_meshes,
                     std::size_t texture_count, std::uint64_t master_seed,
                     std::string_view split, std::uint64_t index);

}  // namespace drgen
