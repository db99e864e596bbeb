#pragma once

#include <span>
#include <vector>

#include "drgen/config.hpp"
#include "drgen/frame.hpp"
#include "drgen/geometry.hpp"
#include "drgen/sampler.hpp"

namespace drgen {

/// World-space size of one ground texture repeat, meters.
inline constexpr double kGroundTileSize = 0.25;

/// Half side length of the ground quad: 50x the farthest the camera
/// target or the camera itself can be from the grid center.
double ground_half_extent(const GenerationConfig& cfg);

struct RenderOptions {
  ImageType image_type = ImageType::RGB;
  double ground_half_extent = 25.0;
};

/// Lambert: clamp(base * (ambient + intensity * max(0, n . l))).
Color shade(const Vec3& normal, const Color& base, const LightModel& light);

/// Repeat-wrapped bilinear lookup. Texel (x, y) has its center at
/// ((x + 0.5) / width, (y + 0.5) / height); v grows with the row index.
Color sample_texture(const Texture& tex, double u, double v);

/// Per-corner uvs (three per triangle): each face is projected onto the two
/// axes orthogonal to its dominant normal component, offset by the mesh
/// AABB minimum and divided by the largest AABB extent.
std::vector<Uv> planar_uv(const Mesh& mesh);

/// Index of the largest |component| (ties resolve to the lower axis).
int dominant_axis(const Vec3& n);

struct Surface {
  const Texture* texture = nullptr;  // null: flat `color`
  Color color{1.0, 1.0, 1.0};
};

/// Z-buffered triangle rasterizer for one camera. Both triangle windings
/// are drawn. Attributes are interpolated perspective-correctly; the depth
/// buffer holds eye-space axial distance and starts at the far plane.
class Rasterizer {
 public:
  Rasterizer(const CameraModel& camera, ImageType image_type);

  /// Draws world-space triangles. `normals` is empty or per-vertex (flat
  /// face normals are used when empty); `corner_uvs` is empty or three per
  /// triangle.
  void draw(std::span<const Vec3> vertices, std::span<const Triangle> triangles,
            std::span<const Vec3> normals, std::span<const Uv> corner_uvs, const Surface& surface,
            const LightModel& light);

  const std::vector<float>& depth_buffer() const { return depth_; }

  Frame finish() &&;

 private:
  CameraModel camera_;
  ImageType image_type_;
  Mat4 view_;
  Mat4 proj_;
  std::vector<float> depth_;
  std::vector<std::uint8_t> rgb_;
};

/// Renders the ground quad (z = 0, visible from above only) and every
/// instance of the plan.
/// Uncovered pixels get kSkyColor and depth = far.
Frame render(const ScenePlan& plan, std::span<const Mesh> class_meshes,
             std::span<const Texture> textures, const RenderOptions& options);

}  // namespace drgen
