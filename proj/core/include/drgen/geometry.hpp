#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace drgen {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3 operator-() const { return {-x, -y, -z}; }
  constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  constexpr Vec3 operator/(double s) const { return {x / s, y / s, z / s}; }

  constexpr double operator[](int axis) const { return axis == 0 ? x : (axis == 1 ? y : z); }

  friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }
constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double norm(const Vec3& v) { return std::sqrt(dot(v, v)); }
inline Vec3 normalized(const Vec3& v) { return v / norm(v); }
inline bool is_finite(const Vec3& v) {
  return std::isfinite(v.x) && std::isfinite(v.y) && std::isfinite(v.z);
}

using Vec4 = std::array<double, 4>;

/// 4x4 matrix, row-major storage. Column vectors: p' = M * p.
struct Mat4 {
  std::array<double, 16> m{};

  static constexpr Mat4 identity() {
    Mat4 r;
    r.m[0] = r.m[5] = r.m[10] = r.m[15] = 1.0;
    return r;
  }

  constexpr double operator()(int row, int col) const { return m[row * 4 + col]; }
  constexpr double& operator()(int row, int col) { return m[row * 4 + col]; }

  Mat4 operator*(const Mat4& o) const;
  Vec4 operator*(const Vec4& v) const;

  // Affine application (w = 1, result not divided).
  Vec3 transform_point(const Vec3& p) const;
  // Upper 3x3 only.
  Vec3 transform_direction(const Vec3& d) const;

  friend bool operator==(const Mat4&, const Mat4&) = default;
};

/// Placement of one object. Rotation holds extrinsic Euler angles in
/// radians, applied about world x, then y, then z.
struct Pose {
  Vec3 translation;
  Vec3 rotation;
  double scale = 1.0;

  friend bool operator==(const Pose&, const Pose&) = default;
};

using Uv = std::array<double, 2>;
using Triangle = std::array<std::uint32_t, 3>;

inline constexpr int kDistractorClass = -1;

struct Mesh {
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;
  std::vector<Uv> uvs;        // empty, or one per vertex
  std::vector<Vec3> normals;  // empty, or one per vertex
  int class_id = 0;           // kDistractorClass for distractor cuboids
};

/// Throws ValidationError if the mesh breaks any structural invariant.
void validate(const Mesh& mesh);

struct Aabb {
  Vec3 min;
  Vec3 max;

  Vec3 center() const { return (min + max) * 0.5; }
  Vec3 extent() const { return max - min; }
  bool contains(const Vec3& p, double tol = 0.0) const;
  std::array<Vec3, 8> corners() const;
};

struct CameraModel {
  Vec3 eye{0.0, 0.0, 1.0};
  Vec3 target;
  Vec3 up{0.0, 0.0, 1.0};
  double fov_y = 0.7853981633974483;
  double near = 0.01;
  double far = 10.0;
  int width = 640;
  int height = 480;

  double aspect() const { return static_cast<double>(width) / static_cast<double>(height); }

  friend bool operator==(const CameraModel&, const CameraModel&) = default;
};

void validate(const CameraModel& camera);

/// Parses the v / vt / vn / f subset of Wavefront OBJ. Polygons are fan
/// triangulated from their first corner; negative indices count back from
/// the current end of the respective list. Errors carry the line number.
Mesh parse_mesh(std::string_view text);
Mesh load_mesh(const std::filesystem::path& path);

/// T * Rz * Ry * Rx * S.
Mat4 compose_trs(const Pose& pose);

/// Throws ValidationError on empty input.
Aabb compute_aabb(std::span<const Vec3> points);

std::vector<Vec3> transform_points(const Mat4& m, std::span<const Vec3> points);

/// Right-handed view matrix; the camera looks down -z in eye space.
/// Throws ValidationError when eye == target or up is parallel to the view
/// direction.
Mat4 look_at(const Vec3& eye, const Vec3& target, const Vec3& up);

/// OpenGL-style frustum. Clip w carries -z_eye.
Mat4 perspective(double fov_y, double aspect, double near, double far);

Mat4 view_matrix(const CameraModel& camera);
Mat4 projection_matrix(const CameraModel& camera);

struct PixelProjection {
  double px = 0.0;     // pixels, origin at the top-left image corner
  double py = 0.0;     // pixels, y grows downward
  double depth = 0.0;  // eye-space axial distance (-z_eye), meters
};

/// Clip-space vector to pixel coordinates; nullopt when w <= 0. The depth
/// field equals w, which the perspective matrix sets to -z_eye.
std::optional<PixelProjection> clip_to_pixel(const Vec4& clip, int width, int height);

/// World point to pixels. nullopt flags a point behind the camera.
std::optional<PixelProjection> project(const Vec3& point, const Mat4& view, const Mat4& proj,
                                       int width, int height);

/// Precomputed view-projection chain for one camera.
class Projector {
 public:
  explicit Projector(const CameraModel& camera);

  std::optional<PixelProjection> operator()(const Vec3& point) const;
  const Mat4& view() const { return view_; }
  const Mat4& proj() const { return proj_; }
  const Mat4& view_proj() const { return view_proj_; }
  int width() const { return width_; }
  int height() const { return height_; }

 private:
  Mat4 view_;
  Mat4 proj_;
  Mat4 view_proj_;
  int width_;
  int height_;
};

struct CameraPlacement {
  Vec3 eye;
  Vec3 up;
};

/// Eye on a sphere around target: target + distance * (cos p cos y,
/// cos p sin y, sin p). Roll is zero: up is world +z, except straight
/// above or below the target where the horizontal direction that +z
/// approaches in the limit is used instead.
CameraPlacement camera_from_spherical(const Vec3& target, double yaw, double pitch,
                                      double distance);

}  // namespace drgen
