#include "drgen/geometry.hpp"

#include <algorithm>
#include <numbers>
#include <string>

#include "drgen/errors.hpp"

namespace drgen {

Mat4 Mat4::operator*(const Mat4& o) const {
  Mat4 r;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      double s = 0.0;
      for (int k = 0; k < 4; ++k) s += (*this)(i, k) * o(k, j);
      r(i, j) = s;
    }
  }
  return r;
}

Vec4 Mat4::operator*(const Vec4& v) const {
  Vec4 r{};
  for (int i = 0; i < 4; ++i) {
    r[i] = m[i * 4] * v[0] + m[i * 4 + 1] * v[1] + m[i * 4 + 2] * v[2] + m[i * 4 + 3] * v[3];
  }
  return r;
}

Vec3 Mat4::transform_point(const Vec3& p) const {
  return {m[0] * p.x + m[1] * p.y + m[2] * p.z + m[3],
          m[4] * p.x + m[5] * p.y + m[6] * p.z + m[7],
          m[8] * p.x + m[9] * p.y + m[10] * p.z + m[11]};
}

Vec3 Mat4::transform_direction(const Vec3& d) const {
  return {m[0] * d.x + m[1] * d.y + m[2] * d.z,
          m[4] * d.x + m[5] * d.y + m[6] * d.z,
          m[8] * d.x + m[9] * d.y + m[10] * d.z};
}

void validate(const Mesh& mesh) {
  if (mesh.triangles.empty()) throw ValidationError("mesh has no triangles");
  for (const auto& v : mesh.vertices) {
    if (!is_finite(v)) throw ValidationError("mesh has a non-finite vertex coordinate");
  }
  const auto n = mesh.vertices.size();
  for (const auto& t : mesh.triangles) {
    for (auto idx : t) {
      if (idx >= n) {
        throw ValidationError("mesh triangle index " + std::to_string(idx) +
                              " out of range (vertex count " + std::to_string(n) + ")");
      }
    }
  }
  if (!mesh.uvs.empty() && mesh.uvs.size() != n) {
    throw ValidationError("mesh uv count does not match vertex count");
  }
  if (!mesh.normals.empty() && mesh.normals.size() != n) {
    throw ValidationError("mesh normal count does not match vertex count");
  }
}

bool Aabb::contains(const Vec3& p, double tol) const {
  return p.x >= min.x - tol && p.y >= min.y - tol && p.z >= min.z - tol &&
         p.x <= max.x + tol && p.y <= max.y + tol && p.z <= max.z + tol;
}

std::array<Vec3, 8> Aabb::corners() const {
  std::array<Vec3, 8> out;
  for (int i = 0; i < 8; ++i) {
    out[i] = {(i & 1) ? max.x : min.x, (i & 2) ? max.y : min.y, (i & 4) ? max.z : min.z};
  }
  return out;
}

void validate(const CameraModel& c) {
  if (!(c.near > 0.0 && c.near < c.far)) throw ValidationError("camera: need 0 < near < far");
  if (!(c.fov_y > 0.0 && c.fov_y < std::numbers::pi)) {
    throw ValidationError("camera: fov_y must lie in (0, pi)");
  }
  if (c.width < 1 || c.height < 1) throw ValidationError("camera: image size must be >= 1");
  if (c.eye == c.target) throw ValidationError("camera: eye equals target");
}

Mat4 compose_trs(const Pose& pose) {
  const double cx = std::cos(pose.rotation.x), sx = std::sin(pose.rotation.x);
  const double cy = std::cos(pose.rotation.y), sy = std::sin(pose.rotation.y);
  const double cz = std::cos(pose.rotation.z), sz = std::sin(pose.rotation.z);
  const double s = pose.scale;

  // Rz * Ry * Rx, expanded.
  const double r00 = cz * cy;
  const double r01 = cz * sy * sx - sz * cx;
  const double r02 = cz * sy * cx + sz * sx;
  const double r10 = sz * cy;
  const double r11 = sz * sy * sx + cz * cx;
  const double r12 = sz * sy * cx - cz * sx;
  const double r20 = -sy;
  const double r21 = cy * sx;
  const double r22 = cy * cx;

  Mat4 m = Mat4::identity();
  m(0, 0) = r00 * s; m(0, 1) = r01 * s; m(0, 2) = r02 * s; m(0, 3) = pose.translation.x;
  m(1, 0) = r10 * s; m(1, 1) = r11 * s; m(1, 2) = r12 * s; m(1, 3) = pose.translation.y;
  m(2, 0) = r20 * s; m(2, 1) = r21 * s; m(2, 2) = r22 * s; m(2, 3) = pose.translation.z;
  return m;
}

Aabb compute_aabb(std::span<const Vec3> points) {
  if (points.empty()) throw ValidationError("compute_aabb: no points");
  Aabb box{points.front(), points.front()};
  for (const auto& p : points.subspan(1)) {
    box.min = {std::min(box.min.x, p.x), std::min(box.min.y, p.y), std::min(box.min.z, p.z)};
    box.max = {std::max(box.max.x, p.x), std::max(box.max.y, p.y), std::max(box.max.z, p.z)};
  }
  return box;
}

std::vector<Vec3> transform_points(const Mat4& m, std::span<const Vec3> points) {
  std::vector<Vec3> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(m.transform_point(p));
  return out;
}

Mat4 look_at(const Vec3& eye, const Vec3& target, const Vec3& up) {
  const Vec3 fwd_raw = target - eye;
  const double fwd_len = norm(fwd_raw);
  if (!(fwd_len > 0.0)) throw ValidationError("look_at: eye equals target");
  const Vec3 f = fwd_raw / fwd_len;
  const Vec3 side_raw = cross(f, up);
  const double side_len = norm(side_raw);
  if (!(side_len > 1e-12 * norm(up))) {
    throw ValidationError("look_at: up vector is parallel to the view direction");
  }
  const Vec3 s = side_raw / side_len;
  const Vec3 u = cross(s, f);

  Mat4 v = Mat4::identity();
  v(0, 0) = s.x;  v(0, 1) = s.y;  v(0, 2) = s.z;  v(0, 3) = -dot(s, eye);
  v(1, 0) = u.x;  v(1, 1) = u.y;  v(1, 2) = u.z;  v(1, 3) = -dot(u, eye);
  v(2, 0) = -f.x; v(2, 1) = -f.y; v(2, 2) = -f.z; v(2, 3) = dot(f, eye);
  return v;
}

Mat4 perspective(double fov_y, double aspect, double near, double far) {
  const double f = 1.0 / std::tan(fov_y / 2.0);
  Mat4 p;
  p(0, 0) = f / aspect;
  p(1, 1) = f;
  p(2, 2) = (far + near) / (near - far);
  p(2, 3) = 2.0 * far * near / (near - far);
  p(3, 2) = -1.0;
  return p;
}

Mat4 view_matrix(const CameraModel& camera) { return look_at(camera.eye, camera.target, camera.up); }

Mat4 projection_matrix(const CameraModel& camera) {
  return perspective(camera.fov_y, camera.aspect(), camera.near, camera.far);
}

std::optional<PixelProjection> clip_to_pixel(const Vec4& clip, int width, int height) {
  const double w = clip[3];
  if (!(w > 0.0)) return std::nullopt;
  const double ndc_x = clip[0] / w;
  const double ndc_y = clip[1] / w;
  return PixelProjection{(ndc_x + 1.0) * 0.5 * width, (1.0 - ndc_y) * 0.5 * height, w};
}

std::optional<PixelProjection> project(const Vec3& point, const Mat4& view, const Mat4& proj,
                                       int width, int height) {
  const Vec4 eye = view * Vec4{point.x, point.y, point.z, 1.0};
  auto out = clip_to_pixel(proj * eye, width, height);
  if (out) out->depth = -eye[2];
  return out;
}

Projector::Projector(const CameraModel& camera)
    : view_(view_matrix(camera)),
      proj_(projection_matrix(camera)),
      view_proj_(proj_ * view_),
      width_(camera.width),
      height_(camera.height) {}

std::optional<PixelProjection> Projector::operator()(const Vec3& p) const {
  return clip_to_pixel(view_proj_ * Vec4{p.x, p.y, p.z, 1.0}, width_, height_);
}

CameraPlacement camera_from_spherical(const Vec3& target, double yaw, double pitch,
                                      double distance) {
  if (!(distance > 0.0)) throw ValidationError("camera distance must be positive");
  const double cp = std::cos(pitch);
  const Vec3 offset{cp * std::cos(yaw), cp * std::sin(yaw), std::sin(pitch)};
  CameraPlacement out{target + offset * distance, {0.0, 0.0, 1.0}};
  // Straight above/below: +z is parallel to the view axis. Use its limit
  // direction in the image plane as pitch approaches +-pi/2.
  if (norm(cross(offset, out.up)) < 1e-9) {
    const double s = std::sin(pitch) > 0.0 ? 1.0 : -1.0;
    out.up = {-s * std::cos(yaw), -s * std::sin(yaw), 0.0};
  }
  return out;
}

}  // namespace drgen
