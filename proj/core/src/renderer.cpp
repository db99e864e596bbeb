#include "drgen/renderer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "drgen/errors.hpp"

namespace drgen {

std::uint8_t to_byte(double channel) {
  const double c = std::clamp(channel, 0.0, 1.0);
  return static_cast<std::uint8_t>(std::lround(c * 255.0));
}

Rgb8 to_rgb8(const Color& c) { return {to_byte(c[0]), to_byte(c[1]), to_byte(c[2])}; }

Rgb8 Frame::pixel(int x, int y) const {
  const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
  return {rgb[i], rgb[i + 1], rgb[i + 2]};
}

void Frame::set_pixel(int x, int y, const Rgb8& c) {
  const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
  rgb[i] = c[0];
  rgb[i + 1] = c[1];
  rgb[i + 2] = c[2];
}

Rgb8 Texture::texel(int x, int y) const {
  const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
  return {pixels[i], pixels[i + 1], pixels[i + 2]};
}

Texture solid_texture(const Rgb8& color, int width, int height) {
  Texture t{width, height, {}};
  t.pixels.reserve(static_cast<std::size_t>(width) * height * 3);
  for (int i = 0; i < width * height; ++i) t.pixels.insert(t.pixels.end(), color.begin(), color.end());
  return t;
}

double ground_half_extent(const GenerationConfig& cfg) {
  double reach = cfg.c_pos[2].hi;
  for (const auto& r : cfg.t_pos) reach = std::max({reach, std::abs(r.lo), std::abs(r.hi)});
  return 50.0 * reach;
}

Color shade(const Vec3& normal, const Color& base, const LightModel& light) {
  const double lambert = std::max(0.0, dot(normal, light.direction));
  const double k = light.ambient + light.intensity * lambert;
  return {std::clamp(base[0] * k, 0.0, 1.0), std::clamp(base[1] * k, 0.0, 1.0),
          std::clamp(base[2] * k, 0.0, 1.0)};
}

Color sample_texture(const Texture& tex, double u, double v) {
  const double fx = u * tex.width - 0.5;
  const double fy = v * tex.height - 0.5;
  const double x0f = std::floor(fx);
  const double y0f = std::floor(fy);
  const double tx = fx - x0f;
  const double ty = fy - y0f;
  auto wrap = [](double i, int n) {
    const double m = std::fmod(i, static_cast<double>(n));
    return static_cast<int>(m < 0.0 ? m + n : m);
  };
  const int x0 = wrap(x0f, tex.width);
  const int y0 = wrap(y0f, tex.height);
  const int x1 = x0 + 1 == tex.width ? 0 : x0 + 1;
  const int y1 = y0 + 1 == tex.height ? 0 : y0 + 1;
  const Rgb8 a = tex.texel(x0, y0);
  const Rgb8 b = tex.texel(x1, y0);
  const Rgb8 c = tex.texel(x0, y1);
  const Rgb8 d = tex.texel(x1, y1);
  Color out;
  for (int k = 0; k < 3; ++k) {
    const double top = a[k] + (b[k] - a[k]) * tx;
    const double bottom = c[k] + (d[k] - c[k]) * tx;
    out[k] = (top + (bottom - top) * ty) / 255.0;
  }
  return out;
}

int dominant_axis(const Vec3& n) {
  const double ax = std::abs(n.x), ay = std::abs(n.y), az = std::abs(n.z);
  if (ax >= ay && ax >= az) return 0;
  if (ay >= az) return 1;
  return 2;
}

std::vector<Uv> planar_uv(const Mesh& mesh) {
  std::vector<Uv> uvs;
  uvs.reserve(mesh.triangles.size() * 3);
  if (mesh.vertices.empty()) return uvs;
  const Aabb box = compute_aabb(mesh.vertices);
  const Vec3 ext = box.extent();
  const double scale = std::max({ext.x, ext.y, ext.z});
  const double inv = scale > 0.0 ? 1.0 / scale : 1.0;
  for (const auto& t : mesh.triangles) {
    const Vec3& a = mesh.vertices[t[0]];
    const Vec3 n = cross(mesh.vertices[t[1]] - a, mesh.vertices[t[2]] - a);
    const int axis = dominant_axis(n);
    const int ua = axis == 0 ? 1 : 0;
    const int va = axis == 2 ? 1 : 2;
    for (auto idx : t) {
      const Vec3& p = mesh.vertices[idx];
      uvs.push_back({(p[ua] - box.min[ua]) * inv, (p[va] - box.min[va]) * inv});
    }
  }
  return uvs;
}

namespace {

struct ClipVertex {
  Vec3 eye;
  Vec3 normal;
  Uv uv;
};

ClipVertex lerp(const ClipVertex& a, const ClipVertex& b, double t) {
  return {a.eye + (b.eye - a.eye) * t, a.normal + (b.normal - a.normal) * t,
          {a.uv[0] + (b.uv[0] - a.uv[0]) * t, a.uv[1] + (b.uv[1] - a.uv[1]) * t}};
}

// Sutherland-Hodgman against z_eye <= -near. At most 4 output vertices.
int clip_near(const std::array<ClipVertex, 3>& in, double near, std::array<ClipVertex, 4>& out) {
  int count = 0;
  for (int i = 0; i < 3; ++i) {
    const ClipVertex& cur = in[i];
    const ClipVertex& nxt = in[(i + 1) % 3];
    const double dc = -near - cur.eye.z;  // >= 0 inside
    const double dn = -near - nxt.eye.z;
    if (dc >= 0.0) out[count++] = cur;
    if ((dc >= 0.0) != (dn >= 0.0)) out[count++] = lerp(cur, nxt, dc / (dc - dn));
  }
  return count;
}

struct ScreenVertex {
  double x, y;
  double inv_w;
  Vec3 normal_w;  // attribute / w
  Uv uv_w;
};

}  // namespace

Rasterizer::Rasterizer(const CameraModel& camera, ImageType image_type)
    : camera_(camera),
      image_type_(image_type),
      view_(view_matrix(camera)),
      proj_(projection_matrix(camera)),
      depth_(camera.width * static_cast<std::size_t>(camera.height), static_cast<float>(camera.far)) {
  validate(camera);
  if (has_rgb(image_type_)) {
    rgb_.resize(depth_.size() * 3);
    for (std::size_t i = 0; i < depth_.size(); ++i) {
      rgb_[i * 3] = kSkyColor[0];
      rgb_[i * 3 + 1] = kSkyColor[1];
      rgb_[i * 3 + 2] = kSkyColor[2];
    }
  }
}

void Rasterizer::draw(std::span<const Vec3> vertices, std::span<const Triangle> triangles,
                      std::span<const Vec3> normals, std::span<const Uv> corner_uvs,
                      const Surface& surface, const LightModel& light) {
  const int W = camera_.width;
  const int H = camera_.height;
  const double near = camera_.near;
  const double far = camera_.far;
  const bool want_rgb = !rgb_.empty();
  const bool smooth = !normals.empty();
  const bool textured = surface.texture != nullptr && !corner_uvs.empty();
  const Color flat = surface.color;

  std::vector<Vec3> eye(vertices.size());
  for (std::size_t i = 0; i < vertices.size(); ++i) eye[i] = view_.transform_point(vertices[i]);

  for (std::size_t t = 0; t < triangles.size(); ++t) {
    const Triangle& tri = triangles[t];
    const Vec3& w0 = vertices[tri[0]];
    Vec3 face_n = cross(vertices[tri[1]] - w0, vertices[tri[2]] - w0);
    const double face_len = norm(face_n);
    if (!(face_len > 0.0)) continue;
    face_n = face_n / face_len;
    // Light the side that faces the camera.
    const double facing = dot(face_n, camera_.eye - w0) < 0.0 ? -1.0 : 1.0;
    face_n = face_n * facing;

    std::array<ClipVertex, 3> in;
    for (int k = 0; k < 3; ++k) {
      in[k].eye = eye[tri[k]];
      in[k].normal = smooth ? normals[tri[k]] * facing : face_n;
      in[k].uv = textured ? corner_uvs[t * 3 + k] : Uv{0.0, 0.0};
    }
    std::array<ClipVertex, 4> poly;
    const int n = clip_near(in, near, poly);
    if (n < 3) continue;

    std::array<ScreenVertex, 4> sv;
    for (int k = 0; k < n; ++k) {
      const Vec3& e = poly[k].eye;
      const double w = -e.z;
      const double cx = proj_(0, 0) * e.x + proj_(0, 2) * e.z;
      const double cy = proj_(1, 1) * e.y + proj_(1, 2) * e.z;
      const double iw = 1.0 / w;
      sv[k] = {(cx * iw + 1.0) * 0.5 * W, (1.0 - cy * iw) * 0.5 * H, iw, poly[k].normal * iw,
               {poly[k].uv[0] * iw, poly[k].uv[1] * iw}};
    }

    for (int f = 1; f + 1 < n; ++f) {
      const ScreenVertex& a = sv[0];
      const ScreenVertex& b = sv[f];
      const ScreenVertex& c = sv[f + 1];
      const double area = (c.x - a.x) * (b.y - a.y) - (c.y - a.y) * (b.x - a.x);
      if (!(std::abs(area) > 1e-12)) continue;
      const double inv_area = 1.0 / area;

      const double min_x = std::min({a.x, b.x, c.x});
      const double max_x = std::max({a.x, b.x, c.x});
      const double min_y = std::min({a.y, b.y, c.y});
      const double max_y = std::max({a.y, b.y, c.y});
      const int x0 = static_cast<int>(std::clamp(std::ceil(min_x - 0.5), 0.0, static_cast<double>(W)));
      const int x1 = static_cast<int>(std::clamp(std::floor(max_x - 0.5), -1.0, static_cast<double>(W - 1)));
      const int y0 = static_cast<int>(std::clamp(std::ceil(min_y - 0.5), 0.0, static_cast<double>(H)));
      const int y1 = static_cast<int>(std::clamp(std::floor(max_y - 0.5), -1.0, static_cast<double>(H - 1)));

      for (int y = y0; y <= y1; ++y) {
        const double py = y + 0.5;
        for (int x = x0; x <= x1; ++x) {
          const double px = x + 0.5;
          const double e_a = ((px - b.x) * (c.y - b.y) - (py - b.y) * (c.x - b.x)) * inv_area;
          const double e_b = ((px - c.x) * (a.y - c.y) - (py - c.y) * (a.x - c.x)) * inv_area;
          const double e_c = ((px - a.x) * (b.y - a.y) - (py - a.y) * (b.x - a.x)) * inv_area;
          if (e_a < 0.0 || e_b < 0.0 || e_c < 0.0) continue;

          const double inv_w = e_a * a.inv_w + e_b * b.inv_w + e_c * c.inv_w;
          const double depth = 1.0 / inv_w;
          if (!(depth >= near) || depth > far) continue;
          const std::size_t idx = static_cast<std::size_t>(y) * W + x;
          const float dz = static_cast<float>(depth);
          if (!(dz < depth_[idx])) continue;
          depth_[idx] = dz;
          if (!want_rgb) continue;

          Color base = flat;
          if (textured) {
            const double u = (e_a * a.uv_w[0] + e_b * b.uv_w[0] + e_c * c.uv_w[0]) * depth;
            const double v = (e_a * a.uv_w[1] + e_b * b.uv_w[1] + e_c * c.uv_w[1]) * depth;
            base = sample_texture(*surface.texture, u, v);
          }
          Vec3 nrm = face_n;
          if (smooth) {
            const Vec3 interp = (a.normal_w * e_a + b.normal_w * e_b + c.normal_w * e_c) * depth;
            const double len = norm(interp);
            if (len > 0.0) nrm = interp / len;
          }
          const Rgb8 out = to_rgb8(shade(nrm, base, light));
          rgb_[idx * 3] = out[0];
          rgb_[idx * 3 + 1] = out[1];
          rgb_[idx * 3 + 2] = out[2];
        }
      }
    }
  }
}

Frame Rasterizer::finish() && {
  Frame frame;
  frame.width = camera_.width;
  frame.height = camera_.height;
  if (has_rgb(image_type_)) frame.rgb = std::move(rgb_);
  if (has_depth(image_type_)) frame.depth = std::move(depth_);
  return frame;
}

namespace {

Surface surface_for(const Appearance& look, std::span<const Texture> textures) {
  Surface s;
  if (const auto* ref = std::get_if<TextureRef>(&look)) {
    if (ref->index >= textures.size()) {
      throw ValidationError("texture index " + std::to_string(ref->index) + " out of range");
    }
    s.texture = &textures[ref->index];
  } else {
    s.color = std::get<Color>(look);
  }
  return s;
}

}  // namespace

Frame render(const ScenePlan& plan, std::span<const Mesh> class_meshes,
             std::span<const Texture> textures, const RenderOptions& options) {
  Rasterizer raster(plan.camera, options.image_type);

  const double e = options.ground_half_extent;
  const std::array<Vec3, 4> ground{Vec3{-e, -e, 0.0}, Vec3{e, -e, 0.0}, Vec3{e, e, 0.0}, Vec3{-e, e, 0.0}};
  const std::array<Triangle, 2> ground_tris{Triangle{0, 1, 2}, Triangle{0, 2, 3}};
  std::array<Uv, 6> ground_uvs;
  for (int t = 0; t < 2; ++t) {
    for (int k = 0; k < 3; ++k) {
      const Vec3& p = ground[ground_tris[t][k]];
      ground_uvs[t * 3 + k] = {p.x / kGroundTileSize, p.y / kGroundTileSize};
    }
  }
  // One-sided: an eye below z = 0 sees through the ground.
  if (plan.camera.eye.z > 0.0) {
    raster.draw(ground, ground_tris, {}, ground_uvs, surface_for(plan.ground_appearance, textures),
                plan.light);
  }

  Mesh scratch;
  for (const auto& inst : plan.instances) {
    const Mesh& mesh = instance_mesh(inst, class_meshes, scratch);
    const Mat4 model = model_matrix(inst);
    const auto world = transform_points(model, mesh.vertices);
    std::vector<Vec3> world_normals;
    if (!mesh.normals.empty()) {
      world_normals.reserve(mesh.normals.size());
      for (const auto& nrm : mesh.normals) {
        const Vec3 d = model.transform_direction(nrm);
        const double len = norm(d);
        world_normals.push_back(len > 0.0 ? d / len : d);
      }
    }
    std::vector<Uv> corner_uvs;
    if (!mesh.uvs.empty()) {
      corner_uvs.reserve(mesh.triangles.size() * 3);
      for (const auto& t : mesh.triangles) {
        for (auto idx : t) corner_uvs.push_back(mesh.uvs[idx]);
      }
    } else {
      corner_uvs = planar_uv(mesh);
    }
    raster.draw(world, mesh.triangles, world_normals, corner_uvs, surface_for(inst.appearance, textures),
                plan.light);
  }
  return std::move(raster).finish();
}

}  // namespace drgen
