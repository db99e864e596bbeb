#include "drgen/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "drgen/errors.hpp"

namespace drgen {

namespace {

std::size_t draw_outcome(std::span<const double> probs, RandomStream& stream) {
  const double u = stream.next_unit();
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    if (probs[k] <= 0.0) continue;
    acc += probs[k];
    last_positive = k;
    if (u < acc) return k;
  }
  // Rounding left a sliver above the cumulative sum.
  return last_positive;
}

// Always five draws so the stream layout does not depend on the outcome:
// coin, texture index, r, g, b.
Appearance draw_appearance(double p_texture, std::size_t texture_count, RandomStream& stream) {
  const bool textured = stream.next_bernoulli(p_texture);
  const std::uint64_t pick = stream.next_u64();
  const Color color{stream.next_unit(), stream.next_unit(), stream.next_unit()};
  if (textured && texture_count > 0) {
    return TextureRef{static_cast<std::size_t>(mul_high(pick, texture_count))};
  }
  return color;
}

}  // namespace

ImageStreams derive_image_streams(std::uint64_t master_seed, std::string_view split,
                                  std::uint64_t index) {
  const std::string base(split);
  return {derive_stream(master_seed, base + "/scene", index),
          derive_stream(master_seed, base + "/camera", index),
          derive_stream(master_seed, base + "/light", index),
          derive_stream(master_seed, base + "/noise", index)};
}

Mesh make_distractor_mesh(const Vec3& dims) {
  if (!(dims.x > 0.0 && dims.y > 0.0 && dims.z > 0.0)) {
    throw ValidationError("distractor dimensions must be positive");
  }
  Mesh mesh;
  mesh.class_id = kDistractorClass;
  const Vec3 h = dims * 0.5;
  for (int i = 0; i < 8; ++i) {
    mesh.vertices.push_back({(i & 1) ? h.x : -h.x, (i & 2) ? h.y : -h.y, (i & 4) ? h.z : -h.z});
  }
  mesh.triangles = {{0, 2, 3}, {0, 3, 1}, {4, 5, 7}, {4, 7, 6}, {0, 1, 5}, {0, 5, 4},
                    {2, 6, 7}, {2, 7, 3}, {0, 4, 6}, {0, 6, 2}, {1, 3, 7}, {1, 7, 5}};
  return mesh;
}

const Mesh& instance_mesh(const SceneInstance& inst, std::span<const Mesh> class_meshes,
                          Mesh& scratch) {
  if (inst.kind == InstanceKind::Distractor) {
    scratch = make_distractor_mesh(inst.distractor_dims);
    return scratch;
  }
  if (inst.class_id < 0 || static_cast<std::size_t>(inst.class_id) >= class_meshes.size()) {
    throw ValidationError("no mesh for class " + std::to_string(inst.class_id));
  }
  return class_meshes[static_cast<std::size_t>(inst.class_id)];
}

Mat4 model_matrix(const SceneInstance& inst) { return compose_trs(inst.pose); }

Vec3 instance_center(const SceneInstance& inst, std::span<const Mesh> class_meshes) {
  Mesh scratch;
  const Mesh& mesh = instance_mesh(inst, class_meshes, scratch);
  return model_matrix(inst).transform_point(compute_aabb(mesh.vertices).center());
}

Aabb instance_world_aabb(const SceneInstance& inst, std::span<const Mesh> class_meshes) {
  Mesh scratch;
  const Mesh& mesh = instance_mesh(inst, class_meshes, scratch);
  return compute_aabb(transform_points(model_matrix(inst), mesh.vertices));
}

ScenePlan sample_scene(const GenerationConfig& cfg, std::span<const Mesh> class_meshes,
                       std::size_t texture_count, RandomStream& stream) {
  if (cfg.p_texture > 0.0 && texture_count == 0) {
    throw ValidationError("texture bank is empty but p_texture > 0");
  }
  const std::size_t classes = cfg.class_count();
  for (std::size_t c = 0; c < classes; ++c) {
    if (cfg.p_objects[c] > 0.0 && c >= class_meshes.size()) {
      throw ValidationError("class " + std::to_string(c) + " has probability > 0 but no mesh");
    }
  }

  ScenePlan plan;
  const int n = cfg.grid_n;
  const double half = (n - 1) / 2.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const std::size_t outcome = draw_outcome(cfg.p_objects, stream);
      const Vec3 grid{(j - half) * cfg.grid_d, (i - half) * cfg.grid_d, cfg.z_pos};
      Vec3 pos;
      pos.x = grid.x + stream.next_uniform(-cfg.eps_pos[0] * cfg.grid_d, cfg.eps_pos[0] * cfg.grid_d);
      pos.y = grid.y + stream.next_uniform(-cfg.eps_pos[1] * cfg.grid_d, cfg.eps_pos[1] * cfg.grid_d);
      pos.z = grid.z + stream.next_uniform(-cfg.eps_pos[2] * cfg.grid_d, cfg.eps_pos[2] * cfg.grid_d);
      Vec3 rot;
      rot.x = stream.next_uniform(cfg.eps_rot[0].lo, cfg.eps_rot[0].hi);
      rot.y = stream.next_uniform(cfg.eps_rot[1].lo, cfg.eps_rot[1].hi);
      rot.z = stream.next_uniform(cfg.eps_rot[2].lo, cfg.eps_rot[2].hi);
      Appearance look = draw_appearance(cfg.p_texture, texture_count, stream);

      if (outcome == cfg.void_outcome()) continue;

      SceneInstance inst;
      inst.slot_i = i;
      inst.slot_j = j;
      inst.pose.translation = pos;
      inst.pose.rotation = rot;
      inst.appearance = look;
      if (outcome == cfg.distractor_outcome()) {
        inst.kind = InstanceKind::Distractor;
        inst.class_id = kDistractorClass;
      } else {
        inst.kind = InstanceKind::Object;
        inst.class_id = static_cast<int>(outcome);
        if (outcome < cfg.classes.size()) inst.pose.scale = cfg.classes[outcome].scale;
      }
      plan.instances.push_back(inst);
    }
  }

  plan.ground_appearance = draw_appearance(cfg.p_texture, texture_count, stream);

  for (auto& inst : plan.instances) {
    if (inst.kind != InstanceKind::Distractor) continue;
    inst.distractor_dims = {stream.next_uniform(cfg.distractor_dims[0].lo, cfg.distractor_dims[0].hi),
                            stream.next_uniform(cfg.distractor_dims[1].lo, cfg.distractor_dims[1].hi),
                            stream.next_uniform(cfg.distractor_dims[2].lo, cfg.distractor_dims[2].hi)};
  }
  return plan;
}

CameraModel sample_camera(const GenerationConfig& cfg, std::span<const Vec3> centers,
                          std::span<const Vec3> keep_in_front, RandomStream& stream) {
  for (int attempt = 0; attempt < kMaxCameraAttempts; ++attempt) {
    const Vec3 target{stream.next_uniform(cfg.t_pos[0].lo, cfg.t_pos[0].hi),
                      stream.next_uniform(cfg.t_pos[1].lo, cfg.t_pos[1].hi),
                      stream.next_uniform(cfg.t_pos[2].lo, cfg.t_pos[2].hi)};
    const double yaw = stream.next_uniform(cfg.c_pos[0].lo, cfg.c_pos[0].hi);
    const double pitch = stream.next_uniform(cfg.c_pos[1].lo, cfg.c_pos[1].hi);
    const double distance = stream.next_uniform(cfg.c_pos[2].lo, cfg.c_pos[2].hi);
    const int width = static_cast<int>(stream.next_int(cfg.r_width.lo, cfg.r_width.hi));
    const int height = static_cast<int>(stream.next_int(cfg.r_height.lo, cfg.r_height.hi));

    const CameraPlacement place = camera_from_spherical(target, yaw, pitch, distance);
    CameraModel cam;
    cam.eye = place.eye;
    cam.target = target;
    cam.up = place.up;
    cam.fov_y = cfg.fov_y();
    cam.near = cfg.near;
    cam.far = cfg.far;
    cam.width = width;
    cam.height = height;

    const Projector projector(cam);
    const bool centers_ok = std::all_of(centers.begin(), centers.end(), [&](const Vec3& c) {
      const auto p = projector(c);
      return p && p->depth > cam.near && p->depth < cam.far && p->px > 0.0 && p->px < width &&
             p->py > 0.0 && p->py < height;
    });
    if (!centers_ok) continue;
    const bool front_ok = std::all_of(keep_in_front.begin(), keep_in_front.end(), [&](const Vec3& q) {
      const auto p = projector(q);
      return p && p->depth > cam.near;
    });
    if (front_ok) return cam;
  }
  throw ValidationError("no valid camera after " + std::to_string(kMaxCameraAttempts) +
                        " attempts; camera ranges cannot see every object center");
}

LightModel sample_light(const LightConfig& cfg, RandomStream& stream) {
  const double z = stream.next_unit();
  const double phi = 2.0 * std::numbers::pi * stream.next_unit();
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  LightModel light;
  light.ambient = cfg.ambient;
  light.direction = normalized(Vec3{r * std::cos(phi), r * std::sin(phi), z});
  light.intensity = stream.next_uniform(cfg.intensity.lo, cfg.intensity.hi);
  return light;
}

ScenePlan settle(const ScenePlan& plan, std::span<const Mesh> class_meshes, bool enabled) {
  ScenePlan out = plan;
  if (!enabled) return out;
  Mesh scratch;
  for (auto& inst : out.instances) {
    const Mesh& mesh = instance_mesh(inst, class_meshes, scratch);
    if (mesh.vertices.empty()) throw ValidationError("cannot settle a mesh without vertices");
    const Mat4 m = model_matrix(inst);
    double min_z = std::numeric_limits<double>::infinity();
    for (const auto& v : mesh.vertices) min_z = std::min(min_z, m.transform_point(v).z);
    inst.pose.translation.z -= min_z;
  }
  return out;
}

ScenePlan plan_image(const GenerationConfig& cfg, std::span<const Mesh> class_meshes,
                     std::size_t texture_count, std::uint64_t master_seed,
                     std::string_view split, std::uint64_t index) {
  ImageStreams streams = derive_image_streams(master_seed, split, index);
  ScenePlan plan = sample_scene(cfg, class_meshes, texture_count, streams.scene);
  plan = settle(plan, class_meshes, cfg.settle_enabled);

  std::vector<Vec3> centers;
  std::vector<Vec3> corners;
  for (const auto& inst : plan.instances) {
    centers.push_back(instance_center(inst, class_meshes));
    const auto box = instance_world_aabb(inst, class_meshes).corners();
    corners.insert(corners.end(), box.begin(), box.end());
  }
  plan.camera = sample_camera(cfg, centers, corners, streams.camera);
  plan.light = sample_light(cfg.light, streams.light);
  plan.master_seed = master_seed;
  plan.image_index = index;
  return plan;
}

}  // namespace drgen
