#include "drgen/labeler.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>

#include "drgen/errors.hpp"

namespace drgen {

PixelBox bbox_from_pixels(std::span<const std::optional<PixelProjection>> points) {
  if (points.empty()) throw ValidationError("bbox_from_pixels: no points");
  PixelBox box{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
               -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (const auto& p : points) {
    if (!p) throw ValidationError("bbox_from_pixels: point behind the camera");
    box.x_min = std::min(box.x_min, p->px);
    box.y_min = std::min(box.y_min, p->py);
    box.x_max = std::max(box.x_max, p->px);
    box.y_max = std::max(box.y_max, p->py);
  }
  return box;
}

PixelBox project_instance(const SceneInstance& inst, std::span<const Mesh> class_meshes,
                          const Projector& projector, BoxMethod method) {
  Mesh scratch;
  const Mesh& mesh = instance_mesh(inst, class_meshes, scratch);
  const auto world = transform_points(model_matrix(inst), mesh.vertices);
  std::vector<std::optional<PixelProjection>> projected;
  if (method == BoxMethod::EightPoint) {
    const auto corners = compute_aabb(world).corners();
    for (const auto& c : corners) projected.push_back(projector(c));
  } else {
    projected.reserve(world.size());
    for (const auto& v : world) projected.push_back(projector(v));
  }
  return bbox_from_pixels(projected);
}

std::vector<GroundTruthBox> annotate(const ScenePlan& plan, std::span<const Mesh> class_meshes,
                                     BoxMethod method) {
  const Projector projector(plan.camera);
  const double W = plan.camera.width;
  const double H = plan.camera.height;
  std::vector<GroundTruthBox> labels;
  for (const auto& inst : plan.instances) {
    if (inst.kind != InstanceKind::Object) continue;
    PixelBox box = project_instance(inst, class_meshes, projector, method);
    box.x_min = std::clamp(box.x_min, 0.0, W);
    box.x_max = std::clamp(box.x_max, 0.0, W);
    box.y_min = std::clamp(box.y_min, 0.0, H);
    box.y_max = std::clamp(box.y_max, 0.0, H);
    if (box.width() < 1.0 || box.height() < 1.0) continue;
    labels.push_back({inst.class_id, box.center_x() / W, box.center_y() / H, box.width() / W,
                      box.height() / H});
  }
  return labels;
}

std::string to_yolo_lines(std::span<const GroundTruthBox> boxes) {
  std::string out;
  char line[128];
  for (const auto& b : boxes) {
    const int n = std::snprintf(line, sizeof line, "%d %.6f %.6f %.6f %.6f\n", b.class_id, b.x_center,
                                b.y_center, b.width, b.height);
    out.append(line, static_cast<std::size_t>(n));
  }
  return out;
}

}  // namespace drgen
