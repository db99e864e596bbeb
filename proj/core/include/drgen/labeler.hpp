#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "drgen/boxes.hpp"
#include "drgen/config.hpp"
#include "drgen/geometry.hpp"
#include "drgen/sampler.hpp"

namespace drgen {

/// Min/max over projected points. A nullopt entry marks a point behind the
/// camera and is rejected, as is an empty list (ValidationError).
PixelBox bbox_from_pixels(std::span<const std::optional<PixelProjection>> points);

/// Unclipped pixel box of one instance: the 8 corners of its world AABB
/// (EightPoint) or every transformed vertex (AllPoint).
PixelBox project_instance(const SceneInstance& inst, std::span<const Mesh> class_meshes,
                          const Projector& projector, BoxMethod method);

/// Labels for every class instance in the plan. Boxes are clipped to the
/// image, dropped when narrower or shorter than one pixel, then normalized.
/// Distractors get no label; occlusion is not considered.
std::vector<GroundTruthBox> annotate(const ScenePlan& plan, std::span<const Mesh> class_meshes,
                                     BoxMethod method);

/// "<class> <xc> <yc> <w> <h>\n" per box, six decimals.
std::string to_yolo_lines(std::span<const GroundTruthBox> boxes);

}  // namespace drgen
