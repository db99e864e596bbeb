#pragma once

namespace drgen {

/// Pixel-space box; corners in image pixels, origin top-left.
struct PixelBox {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  double width() const { return x_max - x_min; }
  double height() const { return y_max - y_min; }
  double center_x() const { return (x_min + x_max) / 2.0; }
  double center_y() const { return (y_min + y_max) / 2.0; }
};

/// Normalized YOLO box: center and size as fractions of the image.
struct GroundTruthBox {
  int class_id = 0;
  double x_center = 0.0;
  double y_center = 0.0;
  double width = 0.0;
  double height = 0.0;

  PixelBox corners() const {
    return {x_center - width / 2.0, y_center - height / 2.0, x_center + width / 2.0,
            y_center + height / 2.0};
  }
  friend bool operator==(const GroundTruthBox&, const GroundTruthBox&) = default;
};

struct Detection {
  int class_id = 0;
  double confidence = 0.0;
  double x_center = 0.0;
  double y_center = 0.0;
  double width = 0.0;
  double height = 0.0;

  PixelBox corners() const {
    return {x_center - width / 2.0, y_center - height / 2.0, x_center + width / 2.0,
            y_center + height / 2.0};
  }
  friend bool operator==(const Detection&, const Detection&) = default;
};

}  // namespace drgen
