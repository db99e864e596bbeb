#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "drgen/boxes.hpp"

namespace drgen {

/// Intersection over union; 0 for disjoint or degenerate boxes.
double iou(const PixelBox& a, const PixelBox& b);
double iou(const GroundTruthBox& a, const GroundTruthBox& b);
double iou(const Detection& a, const GroundTruthBox& b);

/// Ground truth and predictions of one image.
struct EvalImage {
  std::string name;
  std::string group;  // optional tag for per-group breakdowns
  std::vector<GroundTruthBox> truths;
  std::vector<Detection> detections;
};

/// Outcome of one-to-one matching for a single class, in ranked order
/// (confidence descending, ties by input order).
struct MatchResult {
  std::vector<double> confidences;
  std::vector<bool> true_positive;
  std::size_t false_negatives = 0;
  std::size_t total_truths = 0;

  std::size_t tp_count() const;
  std::size_t fp_count() const { return true_positive.size() - tp_count(); }
};

/// Each ranked detection of `class_id` takes the still-unmatched truth of
/// the same class and image with the highest IoU >= iou_thr (ties go to the
/// lowest truth index); otherwise it is a false positive. Detections below
/// `min_confidence` are ignored.
MatchResult match_for_ap(std::span<const EvalImage> images, int class_id, double iou_thr,
                         double min_confidence = 0.0);

/// All-point interpolated AP over a ranked TP/FP sequence:
/// sum over i of (r_i - r_{i-1}) * max{p_j : r_j >= r_i}.
/// nullopt when there is no ground truth.
std::optional<double> average_precision(const std::vector<bool>& ranked_tp, std::size_t total_truths);

struct PrPoint {
  double recall = 0.0;
  double precision = 0.0;
  double confidence = 0.0;
};

std::vector<PrPoint> pr_curve(const MatchResult& match);

/// Arithmetic mean; throws ValidationError on empty input.
double mean_ap(std::span<const double> per_class_ap);

struct F1Stats {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Precision, recall and F1 over all classes for detections with
/// confidence >= conf_thr, using the same one-to-one matching as AP.
F1Stats f1_at(std::span<const EvalImage> images, std::size_t num_classes, double conf_thr,
              double iou_thr);

/// (c + 1) x (c + 1) counts; row = true class, column = predicted class,
/// index c = "none". counts(c, c) is always 0.
struct AdaptedConfusionMatrix {
  std::size_t num_classes = 0;
  double conf_threshold = 0.8;
  double iou_threshold = 0.5;
  std::vector<std::uint64_t> counts;

  std::uint64_t at(std::size_t truth, std::size_t predicted) const {
    return counts[truth * (num_classes + 1) + predicted];
  }
  std::uint64_t& at(std::size_t truth, std::size_t predicted) {
    return counts[truth * (num_classes + 1) + predicted];
  }
  std::size_t none() const { return num_classes; }
};

/// Each detection with confidence >= conf_thr pairs with the truth of any
/// class in its image with the highest IoU >= iou_thr. A truth may be
/// paired many times and is counted once per pairing. Unpaired detections
/// go to the "none" row, unpaired truths to the "none" column.
AdaptedConfusionMatrix adapted_confusion(std::span<const EvalImage> images, std::size_t num_classes,
                                         double conf_thr, double iou_thr);

/// Train/valid gap, percentage points.
double g_ml(double map_train, double map_valid);
/// Valid/test gap, percentage points.
double g_reality(double map_valid, double map_test);

struct ClassResult {
  int class_id = 0;
  std::size_t num_truths = 0;
  std::size_t num_detections = 0;
  std::optional<double> ap;  // nullopt: no ground truth, excluded from mAP
  std::vector<PrPoint> curve;
};

struct EvalOptions {
  double iou_threshold = 0.5;
  double conf_threshold = 0.8;
  std::optional<double> map_train;
  std::optional<double> map_valid;
  std::optional<double> map_test;
  std::vector<std::string> class_names;
};

struct EvalReport {
  std::vector<ClassResult> classes;
  std::optional<double> map;  // fraction; nullopt when no class has truths
  std::vector<std::pair<double, F1Stats>> f1_curve;  // thresholds 0.00 .. 1.00
  AdaptedConfusionMatrix confusion;
  std::map<std::string, std::optional<double>> group_map;
  std::optional<double> g_ml;
  std::optional<double> g_reality;
  EvalOptions options;
};

EvalReport evaluate(std::span<const EvalImage> images, std::size_t num_classes,
                    const EvalOptions& options);

nlohmann::json to_json(const EvalReport& report);
/// Plain-text per-class / per-group tables plus the confusion matrix.
std::string to_text(const EvalReport& report);

/// Five fields per line: class x_center y_center width height.
std::vector<GroundTruthBox> parse_annotations(std::string_view text);
/// Six fields per line: class confidence x_center y_center width height.
std::vector<Detection> parse_detections(std::string_view text);

}  // namespace drgen
