#include "drgen/evaluator.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "drgen/errors.hpp"

namespace drgen {

double iou(const PixelBox& a, const PixelBox& b) {
  const double iw = std::min(a.x_max, b.x_max) - std::max(a.x_min, b.x_min);
  const double ih = std::min(a.y_max, b.y_max) - std::max(a.y_min, b.y_min);
  if (iw <= 0.0 || ih <= 0.0) return 0.0;
  const double inter = iw * ih;
  const double uni = a.width() * a.height() + b.width() * b.height() - inter;
  return uni > 0.0 ? std::clamp(inter / uni, 0.0, 1.0) : 0.0;
}

double iou(const GroundTruthBox& a, const GroundTruthBox& b) { return iou(a.corners(), b.corners()); }
double iou(const Detection& a, const GroundTruthBox& b) { return iou(a.corners(), b.corners()); }

std::size_t MatchResult::tp_count() const {
  return static_cast<std::size_t>(std::count(true_positive.begin(), true_positive.end(), true));
}

namespace {

struct RankedDet {
  std::size_t image;
  const Detection* det;
};

std::vector<RankedDet> ranked_detections(std::span<const EvalImage> images, int class_id,
                                         double min_confidence) {
  std::vector<RankedDet> ranked;
  for (std::size_t i = 0; i < images.size(); ++i) {
    for (const auto& d : images[i].detections) {
      if (d.class_id == class_id && d.confidence >= min_confidence) ranked.push_back({i, &d});
    }
  }
  std::stable_sort(ranked.begin(), ranked.end(), [](const RankedDet& a, const RankedDet& b) {
    return a.det->confidence > b.det->confidence;
  });
  return ranked;
}

}  // namespace

MatchResult match_for_ap(std::span<const EvalImage> images, int class_id, double iou_thr,
                         double min_confidence) {
  MatchResult out;
  std::vector<std::vector<bool>> taken(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) {
    taken[i].assign(images[i].truths.size(), false);
    for (const auto& t : images[i].truths) out.total_truths += t.class_id == class_id ? 1 : 0;
  }

  for (const auto& [img, det] : ranked_detections(images, class_id, min_confidence)) {
    const auto& truths = images[img].truths;
    double best = -1.0;
    std::size_t best_idx = truths.size();
    for (std::size_t g = 0; g < truths.size(); ++g) {
      if (truths[g].class_id != class_id || taken[img][g]) continue;
      const double o = iou(*det, truths[g]);
      if (o >= iou_thr && o > best) {
        best = o;
        best_idx = g;
      }
    }
    const bool hit = best_idx < truths.size();
    if (hit) taken[img][best_idx] = true;
    out.confidences.push_back(det->confidence);
    out.true_positive.push_back(hit);
  }
  out.false_negatives = out.total_truths - out.tp_count();
  return out;
}

std::optional<double> average_precision(const std::vector<bool>& ranked_tp, std::size_t total_truths) {
  if (total_truths == 0) return std::nullopt;
  const std::size_t n = ranked_tp.size();
  std::vector<double> precision(n);
  std::vector<double> recall(n);
  std::size_t tp = 0;
  for (std::size_t i = 0; i < n; ++i) {
    tp += ranked_tp[i] ? 1 : 0;
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
    recall[i] = static_cast<double>(tp) / static_cast<double>(total_truths);
  }
  for (std::size_t i = n; i-- > 1;) precision[i - 1] = std::max(precision[i - 1], precision[i]);
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ap += (recall[i] - prev_recall) * precision[i];
    prev_recall = recall[i];
  }
  return ap;
}

std::vector<PrPoint> pr_curve(const MatchResult& m) {
  std::vector<PrPoint> curve;
  curve.reserve(m.true_positive.size());
  std::size_t tp = 0;
  for (std::size_t i = 0; i < m.true_positive.size(); ++i) {
    tp += m.true_positive[i] ? 1 : 0;
    const double recall = m.total_truths ? static_cast<double>(tp) / m.total_truths : 0.0;
    curve.push_back({recall, static_cast<double>(tp) / (i + 1), m.confidences[i]});
  }
  return curve;
}

double mean_ap(std::span<const double> per_class_ap) {
  if (per_class_ap.empty()) throw ValidationError("mean_ap: no class has ground truth");
  return std::accumulate(per_class_ap.begin(), per_class_ap.end(), 0.0) /
         static_cast<double>(per_class_ap.size());
}

namespace {

F1Stats f1_from_counts(std::size_t tp, std::size_t fp, std::size_t fn) {
  F1Stats s{tp, fp, fn, 0.0, 0.0, 0.0};
  s.precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  s.recall = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  s.f1 = s.precision + s.recall > 0.0 ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

void check_class_ids(std::span<const EvalImage> images, std::size_t num_classes) {
  for (const auto& img : images) {
    for (const auto& t : img.truths) {
      if (t.class_id < 0 || static_cast<std::size_t>(t.class_id) >= num_classes) {
        throw ValidationError(img.name + ": ground-truth class " + std::to_string(t.class_id) +
                              " outside [0, " + std::to_string(num_classes) + ")");
      }
    }
    for (const auto& d : img.detections) {
      if (d.class_id < 0 || static_cast<std::size_t>(d.class_id) >= num_classes) {
        throw ValidationError(img.name + ": detection class " + std::to_string(d.class_id) +
                              " outside [0, " + std::to_string(num_classes) + ")");
      }
    }
  }
}

}  // namespace

F1Stats f1_at(std::span<const EvalImage> images, std::size_t num_classes, double conf_thr,
              double iou_thr) {
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t c = 0; c < num_classes; ++c) {
    const auto m = match_for_ap(images, static_cast<int>(c), iou_thr, conf_thr);
    tp += m.tp_count();
    fp += m.fp_count();
    fn += m.false_negatives;
  }
  return f1_from_counts(tp, fp, fn);
}

AdaptedConfusionMatrix adapted_confusion(std::span<const EvalImage> images, std::size_t num_classes,
                                         double conf_thr, double iou_thr) {
  check_class_ids(images, num_classes);
  AdaptedConfusionMatrix cm;
  cm.num_classes = num_classes;
  cm.conf_threshold = conf_thr;
  cm.iou_threshold = iou_thr;
  cm.counts.assign((num_classes + 1) * (num_classes + 1), 0);

  for (const auto& img : images) {
    std::vector<bool> paired(img.truths.size(), false);
    for (const auto& d : img.detections) {
      if (d.confidence < conf_thr) continue;
      double best = -1.0;
      std::size_t best_idx = img.truths.size();
      for (std::size_t g = 0; g < img.truths.size(); ++g) {
        const double o = iou(d, img.truths[g]);
        if (o >= iou_thr && o > best) {
          best = o;
          best_idx = g;
        }
      }
      const auto pred = static_cast<std::size_t>(d.class_id);
      if (best_idx < img.truths.size()) {
        paired[best_idx] = true;
        ++cm.at(static_cast<std::size_t>(img.truths[best_idx].class_id), pred);
      } else {
        ++cm.at(cm.none(), pred);
      }
    }
    for (std::size_t g = 0; g < img.truths.size(); ++g) {
      if (!paired[g]) ++cm.at(static_cast<std::size_t>(img.truths[g].class_id), cm.none());
    }
  }
  return cm;
}

double g_ml(double map_train, double map_valid) { return map_train - map_valid; }
double g_reality(double map_valid, double map_test) { return map_valid - map_test; }

namespace {

std::optional<double> map_over(std::span<const EvalImage> images, std::size_t num_classes, double iou_thr) {
  std::vector<double> aps;
  for (std::size_t c = 0; c < num_classes; ++c) {
    const auto m = match_for_ap(images, static_cast<int>(c), iou_thr);
    if (auto ap = average_precision(m.true_positive, m.total_truths)) aps.push_back(*ap);
  }
  if (aps.empty()) return std::nullopt;
  return mean_ap(aps);
}

}  // namespace

EvalReport evaluate(std::span<const EvalImage> images, std::size_t num_classes,
                    const EvalOptions& options) {
  check_class_ids(images, num_classes);
  EvalReport report;
  report.options = options;

  std::vector<MatchResult> matches;
  std::vector<double> aps;
  for (std::size_t c = 0; c < num_classes; ++c) {
    auto m = match_for_ap(images, static_cast<int>(c), options.iou_threshold);
    ClassResult cr;
    cr.class_id = static_cast<int>(c);
    cr.num_truths = m.total_truths;
    cr.num_detections = m.true_positive.size();
    cr.ap = average_precision(m.true_positive, m.total_truths);
    cr.curve = pr_curve(m);
    if (cr.ap) aps.push_back(*cr.ap);
    report.classes.push_back(std::move(cr));
    matches.push_back(std::move(m));
  }
  if (!aps.empty()) report.map = mean_ap(aps);

  // Greedy matching in rank order means a confidence cut keeps a prefix of
  // each class's ranked decisions unchanged.
  for (int k = 0; k <= 100; ++k) {
    const double thr = k / 100.0;
    std::size_t tp = 0, fp = 0, total = 0;
    for (const auto& m : matches) {
      total += m.total_truths;
      for (std::size_t i = 0; i < m.confidences.size() && m.confidences[i] >= thr; ++i) {
        (m.true_positive[i] ? tp : fp) += 1;
      }
    }
    report.f1_curve.emplace_back(thr, f1_from_counts(tp, fp, total - tp));
  }

  report.confusion = adapted_confusion(images, num_classes, options.conf_threshold, options.iou_threshold);

  std::set<std::string> groups;
  for (const auto& img : images) {
    if (!img.group.empty()) groups.insert(img.group);
  }
  for (const auto& g : groups) {
    std::vector<EvalImage> subset;
    for (const auto& img : images) {
      if (img.group == g) subset.push_back(img);
    }
    report.group_map[g] = map_over(subset, num_classes, options.iou_threshold);
  }

  if (options.map_train && options.map_valid) report.g_ml = g_ml(*options.map_train, *options.map_valid);
  if (options.map_valid && options.map_test) report.g_reality = g_reality(*options.map_valid, *options.map_test);
  return report;
}

namespace {

std::string class_label(const EvalOptions& o, std::size_t c) {
  return c < o.class_names.size() ? o.class_names[c] : std::to_string(c);
}

nlohmann::json opt_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); }
nlohmann::json opt_percent(const std::optional<double>& v) {
  return v ? nlohmann::json(*v * 100.0) : nlohmann::json();
}

}  // namespace

nlohmann::json to_json(const EvalReport& r) {
  using nlohmann::json;
  json classes = json::array();
  for (const auto& c : r.classes) {
    json curve = json::array();
    for (const auto& p : c.curve) curve.push_back({p.recall, p.precision, p.confidence});
    classes.push_back({{"class_id", c.class_id},
                       {"name", class_label(r.options, static_cast<std::size_t>(c.class_id))},
                       {"num_truths", c.num_truths},
                       {"num_detections", c.num_detections},
                       {"ap", opt_json(c.ap)},
                       {"ap50_percent", opt_percent(c.ap)},
                       {"excluded_no_truth", !c.ap.has_value()},
                       {"pr_curve", curve}});
  }
  json f1 = json::array();
  for (const auto& [thr, s] : r.f1_curve) {
    f1.push_back({{"threshold", thr}, {"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1},
                  {"tp", s.tp}, {"fp", s.fp}, {"fn", s.fn}});
  }
  json labels = json::array();
  for (std::size_t c = 0; c < r.confusion.num_classes; ++c) labels.push_back(class_label(r.options, c));
  labels.push_back("none");
  json rows = json::array();
  for (std::size_t i = 0; i <= r.confusion.num_classes; ++i) {
    json row = json::array();
    for (std::size_t j = 0; j <= r.confusion.num_classes; ++j) row.push_back(r.confusion.at(i, j));
    rows.push_back(row);
  }
  json groups = json::object();
  for (const auto& [g, m] : r.group_map) groups[g] = {{"map", opt_json(m)}, {"map50_percent", opt_percent(m)}};

  return {{"iou_threshold", r.options.iou_threshold},
          {"conf_threshold", r.options.conf_threshold},
          {"map", opt_json(r.map)},
          {"map50_percent", opt_percent(r.map)},
          {"classes", classes},
          {"f1_curve", f1},
          {"confusion", {{"conf_threshold", r.confusion.conf_threshold},
                         {"iou_threshold", r.confusion.iou_threshold},
                         {"labels", labels},
                         {"rows_are", "ground truth"},
                         {"columns_are", "prediction"},
                         {"counts", rows}}},
          {"groups", groups},
          {"g_ml", opt_json(r.g_ml)},
          {"g_reality", opt_json(r.g_reality)}};
}

std::string to_text(const EvalReport& r) {
  std::ostringstream os;
  char buf[256];
  auto pct = [](const std::optional<double>& v) {
    char b[32];
    if (!v) return std::string("     n/a");
    std::snprintf(b, sizeof b, "%8.2f", *v * 100.0);
    return std::string(b);
  };

  os << "mAP50 (%) at IoU " << r.options.iou_threshold << "\n\n";
  std::snprintf(buf, sizeof buf, "%-20s %8s %8s %8s\n", "class", "GT", "dets", "AP50");
  os << buf;
  for (const auto& c : r.classes) {
    std::snprintf(buf, sizeof buf, "%-20s %8zu %8zu %s\n",
                  class_label(r.options, static_cast<std::size_t>(c.class_id)).c_str(), c.num_truths,
                  c.num_detections, pct(c.ap).c_str());
    os << buf;
  }
  std::snprintf(buf, sizeof buf, "%-20s %8s %8s %s\n", "mean", "", "", pct(r.map).c_str());
  os << buf;

  if (!r.group_map.empty()) {
    os << "\nper group\n";
    for (const auto& [g, m] : r.group_map) {
      std::snprintf(buf, sizeof buf, "%-20s %s\n", g.c_str(), pct(m).c_str());
      os << buf;
    }
  }

  if (r.g_ml) {
    std::snprintf(buf, sizeof buf, "\nG_ML      = %.2f\n", *r.g_ml);
    os << buf;
  }
  if (r.g_reality) {
    std::snprintf(buf, sizeof buf, "%sG_reality = %.2f\n", r.g_ml ? "" : "\n", *r.g_reality);
    os << buf;
  }

  const auto& cm = r.confusion;
  os << "\nconfusion matrix (rows: ground truth, columns: prediction), conf >= " << cm.conf_threshold
     << ", IoU >= " << cm.iou_threshold << "\n";
  std::snprintf(buf, sizeof buf, "%-14s", "");
  os << buf;
  for (std::size_t j = 0; j <= cm.num_classes; ++j) {
    const std::string name = j == cm.none() ? "none" : class_label(r.options, j);
    std::snprintf(buf, sizeof buf, " %8.8s", name.c_str());
    os << buf;
  }
  os << '\n';
  for (std::size_t i = 0; i <= cm.num_classes; ++i) {
    const std::string name = i == cm.none() ? "none" : class_label(r.options, i);
    std::snprintf(buf, sizeof buf, "%-14.14s", name.c_str());
    os << buf;
    for (std::size_t j = 0; j <= cm.num_classes; ++j) {
      std::snprintf(buf, sizeof buf, " %8llu", static_cast<unsigned long long>(cm.at(i, j)));
      os << buf;
    }
    os << '\n';
  }
  return os.str();
}

namespace {

template <typename Fn>
void for_each_record(std::string_view text, std::size_t expected_fields, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  std::vector<std::string_view> fields;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;

    fields.clear();
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      const std::size_t start = i;
      while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      if (i > start) fields.push_back(line.substr(start, i - start));
    }
    if (fields.empty()) continue;
    if (fields.size() != expected_fields) {
      throw ValidationError("line " + std::to_string(line_no) + ": expected " +
                            std::to_string(expected_fields) + " fields, got " +
                            std::to_string(fields.size()));
    }
    fn(fields, line_no);
  }
}

[[noreturn]] void field_error(std::size_t line, std::string_view field, const char* what) {
  throw ValidationError("line " + std::to_string(line) + ": " + what + " '" + std::string(field) + "'");
}

int parse_class(std::string_view f, std::size_t line) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
  if (ec != std::errc{} || ptr != f.data() + f.size() || v < 0) field_error(line, f, "invalid class id");
  return v;
}

double parse_num(std::string_view f, std::size_t line) {
  double v = 0.0;
  if (!f.empty() && f.front() == '+') f.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
  if (ec != std::errc{} || ptr != f.data() + f.size() || !std::isfinite(v)) {
    field_error(line, f, "non-numeric field");
  }
  return v;
}

void check_size(double w, double h, std::size_t line) {
  if (!(w > 0.0) || !(h > 0.0)) {
    throw ValidationError("line " + std::to_string(line) + ": box width and height must be positive");
  }
}

}  // namespace

std::vector<GroundTruthBox> parse_annotations(std::string_view text) {
  std::vector<GroundTruthBox> out;
  for_each_record(text, 5, [&](const std::vector<std::string_view>& f, std::size_t line) {
    GroundTruthBox b{parse_class(f[0], line), parse_num(f[1], line), parse_num(f[2], line),
                     parse_num(f[3], line), parse_num(f[4], line)};
    check_size(b.width, b.height, line);
    for (double v : {b.x_center, b.y_center, b.width, b.height}) {
      if (v < 0.0 || v > 1.0) {
        throw ValidationError("line " + std::to_string(line) + ": coordinates must lie in [0, 1]");
      }
    }
    out.push_back(b);
  });
  return out;
}

std::vector<Detection> parse_detections(std::string_view text) {
  std::vector<Detection> out;
  for_each_record(text, 6, [&](const std::vector<std::string_view>& f, std::size_t line) {
    Detection d{parse_class(f[0], line), parse_num(f[1], line), parse_num(f[2], line),
                parse_num(f[3], line),  parse_num(f[4], line), parse_num(f[5], line)};
    if (d.confidence < 0.0 || d.confidence > 1.0) {
      throw ValidationError("line " + std::to_string(line) + ": confidence must lie in [0, 1]");
    }
    check_size(d.width, d.height, line);
    out.push_back(d);
  });
  return out;
}

}  // namespace drgen
