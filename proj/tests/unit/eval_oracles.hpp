#pragma once

// Reference implementations for evaluator tests. Written for clarity, not
// speed: every decision is recomputed from scratch.

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <random>
#include <vector>

#include "drgen/evaluator.hpp"

namespace testing {

inline double area(double x0, double y0, double x1, double y1) {
  return std::max(0.0, x1 - x0) * std::max(0.0, y1 - y0);
}

// IoU straight from center/size fields.
inline double ref_iou(double ax, double ay, double aw, double ah, double bx, double by, double bw, double bh) {
  const double ix = std::min(ax + aw / 2, bx + bw / 2) - std::max(ax - aw / 2, bx - bw / 2);
  const double iy = std::min(ay + ah / 2, by + bh / 2) - std::max(ay - ah / 2, by - bh / 2);
  if (ix <= 0 || iy <= 0) return 0.0;
  const double inter = ix * iy;
  return inter / (aw * ah + bw * bh - inter);
}

struct RefMatch {
  std::vector<bool> tp;  // in rank order
  std::size_t truths = 0;
};

// Rank every detection of the class by an explicit O(n^2) comparison count
// (more confident first, earlier image/position first on ties), then replay
// the ranked list, scanning all truths of the image each time.
inline RefMatch ref_match(const std::vector<drgen::EvalImage>& images, int cls, double thr) {
  struct Item {
    std::size_t img, pos, seq;
    double conf;
  };
  std::vector<Item> items;
  std::size_t seq = 0;
  RefMatch out;
  for (std::size_t i = 0; i < images.size(); ++i) {
    for (const auto& t : images[i].truths) out.truths += t.class_id == cls;
    for (std::size_t k = 0; k < images[i].detections.size(); ++k) {
      if (images[i].detections[k].class_id == cls) items.push_back({i, k, seq++, images[i].detections[k].confidence});
    }
  }
  std::vector<Item> ranked(items.size());
  for (const auto& a : items) {
    std::size_t rank = 0;
    for (const auto& b : items) rank += b.conf > a.conf || (b.conf == a.conf && b.seq < a.seq);
    ranked[rank] = a;
  }
  std::vector<std::vector<int>> owner(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) owner[i].assign(images[i].truths.size(), -1);
  for (std::size_t r = 0; r < ranked.size(); ++r) {
    const auto& img = images[ranked[r].img];
    const auto& d = img.detections[ranked[r].pos];
    int pick = -1;
    double pick_iou = 0;
    for (std::size_t g = 0; g < img.truths.size(); ++g) {
      const auto& t = img.truths[g];
      if (t.class_id != cls || owner[ranked[r].img][g] >= 0) continue;
      const double o = ref_iou(d.x_center, d.y_center, d.width, d.height, t.x_center, t.y_center, t.width, t.height);
      if (o < thr) continue;
      if (pick < 0 || o > pick_iou) {
        pick = static_cast<int>(g);
        pick_iou = o;
      }
    }
    if (pick >= 0) owner[ranked[r].img][static_cast<std::size_t>(pick)] = static_cast<int>(r);
    out.tp.push_back(pick >= 0);
  }
  return out;
}

// Precision envelope built point by point: for each operating point, the
// best precision reachable at that recall or higher, weighted by the recall
// step the point adds.
inline double ref_ap(const std::vector<bool>& tp, std::size_t truths) {
  struct Pt {
    double r, p;
  };
  std::vector<Pt> pts;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < tp.size(); ++i) {
    hits += tp[i];
    pts.push_back({static_cast<double>(hits) / truths, static_cast<double>(hits) / (i + 1)});
  }
  double ap = 0;
  double prev = 0;
  for (const auto& a : pts) {
    if (a.r <= prev) continue;
    double env = 0;
    for (const auto& b : pts) {
      if (b.r >= a.r) env = std::max(env, b.p);
    }
    ap += (a.r - prev) * env;
    prev = a.r;
  }
  return ap;
}

// Random image set with clustered boxes so that matches, near misses,
// duplicates and confidence ties all occur.
inline std::vector<drgen::EvalImage> random_eval_set(std::mt19937_64& rng, int classes, int max_truths,
                                                     int max_dets) {
  std::uniform_real_distribution<double> u(0, 1);
  std::uniform_int_distribution<int> cls(0, classes - 1);
  auto box = [&](int c) {
    const double w = 0.05 + 0.25 * u(rng), h = 0.05 + 0.25 * u(rng);
    return drgen::GroundTruthBox{c, w / 2 + (1 - w) * u(rng), h / 2 + (1 - h) * u(rng), w, h};
  };
  std::vector<drgen::EvalImage> images(1 + rng() % 4);
  const int truths = static_cast<int>(rng() % (max_truths + 1));
  const int dets = static_cast<int>(rng() % (max_dets + 1));
  for (int i = 0; i < truths; ++i) images[rng() % images.size()].truths.push_back(box(cls(rng)));
  for (int i = 0; i < dets; ++i) {
    auto& img = images[rng() % images.size()];
    drgen::Detection d;
    if (!img.truths.empty() && u(rng) < 0.7) {
      const auto& t = img.truths[rng() % img.truths.size()];
      const double j = 0.3 * u(rng);
      d = {u(rng) < 0.8 ? t.class_id : cls(rng), 0, t.x_center + j * t.width * (u(rng) - 0.5),
           t.y_center + j * t.height * (u(rng) - 0.5), t.width * (1 + j * (u(rng) - 0.5)),
           t.height * (1 + j * (u(rng) - 0.5))};
    } else {
      const auto b = box(cls(rng));
      d = {b.class_id, 0, b.x_center, b.y_center, b.width, b.height};
    }
    d.confidence = static_cast<double>(rng() % 21) / 20.0;
    img.detections.push_back(d);
  }
  return images;
}

}  // namespace testing
