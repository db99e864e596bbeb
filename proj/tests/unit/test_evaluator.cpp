#include <doctest.h>

#include <cmath>
#include <random>
#include <string>

#include <nlohmann/json.hpp>

#include "drgen/errors.hpp"
#include "drgen/evaluator.hpp"
#include "eval_oracles.hpp"

using namespace drgen;
using doctest::Approx;

namespace {

GroundTruthBox gt(int c, double x, double y, double w, double h) { return {c, x, y, w, h}; }
Detection det(int c, double conf, double x, double y, double w, double h) { return {c, conf, x, y, w, h}; }
Detection det_on(const GroundTruthBox& g, double conf, int c = -1) {
  return {c < 0 ? g.class_id : c, conf, g.x_center, g.y_center, g.width, g.height};
}

// Three images, two classes. Class 0 ranks TP (.9), FP (.8), TP (.6) over
// three truths; class 1 has one exact hit.
std::vector<EvalImage> hand_set() {
  std::vector<EvalImage> s(3);
  s[0].name = "a";
  s[0].group = "A";
  s[0].truths = {gt(0, 0.25, 0.25, 0.2, 0.2)};
  s[0].detections = {det_on(s[0].truths[0], 0.9)};
  s[1].name = "b";
  s[1].group = "A";
  s[1].truths = {gt(0, 0.5, 0.5, 0.2, 0.2)};
  s[1].detections = {det(0, 0.8, 0.9, 0.1, 0.1, 0.1), det_on(s[1].truths[0], 0.6)};
  s[2].name = "c";
  s[2].group = "B";
  s[2].truths = {gt(0, 0.7, 0.7, 0.1, 0.1), gt(1, 0.2, 0.8, 0.2, 0.2)};
  s[2].detections = {det_on(s[2].truths[1], 0.95)};
  return s;
}

std::uint64_t total(const AdaptedConfusionMatrix& cm) {
  std::uint64_t n = 0;
  for (auto v : cm.counts) n += v;
  return n;
}

}  // namespace

TEST_SUITE("evaluator") {
  TEST_CASE("iou") {
    const PixelBox a{0, 0, 2, 2}, b{1, 0, 3, 2}, far{5, 5, 6, 6};
    CHECK(iou(a, a) == 1.0);
    CHECK(iou(a, far) == 0.0);
    CHECK(iou(a, b) == Approx(2.0 / 6.0).epsilon(1e-15));
    CHECK(iou(PixelBox{0, 0, 1, 1}, PixelBox{1, 0, 2, 1}) == 0.0);

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.01, 0.99);
    for (int i = 0; i < 2000; ++i) {
      const GroundTruthBox p{0, u(rng), u(rng), u(rng) / 2, u(rng) / 2};
      const GroundTruthBox q{0, u(rng), u(rng), u(rng) / 2, u(rng) / 2};
      const double o = iou(p, q);
      REQUIRE(o >= 0.0);
      REQUIRE(o <= 1.0);
      CHECK(o == iou(q, p));
      CHECK(iou(p, p) == Approx(1.0).epsilon(1e-12));
      CHECK(std::abs(o - testing::ref_iou(p.x_center, p.y_center, p.width, p.height, q.x_center, q.y_center,
                                          q.width, q.height)) < 1e-12);
    }
  }

  TEST_CASE("match_for_ap basics") {
    std::vector<EvalImage> s(1);
    s[0].truths = {gt(0, 0.5, 0.5, 0.2, 0.2)};
    s[0].detections = {det_on(s[0].truths[0], 0.7)};
    auto m = match_for_ap(s, 0, 0.5);
    CHECK(m.tp_count() == 1);
    CHECK(m.fp_count() == 0);
    CHECK(m.false_negatives == 0);

    s[0].detections.push_back(det_on(s[0].truths[0], 0.7));
    m = match_for_ap(s, 0, 0.5);
    CHECK(m.true_positive == std::vector<bool>{true, false});

    // Ties on IoU go to the lowest truth index.
    s[0].truths.push_back(s[0].truths[0]);
    s[0].detections = {det_on(s[0].truths[0], 0.7)};
    m = match_for_ap(s, 0, 0.5);
    CHECK(m.tp_count() == 1);
    CHECK(m.false_negatives == 1);

    // A detection of another class never matches.
    s[0].detections = {det_on(s[0].truths[0], 0.9, 1)};
    CHECK(match_for_ap(s, 0, 0.5).true_positive.empty());
    CHECK(match_for_ap(s, 1, 0.5).true_positive == std::vector<bool>{false});
  }

  TEST_CASE("match_for_ap ranks by confidence, ties by input order") {
    std::vector<EvalImage> s(2);
    s[0].truths = {gt(0, 0.5, 0.5, 0.2, 0.2)};
    s[1].truths = {gt(0, 0.5, 0.5, 0.2, 0.2)};
    s[0].detections = {det_on(s[0].truths[0], 0.3), det(0, 0.8, 0.1, 0.1, 0.05, 0.05)};
    s[1].detections = {det_on(s[1].truths[0], 0.8), det_on(s[1].truths[0], 0.3)};
    const auto m = match_for_ap(s, 0, 0.5);
    CHECK(m.confidences == std::vector<double>{0.8, 0.8, 0.3, 0.3});
    CHECK(m.true_positive == std::vector<bool>{false, true, true, false});
  }

  TEST_CASE("match_for_ap equals the exhaustive reference") {
    std::mt19937_64 rng(404);
    for (int trial = 0; trial < 300; ++trial) {
      const auto images = testing::random_eval_set(rng, 3, 20, 40);
      for (int c = 0; c < 3; ++c) {
        const auto m = match_for_ap(images, c, 0.5);
        const auto ref = testing::ref_match(images, c, 0.5);
        REQUIRE(m.true_positive == ref.tp);
        REQUIRE(m.total_truths == ref.truths);
        REQUIRE(m.false_negatives == ref.truths - m.tp_count());
      }
    }
  }

  TEST_CASE("average_precision") {
    CHECK(average_precision({true}, 1) == 1.0);
    CHECK(average_precision({}, 3) == 0.0);
    CHECK(average_precision({true, false}, 2) == 0.5);
    CHECK_FALSE(average_precision({false}, 0).has_value());
    CHECK(*average_precision({false, true}, 1) == Approx(0.5));

    std::mt19937_64 rng(77);
    int checked = 0;
    for (int trial = 0; trial < 600; ++trial) {
      const auto images = testing::random_eval_set(rng, 5, 20, 40);
      for (int c = 0; c < 5; ++c) {
        const auto m = match_for_ap(images, c, 0.5);
        const auto ap = average_precision(m.true_positive, m.total_truths);
        if (m.total_truths == 0) {
          CHECK_FALSE(ap.has_value());
          continue;
        }
        REQUIRE(ap.has_value());
        REQUIRE(*ap >= 0.0);
        REQUIRE(*ap <= 1.0);
        REQUIRE(std::abs(*ap - testing::ref_ap(m.true_positive, m.total_truths)) <= 1e-9);
        ++checked;
      }
    }
    CHECK(checked > 1000);
  }

  TEST_CASE("AP never rises when a hit is relabeled a miss") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 300; ++trial) {
      const std::size_t n = 1 + rng() % 30;
      std::vector<bool> tp(n);
      std::size_t hits = 0;
      for (std::size_t i = 0; i < n; ++i) hits += tp[i] = rng() % 2;
      const std::size_t truths = hits + rng() % 5 + 1;
      const double before = *average_precision(tp, truths);
      for (std::size_t i = 0; i < n; ++i) {
        if (!tp[i]) continue;
        auto worse = tp;
        worse[i] = false;
        CHECK(*average_precision(worse, truths) <= before + 1e-15);
      }
    }
  }

  TEST_CASE("pr_curve") {
    const auto s = hand_set();
    const auto m = match_for_ap(s, 0, 0.5);
    const auto curve = pr_curve(m);
    REQUIRE(curve.size() == 3);
    CHECK(curve[0].recall == Approx(1.0 / 3));
    CHECK(curve[0].precision == 1.0);
    CHECK(curve[0].confidence == 0.9);
    CHECK(curve[1].precision == 0.5);
    CHECK(curve[2].recall == Approx(2.0 / 3));
    CHECK(curve[2].precision == Approx(2.0 / 3));
    for (std::size_t i = 1; i < curve.size(); ++i) CHECK(curve[i].recall >= curve[i - 1].recall);
  }

  TEST_CASE("mean_ap") {
    const double one[] = {0.7};
    CHECK(mean_ap(one) == 0.7);
    const double two[] = {1.0, 0.0};
    CHECK(mean_ap(two) == 0.5);
    CHECK_THROWS_AS(mean_ap(std::span<const double>{}), ValidationError);

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<double> aps(10);
    for (auto& a : aps) a = u(rng);
    // Kahan summation as the reference.
    double sum = 0, comp = 0;
    for (double a : aps) {
      const double y = a - comp;
      const double t = sum + y;
      comp = (t - sum) - y;
      sum = t;
    }
    CHECK(std::abs(mean_ap(aps) - sum / 10) <= 1e-12);
  }

  TEST_CASE("f1_at") {
    std::vector<EvalImage> s(1);
    for (int i = 0; i < 5; ++i) s[0].truths.push_back(gt(0, 0.1 + 0.18 * i, 0.5, 0.1, 0.1));
    for (int i = 0; i < 5; ++i) s[0].detections.push_back(det_on(s[0].truths[i], 0.9));
    CHECK(f1_at(s, 1, 0.5, 0.5).f1 == 1.0);
    CHECK(f1_at(s, 1, 0.95, 0.5).f1 == 0.0);

    // 3 TP, 1 FP, 2 FN.
    s[0].detections.resize(3);
    s[0].detections.push_back(det(0, 0.9, 0.5, 0.05, 0.05, 0.05));
    const auto f = f1_at(s, 1, 0.5, 0.5);
    CHECK(f.tp == 3);
    CHECK(f.fp == 1);
    CHECK(f.fn == 2);
    CHECK(f.precision == 0.75);
    CHECK(f.recall == Approx(0.6));
    CHECK(f.f1 == Approx(2.0 / 3.0));
  }

  TEST_CASE("adapted confusion: perfect one-to-one is diagonal") {
    std::vector<EvalImage> s(1);
    for (int c = 0; c < 3; ++c) {
      s[0].truths.push_back(gt(c, 0.2 + 0.3 * c, 0.5, 0.1, 0.1));
      s[0].detections.push_back(det_on(s[0].truths.back(), 0.9));
    }
    const auto cm = adapted_confusion(s, 3, 0.8, 0.5);
    for (std::size_t i = 0; i <= 3; ++i)
      for (std::size_t j = 0; j <= 3; ++j) CHECK(cm.at(i, j) == (i == j && i < 3 ? 1u : 0u));
  }

  TEST_CASE("adapted confusion: a missed truth lands in the extra column") {
    std::vector<EvalImage> s(1);
    s[0].truths = {gt(1, 0.5, 0.5, 0.2, 0.2)};
    const auto cm = adapted_confusion(s, 3, 0.8, 0.5);
    CHECK(cm.at(1, cm.none()) == 1);
    CHECK(total(cm) == 1);
  }

  TEST_CASE("adapted confusion: two predictions on one truth count it twice") {
    std::vector<EvalImage> s(1);
    s[0].truths = {gt(2, 0.5, 0.5, 0.2, 0.2)};
    s[0].detections = {det_on(s[0].truths[0], 0.9), det(0, 0.85, 0.51, 0.5, 0.2, 0.2)};
    const auto cm = adapted_confusion(s, 3, 0.8, 0.5);
    CHECK(cm.at(2, 2) == 1);
    CHECK(cm.at(2, 0) == 1);
    CHECK(total(cm) == 2);
    CHECK(cm.at(cm.none(), cm.none()) == 0);
  }

  TEST_CASE("adapted confusion accounting") {
    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 200; ++trial) {
      const auto images = testing::random_eval_set(rng, 4, 20, 40);
      std::uint64_t prev_mass = UINT64_MAX;
      for (double thr : {0.0, 0.25, 0.5, 0.8, 1.0}) {
        const auto cm = adapted_confusion(images, 4, thr, 0.5);
        CHECK(cm.at(4, 4) == 0);
        std::uint64_t above = 0, truths = 0;
        for (const auto& img : images) {
          truths += img.truths.size();
          for (const auto& d : img.detections) above += d.confidence >= thr;
        }
        std::uint64_t not_none_col = 0, not_none_row = 0, col_none = 0;
        for (std::size_t i = 0; i <= 4; ++i)
          for (std::size_t j = 0; j <= 4; ++j) {
            if (j != 4) not_none_col += cm.at(i, j);
            if (i != 4) not_none_row += cm.at(i, j);
            if (j == 4) col_none += cm.at(i, j);
          }
        // Every detection above threshold is counted exactly once.
        CHECK(not_none_col == above);
        CHECK(not_none_col <= prev_mass);
        prev_mass = not_none_col;
        CHECK(col_none <= truths);
        // Unpaired truths count once, paired truths once per pairing.
        CHECK(not_none_row >= truths);
      }
    }
  }

  TEST_CASE("gap metrics") {
    CHECK(g_ml(97.0, 97.0) == 0.0);
    CHECK(g_ml(100, 98.5) == 1.5);
    CHECK(g_ml(71.3, 12.9) == -g_ml(12.9, 71.3));
    CHECK(g_reality(50, 50) == 0.0);
    CHECK(std::round(g_reality(99.84, 83.16) * 100) / 100 == Approx(16.68).epsilon(1e-12));
    CHECK(std::round(g_reality(99.84, 10.83) * 100) / 100 == Approx(89.01).epsilon(1e-12));
  }

  TEST_CASE("hand-computed three-image set") {
    const auto s = hand_set();
    EvalOptions opt;
    opt.conf_threshold = 0.5;
    opt.map_train = 99.0;
    opt.map_valid = 97.5;
    opt.map_test = 80.0;
    const auto r = evaluate(s, 2, opt);
    REQUIRE(r.classes.size() == 2);
    CHECK(*r.classes[0].ap == Approx(5.0 / 9.0).epsilon(1e-12));
    CHECK(*r.classes[1].ap == 1.0);
    CHECK(*r.map == Approx(7.0 / 9.0).epsilon(1e-12));

    // Group A holds only class 0 hits (.9 TP, .8 FP, .6 TP over two truths).
    CHECK(*r.group_map.at("A") == Approx(1.0 * 0.5 + (2.0 / 3.0) * 0.5));
    CHECK(*r.group_map.at("B") == Approx(0.5));

    const auto at07 = r.f1_curve[70];
    CHECK(at07.first == Approx(0.7));
    CHECK(at07.second.tp == 2);
    CHECK(at07.second.fp == 1);
    CHECK(at07.second.fn == 2);
    CHECK(at07.second.f1 == Approx(4.0 / 7.0));
    CHECK(at07.second.f1 == Approx(f1_at(s, 2, 0.7, 0.5).f1));

    const auto& cm = r.confusion;
    CHECK(cm.at(0, 0) == 2);
    CHECK(cm.at(0, 2) == 1);
    CHECK(cm.at(1, 1) == 1);
    CHECK(cm.at(2, 0) == 1);
    CHECK(total(cm) == 5);

    CHECK(*r.g_ml == Approx(1.5));
    CHECK(*r.g_reality == Approx(17.5));

    const auto j = to_json(r);
    CHECK(j["map"].get<double>() == Approx(7.0 / 9.0));
    CHECK(j["confusion"]["counts"][0][0] == 2);
    CHECK(j["classes"][1]["excluded_no_truth"] == false);
    const auto text = to_text(r);
    CHECK(text.find("77.78") != std::string::npos);
    CHECK(text.find("G_reality") != std::string::npos);
  }

  TEST_CASE("perfect and empty predictions") {
    auto s = hand_set();
    for (auto& img : s) {
      img.detections.clear();
      for (const auto& t : img.truths) img.detections.push_back(det_on(t, 1.0));
    }
    auto r = evaluate(s, 2, {});
    CHECK(*r.map == 1.0);
    CHECK(r.f1_curve.back().second.f1 == 1.0);

    for (auto& img : s) img.detections.clear();
    r = evaluate(s, 3, {});
    CHECK(*r.map == 0.0);
    CHECK_FALSE(r.classes[2].ap.has_value());
    const auto& cm = r.confusion;
    std::uint64_t none_col = 0;
    for (std::size_t i = 0; i < 3; ++i) none_col += cm.at(i, cm.none());
    CHECK(none_col == 4);
    CHECK(total(cm) == 4);
  }

  TEST_CASE("evaluate rejects class ids out of range") {
    auto s = hand_set();
    CHECK_THROWS_AS(evaluate(s, 1, {}), ValidationError);
  }

  TEST_CASE("parsers") {
    CHECK(parse_annotations("").empty());
    CHECK(parse_detections("\n\n").empty());
    const auto a = parse_annotations("0 0.5 0.5 0.25 0.125\n");
    REQUIRE(a.size() == 1);
    CHECK(a[0] == GroundTruthBox{0, 0.5, 0.5, 0.25, 0.125});
    CHECK(parse_annotations("  3\t0.1   0.2 0.1  0.1  \r\n").size() == 1);
    const auto d = parse_detections("2 0.75 0.5 0.5 0.1 0.2");
    REQUIRE(d.size() == 1);
    CHECK(d[0] == Detection{2, 0.75, 0.5, 0.5, 0.1, 0.2});

    auto message = [](auto fn) {
      try {
        fn();
      } catch (const ValidationError& e) {
        return std::string(e.what());
      }
      return std::string();
    };
    CHECK(message([] { parse_annotations("0 0.5 0.5 0.1 0.1\n0 0.5 0.5 0.1\n"); }).find("line 2") !=
          std::string::npos);
    CHECK(message([] { parse_annotations("0 0.5 abc 0.1 0.1\n"); }).find("line 1") != std::string::npos);
    CHECK(message([] { parse_detections("\n1 0.5 0.5 0.5 0.1 0.1 9\n"); }).find("line 2") != std::string::npos);
    CHECK_THROWS_AS(parse_detections("0 1.5 0.5 0.5 0.1 0.1"), ValidationError);
    CHECK_THROWS_AS(parse_annotations("0 0.5 0.5 0 0.1"), ValidationError);
    CHECK_THROWS_AS(parse_annotations("-1 0.5 0.5 0.1 0.1"), ValidationError);

    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(0.1, 0.9);
    std::string text;
    std::vector<Detection> want;
    for (int i = 0; i < 50; ++i) {
      want.push_back({i % 4, u(rng), u(rng), u(rng), u(rng) / 5, u(rng) / 5});
      char buf[128];
      std::snprintf(buf, sizeof buf, "%d %.6f %.6f %.6f %.6f %.6f\n", want.back().class_id, want.back().confidence,
                    want.back().x_center, want.back().y_center, want.back().width, want.back().height);
      text += buf;
    }
    const auto got = parse_detections(text);
    REQUIRE(got.size() == want.size());
    for (std::size_t i = 0; i < want.size(); ++i) {
      CHECK(got[i].class_id == want[i].class_id);
      CHECK(std::abs(got[i].confidence - want[i].confidence) <= 1e-6);
      CHECK(std::abs(got[i].x_center - want[i].x_center) <= 1e-6);
      CHECK(std::abs(got[i].height - want[i].height) <= 1e-6);
    }
  }
}
