#include <benchmark/benchmark.h>

#include <filesystem>

#include "drgen/config.hpp"
#include "drgen/evaluator.hpp"
#include "drgen/labeler.hpp"
#include "drgen/pipeline.hpp"
#include "drgen/postprocess.hpp"
#include "drgen/renderer.hpp"
#include "drgen/sampler.hpp"

namespace {

struct Fixture {
  drgen::GenerationConfig cfg;
  drgen::SceneAssets assets;
  drgen::ScenePlan plan;

  Fixture() {
    cfg = drgen::load_config(std::filesystem::path(DRGEN_DATA_DIR) / "default_config.json");
    cfg.r_width = {640, 640};
    cfg.r_height = {480, 480};
    assets = drgen::load_assets(cfg);
    plan = drgen::plan_image(cfg, assets.meshes, assets.textures.size(), 1, drgen::kTrainSplit, 0);
  }
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

void BM_PlanImage(benchmark::State& state) {
  const auto& f = fixture();
  std::uint64_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(drgen::plan_image(f.cfg, f.assets.meshes, f.assets.textures.size(), 1,
                                               drgen::kTrainSplit, i++));
  }
}
BENCHMARK(BM_PlanImage);

void BM_Render(benchmark::State& state) {
  const auto& f = fixture();
  const auto type = static_cast<drgen::ImageType>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(drgen::render(f.plan, f.assets.meshes, f.assets.textures, {type, 25.0}));
  }
}
BENCHMARK(BM_Render)->Arg(0)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_Annotate(benchmark::State& state) {
  const auto& f = fixture();
  const auto method = state.range(0) ? drgen::BoxMethod::AllPoint : drgen::BoxMethod::EightPoint;
  for (auto _ : state) benchmark::DoNotOptimize(drgen::annotate(f.plan, f.assets.meshes, method));
}
BENCHMARK(BM_Annotate)->Arg(0)->Arg(1);

void BM_Postprocess(benchmark::State& state) {
  const auto& f = fixture();
  const drgen::Frame base = drgen::render(f.plan, f.assets.meshes, f.assets.textures, {});
  drgen::PostprocessConfig pp;
  pp.apply_blur_prob = 1.0;
  drgen::RandomStream stream(3);
  for (auto _ : state) {
    drgen::Frame frame = base;
    drgen::apply_postprocess(frame, pp, stream);
    benchmark::DoNotOptimize(frame.rgb.data());
  }
}
BENCHMARK(BM_Postprocess)->Unit(benchmark::kMillisecond);

void BM_SynthesizeImage(benchmark::State& state) {
  const auto& f = fixture();
  std::uint64_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(drgen::synthesize_image(f.cfg, f.assets, 1, drgen::kTrainSplit, i++));
  }
}
BENCHMARK(BM_SynthesizeImage)->Unit(benchmark::kMillisecond);

void BM_Evaluate(benchmark::State& state) {
  const auto& f = fixture();
  std::vector<drgen::EvalImage> images;
  for (std::uint64_t i = 0; i < 200; ++i) {
    const auto plan = drgen::plan_image(f.cfg, f.assets.meshes, f.assets.textures.size(), 1, drgen::kTrainSplit, i);
    drgen::EvalImage img;
    img.truths = drgen::annotate(plan, f.assets.meshes, drgen::BoxMethod::AllPoint);
    for (const auto& t : img.truths) {
      img.detections.push_back({t.class_id, 0.9, t.x_center + 0.01, t.y_center, t.width, t.height});
    }
    images.push_back(std::move(img));
  }
  for (auto _ : state) benchmark::DoNotOptimize(drgen::evaluate(images, f.cfg.class_count(), {}));
}
BENCHMARK(BM_Evaluate)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
