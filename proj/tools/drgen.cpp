// drgen command-line front end: generate, evaluate, preview.

#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "drgen/config.hpp"
#include "drgen/errors.hpp"
#include "drgen/evaluator.hpp"
#include "drgen/pipeline.hpp"

namespace {

constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

int run_generate(const std::string& config_path, const drgen::GenerateOptions& options) {
  const drgen::GenerationConfig cfg = drgen::load_config(config_path);
  const drgen::RunManifest manifest = drgen::generate(cfg, options);
  std::printf("wrote %zu train + %zu valid images to %s\n", manifest.n_train, manifest.n_valid,
              options.out_dir.string().c_str());
  if (manifest.timing) {
    std::printf("median per-image time: %.1f ms\n", manifest.timing->median_total_ms());
  }
  return 0;
}

int run_evaluate(const std::string& gt, const std::string& pred, const drgen::EvalOptions& options,
                 const std::string& report) {
  const drgen::EvalReport result = drgen::evaluate_directories(gt, pred, options, report);
  std::cout << drgen::to_text(result);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Domain-randomized synthetic dataset generator and detection evaluator"};
  app.set_version_flag("--version", std::string(drgen::kToolVersion));
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  drgen::GenerateOptions gen;
  auto* generate = app.add_subcommand("generate", "Write a train/valid dataset");
  generate->add_option("--config", config_path, "Generation config (JSON)")->required()->check(CLI::ExistingFile);
  generate->add_option("--out", out_dir, "Output root")->required();
  generate->add_option("--train", gen.n_train, "Number of training images")->required();
  generate->add_option("--valid", gen.n_valid, "Number of validation images")->required();
  generate->add_option("--seed", gen.seed, "Master seed")->required();
  generate->add_option("--workers", gen.workers, "Worker threads")->check(CLI::PositiveNumber);
  generate->add_flag("--timing", gen.record_timing, "Record per-stage timings in the manifest");

  std::string gt_dir;
  std::string pred_dir;
  std::string report_path;
  drgen::EvalOptions eval;
  double map_train = 0.0;
  double map_valid = 0.0;
  double map_test = 0.0;
  auto* evaluate = app.add_subcommand("evaluate", "Score predictions against ground truth");
  evaluate->add_option("--gt", gt_dir, "Ground-truth split root or label directory")->required();
  evaluate->add_option("--pred", pred_dir, "Prediction directory")->required();
  evaluate->add_option("--iou", eval.iou_threshold, "IoU threshold")->check(CLI::Range(0.0, 1.0));
  evaluate->add_option("--conf", eval.conf_threshold, "Confidence threshold for F1 and the confusion matrix")
      ->check(CLI::Range(0.0, 1.0));
  auto* opt_train = evaluate->add_option("--map-train", map_train, "mAP on train, percent");
  auto* opt_valid = evaluate->add_option("--map-valid", map_valid, "mAP on valid, percent");
  auto* opt_test = evaluate->add_option("--map-test", map_test, "mAP on real test images, percent");
  evaluate->add_option("--report", report_path, "Report path (JSON; a .txt is written beside it)")->required();

  std::string preview_config;
  std::string preview_out;
  std::uint64_t preview_seed = 0;
  std::uint64_t preview_index = 0;
  auto* preview = app.add_subcommand("preview", "Render one image with its boxes outlined");
  preview->add_option("--config", preview_config, "Generation config (JSON)")->required()->check(CLI::ExistingFile);
  preview->add_option("--seed", preview_seed, "Master seed")->required();
  preview->add_option("--index", preview_index, "Image index")->required();
  preview->add_option("--out", preview_out, "Output PNG")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*generate) {
      gen.out_dir = out_dir;
      return run_generate(config_path, gen);
    }
    if (*evaluate) {
      if (*opt_train) eval.map_train = map_train;
      if (*opt_valid) eval.map_valid = map_valid;
      if (*opt_test) eval.map_test = map_test;
      return run_evaluate(gt_dir, pred_dir, eval, report_path);
    }
    if (*preview) {
      const drgen::GenerationConfig cfg = drgen::load_config(preview_config);
      drgen::preview(cfg, preview_seed, preview_index, preview_out);
      return 0;
    }
  } catch (const drgen::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const drgen::IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return 0;
}
