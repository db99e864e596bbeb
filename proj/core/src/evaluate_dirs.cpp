#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "drgen/errors.hpp"
#include "drgen/pipeline.hpp"

namespace drgen {

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Label directory of a split root, or the directory itself.
fs::path label_dir(const fs::path& dir) {
  if (fs::is_directory(dir / "labels")) return dir / "labels";
  return dir;
}

std::map<std::string, fs::path> txt_files(const fs::path& dir) {
  std::map<std::string, fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
    if (entry.path().filename() == "classes.txt") continue;
    out.emplace(entry.path().stem().string(), entry.path());
  }
  return out;
}

std::string join(const std::vector<std::string>& names, std::size_t limit = 10) {
  std::string s;
  for (std::size_t i = 0; i < names.size() && i < limit; ++i) {
    if (i) s += ", ";
    s += names[i];
  }
  if (names.size() > limit) s += ", ... (" + std::to_string(names.size()) + " total)";
  return s;
}

}  // namespace

std::vector<EvalImage> load_eval_images(const fs::path& gt_dir, const fs::path& pred_dir,
                                        std::vector<std::string>* class_names) {
  if (!fs::is_directory(gt_dir)) throw IoError("ground-truth directory not found: " + gt_dir.string());
  if (!fs::is_directory(pred_dir)) throw IoError("prediction directory not found: " + pred_dir.string());

  const fs::path gt_labels = label_dir(gt_dir);
  const auto truths = txt_files(gt_labels);
  const auto preds = txt_files(label_dir(pred_dir));

  std::vector<std::string> unmatched;
  for (const auto& [name, path] : preds) {
    if (!truths.count(name)) unmatched.push_back(name);
  }
  if (!unmatched.empty()) {
    throw ValidationError("prediction files without ground truth: " + join(unmatched));
  }

  // Every image in a dataset root needs its label file.
  if (fs::is_directory(gt_dir / "images")) {
    std::set<std::string> orphans;
    for (const auto& entry : fs::directory_iterator(gt_dir / "images")) {
      if (entry.path().extension() != ".png") continue;
      std::string stem = entry.path().stem().string();
      if (stem.size() > 6 && stem.ends_with("_depth")) stem.resize(stem.size() - 6);
      if (!truths.count(stem)) orphans.insert(stem);
    }
    if (!orphans.empty()) {
      throw ValidationError("images without label files: " +
                            join(std::vector<std::string>(orphans.begin(), orphans.end())));
    }
  }

  if (class_names) {
    for (const fs::path& candidate : {gt_dir / "classes.txt", gt_labels / "classes.txt"}) {
      if (!fs::exists(candidate)) continue;
      class_names->clear();
      std::istringstream in(read_file(candidate));
      std::string line;
      while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) class_names->push_back(line);
      }
      break;
    }
  }

  std::map<std::string, std::string> groups;
  if (fs::exists(gt_dir / "manifest.json")) {
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(read_file(gt_dir / "manifest.json"));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError((gt_dir / "manifest.json").string() + ": " + e.what());
    }
    groups = manifest_from_json(doc).groups;
  }

  std::vector<EvalImage> images;
  for (const auto& [name, path] : truths) {
    EvalImage img;
    img.name = name;
    if (auto it = groups.find(name); it != groups.end()) img.group = it->second;
    try {
      img.truths = parse_annotations(read_file(path));
    } catch (const ValidationError& e) {
      throw ValidationError(path.string() + ": " + e.what());
    }
    if (auto it = preds.find(name); it != preds.end()) {
      try {
        img.detections = parse_detections(read_file(it->second));
      } catch (const ValidationError& e) {
        throw ValidationError(it->second.string() + ": " + e.what());
      }
    }
    images.push_back(std::move(img));
  }
  return images;
}

EvalReport evaluate_directories(const fs::path& gt_dir, const fs::path& pred_dir, EvalOptions options,
                                const fs::path& report_path) {
  std::vector<std::string> names;
  const auto images = load_eval_images(gt_dir, pred_dir, &names);

  int max_class = -1;
  for (const auto& img : images) {
    for (const auto& t : img.truths) max_class = std::max(max_class, t.class_id);
    for (const auto& d : img.detections) max_class = std::max(max_class, d.class_id);
  }
  if (!names.empty() && max_class >= static_cast<int>(names.size())) {
    throw ValidationError("class id " + std::to_string(max_class) + " outside classes.txt (" +
                          std::to_string(names.size()) + " classes)");
  }
  const std::size_t num_classes =
      names.empty() ? static_cast<std::size_t>(max_class + 1) : names.size();
  if (options.class_names.empty()) options.class_names = names;

  EvalReport report = evaluate(images, num_classes, options);

  if (report_path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(report_path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + report_path.parent_path().string());
  }
  {
    std::ofstream out(report_path, std::ios::binary);
    if (!out) throw IoError("cannot write " + report_path.string());
    out << to_json(report).dump(2) << "\n";
  }
  fs::path text_path = report_path;
  text_path.replace_extension(".txt");
  if (text_path == report_path) text_path += ".txt";
  std::ofstream text(text_path, std::ios::binary);
  if (!text) throw IoError("cannot write " + text_path.string());
  text << to_text(report);
  return report;
}

}  // namespace drgen
