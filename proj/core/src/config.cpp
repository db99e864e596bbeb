#include "drgen/config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "drgen/errors.hpp"

namespace drgen {

using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

[[noreturn]] void bad(const std::string& key, const std::string& what) {
  throw ValidationError("config." + key + ": " + what);
}

void check_range(const Range& r, const std::string& key) {
  if (!std::isfinite(r.lo) || !std::isfinite(r.hi)) bad(key, "non-finite bound");
  if (r.lo > r.hi) bad(key, "lower bound exceeds upper bound");
}

void check_range(const IntRange& r, const std::string& key) {
  if (r.lo > r.hi) bad(key, "lower bound exceeds upper bound");
}

void check_prob(double p, const std::string& key) {
  if (!(p >= 0.0 && p <= 1.0)) bad(key, "probability must lie in [0, 1]");
}

// Strict JSON reader that tracks the key path for error messages.
class Reader {
 public:
  Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) bad(path_.empty() ? "<root>" : path_, "expected an object");
  }

  ~Reader() = default;

  void finish() const {
    for (const auto& [key, value] : node_.items()) {
      if (!seen_.contains(key)) bad(sub(key), "unknown key");
    }
  }

  const json* get(const std::string& key) {
    seen_.insert(key);
    auto it = node_.find(key);
    return it == node_.end() ? nullptr : &*it;
  }

  std::string sub(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  double real(const std::string& key, double fallback) {
    const json* v = get(key);
    if (!v) return fallback;
    if (!v->is_number()) bad(sub(key), "expected a number");
    return v->get<double>();
  }

  int integer(const std::string& key, int fallback) {
    const json* v = get(key);
    if (!v) return fallback;
    if (!v->is_number_integer()) bad(sub(key), "expected an integer");
    return v->get<int>();
  }

  bool boolean(const std::string& key, bool fallback) {
    const json* v = get(key);
    if (!v) return fallback;
    if (!v->is_boolean()) bad(sub(key), "expected true or false");
    return v->get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback) {
    const json* v = get(key);
    if (!v) return fallback;
    if (!v->is_string()) bad(sub(key), "expected a string");
    return v->get<std::string>();
  }

  Range range(const std::string& key, Range fallback) {
    const json* v = get(key);
    return v ? as_range(*v, sub(key)) : fallback;
  }

  IntRange int_range(const std::string& key, IntRange fallback) {
    const json* v = get(key);
    if (!v) return fallback;
    if (!v->is_array() || v->size() != 2 || !(*v)[0].is_number_integer() ||
        !(*v)[1].is_number_integer()) {
      bad(sub(key), "expected [lo, hi] integers");
    }
    return {(*v)[0].get<int>(), (*v)[1].get<int>()};
  }

  std::array<Range, 3> range3(const std::string& key, const std::array<Range, 3>& fallback) {
    const json* v = get(key);
    if (!v) return fallback;
    if (!v->is_array() || v->size() != 3) bad(sub(key), "expected three [lo, hi] pairs");
    std::array<Range, 3> out;
    for (std::size_t i = 0; i < 3; ++i) out[i] = as_range((*v)[i], sub(key) + "[" + std::to_string(i) + "]");
    return out;
  }

  std::vector<double> reals(const std::string& key, const std::vector<double>& fallback) {
    const json* v = get(key);
    if (!v) return fallback;
    if (!v->is_array()) bad(sub(key), "expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : *v) {
      if (!e.is_number()) bad(sub(key), "expected an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

 private:
  static Range as_range(const json& v, const std::string& key) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      bad(key, "expected [lo, hi]");
    }
    return {v[0].get<double>(), v[1].get<double>()};
  }

  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

json range_json(const Range& r) { return json::array({r.lo, r.hi}); }
json range_json(const IntRange& r) { return json::array({r.lo, r.hi}); }
json range3_json(const std::array<Range, 3>& r) {
  return json::array({range_json(r[0]), range_json(r[1]), range_json(r[2])});
}

ImageType parse_image_type(const std::string& s) {
  if (s == "RGB") return ImageType::RGB;
  if (s == "D") return ImageType::D;
  if (s == "RGBD") return ImageType::RGBD;
  bad("i_type", "expected RGB, D or RGBD, got '" + s + "'");
}

BoxMethod parse_box_method(const std::string& s) {
  if (s == "EightPoint") return BoxMethod::EightPoint;
  if (s == "AllPoint") return BoxMethod::AllPoint;
  bad("bb_method", "expected EightPoint or AllPoint, got '" + s + "'");
}

}  // namespace

std::string to_string(ImageType t) {
  switch (t) {
    case ImageType::RGB: return "RGB";
    case ImageType::D: return "D";
    case ImageType::RGBD: return "RGBD";
  }
  return "RGB";
}

std::string to_string(BoxMethod m) { return m == BoxMethod::EightPoint ? "EightPoint" : "AllPoint"; }

PostprocessConfig PostprocessConfig::disabled() {
  PostprocessConfig c;
  c.apply_pepper_prob = 0.0;
  c.pepper_rate = 0.0;
  c.apply_blur_prob = 0.0;
  c.cutout_rect_count = {0, 0};
  c.cutout_circle_count = {0, 0};
  c.cutout_line_count = {0, 0};
  return c;
}

bool GenerationConfig::operator==(const GenerationConfig& o) const {
  return canonical_text(*this) == canonical_text(o);
}

void validate(const PostprocessConfig& c) {
  check_prob(c.apply_pepper_prob, "postprocess.apply_pepper_prob");
  check_prob(c.pepper_rate, "postprocess.pepper_rate");
  check_prob(c.apply_blur_prob, "postprocess.apply_blur_prob");
  if (c.apply_blur_prob > 0.0 && c.blur_kernel_choices.empty()) {
    bad("postprocess.blur_kernel_choices", "must not be empty while blur can apply");
  }
  for (int k : c.blur_kernel_choices) {
    if (k < 3 || k % 2 == 0) bad("postprocess.blur_kernel_choices", "kernel sizes must be odd and >= 3");
  }
  for (const auto& [r, key] : {std::pair{c.cutout_rect_count, "cutout_rect_count"},
                               std::pair{c.cutout_circle_count, "cutout_circle_count"},
                               std::pair{c.cutout_line_count, "cutout_line_count"}}) {
    check_range(r, std::string("postprocess.") + key);
    if (r.lo < 0) bad(std::string("postprocess.") + key, "counts must be non-negative");
  }
  check_range(c.cutout_size, "postprocess.cutout_size");
  if (c.cutout_size.lo < 0.0) bad("postprocess.cutout_size", "fractions must be non-negative");
  check_range(c.line_thickness, "postprocess.line_thickness");
  if (c.line_thickness.lo < 0.0) bad("postprocess.line_thickness", "thickness must be non-negative");
}

void validate(const GenerationConfig& c) {
  if (c.grid_n < 1) bad("grid_n", "must be >= 1");
  if (!(c.grid_d > 0.0) || !std::isfinite(c.grid_d)) bad("grid_d", "must be positive");
  if (!(c.z_pos >= 0.0) || !std::isfinite(c.z_pos)) bad("z_pos", "must be >= 0");
  for (double e : c.eps_pos) {
    if (!(e >= 0.0) || !std::isfinite(e)) bad("eps_pos", "fractions must be finite and >= 0");
  }
  for (int i = 0; i < 3; ++i) check_range(c.eps_rot[i], "eps_rot[" + std::to_string(i) + "]");

  if (c.p_objects.size() < 2) bad("p_objects", "needs at least the distractor and void entries");
  double sum = 0.0;
  for (double p : c.p_objects) {
    if (!(p >= 0.0) || !std::isfinite(p)) bad("p_objects", "entries must be finite and >= 0");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    std::ostringstream os;
    os << "probabilities sum to " << sum << ", expected 1";
    bad("p_objects", os.str());
  }
  if (!c.classes.empty() && c.classes.size() != c.class_count()) {
    bad("p_objects", "expected " + std::to_string(c.classes.size() + 2) +
                         " entries (classes + distractor + void)");
  }
  for (std::size_t i = 0; i < c.classes.size(); ++i) {
    if (c.classes[i].name.empty()) bad("classes[" + std::to_string(i) + "].name", "must not be empty");
    if (!(c.classes[i].scale > 0.0)) bad("classes[" + std::to_string(i) + "].scale", "must be positive");
  }
  check_prob(c.p_texture, "p_texture");

  for (int i = 0; i < 3; ++i) check_range(c.t_pos[i], "t_pos[" + std::to_string(i) + "]");
  for (int i = 0; i < 3; ++i) check_range(c.c_pos[i], "c_pos[" + std::to_string(i) + "]");
  if (!(c.c_pos[2].lo > 0.0)) bad("c_pos[2]", "camera distance must be positive");
  check_range(c.r_width, "r_width");
  check_range(c.r_height, "r_height");
  if (c.r_width.lo < 1) bad("r_width", "width must be >= 1");
  if (c.r_height.lo < 1) bad("r_height", "height must be >= 1");
  if (!(c.fov_deg > 0.0 && c.fov_deg < 180.0)) bad("fov_deg", "must lie in (0, 180)");
  if (!(c.near > 0.0 && c.near < c.far) || !std::isfinite(c.far)) bad("near", "need 0 < near < far");

  for (int i = 0; i < 3; ++i) {
    const std::string key = "distractor_dims[" + std::to_string(i) + "]";
    check_range(c.distractor_dims[i], key);
    if (!(c.distractor_dims[i].lo > 0.0)) bad(key, "dimensions must be positive");
  }
  if (!(c.light.ambient >= 0.0 && c.light.ambient <= 1.0)) bad("light.ambient", "must lie in [0, 1]");
  check_range(c.light.intensity, "light.intensity");
  if (c.light.intensity.lo < 0.0 || c.light.intensity.hi > 1.0) {
    bad("light.intensity", "must lie in [0, 1]");
  }
  validate(c.postprocess);
}

GenerationConfig default_config(std::size_t class_count) {
  GenerationConfig c;
  c.grid_n = 2;
  c.grid_d = 0.1;
  c.z_pos = 0.05;
  c.eps_pos = {0.1, 0.1, 0.0};
  c.eps_rot = {Range{-kPi, kPi}, Range{-kPi, kPi}, Range{-kPi, kPi}};
  c.p_objects.assign(class_count + 2, 1.0 / static_cast<double>(class_count + 2));
  c.p_texture = 0.8;
  c.t_pos = {};
  c.c_pos = {Range{-kPi, kPi}, Range{-0.17, 0.17}, Range{0.35, 0.6}};
  c.r_width = {640, 1300};
  c.r_height = {640, 1300};
  c.fov_deg = 45.0;
  c.near = 0.01;
  c.far = 10.0;
  c.i_type = ImageType::RGB;
  c.distractor_dims = {Range{0.01, 0.06}, Range{0.01, 0.06}, Range{0.01, 0.06}};
  c.settle_enabled = true;
  c.light = {};
  c.postprocess = {};
  c.bb_method = BoxMethod::AllPoint;
  return c;
}

json to_json(const GenerationConfig& c) {
  json classes = json::array();
  for (const auto& cls : c.classes) {
    classes.push_back({{"name", cls.name}, {"mesh", cls.mesh}, {"scale", cls.scale}});
  }
  const auto& pp = c.postprocess;
  json post = {
      {"apply_pepper_prob", pp.apply_pepper_prob},
      {"pepper_rate", pp.pepper_rate},
      {"apply_blur_prob", pp.apply_blur_prob},
      {"blur_kernel_choices", pp.blur_kernel_choices},
      {"cutout_rect_count", range_json(pp.cutout_rect_count)},
      {"cutout_circle_count", range_json(pp.cutout_circle_count)},
      {"cutout_line_count", range_json(pp.cutout_line_count)},
      {"cutout_size", range_json(pp.cutout_size)},
      {"line_thickness", range_json(pp.line_thickness)},
  };
  return {
      {"classes", classes},
      {"texture_dir", c.texture_dir},
      {"grid_n", c.grid_n},
      {"grid_d", c.grid_d},
      {"z_pos", c.z_pos},
      {"eps_pos", c.eps_pos},
      {"eps_rot", range3_json(c.eps_rot)},
      {"p_objects", c.p_objects},
      {"p_texture", c.p_texture},
      {"t_pos", range3_json(c.t_pos)},
      {"c_pos", range3_json(c.c_pos)},
      {"r_width", range_json(c.r_width)},
      {"r_height", range_json(c.r_height)},
      {"fov_deg", c.fov_deg},
      {"near", c.near},
      {"far", c.far},
      {"i_type", to_string(c.i_type)},
      {"distractor_dims", range3_json(c.distractor_dims)},
      {"settle_enabled", c.settle_enabled},
      {"light", {{"ambient", c.light.ambient}, {"intensity", range_json(c.light.intensity)}}},
      {"postprocess", post},
      {"bb_method", to_string(c.bb_method)},
  };
}

GenerationConfig config_from_json(const json& doc) {
  Reader r(doc, "");

  std::vector<ClassSpec> classes;
  if (const json* v = r.get("classes")) {
    if (!v->is_array()) bad("classes", "expected an array");
    for (std::size_t i = 0; i < v->size(); ++i) {
      Reader cr((*v)[i], "classes[" + std::to_string(i) + "]");
      ClassSpec spec;
      spec.name = cr.string("name", "");
      spec.mesh = cr.string("mesh", "");
      spec.scale = cr.real("scale", 1.0);
      if (spec.mesh.empty()) bad(cr.sub("mesh"), "required");
      cr.finish();
      classes.push_back(std::move(spec));
    }
  }

  GenerationConfig c = default_config(classes.size());
  c.classes = std::move(classes);
  c.texture_dir = r.string("texture_dir", "");
  c.grid_n = r.integer("grid_n", c.grid_n);
  c.grid_d = r.real("grid_d", c.grid_d);
  c.z_pos = r.real("z_pos", c.z_pos);
  if (const json* v = r.get("eps_pos")) {
    if (!v->is_array() || v->size() != 3) bad("eps_pos", "expected three numbers");
    for (std::size_t i = 0; i < 3; ++i) {
      if (!(*v)[i].is_number()) bad("eps_pos", "expected three numbers");
      c.eps_pos[i] = (*v)[i].get<double>();
    }
  }
  c.eps_rot = r.range3("eps_rot", c.eps_rot);
  c.p_objects = r.reals("p_objects", c.p_objects);
  c.p_texture = r.real("p_texture", c.p_texture);
  c.t_pos = r.range3("t_pos", c.t_pos);
  c.c_pos = r.range3("c_pos", c.c_pos);
  c.r_width = r.int_range("r_width", c.r_width);
  c.r_height = r.int_range("r_height", c.r_height);
  c.fov_deg = r.real("fov_deg", c.fov_deg);
  c.near = r.real("near", c.near);
  c.far = r.real("far", c.far);
  c.i_type = parse_image_type(r.string("i_type", to_string(c.i_type)));
  c.distractor_dims = r.range3("distractor_dims", c.distractor_dims);
  c.settle_enabled = r.boolean("settle_enabled", c.settle_enabled);
  if (const json* v = r.get("light")) {
    Reader lr(*v, "light");
    c.light.ambient = lr.real("ambient", c.light.ambient);
    c.light.intensity = lr.range("intensity", c.light.intensity);
    lr.finish();
  }
  if (const json* v = r.get("postprocess")) {
    Reader pr(*v, "postprocess");
    auto& pp = c.postprocess;
    pp.apply_pepper_prob = pr.real("apply_pepper_prob", pp.apply_pepper_prob);
    pp.pepper_rate = pr.real("pepper_rate", pp.pepper_rate);
    pp.apply_blur_prob = pr.real("apply_blur_prob", pp.apply_blur_prob);
    if (const json* k = pr.get("blur_kernel_choices")) {
      if (!k->is_array()) bad("postprocess.blur_kernel_choices", "expected an array of integers");
      pp.blur_kernel_choices.clear();
      for (const auto& e : *k) {
        if (!e.is_number_integer()) bad("postprocess.blur_kernel_choices", "expected integers");
        pp.blur_kernel_choices.push_back(e.get<int>());
      }
    }
    pp.cutout_rect_count = pr.int_range("cutout_rect_count", pp.cutout_rect_count);
    pp.cutout_circle_count = pr.int_range("cutout_circle_count", pp.cutout_circle_count);
    pp.cutout_line_count = pr.int_range("cutout_line_count", pp.cutout_line_count);
    pp.cutout_size = pr.range("cutout_size", pp.cutout_size);
    pp.line_thickness = pr.range("line_thickness", pp.line_thickness);
    pr.finish();
  }
  c.bb_method = parse_box_method(r.string("bb_method", to_string(c.bb_method)));
  r.finish();

  validate(c);
  return c;
}

GenerationConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  GenerationConfig c = config_from_json(doc);
  c.source_dir = path.parent_path();
  return c;
}

void save_config(const GenerationConfig& cfg, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write config " + path.string());
  out << to_json(cfg).dump(2) << '\n';
  if (!out) throw IoError("failed writing config " + path.string());
}

std::string canonical_text(const GenerationConfig& cfg) { return to_json(cfg).dump(); }

}  // namespace drgen
