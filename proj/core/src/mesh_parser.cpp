#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <tuple>

#include "drgen/errors.hpp"
#include "drgen/geometry.hpp"

namespace drgen {

namespace {

struct Corner {
  long v = -1;
  long vt = -1;
  long vn = -1;
};

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw ValidationError("obj line " + std::to_string(line) + ": " + what);
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

double parse_real(std::string_view tok, std::size_t line) {
  double value = 0.0;
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc{} || ptr != tok.data() + tok.size() || !std::isfinite(value)) {
    fail(line, "non-numeric coordinate '" + std::string(tok) + "'");
  }
  return value;
}

// OBJ indices are 1-based; negatives count back from the current end.
long resolve_index(std::string_view tok, std::size_t count, std::size_t line, const char* what) {
  long raw = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), raw);
  if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
    fail(line, std::string("malformed ") + what + " index '" + std::string(tok) + "'");
  }
  const long n = static_cast<long>(count);
  const long resolved = raw > 0 ? raw - 1 : n + raw;
  if (raw == 0 || resolved < 0 || resolved >= n) {
    fail(line, std::string(what) + " index " + std::to_string(raw) + " out of range (have " +
                   std::to_string(count) + ")");
  }
  return resolved;
}

}  // namespace

Mesh parse_mesh(std::string_view text) {
  std::vector<Vec3> positions;
  std::vector<Uv> texcoords;
  std::vector<Vec3> normals;
  std::vector<std::array<Corner, 3>> faces;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);

    const auto toks = split_ws(line);
    if (toks.empty()) continue;
    const auto& kw = toks[0];

    if (kw == "v") {
      if (toks.size() < 4) fail(line_no, "vertex needs 3 coordinates");
      positions.push_back({parse_real(toks[1], line_no), parse_real(toks[2], line_no),
                           parse_real(toks[3], line_no)});
    } else if (kw == "vt") {
      if (toks.size() < 3) fail(line_no, "texture coordinate needs 2 values");
      texcoords.push_back({parse_real(toks[1], line_no), parse_real(toks[2], line_no)});
    } else if (kw == "vn") {
      if (toks.size() < 4) fail(line_no, "normal needs 3 values");
      normals.push_back({parse_real(toks[1], line_no), parse_real(toks[2], line_no),
                         parse_real(toks[3], line_no)});
    } else if (kw == "f") {
      if (toks.size() < 4) fail(line_no, "face with fewer than 3 vertices");
      std::vector<Corner> poly;
      poly.reserve(toks.size() - 1);
      for (std::size_t k = 1; k < toks.size(); ++k) {
        const auto tok = toks[k];
        Corner c;
        const auto s1 = tok.find('/');
        c.v = resolve_index(tok.substr(0, s1), positions.size(), line_no, "vertex");
        if (s1 != std::string_view::npos) {
          const auto rest = tok.substr(s1 + 1);
          const auto s2 = rest.find('/');
          const auto vt_tok = rest.substr(0, s2);
          if (!vt_tok.empty()) c.vt = resolve_index(vt_tok, texcoords.size(), line_no, "texcoord");
          if (s2 != std::string_view::npos) {
            const auto vn_tok = rest.substr(s2 + 1);
            if (!vn_tok.empty()) c.vn = resolve_index(vn_tok, normals.size(), line_no, "normal");
          }
        }
        poly.push_back(c);
      }
      for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
        faces.push_back({poly[0], poly[k], poly[k + 1]});
      }
    }
    // Every other directive (o, g, s, usemtl, mtllib, l, ...) is ignored.
  }

  if (faces.empty()) throw ValidationError("obj: no faces");

  bool all_vt = true;
  bool all_vn = true;
  for (const auto& f : faces) {
    for (const auto& c : f) {
      all_vt = all_vt && c.vt >= 0;
      all_vn = all_vn && c.vn >= 0;
    }
  }

  Mesh mesh;
  if (!all_vt && !all_vn) {
    mesh.vertices = std::move(positions);
    mesh.triangles.reserve(faces.size());
    for (const auto& f : faces) {
      mesh.triangles.push_back({static_cast<std::uint32_t>(f[0].v), static_cast<std::uint32_t>(f[1].v),
                                static_cast<std::uint32_t>(f[2].v)});
    }
    return mesh;
  }

  // Split vertices so every (position, texcoord, normal) combination owns
  // one vertex slot.
  std::map<std::tuple<long, long, long>, std::uint32_t> slots;
  for (const auto& f : faces) {
    Triangle tri{};
    for (int k = 0; k < 3; ++k) {
      const auto key = std::make_tuple(f[k].v, all_vt ? f[k].vt : -1L, all_vn ? f[k].vn : -1L);
      auto [it, inserted] = slots.try_emplace(key, static_cast<std::uint32_t>(mesh.vertices.size()));
      if (inserted) {
        mesh.vertices.push_back(positions[f[k].v]);
        if (all_vt) mesh.uvs.push_back(texcoords[f[k].vt]);
        if (all_vn) mesh.normals.push_back(normals[f[k].vn]);
      }
      tri[k] = it->second;
    }
    mesh.triangles.push_back(tri);
  }
  return mesh;
}

Mesh load_mesh(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open mesh file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_mesh(buf.str());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

}  // namespace drgen
