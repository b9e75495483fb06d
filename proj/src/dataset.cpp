#include "poseforge/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include "json.hpp"

#include "poseforge/image.hpp"

namespace poseforge {

namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

constexpr std::uint64_t kMaxElementCount = 100'000'000;

[[noreturn]] void parse_fail(const std::string& what) { throw Error(ErrorKind::ParseError, what); }

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  bool next(std::string_view& line) {
    if (pos_ >= text_.size()) return false;
    std::size_t end = text_.find('\n', pos_);
    if (end == std::string_view::npos) end = text_.size();
    line = text_.substr(pos_, end - pos_);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos_ = end + 1;
    ++line_no_;
    return true;
  }
  std::size_t line_no() const { return line_no_; }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_no_ = 0;
};

double to_double(std::string_view token) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size()) parse_fail("bad number '" + std::string(token) + "'");
  if (!std::isfinite(v)) parse_fail("non-finite number '" + std::string(token) + "'");
  return v;
}

std::int64_t to_int(std::string_view token) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
  if (ec != std::errc() || ptr != token.data() + token.size()) parse_fail("bad integer '" + std::string(token) + "'");
  return v;
}

std::uint32_t to_index(std::int64_t v, std::size_t n_vertices) {
  if (v < 0 || static_cast<std::uint64_t>(v) >= n_vertices) parse_fail("vertex index out of range");
  return static_cast<std::uint32_t>(v);
}

void fan(const std::vector<std::uint32_t>& poly, MeshAsset& mesh) {
  if (poly.size() < 3) parse_fail("face with fewer than three vertices");
  for (std::size_t i = 1; i + 1 < poly.size(); ++i) mesh.triangles.push_back({poly[0], poly[i], poly[i + 1]});
}

struct PlyProperty {
  std::string name;
  bool is_list = false;
};

struct PlyElement {
  std::string name;
  std::uint64_t count = 0;
  std::vector<PlyProperty> properties;
};

}  // namespace

MeshAsset parse_ply(std::string_view text, std::string id) {
  LineReader reader(text);
  std::string_view line;
  if (!reader.next(line) || trim(line) != "ply") parse_fail("missing 'ply' magic");

  MeshAsset mesh;
  mesh.id = id;
  mesh.name = std::move(id);
  std::vector<PlyElement> elements;
  bool saw_format = false;
  bool saw_end = false;
  while (reader.next(line)) {
    auto tok = split_ws(line);
    if (tok.empty()) continue;
    if (tok[0] == "end_header") {
      saw_end = true;
      break;
    }
    if (tok[0] == "format") {
      if (tok.size() < 2) parse_fail("bad format line");
      if (tok[1] != "ascii") throw Error(ErrorKind::UnsupportedFormat, "only ASCII PLY is supported");
      saw_format = true;
    } else if (tok[0] == "comment" || tok[0] == "obj_info") {
      if (tok.size() == 5 && tok[1] == "spacing") {
        Vec3 s{to_double(tok[2]), to_double(tok[3]), to_double(tok[4])};
        if (!(s.x > 0 && s.y > 0 && s.z > 0)) parse_fail("spacing must be positive");
        mesh.spacing_hint = s;
      }
    } else if (tok[0] == "element") {
      if (tok.size() != 3) parse_fail("bad element line");
      std::int64_t count = to_int(tok[2]);
      if (count < 0 || static_cast<std::uint64_t>(count) > kMaxElementCount) parse_fail("element count out of range");
      elements.push_back({std::string(tok[1]), static_cast<std::uint64_t>(count), {}});
    } else if (tok[0] == "property") {
      if (elements.empty()) parse_fail("property before element");
      if (tok.size() == 3) {
        elements.back().properties.push_back({std::string(tok[2]), false});
      } else if (tok.size() == 5 && tok[1] == "list") {
        elements.back().properties.push_back({std::string(tok[4]), true});
      } else {
        parse_fail("bad property line");
      }
    } else {
      parse_fail("unknown header keyword '" + std::string(tok[0]) + "'");
    }
  }
  if (!saw_end) parse_fail("missing end_header");
  if (!saw_format) parse_fail("missing format line");

  for (const PlyElement& el : elements) {
    int ix = -1, iy = -1, iz = -1;
    int list_prop = -1;
    for (std::size_t p = 0; p < el.properties.size(); ++p) {
      const auto& prop = el.properties[p];
      if (prop.is_list && list_prop < 0) list_prop = static_cast<int>(p);
      if (!prop.is_list && prop.name == "x") ix = static_cast<int>(p);
      if (!prop.is_list && prop.name == "y") iy = static_cast<int>(p);
      if (!prop.is_list && prop.name == "z") iz = static_cast<int>(p);
    }
    const bool is_vertex = el.name == "vertex";
    const bool is_face = el.name == "face";
    if (is_vertex && (ix < 0 || iy < 0 || iz < 0)) parse_fail("vertex element lacks x/y/z");
    if (is_face && list_prop < 0) parse_fail("face element lacks an index list");

    for (std::uint64_t n = 0; n < el.count; ++n) {
      if (!reader.next(line)) parse_fail("truncated " + el.name + " data");
      auto tok = split_ws(line);
      if (!is_vertex && !is_face) continue;
      std::size_t t = 0;
      double xyz[3] = {};
      std::vector<std::uint32_t> poly;
      for (std::size_t p = 0; p < el.properties.size(); ++p) {
        if (t >= tok.size()) parse_fail("short " + el.name + " record at line " + std::to_string(reader.line_no()));
        if (el.properties[p].is_list) {
          std::int64_t len = to_int(tok[t++]);
          if (len < 0 || static_cast<std::size_t>(len) > tok.size() - t) parse_fail("bad list length");
          for (std::int64_t i = 0; i < len; ++i) {
            std::int64_t v = to_int(tok[t++]);
            if (is_face && static_cast<int>(p) == list_prop) poly.push_back(to_index(v, mesh.vertices.size()));
          }
        } else {
          double v = to_double(tok[t++]);
          if (static_cast<int>(p) == ix) xyz[0] = v;
          if (static_cast<int>(p) == iy) xyz[1] = v;
          if (static_cast<int>(p) == iz) xyz[2] = v;
        }
      }
      if (t != tok.size()) parse_fail("trailing values at line " + std::to_string(reader.line_no()));
      if (is_vertex) mesh.vertices.push_back({xyz[0], xyz[1], xyz[2]});
      if (is_face) fan(poly, mesh);
    }
  }
  mesh.validate();
  return mesh;
}

MeshAsset parse_obj(std::string_view text, std::string id) {
  MeshAsset mesh;
  mesh.id = id;
  mesh.name = std::move(id);
  LineReader reader(text);
  std::string_view line;
  while (reader.next(line)) {
    auto tok = split_ws(line);
    if (tok.empty() || tok[0].front() == '#') continue;
    if (tok[0] == "v") {
      if (tok.size() != 4 && tok.size() != 5) parse_fail("bad vertex at line " + std::to_string(reader.line_no()));
      mesh.vertices.push_back({to_double(tok[1]), to_double(tok[2]), to_double(tok[3])});
      if (mesh.vertices.size() > kMaxElementCount) parse_fail("too many vertices");
    } else if (tok[0] == "f") {
      std::vector<std::uint32_t> poly;
      for (std::size_t i = 1; i < tok.size(); ++i) {
        std::string_view ref = tok[i].substr(0, tok[i].find('/'));
        std::int64_t v = to_int(ref);
        // 1-based; negative values count back from the latest vertex.
        std::int64_t zero_based = v > 0 ? v - 1 : static_cast<std::int64_t>(mesh.vertices.size()) + v;
        if (v == 0) parse_fail("OBJ index 0");
        poly.push_back(to_index(zero_based, mesh.vertices.size()));
      }
      fan(poly, mesh);
    }
  }
  mesh.validate();
  return mesh;
}

MeshAsset load_mesh(const std::filesystem::path& path, double unit_scale) {
  if (!(unit_scale > 0.0) || !std::isfinite(unit_scale)) throw Error(ErrorKind::OutOfRange, "unit scale must be positive");
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext != ".ply" && ext != ".obj") throw Error(ErrorKind::UnsupportedFormat, "unsupported mesh type '" + ext + "'");
  std::string text = read_file_text(path);
  std::string stem = path.stem().string();
  MeshAsset mesh = ext == ".ply" ? parse_ply(text, stem) : parse_obj(text, stem);
  if (unit_scale != 1.0) {
    for (Vec3& v : mesh.vertices) v = unit_scale * v;
  }
  mesh.source = path;
  mesh.source_scale = unit_scale;
  return mesh;
}

// Samples ------------------------------------------------------------------

CameraFile parse_camera_file(std::string_view text) {
  LineReader reader(text);
  std::string_view line;
  std::vector<std::vector<std::string_view>> rows;
  while (reader.next(line)) {
    auto tok = split_ws(line);
    if (!tok.empty()) rows.push_back(std::move(tok));
  }
  if (rows.empty() || rows[0].size() != 6) parse_fail("camera file needs 'fx fy cx cy width height'");
  if (rows.size() > 2 || (rows.size() == 2 && rows[1].size() != 1)) parse_fail("unexpected content in camera file");
  CameraFile out;
  auto& k = out.intrinsics;
  k.fx = to_double(rows[0][0]);
  k.fy = to_double(rows[0][1]);
  k.cx = to_double(rows[0][2]);
  k.cy = to_double(rows[0][3]);
  std::int64_t w = to_int(rows[0][4]);
  std::int64_t h = to_int(rows[0][5]);
  if (w < 1 || h < 1 || w > CameraIntrinsics::kMaxDimension || h > CameraIntrinsics::kMaxDimension)
    parse_fail("image dimensions out of range");
  k.width = static_cast<int>(w);
  k.height = static_cast<int>(h);
  try {
    k.validate();
  } catch (const Error& e) {
    parse_fail(e.what());
  }
  if (rows.size() == 2) {
    out.unit_scale = to_double(rows[1][0]);
    if (!(out.unit_scale > 0.0)) parse_fail("unit scale must be positive");
  }
  return out;
}

std::string format_camera_file(const CameraFile& camera) {
  const auto& k = camera.intrinsics;
  std::string out = format_decimal(k.fx) + " " + format_decimal(k.fy) + " " + format_decimal(k.cx) + " " +
                    format_decimal(k.cy) + " " + std::to_string(k.width) + " " + std::to_string(k.height) + "\n";
  if (camera.unit_scale != 1.0) out += format_decimal(camera.unit_scale) + "\n";
  return out;
}

std::vector<std::string> list_samples(const std::filesystem::path& root) {
  fs::path dir = root / "samples";
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw Error(ErrorKind::LayoutError, "missing " + dir.string());
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (entry.is_directory()) ids.push_back(entry.path().filename().string());
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

DatasetSample load_sample(const std::filesystem::path& root, const std::string& sample_id) {
  if (sample_id.empty() || sample_id.find('/') != std::string::npos || sample_id.find('\\') != std::string::npos ||
      sample_id == "." || sample_id == "..")
    throw Error(ErrorKind::LayoutError, "invalid sample id '" + sample_id + "'");
  fs::path dir = root / "samples" / sample_id;
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw Error(ErrorKind::LayoutError, "missing sample directory " + dir.string());

  DatasetSample sample;
  sample.id = sample_id;
  sample.image_path = dir / "image.png";
  if (!fs::is_regular_file(sample.image_path, ec)) throw Error(ErrorKind::LayoutError, "missing image.png");
  fs::path camera_path = dir / "camera.txt";
  if (!fs::is_regular_file(camera_path, ec)) throw Error(ErrorKind::LayoutError, "missing camera.txt");
  CameraFile camera = parse_camera_file(read_file_text(camera_path));
  sample.intrinsics = camera.intrinsics;
  sample.unit_scale = camera.unit_scale;

  auto [w, h] = png_dimensions(sample.image_path);
  if (w != sample.intrinsics.width || h != sample.intrinsics.height)
    throw Error(ErrorKind::LayoutError, "image size " + std::to_string(w) + "x" + std::to_string(h) +
                                            " does not match camera.txt");

  fs::path objects_dir = dir / "objects";
  if (!fs::is_directory(objects_dir, ec)) throw Error(ErrorKind::LayoutError, "missing objects/ directory");
  for (const auto& entry : fs::directory_iterator(objects_dir, ec)) {
    if (!entry.is_regular_file()) continue;
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    if (ext != ".ply" && ext != ".obj") continue;
    SampleObject obj;
    obj.name = entry.path().stem().string();
    obj.mesh_path = entry.path();
    fs::path gt = dir / "gt" / (obj.name + ".txt");
    if (fs::is_regular_file(gt, ec)) obj.ground_truth = import_pose(read_file_text(gt));
    sample.objects.push_back(std::move(obj));
  }
  if (sample.objects.empty()) throw Error(ErrorKind::LayoutError, "sample has no meshes");
  std::sort(sample.objects.begin(), sample.objects.end(),
            [](const SampleObject& a, const SampleObject& b) { return a.name < b.name; });
  for (std::size_t i = 1; i < sample.objects.size(); ++i) {
    if (sample.objects[i].name == sample.objects[i - 1].name)
      throw Error(ErrorKind::LayoutError, "duplicate mesh name '" + sample.objects[i].name + "'");
  }
  return sample;
}

Scene scene_from_sample(const DatasetSample& sample) {
  Scene scene(sample.intrinsics, read_png_rgb(sample.image_path), sample.image_path.string());
  for (const SampleObject& obj : sample.objects) {
    auto mesh = std::make_shared<MeshAsset>(load_mesh(obj.mesh_path, sample.unit_scale));
    mesh->id = obj.name;
    mesh->name = obj.name;
    scene.add_object(std::move(mesh));
  }
  return scene;
}

std::map<std::string, RigidTransform> ground_truth_poses(const DatasetSample& sample) {
  std::map<std::string, RigidTransform> out;
  for (const SampleObject& obj : sample.objects) {
    if (obj.ground_truth) out.emplace(obj.name, *obj.ground_truth);
  }
  return out;
}

// Pose text ----------------------------------------------------------------

std::string format_decimal(double value) {
  if (value == 0.0) return "0";
  char buf[400];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed, 8);
  if (ec != std::errc()) {
    auto r = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, r.ptr);
  }
  std::string s(buf, ptr);
  if (s.find('.') != std::string::npos) {
    while (s.back() == '0') s.pop_back();
    if (s.back() == '.') s.pop_back();
  }
  if (s == "-0") s = "0";
  return s;
}

std::string export_pose(const RigidTransform& pose) {
  Mat4 m = pose.matrix();
  std::string out;
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      if (c > 0) out += ' ';
      out += format_decimal(m[r * 4 + c]);
    }
    out += '\n';
  }
  return out;
}

RigidTransform import_pose(std::string_view text) {
  auto tok = split_ws(text);
  if (tok.size() != 16) parse_fail("pose text needs 16 values, got " + std::to_string(tok.size()));
  Mat4 m{};
  for (int i = 0; i < 16; ++i) m[i] = to_double(tok[i]);
  if (std::abs(m[12]) > 1e-9 || std::abs(m[13]) > 1e-9 || std::abs(m[14]) > 1e-9 || std::abs(m[15] - 1.0) > 1e-9)
    parse_fail("bottom row must be 0 0 0 1");
  Mat3 r{m[0], m[1], m[2], m[4], m[5], m[6], m[8], m[9], m[10]};
  if (!(determinant(r) > 0.0)) throw Error(ErrorKind::InvalidRotation, "rotation block is a reflection");
  if (orthonormality_error(r) > 1e-4) throw Error(ErrorKind::InvalidRotation, "rotation block is not orthonormal");
  return {Rotation::orthonormalized(r), {m[3], m[7], m[11]}};
}

// Workspace ----------------------------------------------------------------

namespace {

ordered_json matrix_json(const Mat4& m) {
  ordered_json arr = ordered_json::array();
  for (double v : m) arr.push_back(v);
  return arr;
}

double get_number(const ordered_json& j) {
  if (!j.is_number()) parse_fail("expected a number");
  double v = j.get<double>();
  if (!std::isfinite(v)) parse_fail("non-finite number");
  return v;
}

std::int64_t get_integer(const ordered_json& j, std::int64_t lo, std::int64_t hi) {
  if (!j.is_number_integer()) parse_fail("expected an integer");
  std::int64_t v = j.is_number_unsigned() ? static_cast<std::int64_t>(std::min<std::uint64_t>(
                                                j.get<std::uint64_t>(), std::numeric_limits<std::int64_t>::max()))
                                          : j.get<std::int64_t>();
  if (v < lo || v > hi) parse_fail("integer out of range");
  return v;
}

Mat4 get_matrix(const ordered_json& j) {
  if (!j.is_array() || j.size() != 16) parse_fail("expected 16 numbers");
  Mat4 m{};
  for (std::size_t i = 0; i < 16; ++i) m[i] = get_number(j[i]);
  return m;
}

Vec3 get_vec3(const ordered_json& j) {
  if (!j.is_array() || j.size() != 3) parse_fail("expected 3 numbers");
  return {get_number(j[0]), get_number(j[1]), get_number(j[2])};
}

bool get_bool(const ordered_json& j) {
  if (!j.is_boolean()) parse_fail("expected a boolean");
  return j.get<bool>();
}

std::string get_string(const ordered_json& j) {
  if (!j.is_string()) parse_fail("expected a string");
  return j.get<std::string>();
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

std::string serialize_workspace(const Scene& scene) {
  const auto& k = scene.intrinsics();
  ordered_json doc;
  doc["workspace_version"] = kWorkspaceVersion;
  doc["intrinsics"] = {{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy}, {"width", k.width}, {"height", k.height}};
  doc["background"] = scene.background_path();
  doc["scene_camera"] = matrix_json(scene.scene_camera().matrix());
  ordered_json objects = ordered_json::array();
  for (const SceneObject& obj : scene.objects()) {
    ordered_json o;
    o["id"] = obj.id;
    o["name"] = obj.mesh->name;
    if (!obj.mesh->source.empty()) {
      o["mesh"] = obj.mesh->source.string();
      o["mesh_scale"] = obj.mesh->source_scale;
    } else {
      ordered_json verts = ordered_json::array();
      for (const Vec3& v : obj.mesh->vertices) verts.push_back({v.x, v.y, v.z});
      ordered_json tris = ordered_json::array();
      for (const auto& t : obj.mesh->triangles) tris.push_back({t[0], t[1], t[2]});
      o["mesh_inline"] = {{"vertices", std::move(verts)}, {"triangles", std::move(tris)}};
    }
    o["pose"] = matrix_json(obj.pose.matrix());
    o["color"] = {obj.color.r, obj.color.g, obj.color.b};
    o["opacity"] = obj.opacity;
    o["visible"] = obj.visible;
    o["mirror"] = {obj.mirror_x, obj.mirror_y};
    o["spacing"] = {obj.spacing.x, obj.spacing.y, obj.spacing.z};
    objects.push_back(std::move(o));
  }
  doc["objects"] = std::move(objects);
  return doc.dump(2) + "\n";
}

Scene deserialize_workspace(std::string_view text, const std::filesystem::path& base_dir) {
  ordered_json doc = ordered_json::parse(text.begin(), text.end(), nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) parse_fail("workspace is not a JSON object");
  try {
    if (!doc.contains("workspace_version")) parse_fail("missing workspace_version");
    std::int64_t version = get_integer(doc["workspace_version"], std::numeric_limits<std::int64_t>::min(),
                                       std::numeric_limits<std::int64_t>::max());
    if (version != kWorkspaceVersion)
      throw Error(ErrorKind::VersionMismatch, "workspace version " + std::to_string(version) + " is not supported");

    const ordered_json& jk = doc.at("intrinsics");
    CameraIntrinsics k;
    k.fx = get_number(jk.at("fx"));
    k.fy = get_number(jk.at("fy"));
    k.cx = get_number(jk.at("cx"));
    k.cy = get_number(jk.at("cy"));
    k.width = static_cast<int>(get_integer(jk.at("width"), 1, CameraIntrinsics::kMaxDimension));
    k.height = static_cast<int>(get_integer(jk.at("height"), 1, CameraIntrinsics::kMaxDimension));
    k.validate();

    std::string background_path = get_string(doc.at("background"));
    RgbImage background = background_path.empty() ? RgbImage(k.width, k.height)
                                                   : read_png_rgb(resolve(base_dir, background_path));
    if (background.width != k.width || background.height != k.height)
      parse_fail("background size does not match the intrinsics");
    Scene scene(k, std::move(background), background_path);
    scene.set_scene_camera(RigidTransform::from_matrix(get_matrix(doc.at("scene_camera"))));

    const ordered_json& objects = doc.at("objects");
    if (!objects.is_array()) parse_fail("objects must be an array");
    for (const ordered_json& o : objects) {
      std::string id = get_string(o.at("id"));
      std::shared_ptr<MeshAsset> mesh;
      if (o.contains("mesh")) {
        std::string path = get_string(o.at("mesh"));
        double scale = o.contains("mesh_scale") ? get_number(o.at("mesh_scale")) : 1.0;
        mesh = std::make_shared<MeshAsset>(load_mesh(resolve(base_dir, path), scale));
        mesh->source = path;
      } else {
        const ordered_json& inl = o.at("mesh_inline");
        mesh = std::make_shared<MeshAsset>();
        const ordered_json& verts = inl.at("vertices");
        const ordered_json& tris = inl.at("triangles");
        if (!verts.is_array() || !tris.is_array()) parse_fail("inline mesh needs arrays");
        for (const ordered_json& v : verts) mesh->vertices.push_back(get_vec3(v));
        for (const ordered_json& t : tris) {
          if (!t.is_array() || t.size() != 3) parse_fail("triangle needs 3 indices");
          std::array<std::uint32_t, 3> tri{};
          for (int i = 0; i < 3; ++i)
            tri[i] = static_cast<std::uint32_t>(get_integer(t[i], 0, std::numeric_limits<std::uint32_t>::max()));
          mesh->triangles.push_back(tri);
        }
      }
      mesh->id = id;
      mesh->name = get_string(o.at("name"));
      scene.add_object(mesh);
      scene.set_pose(id, get_matrix(o.at("pose")));
      const ordered_json& color = o.at("color");
      if (!color.is_array() || color.size() != 3) parse_fail("color needs 3 components");
      DisplayUpdate update;
      update.color = Rgb{static_cast<std::uint8_t>(get_integer(color[0], 0, 255)),
                         static_cast<std::uint8_t>(get_integer(color[1], 0, 255)),
                         static_cast<std::uint8_t>(get_integer(color[2], 0, 255))};
      update.opacity = get_number(o.at("opacity"));
      update.visible = get_bool(o.at("visible"));
      const ordered_json& mirror = o.at("mirror");
      if (!mirror.is_array() || mirror.size() != 2) parse_fail("mirror needs 2 flags");
      update.mirror_x = get_bool(mirror[0]);
      update.mirror_y = get_bool(mirror[1]);
      update.spacing = get_vec3(o.at("spacing"));
      scene.set_display(id, update);
    }
    return scene;
  } catch (const nlohmann::json::exception& e) {
    parse_fail(std::string("workspace: ") + e.what());
  }
}

void save_workspace(const Scene& scene, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_workspace(scene));
}

Scene load_workspace(const std::filesystem::path& path) {
  return deserialize_workspace(read_file_text(path), path.parent_path());
}

}  // namespace poseforge
