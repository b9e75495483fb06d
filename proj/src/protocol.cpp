#include "poseforge/protocol.hpp"

#include <cmath>

namespace poseforge::protocol {

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorKind::ParseError, what); }

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) bad(std::string("missing '") + key + "'");
  return j[key];
}

double number(const json& j, const char* what) {
  if (!j.is_number()) bad(std::string("'") + what + "' must be a number");
  double v = j.get<double>();
  if (!std::isfinite(v)) bad(std::string("'") + what + "' must be finite");
  return v;
}

std::string text(const json& j, const char* what) {
  if (!j.is_string()) bad(std::string("'") + what + "' must be a string");
  return j.get<std::string>();
}

bool boolean(const json& j, const char* what) {
  if (!j.is_boolean()) bad(std::string("'") + what + "' must be a boolean");
  return j.get<bool>();
}

std::optional<std::string> optional_text(const json& payload, const char* key) {
  if (!payload.contains(key) || payload[key].is_null()) return std::nullopt;
  return text(payload[key], key);
}

PixelCoord pixel(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2) bad(std::string("'") + what + "' must be [u, v]");
  return {number(j[0], what), number(j[1], what)};
}

Vec3 vec3(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) bad(std::string("'") + what + "' must have 3 entries");
  return {number(j[0], what), number(j[1], what), number(j[2], what)};
}

CameraSelect camera(const json& payload) {
  if (!payload.contains("camera")) return CameraSelect::Original;
  return parse_camera(text(payload["camera"], "camera"));
}

json camera_json(CameraSelect c) { return std::string(to_string(c)); }
json pixel_json(PixelCoord p) { return json::array({p.u, p.v}); }

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

}  // namespace

json pose_to_json(const RigidTransform& pose) {
  json out = json::array();
  for (double v : pose.matrix()) out.push_back(v);
  return out;
}

RigidTransform pose_from_json(const json& j) {
  if (!j.is_array() || j.size() != 16) bad("pose must have 16 entries");
  Mat4 m{};
  for (std::size_t i = 0; i < 16; ++i) m[i] = number(j[i], "pose");
  return RigidTransform::from_matrix(m);
}

Command command_from_json(std::string_view name, const json& payload_in) {
  const json empty = json::object();
  const json& payload = payload_in.is_null() ? empty : payload_in;
  if (!payload.is_object()) bad("payload must be an object");
  if (name == "load_sample") return cmd::LoadSample{text(field(payload, "sample"), "sample")};
  if (name == "select_object") {
    cmd::SelectObject c;
    c.object = optional_text(payload, "object");
    if (payload.contains("pixel") && !payload["pixel"].is_null()) c.pixel = pixel(payload["pixel"], "pixel");
    c.camera = camera(payload);
    return c;
  }
  if (name == "gesture_rotate")
    return cmd::GestureRotate{pixel(field(payload, "start"), "start"), pixel(field(payload, "end"), "end"),
                              camera(payload)};
  if (name == "gesture_translate")
    return cmd::GestureTranslate{pixel(field(payload, "start"), "start"), pixel(field(payload, "end"), "end"),
                                 camera(payload)};
  if (name == "gesture_depth") return cmd::GestureDepth{number(field(payload, "notches"), "notches"), camera(payload)};
  if (name == "set_pose_text") return cmd::SetPoseText{optional_text(payload, "object"), text(field(payload, "text"), "text")};
  if (name == "set_display") {
    cmd::SetDisplay c;
    c.object = text(field(payload, "object"), "object");
    if (payload.contains("visible")) c.update.visible = boolean(payload["visible"], "visible");
    if (payload.contains("opacity")) c.update.opacity = number(payload["opacity"], "opacity");
    if (payload.contains("mirror_x")) c.update.mirror_x = boolean(payload["mirror_x"], "mirror_x");
    if (payload.contains("mirror_y")) c.update.mirror_y = boolean(payload["mirror_y"], "mirror_y");
    if (payload.contains("spacing")) c.update.spacing = vec3(payload["spacing"], "spacing");
    if (payload.contains("color")) {
      const json& col = payload["color"];
      if (!col.is_array() || col.size() != 3) bad("'color' must be [r, g, b]");
      std::uint8_t rgb[3];
      for (int i = 0; i < 3; ++i) {
        if (!col[i].is_number_integer() || col[i].get<long long>() < 0 || col[i].get<long long>() > 255)
          throw Error(ErrorKind::OutOfRange, "colour channels lie in [0, 255]");
        rgb[i] = static_cast<std::uint8_t>(col[i].get<int>());
      }
      c.update.color = Rgb{rgb[0], rgb[1], rgb[2]};
    }
    return c;
  }
  if (name == "set_standard_view") return cmd::SetStandardView{parse_standard_view(text(field(payload, "view"), "view"))};
  if (name == "confirm_annotation") return cmd::ConfirmAnnotation{};
  if (name == "undo") return cmd::Undo{};
  if (name == "export_pose") return cmd::ExportPose{optional_text(payload, "object")};
  if (name == "save_workspace") return cmd::SaveWorkspace{text(field(payload, "path"), "path")};
  throw Error(ErrorKind::InvalidCommand, "unknown command '" + std::string(name) + "'");
}

json command_to_json(const Command& command) {
  json payload = json::object();
  std::visit(overloaded{
                 [&](const cmd::LoadSample& c) { payload["sample"] = c.sample; },
                 [&](const cmd::SelectObject& c) {
                   if (c.object) payload["object"] = *c.object;
                   if (c.pixel) payload["pixel"] = pixel_json(*c.pixel);
                   payload["camera"] = camera_json(c.camera);
                 },
                 [&](const cmd::GestureRotate& c) {
                   payload["start"] = pixel_json(c.start);
                   payload["end"] = pixel_json(c.end);
                   payload["camera"] = camera_json(c.camera);
                 },
                 [&](const cmd::GestureTranslate& c) {
                   payload["start"] = pixel_json(c.start);
                   payload["end"] = pixel_json(c.end);
                   payload["camera"] = camera_json(c.camera);
                 },
                 [&](const cmd::GestureDepth& c) {
                   payload["notches"] = c.notches;
                   payload["camera"] = camera_json(c.camera);
                 },
                 [&](const cmd::SetPoseText& c) {
                   if (c.object) payload["object"] = *c.object;
                   payload["text"] = c.text;
                 },
                 [&](const cmd::SetDisplay& c) {
                   payload["object"] = c.object;
                   const DisplayUpdate& u = c.update;
                   if (u.visible) payload["visible"] = *u.visible;
                   if (u.opacity) payload["opacity"] = *u.opacity;
                   if (u.color) payload["color"] = json::array({u.color->r, u.color->g, u.color->b});
                   if (u.mirror_x) payload["mirror_x"] = *u.mirror_x;
                   if (u.mirror_y) payload["mirror_y"] = *u.mirror_y;
                   if (u.spacing) payload["spacing"] = json::array({u.spacing->x, u.spacing->y, u.spacing->z});
                 },
                 [&](const cmd::SetStandardView& c) { payload["view"] = std::string(to_string(c.view)); },
                 [&](const cmd::ConfirmAnnotation&) {},
                 [&](const cmd::Undo&) {},
                 [&](const cmd::ExportPose& c) {
                   if (c.object) payload["object"] = *c.object;
                 },
                 [&](const cmd::SaveWorkspace& c) { payload["path"] = c.path.string(); },
             },
             command);
  return envelope(0, "command", command_name(command), std::move(payload));
}

json record_to_json(const AnnotationRecord& r) { return json::parse(format_log_line(r)); }

json delta_to_json(const StateDelta& d) {
  json payload;
  payload["sample"] = d.sample;
  payload["cursor"] = d.cursor;
  payload["complete"] = d.complete;
  payload["active_object"] = d.active_object ? json(*d.active_object) : json(nullptr);
  json poses = json::object();
  for (const auto& [id, pose] : d.poses) poses[id] = pose_to_json(pose);
  payload["poses"] = std::move(poses);
  if (d.text) payload["text"] = *d.text;
  json records = json::array();
  for (const AnnotationRecord& r : d.records) records.push_back(record_to_json(r));
  payload["records"] = std::move(records);
  return envelope(d.revision, "response", d.command, std::move(payload));
}

json history_to_json(const std::vector<HistoryEntry>& history) {
  json entries = json::array();
  for (const HistoryEntry& h : history) {
    entries.push_back({{"revision", h.revision},
                       {"timestamp", h.timestamp},
                       {"object", h.object},
                       {"pose", pose_to_json(h.pose)},
                       {"text", export_pose(h.pose)}});
  }
  return entries;
}

json state_to_json(const Session& session) {
  Scene scene = session.scene();
  const CameraIntrinsics& k = scene.intrinsics();
  json payload;
  payload["session"] = session.id();
  payload["user"] = session.user();
  payload["sample"] = session.current_sample();
  payload["cursor"] = session.cursor();
  payload["plan_length"] = session.plan().entries.size();
  payload["complete"] = session.complete();
  auto active = session.active_object();
  payload["active_object"] = active ? json(*active) : json(nullptr);
  payload["intrinsics"] = {{"fx", k.fx}, {"fy", k.fy}, {"cx", k.cx}, {"cy", k.cy}, {"width", k.width}, {"height", k.height}};
  payload["scene_camera"] = pose_to_json(scene.scene_camera());
  json objects = json::array();
  for (const SceneObject& o : scene.objects()) {
    objects.push_back({{"id", o.id},
                       {"pose", pose_to_json(o.pose)},
                       {"color", json::array({o.color.r, o.color.g, o.color.b})},
                       {"opacity", o.opacity},
                       {"visible", o.visible},
                       {"mirror", json::array({o.mirror_x, o.mirror_y})},
                       {"spacing", json::array({o.spacing.x, o.spacing.y, o.spacing.z})}});
  }
  payload["objects"] = std::move(objects);
  return payload;
}

json mesh_to_json(const MeshAsset& mesh) {
  json vertices = json::array();
  for (const Vec3& v : mesh.vertices) vertices.push_back(json::array({v.x, v.y, v.z}));
  json triangles = json::array();
  for (const auto& t : mesh.triangles) triangles.push_back(json::array({t[0], t[1], t[2]}));
  return {{"id", mesh.id}, {"vertices", std::move(vertices)}, {"triangles", std::move(triangles)}};
}

json envelope(std::uint64_t revision, std::string_view key, std::string_view name, json payload) {
  json out;
  out["revision"] = revision;
  out[std::string(key)] = std::string(name);
  out["payload"] = std::move(payload);
  return out;
}

json error_envelope(std::uint64_t revision, std::string_view kind, std::string_view message) {
  return envelope(revision, "response", "error", {{"kind", std::string(kind)}, {"message", std::string(message)}});
}

int http_status(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::UnknownObject: return 404;
    case ErrorKind::SessionComplete: return 409;
    case ErrorKind::IoError: return 500;
    default: return 400;
  }
}

}  // namespace poseforge::protocol
