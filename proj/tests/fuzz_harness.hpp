#pragma once

// Mutation fuzzing for every text and binary parser. A case passes when the
// parser returns normally or throws poseforge::Error; anything else (another
// exception type) is a failure.

#include <functional>
#include <string>
#include <vector>

#include "poseforge/dataset.hpp"
#include "poseforge/protocol.hpp"
#include "poseforge/study.hpp"
#include "support.hpp"

namespace testing {

struct FuzzTarget {
  std::string name;
  std::string seed_input;
  std::function<void(const std::string&)> parse;
};

struct FuzzResult {
  std::size_t cases = 0;
  std::size_t rejected = 0;  // poseforge::Error
  std::vector<std::string> failures;
};

inline std::string mutate(Rng& rng, std::string s) {
  static const char* kTokens[] = {"nan", "inf", "-inf", "1e308", "-1", "0", "4294967296", "99999999999",
                                  "{",   "]",   "\"",   "\n",    " ",  "null", "-0",       "1e-320"};
  int rounds = static_cast<int>(rng.integer(1, 4));
  for (int r = 0; r < rounds; ++r) {
    std::size_t n = s.size();
    std::size_t at = n == 0 ? 0 : static_cast<std::size_t>(rng.integer(0, static_cast<long>(n) - 1));
    switch (rng.integer(0, 6)) {
      case 0:  // flip a byte
        if (n) s[at] = static_cast<char>(rng.integer(0, 255));
        break;
      case 1:  // truncate
        s.resize(at);
        break;
      case 2:  // delete a span
        if (n) s.erase(at, static_cast<std::size_t>(rng.integer(1, 16)));
        break;
      case 3:  // insert a token
        s.insert(at, kTokens[rng.integer(0, std::size(kTokens) - 1)]);
        break;
      case 4: {  // replace the next number with a token
        std::size_t p = s.find_first_of("0123456789", at);
        if (p == std::string::npos) break;
        std::size_t e = s.find_first_not_of("0123456789.-e", p);
        s.replace(p, (e == std::string::npos ? s.size() : e) - p, kTokens[rng.integer(0, std::size(kTokens) - 1)]);
        break;
      }
      case 5:  // duplicate a span
        if (n) s.insert(at, s.substr(at, static_cast<std::size_t>(rng.integer(1, 64))));
        break;
      default:  // swap two bytes
        if (n > 1) std::swap(s[at], s[static_cast<std::size_t>(rng.integer(0, static_cast<long>(n) - 1))]);
        break;
    }
  }
  return s;
}

inline std::vector<FuzzTarget> fuzz_targets(const fs::path& scratch) {
  using namespace poseforge;
  std::vector<FuzzTarget> t;
  MeshAsset cube = cube_mesh();
  t.push_back({"ply", ply_text(cube), [](const std::string& s) { parse_ply(s); }});
  t.push_back({"obj",
               "# cube\nv 0 0 0\nv 10 0 0\nv 10 10 0\nv 0 10 0\nv 0 0 10\nf 1 2 3 4\nf 1/1/1 2//2 5\nf -1 -2 -3\n",
               [](const std::string& s) { parse_obj(s); }});
  t.push_back({"pose", export_pose({rotation_from_axis_angle({1, 2, 3}, 0.7), {10, -20, 300}}),
               [](const std::string& s) { import_pose(s); }});
  t.push_back({"camera", format_camera_file({small_camera(), 0.001}), [](const std::string& s) { parse_camera_file(s); }});

  Scene scene(small_camera(), gradient_image(64, 48));
  scene.add_object(std::make_shared<MeshAsset>(cube_mesh(40, "a")));
  scene.add_object(std::make_shared<MeshAsset>(tetra_mesh("b")));
  scene.set_pose("a", {Rotation(), {0, 0, 300}});
  t.push_back({"workspace", serialize_workspace(scene),
               [scratch](const std::string& s) { deserialize_workspace(s, scratch); }});

  AnnotationRecord rec{"u", "s", 1, "o", {Rotation(), {1, 2, 3}}, 12.5, "2024-01-01T00:00:00.000Z"};
  t.push_back({"log", format_log_line(rec) + "\n" + format_log_line({"v", "s", 2, "o", {}, 3, "x"}) + "\n",
               [](const std::string& s) { parse_log(s); }});
  t.push_back({"questionnaire", "{\"user\":\"a\",\"responses\":[1,2,3,4,5,1,2,3,4,5]}\n",
               [](const std::string& s) {
                 for (const auto& q : parse_questionnaire(s, "responses")) {
                   if (q.values.size() != 10) continue;
                   std::array<int, 10> a{};
                   for (int i = 0; i < 10; ++i) a[i] = static_cast<int>(q.values[i]);
                   sus_adjust(a);
                 }
               }});
  auto png = encode_png(gradient_image(9, 7));
  t.push_back({"png", std::string(png.begin(), png.end()), [](const std::string& s) {
                 std::vector<std::uint8_t> b(s.begin(), s.end());
                 decode_png_rgb(b);
               }});
  t.push_back({"command",
               protocol::command_to_json(cmd::SetDisplay{"a", {true, 0.5, Rgb{1, 2, 3}, false, true, Vec3{1, 1, 2}}})
                   .dump(),
               [](const std::string& s) {
                 auto j = protocol::json::parse(s, nullptr, false);
                 if (j.is_discarded() || !j.is_object() || !j.contains("command") || !j["command"].is_string())
                   throw Error(ErrorKind::ParseError, "envelope");
                 protocol::command_from_json(j["command"].get<std::string>(),
                                             j.contains("payload") ? j["payload"] : protocol::json());
               }});
  t.push_back({"gesture",
               protocol::command_to_json(cmd::GestureRotate{{1, 2}, {30, 40}, CameraSelect::Scene}).dump(),
               [](const std::string& s) {
                 auto j = protocol::json::parse(s, nullptr, false);
                 if (j.is_discarded() || !j.is_object() || !j.contains("command") || !j["command"].is_string())
                   throw Error(ErrorKind::ParseError, "envelope");
                 protocol::command_from_json(j["command"].get<std::string>(),
                                             j.contains("payload") ? j["payload"] : protocol::json());
               }});
  return t;
}

inline FuzzResult run_fuzz(std::size_t total, std::uint64_t seed) {
  TempDir scratch;
  auto targets = fuzz_targets(scratch.path());
  Rng rng(seed);
  FuzzResult out;
  for (std::size_t i = 0; i < total; ++i) {
    const FuzzTarget& target = targets[i % targets.size()];
    std::string input = mutate(rng, target.seed_input);
    ++out.cases;
    try {
      target.parse(input);
    } catch (const poseforge::Error&) {
      ++out.rejected;
    } catch (const std::exception& e) {
      if (out.failures.size() < 20) out.failures.push_back(target.name + ": " + e.what());
    }
  }
  return out;
}

}  // namespace testing
