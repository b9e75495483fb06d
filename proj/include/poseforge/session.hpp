#pragma once

// Annotation session: owns the live scene of one participant, applies panel
// and gesture commands one at a time, keeps the pose history and writes an
// AnnotationRecord per object on every confirm.

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "poseforge/dataset.hpp"
#include "poseforge/renderer.hpp"
#include "poseforge/study.hpp"

namespace poseforge {

namespace cmd {

struct LoadSample {
  std::string sample;
};
/// Selects by id, by picking at `pixel`, or clears the selection when both
/// are empty.
struct SelectObject {
  std::optional<std::string> object;
  std::optional<PixelCoord> pixel;
  CameraSelect camera = CameraSelect::Original;
};
struct GestureRotate {
  PixelCoord start;
  PixelCoord end;
  CameraSelect camera = CameraSelect::Original;
};
struct GestureTranslate {
  PixelCoord start;
  PixelCoord end;
  CameraSelect camera = CameraSelect::Original;
};
struct GestureDepth {
  double notches = 0.0;
  CameraSelect camera = CameraSelect::Original;
};
struct SetPoseText {
  std::optional<std::string> object;  // defaults to the active object
  std::string text;
};
struct SetDisplay {
  std::string object;
  DisplayUpdate update;
};
struct SetStandardView {
  StandardView view = StandardView::ResetToOriginal;
};
struct ConfirmAnnotation {};
struct Undo {};
struct ExportPose {
  std::optional<std::string> object;
};
struct SaveWorkspace {
  std::filesystem::path path;
};

}  // namespace cmd

using Command = std::variant<cmd::LoadSample, cmd::SelectObject, cmd::GestureRotate, cmd::GestureTranslate,
                             cmd::GestureDepth, cmd::SetPoseText, cmd::SetDisplay, cmd::SetStandardView,
                             cmd::ConfirmAnnotation, cmd::Undo, cmd::ExportPose, cmd::SaveWorkspace>;

std::string_view command_name(const Command& command);
/// Commands that write an object pose and therefore a history entry.
bool is_pose_command(const Command& command);

struct HistoryEntry {
  std::uint64_t revision = 0;
  std::string timestamp;
  std::string object;
  RigidTransform pose;
};

struct StateDelta {
  std::uint64_t revision = 0;
  std::string command;
  std::string sample;  // sample on screen after the command
  std::size_t cursor = 0;
  bool complete = false;
  std::optional<std::string> active_object;
  std::map<std::string, RigidTransform> poses;  // objects whose pose changed
  std::optional<std::string> text;              // export_pose
  std::vector<AnnotationRecord> records;        // confirm_annotation
};

struct FrameSnapshot {
  std::uint64_t revision = 0;
  CameraSelect camera = CameraSelect::Original;
  std::shared_ptr<const OverlayFrame> frame;
  std::shared_ptr<const std::vector<std::uint8_t>> png;
};

struct SessionOptions {
  /// Monotonic seconds. Defaults to steady_clock.
  std::function<double()> clock;
  /// ISO-8601 UTC timestamps. Defaults to system_clock.
  std::function<std::string()> wall_clock;
  /// Records are appended here on confirm when non-empty.
  std::filesystem::path log_path;
  RenderOptions render;
};

std::string iso_timestamp_now();

class Session {
 public:
  /// Builds the trial plan, loads the first sample at identity poses and
  /// starts the trial timer. LayoutError for an empty or malformed dataset.
  Session(std::string id, std::filesystem::path dataset_root, std::string user, std::uint64_t seed,
          SessionOptions options = {});

  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  /// Applies one command atomically: on error nothing changes and the
  /// revision stays put. Every accepted command bumps the revision by one.
  StateDelta apply(const Command& command);

  /// Rendered frame of the current state; repeated calls without commands in
  /// between return the same cached bytes.
  FrameSnapshot frame(CameraSelect camera);

  /// Blocks until revision > `after` or the timeout elapses; returns the
  /// current revision.
  std::uint64_t wait_for_revision(std::uint64_t after, std::chrono::milliseconds timeout);

  const std::string& id() const { return id_; }
  const std::string& user() const { return user_; }
  std::uint64_t revision() const;
  std::vector<HistoryEntry> history() const;
  std::vector<AnnotationRecord> records() const;
  const TrialPlan& plan() const { return plan_; }
  std::size_t cursor() const;
  bool complete() const;
  std::optional<std::string> active_object() const;
  std::string current_sample() const;
  /// Copy of the live scene.
  Scene scene() const;

 private:
  std::unique_ptr<Scene> prepare(const std::string& sample_id) const;
  void install(std::unique_ptr<Scene> scene, const std::string& sample_id);
  RigidTransform gesture_pose(const std::string& object, CameraSelect camera,
                              const std::function<RigidTransform(const RigidTransform&, const Vec3&)>& gesture) const;
  const std::string& require_active() const;
  StateDelta snapshot_delta(const std::string& command) const;

  std::string id_;
  std::filesystem::path root_;
  std::string user_;
  SessionOptions options_;
  TrialPlan plan_;

  mutable std::mutex mutex_;
  std::condition_variable changed_;
  std::uint64_t revision_ = 0;
  std::size_t cursor_ = 0;
  std::string sample_;
  std::unique_ptr<Scene> scene_;
  std::optional<std::string> active_;
  double trial_start_ = 0.0;
  std::vector<HistoryEntry> history_;
  std::vector<std::pair<std::string, RigidTransform>> undo_;
  std::vector<AnnotationRecord> records_;
  std::map<CameraSelect, FrameSnapshot> frame_cache_;
};

}  // namespace poseforge
