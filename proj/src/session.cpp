#include "poseforge/session.hpp"

#include <ctime>
#include <fstream>

namespace poseforge {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr std::string_view kCommandNames[] = {
    "load_sample", "select_object",     "gesture_rotate",     "gesture_translate", "gesture_depth", "set_pose_text",
    "set_display", "set_standard_view", "confirm_annotation", "undo",              "export_pose",   "save_workspace",
};

// A monotonic clock can return the same reading twice; durations are floored
// at its resolution.
constexpr double kMinDuration = 1e-9;

double steady_seconds() {
  using namespace std::chrono;
  return duration<double>(steady_clock::now().time_since_epoch()).count();
}

}  // namespace

std::string_view command_name(const Command& command) { return kCommandNames[command.index()]; }

bool is_pose_command(const Command& command) {
  return std::holds_alternative<cmd::GestureRotate>(command) || std::holds_alternative<cmd::GestureTranslate>(command) ||
         std::holds_alternative<cmd::GestureDepth>(command) || std::holds_alternative<cmd::SetPoseText>(command) ||
         std::holds_alternative<cmd::Undo>(command);
}

std::string iso_timestamp_now() {
  using namespace std::chrono;
  auto now = system_clock::now();
  std::time_t secs = system_clock::to_time_t(now);
  auto ms = duration_cast<milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[40];
  std::size_t n = std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  std::snprintf(buf + n, sizeof buf - n, ".%03dZ", static_cast<int>(ms));
  return buf;
}

Session::Session(std::string id, std::filesystem::path dataset_root, std::string user, std::uint64_t seed,
                 SessionOptions options)
    : id_(std::move(id)), root_(std::move(dataset_root)), user_(std::move(user)), options_(std::move(options)) {
  if (!options_.clock) options_.clock = steady_seconds;
  if (!options_.wall_clock) options_.wall_clock = iso_timestamp_now;
  std::vector<std::string> samples = list_samples(root_);
  if (samples.empty()) throw Error(ErrorKind::LayoutError, "dataset '" + root_.string() + "' has no samples");
  plan_ = make_trial_plan(samples, seed);
  install(prepare(plan_.entries.front().sample), plan_.entries.front().sample);
}

std::unique_ptr<Scene> Session::prepare(const std::string& sample_id) const {
  return std::make_unique<Scene>(scene_from_sample(load_sample(root_, sample_id)));
}

void Session::install(std::unique_ptr<Scene> scene, const std::string& sample_id) {
  scene_ = std::move(scene);
  sample_ = sample_id;
  active_.reset();
  undo_.clear();
  trial_start_ = options_.clock();
}

const std::string& Session::require_active() const {
  if (!active_) throw Error(ErrorKind::InvalidCommand, "no object selected");
  return *active_;
}

RigidTransform Session::gesture_pose(
    const std::string& object, CameraSelect camera,
    const std::function<RigidTransform(const RigidTransform&, const Vec3&)>& gesture) const {
  const SceneObject& obj = scene_->object(object);
  Vec3 centroid = obj.mesh->centroid();
  if (camera == CameraSelect::Original) {
    return gesture(obj.pose, transform_point(effective_model_transform(obj), centroid));
  }
  // Work in the scene camera's frame, then map back: P' = S⁻¹ · g(S · P).
  const RigidTransform& s = scene_->scene_camera();
  Vec3 pivot = transform_point(multiply(s.matrix(), effective_model_transform(obj)), centroid);
  return compose(invert(s), gesture(compose(s, obj.pose), pivot));
}

StateDelta Session::snapshot_delta(const std::string& command) const {
  StateDelta d;
  d.revision = revision_;
  d.command = command;
  d.sample = sample_;
  d.cursor = cursor_;
  d.complete = cursor_ >= plan_.entries.size();
  d.active_object = active_;
  return d;
}

StateDelta Session::apply(const Command& command) {
  std::lock_guard lock(mutex_);
  const CameraIntrinsics& k = scene_->intrinsics();

  std::optional<std::pair<std::string, RigidTransform>> new_pose;
  std::optional<std::string> text;
  std::vector<AnnotationRecord> records;

  std::visit(
      overloaded{
          [&](const cmd::LoadSample& c) { install(prepare(c.sample), c.sample); },
          [&](const cmd::SelectObject& c) {
            if (c.object) {
              scene_->index_of(*c.object);
              active_ = *c.object;
            } else if (c.pixel) {
              active_ = scene_->pick_object(*c.pixel, c.camera);
            } else {
              active_.reset();
            }
          },
          [&](const cmd::GestureRotate& c) {
            const std::string& id = require_active();
            new_pose.emplace(id, gesture_pose(id, c.camera, [&](const RigidTransform& p, const Vec3& pivot) {
                               return trackball_rotate(p, c.start, c.end, pivot, k);
                             }));
          },
          [&](const cmd::GestureTranslate& c) {
            const std::string& id = require_active();
            new_pose.emplace(id, gesture_pose(id, c.camera, [&](const RigidTransform& p, const Vec3& pivot) {
                               return translate_in_view(p, c.start, c.end, pivot, k);
                             }));
          },
          [&](const cmd::GestureDepth& c) {
            const std::string& id = require_active();
            new_pose.emplace(id, gesture_pose(id, c.camera, [&](const RigidTransform& p, const Vec3& pivot) {
                               return scroll_depth(p, c.notches, pivot);
                             }));
          },
          [&](const cmd::SetPoseText& c) {
            const std::string id = c.object ? *c.object : require_active();
            scene_->index_of(id);
            new_pose.emplace(id, import_pose(c.text));
          },
          [&](const cmd::SetDisplay& c) { scene_->set_display(c.object, c.update); },
          [&](const cmd::SetStandardView& c) { scene_->set_standard_view(c.view); },
          [&](const cmd::ConfirmAnnotation&) {
            if (cursor_ >= plan_.entries.size()) throw Error(ErrorKind::SessionComplete, "all trials are done");
            const TrialEntry& entry = plan_.entries[cursor_];
            if (sample_ != entry.sample)
              throw Error(ErrorKind::InvalidCommand, "loaded sample '" + sample_ + "' is not the active trial");
            std::unique_ptr<Scene> next;
            if (cursor_ + 1 < plan_.entries.size()) next = prepare(plan_.entries[cursor_ + 1].sample);
            double duration = std::max(options_.clock() - trial_start_, kMinDuration);
            std::string stamp = options_.wall_clock();
            for (const SceneObject& obj : scene_->objects()) {
              records.push_back({user_, entry.sample, entry.repetition, obj.id, obj.pose, duration, stamp});
            }
            if (!options_.log_path.empty()) {
              std::ofstream log(options_.log_path, std::ios::app | std::ios::binary);
              for (const AnnotationRecord& r : records) log << format_log_line(r) << '\n';
              log.flush();
              if (!log) throw Error(ErrorKind::IoError, "cannot append to '" + options_.log_path.string() + "'");
            }
            records_.insert(records_.end(), records.begin(), records.end());
            ++cursor_;
            if (next) {
              install(std::move(next), plan_.entries[cursor_].sample);
            } else {
              active_.reset();
              undo_.clear();
            }
          },
          [&](const cmd::Undo&) {
            if (undo_.empty()) throw Error(ErrorKind::InvalidCommand, "nothing to undo");
            new_pose = undo_.back();
          },
          [&](const cmd::ExportPose& c) {
            const std::string id = c.object ? *c.object : require_active();
            text = export_pose(scene_->pose(id));
          },
          [&](const cmd::SaveWorkspace& c) { save_workspace(*scene_, c.path); },
      },
      command);

  ++revision_;
  StateDelta delta = snapshot_delta(std::string(command_name(command)));
  if (new_pose) {
    const auto& [id, pose] = *new_pose;
    RigidTransform previous = scene_->pose(id);
    scene_->set_pose(id, pose);
    if (std::holds_alternative<cmd::Undo>(command)) {
      undo_.pop_back();
    } else {
      undo_.emplace_back(id, previous);
    }
    history_.push_back({revision_, options_.wall_clock(), id, pose});
    delta.poses.emplace(id, pose);
  }
  delta.text = std::move(text);
  delta.records = std::move(records);
  frame_cache_.clear();
  changed_.notify_all();
  return delta;
}

FrameSnapshot Session::frame(CameraSelect camera) {
  std::unique_lock lock(mutex_);
  if (auto it = frame_cache_.find(camera); it != frame_cache_.end()) return it->second;
  Scene snapshot = *scene_;
  std::uint64_t revision = revision_;
  lock.unlock();

  FrameSnapshot out;
  out.revision = revision;
  out.camera = camera;
  auto frame = std::make_shared<OverlayFrame>(rasterize(snapshot, camera, options_.render));
  out.png = std::make_shared<const std::vector<std::uint8_t>>(encode_frame_png(*frame));
  out.frame = std::move(frame);

  lock.lock();
  if (revision_ == revision) frame_cache_.try_emplace(camera, out);
  return out;
}

std::uint64_t Session::wait_for_revision(std::uint64_t after, std::chrono::milliseconds timeout) {
  std::unique_lock lock(mutex_);
  changed_.wait_for(lock, timeout, [&] { return revision_ > after; });
  return revision_;
}

std::uint64_t Session::revision() const {
  std::lock_guard lock(mutex_);
  return revision_;
}

std::vector<HistoryEntry> Session::history() const {
  std::lock_guard lock(mutex_);
  return history_;
}

std::vector<AnnotationRecord> Session::records() const {
  std::lock_guard lock(mutex_);
  return records_;
}

std::size_t Session::cursor() const {
  std::lock_guard lock(mutex_);
  return cursor_;
}

bool Session::complete() const {
  std::lock_guard lock(mutex_);
  return cursor_ >= plan_.entries.size();
}

std::optional<std::string> Session::active_object() const {
  std::lock_guard lock(mutex_);
  return active_;
}

std::string Session::current_sample() const {
  std::lock_guard lock(mutex_);
  return sample_;
}

Scene Session::scene() const {
  std::lock_guard lock(mutex_);
  return *scene_;
}

}  // namespace poseforge
