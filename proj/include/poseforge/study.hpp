#pragma once

// Annotation-study bookkeeping: trial planning, the annotation log, and the
// aggregation pipeline that turns raw trials into per-sample and per-user
// error statistics, timing tables and questionnaire scores.

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "poseforge/metrics.hpp"

namespace poseforge {

struct AnnotationRecord {
  std::string user;
  std::string sample;
  int trial = 0;  // 0, 1 or 2
  std::string object;
  RigidTransform pose;
  double duration_s = 0.0;
  std::string timestamp;  // ISO-8601, UTC
};

/// One JSON object per line, keys in a fixed order.
std::string format_log_line(const AnnotationRecord& record);
AnnotationRecord parse_log_line(std::string_view line);
/// Blank lines are skipped. DuplicateId if (user, sample, trial, object)
/// repeats.
std::vector<AnnotationRecord> parse_log(std::string_view text);
std::vector<AnnotationRecord> read_log(const std::filesystem::path& path);

inline constexpr int kTrialsPerSample = 3;

struct TrialEntry {
  std::string sample;
  int repetition = 0;
  friend bool operator==(const TrialEntry&, const TrialEntry&) = default;
};

struct TrialPlan {
  std::vector<TrialEntry> entries;
  std::uint64_t seed = 0;
};

/// Three blocks, each an independent seeded permutation of `samples`.
/// Reproducible across platforms (mt19937_64 with an explicit Fisher–Yates).
TrialPlan make_trial_plan(const std::vector<std::string>& samples, std::uint64_t seed);

/// The trial with the lowest ADD against `ground_truth`; ties go to the lower
/// trial index. NoRecords when empty.
const AnnotationRecord& best_of_trials(std::span<const AnnotationRecord> trials, const MeshAsset& mesh,
                                       const RigidTransform& ground_truth, const AddOptions& options = {});

/// Indices of the ⌈0.9·n⌉ smallest values, in input order. Ties at the cut
/// keep the earlier index.
std::vector<std::size_t> trim_top_90_indices(std::span<const double> values);
std::vector<double> trim_top_90(std::span<const double> values);

struct MetricSummary {
  double mean = 0.0;
  double std = 0.0;  // population
  std::size_t count = 0;
};

/// Mean and population standard deviation.
MetricSummary summarize(std::span<const double> values);

struct SummaryStats {
  std::string group;
  MetricSummary angular_deg;
  MetricSummary euclidean_mm;
  MetricSummary add_mm;
};

enum class TrimScope { PerGroup, PerDataset, None };

struct StudyOptions {
  TrimScope trim = TrimScope::PerGroup;
  AddOptions add;
};

struct StudyReport {
  std::vector<SummaryStats> groups;  // sorted by group key
  SummaryStats overall;              // pooled over every kept value
};

/// (sample id, object id)
using ObjectKey = std::pair<std::string, std::string>;
using MeshTable = std::map<ObjectKey, MeshPtr>;
using PoseTable = std::map<ObjectKey, RigidTransform>;

/// Per sample: each user's best trial per object against ground truth,
/// trimmed per metric, then mean/std.
StudyReport inter_personal_stats(std::span<const AnnotationRecord> records, const MeshTable& meshes,
                                 const PoseTable& ground_truth, const StudyOptions& options = {});

/// Per user: the three pairwise errors between that user's trials of each
/// sample object (ground truth unused), trimmed per metric, then mean/std.
/// MissingTrials unless every (user, sample, object) has trials 0, 1 and 2.
StudyReport intra_personal_stats(std::span<const AnnotationRecord> records, const MeshTable& meshes,
                                 const StudyOptions& options = {});

struct UserTime {
  std::string user;
  MetricSummary seconds;
};

struct TimeTable {
  std::vector<UserTime> users;  // sorted by user
  MetricSummary aggregate;      // over the per-user means
};

/// One duration per (user, sample, trial); multi-object trials count once.
TimeTable time_table(std::span<const AnnotationRecord> records);

enum class Polarity { Positive, Negative };

/// Questions 1, 3, 5, 7, 9 positive; 2, 4, 6, 8, 10 negative.
const std::array<Polarity, 10>& standard_sus_polarity();

/// Negative items map s → 6 − s. OutOfRange outside [1, 5].
std::array<int, 10> sus_adjust(const std::array<int, 10>& responses,
                               const std::array<Polarity, 10>& polarity = standard_sus_polarity());

struct QuestionnaireResponse {
  std::string user;
  std::vector<double> values;
};

/// Per-question statistics of the adjusted SUS scores.
std::array<MetricSummary, 10> sus_summary(std::span<const std::array<int, 10>> responses,
                                          const std::array<Polarity, 10>& polarity = standard_sus_polarity());

inline constexpr std::array<std::string_view, 6> kTlxDimensions{"mental", "physical", "temporal",
                                                               "performance", "effort", "frustration"};

/// Raw (unweighted) per-dimension statistics. OutOfRange outside [0, 20].
std::array<MetricSummary, 6> tlx_summary(std::span<const std::array<double, 6>> responses);

/// JSON lines {"user": ..., "responses"|"scores": [...]}.
std::vector<QuestionnaireResponse> parse_questionnaire(std::string_view text, std::string_view field);

// Report rendering ---------------------------------------------------------

std::string format_report_tsv(const StudyReport& report, std::string_view group_label);
std::string format_report_json(const StudyReport& report, std::string_view mode);
std::string format_time_tsv(const TimeTable& table);
std::string format_time_json(const TimeTable& table);

}  // namespace poseforge
