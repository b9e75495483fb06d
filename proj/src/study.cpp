#include "poseforge/study.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <tuple>

#include "json.hpp"
#include "poseforge/dataset.hpp"
#include "poseforge/image.hpp"

namespace poseforge {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

[[noreturn]] void parse_fail(const std::string& what) { throw Error(ErrorKind::ParseError, what); }

std::string require_string(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_string()) parse_fail(std::string("missing string '") + key + "'");
  return j[key].get<std::string>();
}

double require_number(const json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_number()) parse_fail(std::string("missing number '") + key + "'");
  double v = j[key].get<double>();
  if (!std::isfinite(v)) parse_fail(std::string("non-finite '") + key + "'");
  return v;
}

std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) line.remove_suffix(1);
    if (!line.empty()) out.push_back(line);
    pos = end + 1;
  }
  return out;
}

}  // namespace

// Log ----------------------------------------------------------------------

std::string format_log_line(const AnnotationRecord& r) {
  ordered_json j;
  j["user"] = r.user;
  j["sample"] = r.sample;
  j["trial"] = r.trial;
  j["object"] = r.object;
  ordered_json pose = ordered_json::array();
  for (double v : r.pose.matrix()) pose.push_back(v);
  j["pose"] = std::move(pose);
  j["duration_s"] = r.duration_s;
  j["timestamp"] = r.timestamp;
  return j.dump();
}

AnnotationRecord parse_log_line(std::string_view line) {
  json j = json::parse(line.begin(), line.end(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) parse_fail("log line is not a JSON object");
  AnnotationRecord r;
  r.user = require_string(j, "user");
  r.sample = require_string(j, "sample");
  r.object = require_string(j, "object");
  r.timestamp = require_string(j, "timestamp");
  if (!j.contains("trial") || !j["trial"].is_number_integer()) parse_fail("missing integer 'trial'");
  std::int64_t trial = j["trial"].is_number_unsigned() && j["trial"].get<std::uint64_t>() > 1000
                           ? -1
                           : j["trial"].get<std::int64_t>();
  if (trial < 0 || trial >= kTrialsPerSample) parse_fail("trial index out of range");
  r.trial = static_cast<int>(trial);
  r.duration_s = require_number(j, "duration_s");
  if (!(r.duration_s > 0.0)) parse_fail("duration must be positive");
  if (!j.contains("pose") || !j["pose"].is_array() || j["pose"].size() != 16) parse_fail("pose needs 16 numbers");
  Mat4 m{};
  for (std::size_t i = 0; i < 16; ++i) {
    if (!j["pose"][i].is_number()) parse_fail("pose needs 16 numbers");
    m[i] = j["pose"][i].get<double>();
  }
  r.pose = RigidTransform::from_matrix(m);
  return r;
}

std::vector<AnnotationRecord> parse_log(std::string_view text) {
  std::vector<AnnotationRecord> out;
  std::set<std::tuple<std::string, std::string, int, std::string>> seen;
  for (std::string_view line : lines_of(text)) {
    AnnotationRecord r = parse_log_line(line);
    if (!seen.emplace(r.user, r.sample, r.trial, r.object).second)
      throw Error(ErrorKind::DuplicateId, "duplicate record for user '" + r.user + "', sample '" + r.sample + "'");
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<AnnotationRecord> read_log(const std::filesystem::path& path) { return parse_log(read_file_text(path)); }

// Trial plan ---------------------------------------------------------------

TrialPlan make_trial_plan(const std::vector<std::string>& samples, std::uint64_t seed) {
  if (samples.empty()) throw Error(ErrorKind::NoRecords, "trial plan needs at least one sample");
  TrialPlan plan;
  plan.seed = seed;
  std::mt19937_64 rng(seed);
  for (int rep = 0; rep < kTrialsPerSample; ++rep) {
    std::vector<std::string> block = samples;
    for (std::size_t i = block.size() - 1; i > 0; --i) {
      // Unbiased draw in [0, i] by rejection.
      const std::uint64_t range = i + 1;
      const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % range;
      std::uint64_t draw;
      do {
        draw = rng();
      } while (draw >= limit);
      std::swap(block[i], block[draw % range]);
    }
    for (auto& s : block) plan.entries.push_back({std::move(s), rep});
  }
  return plan;
}

// Selection and trimming ---------------------------------------------------

const AnnotationRecord& best_of_trials(std::span<const AnnotationRecord> trials, const MeshAsset& mesh,
                                       const RigidTransform& ground_truth, const AddOptions& options) {
  if (trials.empty()) throw Error(ErrorKind::NoRecords, "no trials to choose from");
  const AnnotationRecord* best = nullptr;
  double best_add = 0.0;
  for (const AnnotationRecord& r : trials) {
    double add = add_metric(mesh, r.pose, ground_truth, options);
    if (best == nullptr || add < best_add || (add == best_add && r.trial < best->trial)) {
      best = &r;
      best_add = add;
    }
  }
  return *best;
}

std::vector<std::size_t> trim_top_90_indices(std::span<const double> values) {
  const std::size_t n = values.size();
  const std::size_t keep = (9 * n + 9) / 10;  // ⌈0.9·n⌉ without floating error
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  order.resize(keep);
  std::sort(order.begin(), order.end());
  return order;
}

std::vector<double> trim_top_90(std::span<const double> values) {
  std::vector<double> out;
  for (std::size_t i : trim_top_90_indices(values)) out.push_back(values[i]);
  return out;
}

MetricSummary summarize(std::span<const double> values) {
  MetricSummary s;
  s.count = values.size();
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(sq / static_cast<double>(values.size()));
  return s;
}

// Aggregation --------------------------------------------------------------

namespace {

struct GroupedErrors {
  std::string group;
  std::vector<PoseErrors> items;
};

std::vector<std::size_t> all_indices(std::size_t n) {
  std::vector<std::size_t> out(n);
  std::iota(out.begin(), out.end(), std::size_t{0});
  return out;
}

// Applies the trim policy per metric and summarizes every group plus the
// pooled set of kept values.
StudyReport summarize_groups(const std::vector<GroupedErrors>& groups, TrimScope scope) {
  using Field = double PoseErrors::*;
  constexpr Field fields[3] = {&PoseErrors::angular_deg, &PoseErrors::euclidean_mm, &PoseErrors::add_mm};
  constexpr MetricSummary SummaryStats::*slots[3] = {&SummaryStats::angular_deg, &SummaryStats::euclidean_mm,
                                                     &SummaryStats::add_mm};
  StudyReport report;
  report.overall.group = "all";
  report.groups.resize(groups.size());
  for (std::size_t g = 0; g < groups.size(); ++g) report.groups[g].group = groups[g].group;

  for (int f = 0; f < 3; ++f) {
    std::vector<std::vector<double>> kept(groups.size());
    if (scope == TrimScope::PerDataset) {
      std::vector<double> pooled;
      std::vector<std::size_t> owner;
      for (std::size_t g = 0; g < groups.size(); ++g) {
        for (const PoseErrors& e : groups[g].items) {
          pooled.push_back(e.*fields[f]);
          owner.push_back(g);
        }
      }
      for (std::size_t i : trim_top_90_indices(pooled)) kept[owner[i]].push_back(pooled[i]);
    } else {
      for (std::size_t g = 0; g < groups.size(); ++g) {
        std::vector<double> values;
        for (const PoseErrors& e : groups[g].items) values.push_back(e.*fields[f]);
        auto idx = scope == TrimScope::PerGroup ? trim_top_90_indices(values) : all_indices(values.size());
        for (std::size_t i : idx) kept[g].push_back(values[i]);
      }
    }
    std::vector<double> all;
    for (std::size_t g = 0; g < groups.size(); ++g) {
      report.groups[g].*slots[f] = summarize(kept[g]);
      all.insert(all.end(), kept[g].begin(), kept[g].end());
    }
    report.overall.*slots[f] = summarize(all);
  }
  std::erase_if(report.groups, [](const SummaryStats& s) { return s.add_mm.count == 0; });
  return report;
}

const MeshAsset& mesh_for(const MeshTable& meshes, const ObjectKey& key) {
  auto it = meshes.find(key);
  if (it == meshes.end() || !it->second)
    throw Error(ErrorKind::UnknownObject, "no mesh for sample '" + key.first + "', object '" + key.second + "'");
  return *it->second;
}

}  // namespace

StudyReport inter_personal_stats(std::span<const AnnotationRecord> records, const MeshTable& meshes,
                                 const PoseTable& ground_truth, const StudyOptions& options) {
  if (records.empty()) throw Error(ErrorKind::NoRecords, "no annotation records");
  // sample → (object, user) → trials
  std::map<std::string, std::map<std::pair<std::string, std::string>, std::vector<AnnotationRecord>>> by_sample;
  for (const AnnotationRecord& r : records) by_sample[r.sample][{r.object, r.user}].push_back(r);

  std::vector<GroupedErrors> groups;
  for (const auto& [sample, cells] : by_sample) {
    GroupedErrors group{sample, {}};
    for (const auto& [object_user, trials] : cells) {
      ObjectKey key{sample, object_user.first};
      auto gt = ground_truth.find(key);
      if (gt == ground_truth.end())
        throw Error(ErrorKind::MissingPose, "no ground truth for sample '" + sample + "', object '" + key.second + "'");
      const MeshAsset& mesh = mesh_for(meshes, key);
      const AnnotationRecord& best = best_of_trials(trials, mesh, gt->second, options.add);
      group.items.push_back(pose_errors(mesh, best.pose, gt->second, options.add));
    }
    groups.push_back(std::move(group));
  }
  return summarize_groups(groups, options.trim);
}

StudyReport intra_personal_stats(std::span<const AnnotationRecord> records, const MeshTable& meshes,
                                 const StudyOptions& options) {
  if (records.empty()) throw Error(ErrorKind::NoRecords, "no annotation records");
  // user → (sample, object) → trial slots
  std::map<std::string, std::map<ObjectKey, std::array<const AnnotationRecord*, kTrialsPerSample>>> by_user;
  for (const AnnotationRecord& r : records) {
    auto& slot = by_user[r.user][{r.sample, r.object}];
    if (slot[r.trial] != nullptr) throw Error(ErrorKind::DuplicateId, "duplicate trial for user '" + r.user + "'");
    slot[r.trial] = &r;
  }
  std::vector<GroupedErrors> groups;
  for (const auto& [user, cells] : by_user) {
    GroupedErrors group{user, {}};
    for (const auto& [key, trials] : cells) {
      for (const AnnotationRecord* t : trials) {
        if (t == nullptr)
          throw Error(ErrorKind::MissingTrials, "user '" + user + "' lacks a trial of sample '" + key.first + "'");
      }
      const MeshAsset& mesh = mesh_for(meshes, key);
      constexpr std::pair<int, int> pairs[3] = {{0, 1}, {0, 2}, {1, 2}};
      for (auto [a, b] : pairs) group.items.push_back(pose_errors(mesh, trials[a]->pose, trials[b]->pose, options.add));
    }
    groups.push_back(std::move(group));
  }
  return summarize_groups(groups, options.trim);
}

TimeTable time_table(std::span<const AnnotationRecord> records) {
  std::map<std::string, std::map<std::pair<std::string, int>, double>> per_user;
  for (const AnnotationRecord& r : records) per_user[r.user].emplace(std::make_pair(r.sample, r.trial), r.duration_s);
  TimeTable table;
  std::vector<double> means;
  for (const auto& [user, trials] : per_user) {
    if (trials.empty()) continue;
    std::vector<double> durations;
    for (const auto& [key, d] : trials) durations.push_back(d);
    UserTime ut{user, summarize(durations)};
    means.push_back(ut.seconds.mean);
    table.users.push_back(std::move(ut));
  }
  table.aggregate = summarize(means);
  return table;
}

// Questionnaires -----------------------------------------------------------

const std::array<Polarity, 10>& standard_sus_polarity() {
  static const std::array<Polarity, 10> polarity = [] {
    std::array<Polarity, 10> p{};
    for (int i = 0; i < 10; ++i) p[i] = i % 2 == 0 ? Polarity::Positive : Polarity::Negative;
    return p;
  }();
  return polarity;
}

std::array<int, 10> sus_adjust(const std::array<int, 10>& responses, const std::array<Polarity, 10>& polarity) {
  std::array<int, 10> out{};
  for (int i = 0; i < 10; ++i) {
    int s = responses[i];
    if (s < 1 || s > 5) throw Error(ErrorKind::OutOfRange, "SUS responses lie in [1, 5]");
    out[i] = polarity[i] == Polarity::Negative ? 6 - s : s;
  }
  return out;
}

std::array<MetricSummary, 10> sus_summary(std::span<const std::array<int, 10>> responses,
                                          const std::array<Polarity, 10>& polarity) {
  if (responses.empty()) throw Error(ErrorKind::NoRecords, "no SUS responses");
  std::array<std::vector<double>, 10> columns;
  for (const auto& r : responses) {
    auto adjusted = sus_adjust(r, polarity);
    for (int i = 0; i < 10; ++i) columns[i].push_back(adjusted[i]);
  }
  std::array<MetricSummary, 10> out;
  for (int i = 0; i < 10; ++i) out[i] = summarize(columns[i]);
  return out;
}

std::array<MetricSummary, 6> tlx_summary(std::span<const std::array<double, 6>> responses) {
  if (responses.empty()) throw Error(ErrorKind::NoRecords, "no NASA-TLX responses");
  std::array<std::vector<double>, 6> columns;
  for (const auto& r : responses) {
    for (int i = 0; i < 6; ++i) {
      if (!(r[i] >= 0.0 && r[i] <= 20.0)) throw Error(ErrorKind::OutOfRange, "NASA-TLX scores lie in [0, 20]");
      columns[i].push_back(r[i]);
    }
  }
  std::array<MetricSummary, 6> out;
  for (int i = 0; i < 6; ++i) out[i] = summarize(columns[i]);
  return out;
}

std::vector<QuestionnaireResponse> parse_questionnaire(std::string_view text, std::string_view field) {
  std::vector<QuestionnaireResponse> out;
  const std::string key(field);
  for (std::string_view line : lines_of(text)) {
    json j = json::parse(line.begin(), line.end(), nullptr, false);
    if (j.is_discarded() || !j.is_object()) parse_fail("questionnaire line is not a JSON object");
    QuestionnaireResponse q;
    q.user = require_string(j, "user");
    if (!j.contains(key) || !j[key].is_array()) parse_fail("missing array '" + key + "'");
    for (const json& v : j[key]) {
      if (!v.is_number()) parse_fail("questionnaire values must be numbers");
      q.values.push_back(v.get<double>());
    }
    out.push_back(std::move(q));
  }
  return out;
}

// Reports ------------------------------------------------------------------

namespace {

ordered_json summary_json(const MetricSummary& s) { return {{"mean", s.mean}, {"std", s.std}, {"count", s.count}}; }

ordered_json stats_json(const SummaryStats& s) {
  return {{"group", s.group},
          {"angular_deg", summary_json(s.angular_deg)},
          {"euclidean_mm", summary_json(s.euclidean_mm)},
          {"add_mm", summary_json(s.add_mm)}};
}

std::string tsv_row(const SummaryStats& s) {
  auto cell = [](const MetricSummary& m) { return format_decimal(m.mean) + "\t" + format_decimal(m.std); };
  return s.group + "\t" + cell(s.angular_deg) + "\t" + cell(s.euclidean_mm) + "\t" + cell(s.add_mm) + "\t" +
         std::to_string(s.add_mm.count) + "\n";
}

}  // namespace

std::string format_report_tsv(const StudyReport& report, std::string_view group_label) {
  std::string out = std::string(group_label) +
                    "\tangular_mean_deg\tangular_std_deg\teuclidean_mean_mm\teuclidean_std_mm\tadd_mean_mm\tadd_std_mm\tcount\n";
  for (const SummaryStats& s : report.groups) out += tsv_row(s);
  out += tsv_row(report.overall);
  return out;
}

std::string format_report_json(const StudyReport& report, std::string_view mode) {
  ordered_json j;
  j["mode"] = std::string(mode);
  ordered_json groups = ordered_json::array();
  for (const SummaryStats& s : report.groups) groups.push_back(stats_json(s));
  j["groups"] = std::move(groups);
  j["overall"] = stats_json(report.overall);
  return j.dump(2) + "\n";
}

std::string format_time_tsv(const TimeTable& table) {
  std::string out = "user\tmean_s\tstd_s\ttrials\n";
  for (const UserTime& u : table.users) {
    out += u.user + "\t" + format_decimal(u.seconds.mean) + "\t" + format_decimal(u.seconds.std) + "\t" +
           std::to_string(u.seconds.count) + "\n";
  }
  out += "all\t" + format_decimal(table.aggregate.mean) + "\t" + format_decimal(table.aggregate.std) + "\t" +
         std::to_string(table.aggregate.count) + "\n";
  return out;
}

std::string format_time_json(const TimeTable& table) {
  ordered_json j;
  j["mode"] = "time";
  ordered_json users = ordered_json::array();
  for (const UserTime& u : table.users) users.push_back({{"user", u.user}, {"seconds", summary_json(u.seconds)}});
  j["users"] = std::move(users);
  j["aggregate"] = summary_json(table.aggregate);
  return j.dump(2) + "\n";
}

}  // namespace poseforge
