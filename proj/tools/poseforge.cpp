// Command-line front end: offline rendering, dataset import, pose export,
// study evaluation and the annotation server.

#include <CLI11.hpp>

#include <cmath>
#include <csignal>
#include <filesystem>
#include <iostream>
#include <set>

#include "json.hpp"
#include "poseforge/dataset.hpp"
#include "poseforge/renderer.hpp"
#include "poseforge/server.hpp"
#include "poseforge/study.hpp"

namespace fs = std::filesystem;
using namespace poseforge;

namespace {

void write_png(const fs::path& path, const std::vector<std::uint8_t>& bytes) { write_file_atomic(path, bytes); }

int cmd_render(const fs::path& workspace, const std::string& camera_name, const fs::path& out, const fs::path& mask,
               int threads) {
  Scene scene = load_workspace(workspace);
  OverlayFrame frame = rasterize(scene, parse_camera(camera_name), {threads});
  write_png(out, encode_frame_png(frame));
  if (!mask.empty()) write_png(mask, encode_mask_png(frame.mask));
  return 0;
}

int cmd_import(const fs::path& dataset, const std::string& sample_id, const fs::path& out, bool with_gt) {
  DatasetSample sample = load_sample(fs::absolute(dataset), sample_id);
  Scene scene = scene_from_sample(sample);
  if (with_gt) {
    for (const auto& [id, pose] : ground_truth_poses(sample)) scene.set_pose(id, pose);
  }
  save_workspace(scene, out);
  return 0;
}

int cmd_export(const fs::path& workspace, const std::string& id) {
  Scene scene = load_workspace(workspace);
  std::cout << export_pose(scene.pose(id));
  return 0;
}

int cmd_plan(const fs::path& dataset, std::uint64_t seed) {
  TrialPlan plan = make_trial_plan(list_samples(dataset), seed);
  std::cout << "index\tsample\trepetition\n";
  for (std::size_t i = 0; i < plan.entries.size(); ++i)
    std::cout << i << '\t' << plan.entries[i].sample << '\t' << plan.entries[i].repetition << '\n';
  return 0;
}

std::vector<AnnotationRecord> load_logs(const fs::path& logs) {
  if (!fs::is_directory(logs)) return read_log(logs);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(logs)) {
    if (entry.is_regular_file() && entry.path().extension() == ".jsonl") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::string text;
  for (const fs::path& f : files) {
    text += read_file_text(f);
    if (!text.empty() && text.back() != '\n') text += '\n';
  }
  return parse_log(text);
}

void load_references(const fs::path& dataset, const std::vector<AnnotationRecord>& records, MeshTable& meshes,
                     PoseTable& gts) {
  std::set<std::string> samples;
  for (const AnnotationRecord& r : records) samples.insert(r.sample);
  for (const std::string& id : samples) {
    DatasetSample sample = load_sample(dataset, id);
    for (const SampleObject& obj : sample.objects) {
      auto mesh = std::make_shared<MeshAsset>(load_mesh(obj.mesh_path, sample.unit_scale));
      mesh->id = obj.name;
      meshes.emplace(ObjectKey{id, obj.name}, std::move(mesh));
      if (obj.ground_truth) gts.emplace(ObjectKey{id, obj.name}, *obj.ground_truth);
    }
  }
}

TrimScope parse_trim_scope(const std::string& s) {
  if (s == "per_group") return TrimScope::PerGroup;
  if (s == "per_dataset") return TrimScope::PerDataset;
  return TrimScope::None;
}

nlohmann::ordered_json summary_json(const MetricSummary& s) {
  return {{"mean", s.mean}, {"std", s.std}, {"count", s.count}};
}

int cmd_evaluate(const std::string& mode, const fs::path& logs, const fs::path& dataset, const fs::path& responses,
                 const fs::path& summary, const std::string& trim_scope, std::size_t max_points) {
  std::string tsv;
  std::string json;
  StudyOptions options;
  options.trim = parse_trim_scope(trim_scope);
  options.add.max_points = max_points;

  if (mode == "inter" || mode == "intra" || mode == "time") {
    if (logs.empty()) throw Error(ErrorKind::InvalidCommand, "--logs is required for mode '" + mode + "'");
    std::vector<AnnotationRecord> records = load_logs(logs);
    if (mode == "time") {
      TimeTable table = time_table(records);
      tsv = format_time_tsv(table);
      json = format_time_json(table);
    } else {
      if (dataset.empty()) throw Error(ErrorKind::InvalidCommand, "--dataset is required for mode '" + mode + "'");
      MeshTable meshes;
      PoseTable gts;
      load_references(dataset, records, meshes, gts);
      StudyReport report = mode == "inter" ? inter_personal_stats(records, meshes, gts, options)
                                           : intra_personal_stats(records, meshes, options);
      tsv = format_report_tsv(report, mode == "inter" ? "sample" : "user");
      json = format_report_json(report, mode);
    }
  } else {
    if (responses.empty()) throw Error(ErrorKind::InvalidCommand, "--responses is required for mode '" + mode + "'");
    const bool sus = mode == "sus";
    auto rows = parse_questionnaire(read_file_text(responses), sus ? "responses" : "scores");
    nlohmann::ordered_json doc;
    doc["mode"] = mode;
    nlohmann::ordered_json items = nlohmann::ordered_json::array();
    if (sus) {
      std::vector<std::array<int, 10>> answers;
      for (const auto& row : rows) {
        if (row.values.size() != 10) throw Error(ErrorKind::ParseError, "SUS rows need 10 responses");
        std::array<int, 10> a{};
        for (int i = 0; i < 10; ++i) {
          if (row.values[i] != std::floor(row.values[i])) throw Error(ErrorKind::OutOfRange, "SUS responses are integers");
          a[i] = static_cast<int>(std::clamp(row.values[i], -1.0, 99.0));
        }
        answers.push_back(a);
      }
      auto stats = sus_summary(answers);
      tsv = "question\tpolarity\tmean\tstd\tcount\n";
      for (int i = 0; i < 10; ++i) {
        const char* polarity = standard_sus_polarity()[i] == Polarity::Positive ? "positive" : "negative";
        tsv += "Q" + std::to_string(i + 1) + "\t" + polarity + "\t" + format_decimal(stats[i].mean) + "\t" +
               format_decimal(stats[i].std) + "\t" + std::to_string(stats[i].count) + "\n";
        nlohmann::ordered_json item = summary_json(stats[i]);
        item["question"] = i + 1;
        item["polarity"] = polarity;
        items.push_back(std::move(item));
      }
    } else {
      std::vector<std::array<double, 6>> scores;
      for (const auto& row : rows) {
        if (row.values.size() != 6) throw Error(ErrorKind::ParseError, "NASA-TLX rows need 6 scores");
        std::array<double, 6> s{};
        std::copy(row.values.begin(), row.values.end(), s.begin());
        scores.push_back(s);
      }
      auto stats = tlx_summary(scores);
      tsv = "dimension\tmean\tstd\tcount\n";
      for (int i = 0; i < 6; ++i) {
        tsv += std::string(kTlxDimensions[i]) + "\t" + format_decimal(stats[i].mean) + "\t" +
               format_decimal(stats[i].std) + "\t" + std::to_string(stats[i].count) + "\n";
        nlohmann::ordered_json item = summary_json(stats[i]);
        item["dimension"] = std::string(kTlxDimensions[i]);
        items.push_back(std::move(item));
      }
    }
    doc["items"] = std::move(items);
    json = doc.dump(2) + "\n";
  }
  std::cout << tsv;
  if (!summary.empty()) write_file_atomic(summary, json);
  return 0;
}

AnnotationServer* g_server = nullptr;

int cmd_serve(const fs::path& dataset, int port, const fs::path& log_dir, const fs::path& workspace_dir, int threads) {
  if (list_samples(dataset).empty()) throw Error(ErrorKind::LayoutError, "dataset '" + dataset.string() + "' has no samples");
  ServerConfig config;
  config.dataset_root = fs::absolute(dataset);
  config.log_dir = log_dir;
  config.workspace_dir = workspace_dir;
  config.render.threads = threads;
  AnnotationServer server(config);
  int bound = server.bind(port);
  g_server = &server;
  std::signal(SIGINT, [](int) {
    if (g_server) g_server->stop();
  });
  std::signal(SIGTERM, [](int) {
    if (g_server) g_server->stop();
  });
  std::cerr << "listening on http://127.0.0.1:" << bound << '\n';
  server.run();
  g_server = nullptr;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"poseforge: 6D pose annotation toolkit"};
  app.require_subcommand(1);

  fs::path workspace, out, mask, dataset, logs, responses, summary, log_dir = "logs", workspace_dir = "workspaces";
  std::string camera = "original", sample, id, mode, trim_scope = "per_group";
  int threads = 0;
  int port = port_from_environment();
  bool with_gt = false;
  std::uint64_t seed = 0;
  std::size_t max_points = 0;

  auto* render = app.add_subcommand("render", "Render a workspace overlay to PNG");
  render->add_option("--workspace", workspace, "Workspace JSON")->required();
  render->add_option("--camera", camera, "original or scene")->check(CLI::IsMember({"original", "scene"}));
  render->add_option("--out", out, "Output PNG")->required();
  render->add_option("--mask", mask, "Also write the object-index mask (16-bit PNG, 0 = background)");
  render->add_option("--threads", threads, "Worker threads (0 = all)")->check(CLI::NonNegativeNumber);

  auto* import = app.add_subcommand("import-sample", "Build a workspace from a dataset sample");
  import->add_option("--dataset", dataset, "Dataset root")->required();
  import->add_option("--sample", sample, "Sample id")->required();
  import->add_option("--out", out, "Output workspace JSON")->required();
  import->add_flag("--with-gt", with_gt, "Place objects at their ground-truth poses");

  auto* exportp = app.add_subcommand("export-pose", "Print an object's pose as a 4x4 matrix");
  exportp->add_option("--workspace", workspace, "Workspace JSON")->required();
  exportp->add_option("--id", id, "Object id")->required();

  auto* plan = app.add_subcommand("plan", "Print the trial plan for a seed");
  plan->add_option("--dataset", dataset, "Dataset root")->required();
  plan->add_option("--seed", seed, "Plan seed");

  auto* evaluate = app.add_subcommand("evaluate", "Aggregate study logs and questionnaires");
  evaluate->add_option("--mode", mode, "inter, intra, time, sus or tlx")
      ->required()
      ->check(CLI::IsMember({"inter", "intra", "time", "sus", "tlx"}));
  evaluate->add_option("--logs", logs, "Annotation log (.jsonl) or a directory of them");
  evaluate->add_option("--dataset", dataset, "Dataset root (meshes and ground truth)");
  evaluate->add_option("--responses", responses, "Questionnaire responses (.jsonl)");
  evaluate->add_option("--summary", summary, "Write a JSON summary here");
  evaluate->add_option("--trim-scope", trim_scope, "per_group, per_dataset or none")
      ->check(CLI::IsMember({"per_group", "per_dataset", "none"}));
  evaluate->add_option("--max-points", max_points, "Subsample ADD to at most this many vertices (0 = all)");

  auto* serve = app.add_subcommand("serve", "Run the annotation server on localhost");
  serve->add_option("--dataset", dataset, "Dataset root")->required();
  serve->add_option("--port", port, "Port (default POSEFORGE_PORT or 7646)")->check(CLI::Range(0, 65535));
  serve->add_option("--log-dir", log_dir, "Directory for annotation logs");
  serve->add_option("--workspace-dir", workspace_dir, "Directory for saved workspaces");
  serve->add_option("--threads", threads, "Render threads (0 = all)")->check(CLI::NonNegativeNumber);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*render) return cmd_render(workspace, camera, out, mask, threads);
    if (*import) return cmd_import(dataset, sample, out, with_gt);
    if (*exportp) return cmd_export(workspace, id);
    if (*plan) return cmd_plan(dataset, seed);
    if (*evaluate) return cmd_evaluate(mode, logs, dataset, responses, summary, trim_scope, max_points);
    if (*serve) return cmd_serve(dataset, port, log_dir, workspace_dir, threads);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
