// Writes a small dataset, annotation logs and questionnaire files for the
// command-line smoke test.
//
//   make_fixture OUT_DIR

#include <cstdio>
#include <fstream>

#include "poseforge/dataset.hpp"
#include "poseforge/study.hpp"
#include "support.hpp"

using namespace poseforge;
using namespace testing;

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: make_fixture OUT_DIR\n");
    return 2;
  }
  fs::path out = argv[1];
  fs::remove_all(out);
  fs::create_directories(out / "logs");
  auto samples = write_dataset(out / "data", 3, 2, 91);

  Rng rng(92);
  for (const char* user : {"u0", "u1"}) {
    std::ofstream log(out / "logs" / (std::string(user) + ".jsonl"));
    for (const std::string& id : samples) {
      DatasetSample sample = load_sample(out / "data", id);
      for (int trial = 0; trial < kTrialsPerSample; ++trial) {
        double duration = rng.uniform(30, 120);
        for (const SampleObject& obj : sample.objects) {
          RigidTransform gt = *obj.ground_truth;
          RigidTransform pose{rotation_from_axis_angle(rng.unit_vector(), rng.uniform(0, 0.1)) * gt.rotation,
                              gt.translation + Vec3{rng.normal(0, 2), rng.normal(0, 2), rng.normal(0, 4)}};
          log << format_log_line({user, id, trial, obj.name, pose, duration, "2024-05-01T10:00:00.000Z"}) << '\n';
        }
      }
    }
  }
  std::ofstream(out / "sus.jsonl") << "{\"user\":\"u0\",\"responses\":[5,1,4,2,5,1,4,2,5,1]}\n"
                                   << "{\"user\":\"u1\",\"responses\":[4,2,4,2,4,2,4,2,4,2]}\n";
  std::ofstream(out / "tlx.jsonl") << "{\"user\":\"u0\",\"scores\":[10,4,8,6,12,3]}\n"
                                   << "{\"user\":\"u1\",\"scores\":[14,6,10,4,8,5]}\n";
  return 0;
}
