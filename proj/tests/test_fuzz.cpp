#include <doctest.h>

#include "fuzz_harness.hpp"

using namespace testing;

TEST_CASE("seed inputs parse cleanly") {
  TempDir scratch;
  for (const FuzzTarget& t : fuzz_targets(scratch.path())) {
    INFO(t.name);
    CHECK_NOTHROW(t.parse(t.seed_input));
  }
}

TEST_CASE("mutated inputs only raise library errors") {
  FuzzResult r = run_fuzz(10000, 81);
  for (const std::string& f : r.failures) INFO(f);
  CHECK(r.cases == 10000);
  CHECK(r.failures.empty());
  for (const std::string& f : r.failures) MESSAGE(f);
  CHECK(r.rejected > 1000);
}
