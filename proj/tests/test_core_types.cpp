#include "doctest.h"
#include "saath/types.hpp"

using namespace saath;

TEST_CASE("default thresholds grow by E from S and end open") {
  const auto r = derive_thresholds(QueueConfig{10, 10 * kBytesPerMB, 10.0});
  REQUIRE(r.size() == 10);
  CHECK(r[0].lo == 0);
  CHECK(r[0].hi == 10 * kBytesPerMB);
  CHECK(r[1].hi == 100 * kBytesPerMB);
  CHECK(r[2].hi == 1000 * kBytesPerMB);
  CHECK(r[8].hi == 1'000'000'000'000'000LL);
  CHECK(r[9].hi == kInfiniteBytes);
  for (std::size_t q = 1; q < r.size(); ++q) CHECK(r[q].lo == r[q - 1].hi);
}

TEST_CASE("a single queue covers everything") {
  const auto r = derive_thresholds(QueueConfig{1, 10 * kBytesPerMB, 10.0});
  REQUIRE(r.size() == 1);
  CHECK(r[0].lo == 0);
  CHECK(r[0].hi == kInfiniteBytes);
}

TEST_CASE("K=3 S=1 E=2 gives [0,1) [1,2) [2,inf)") {
  const auto r = derive_thresholds(QueueConfig{3, 1, 2.0});
  REQUIRE(r.size() == 3);
  CHECK(r[0] == QueueRange{0, 1});
  CHECK(r[1] == QueueRange{1, 2});
  CHECK(r[2] == QueueRange{2, kInfiniteBytes});
}

TEST_CASE("invalid queue configurations are rejected") {
  CHECK_THROWS_AS(derive_thresholds(QueueConfig{0, 10, 10.0}), ConfigError);
  CHECK_THROWS_AS(derive_thresholds(QueueConfig{3, 0, 10.0}), ConfigError);
  CHECK_THROWS_AS(derive_thresholds(QueueConfig{3, 10, 1.0}), ConfigError);
  CHECK_THROWS_AS(derive_thresholds(QueueConfig{3, 10, 0.5}), ConfigError);
  // Rounding collapses 1 * 1.2^1 back onto 1.
  CHECK_THROWS_AS(derive_thresholds(QueueConfig{3, 1, 1.2}), ConfigError);
  CHECK_THROWS_AS(derive_thresholds(QueueConfig{40, 10 * kBytesPerMB, 10.0}), ConfigError);
}

TEST_CASE("one 8 ms interval at 1 Gbps carries exactly 1 MB") {
  CHECK(per_interval_budget(kGigabitBytesPerSecond, 8 * kMicrosPerMilli) == kBytesPerMB);
  CHECK(per_interval_budget(kGigabitBytesPerSecond, kMicrosPerMilli) == 125'000);
  CHECK(per_interval_budget(kGigabitBytesPerSecond / 10, 8 * kMicrosPerMilli) == 100'000);
}

TEST_CASE("sim config validation") {
  SimConfig c;
  CHECK_NOTHROW(c.validate());
  c.delta = 0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = SimConfig{};
  c.deadline_factor = 0.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = SimConfig{};
  c.arrival_scale = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("coflow aggregates") {
  CoFlow c;
  c.coflow_id = 1;
  for (int i = 0; i < 3; ++i) {
    FlowState f;
    f.spec = FlowSpec{i, 1, 0, 1, 10 + i};
    f.bytes_sent = i;
    f.bytes_attained = 2 * i;
    c.flows.push_back(f);
  }
  CHECK(c.width() == 3);
  CHECK(c.total_size() == 33);
  CHECK(c.total_sent() == 3);
  CHECK(c.remaining_bytes() == 30);
  CHECK(c.max_flow_attained() == 4);
  CHECK(c.unfinished_count() == 3);
  CHECK_FALSE(c.cct().has_value());
}
