#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>

#include "doctest.h"
#include "longdoc/window.hpp"
#include "oracles.hpp"

using namespace longdoc;

namespace {

TokenSequence sequence_of(std::size_t n) {
  TokenSequence seq;
  seq.doc_id = "doc";
  seq.ids.resize(n);
  for (std::size_t i = 0; i < n; ++i)
    seq.ids[i] = static_cast<int>(4 + i % 100);
  return seq;
}

}  // namespace

TEST_CASE("the canonical case: 1000 tokens, window 512, 20% overlap") {
  WindowingConfig cfg{512, 0.2};
  CHECK(cfg.stride() == 409);
  auto set = make_windows(sequence_of(1000), cfg);
  REQUIRE(set.count() == 3);
  CHECK(set.spans[0].start == 0);
  CHECK(set.spans[0].end == 512);
  CHECK(set.spans[1].start == 409);
  CHECK(set.spans[1].end == 921);
  CHECK(set.spans[2].start == 818);
  CHECK(set.spans[2].end == 1000);
  CHECK(window_count(1000, cfg) == 3);
}

TEST_CASE("short documents yield one padded window") {
  WindowingConfig cfg{512, 0.2};
  auto set = make_windows(sequence_of(300), cfg);
  REQUIRE(set.count() == 1);
  CHECK(set.spans[0].start == 0);
  CHECK(set.spans[0].end == 300);
  REQUIRE(set.padded_ids[0].size() == 512);
  REQUIRE(set.masks[0].size() == 512);
  for (std::size_t t = 0; t < 512; ++t) {
    CHECK(set.masks[0][t] == (t < 300 ? 1 : 0));
    if (t >= 300) CHECK(set.padded_ids[0][t] == Vocab::kPad);
  }
}

TEST_CASE("zero overlap gives disjoint windows") {
  WindowingConfig cfg{512, 0.0};
  auto set = make_windows(sequence_of(1024), cfg);
  REQUIRE(set.count() == 2);
  CHECK(set.spans[0].end == set.spans[1].start);
  CHECK(set.spans[1].end == 1024);
}

TEST_CASE("boundary: length equal to the window is a single window") {
  for (double overlap : {0.0, 0.2, 0.5, 0.9})
    CHECK(window_count(512, {512, overlap}) == 1);
}

TEST_CASE("whole-document mode wraps everything unpadded") {
  WindowingConfig cfg{0, 0.2};
  auto set = make_windows(sequence_of(700), cfg);
  REQUIRE(set.count() == 1);
  CHECK(set.spans[0].end == 700);
  CHECK(set.padded_ids[0].size() == 700);
  CHECK(window_count(700, cfg) == 1);
}

TEST_CASE("window_count matches span enumeration on random inputs") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::size_t> len_dist(1, 5000);
  std::uniform_int_distribution<std::size_t> window_dist(2, 800);
  std::uniform_real_distribution<double> overlap_dist(0.0, 0.95);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t length = len_dist(rng);
    WindowingConfig cfg{window_dist(rng), overlap_dist(rng)};
    auto expected = oracle::enumerate_spans(length, cfg.window_len, cfg.overlap);
    CAPTURE(length);
    CAPTURE(cfg.window_len);
    CAPTURE(cfg.overlap);
    REQUIRE(window_count(length, cfg) == expected.size());

    auto set = make_windows(sequence_of(length), cfg);
    REQUIRE(set.count() == expected.size());
    for (std::size_t w = 0; w < set.count(); ++w) {
      CHECK(set.spans[w].start == expected[w].first);
      CHECK(set.spans[w].end == expected[w].second);
    }
  }
}

TEST_CASE("coverage, stride, and non-empty window invariants") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::size_t> len_dist(1, 3000);
  std::uniform_int_distribution<std::size_t> window_dist(2, 600);
  std::uniform_real_distribution<double> overlap_dist(0.0, 0.9);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t length = len_dist(rng);
    WindowingConfig cfg{window_dist(rng), overlap_dist(rng)};
    auto set = make_windows(sequence_of(length), cfg);

    std::vector<std::uint8_t> covered(length, 0);
    for (std::size_t w = 0; w < set.count(); ++w) {
      const auto& span = set.spans[w];
      REQUIRE(span.start < span.end);  // at least one valid token
      for (std::size_t t = span.start; t < span.end; ++t) covered[t] = 1;
      if (w + 1 < set.count())
        CHECK(set.spans[w + 1].start - span.start == cfg.stride());
      // Mask marks exactly the real tokens.
      std::size_t n_valid = 0;
      for (auto m : set.masks[w]) n_valid += m;
      CHECK(n_valid == span.end - span.start);
    }
    for (std::size_t t = 0; t < length; ++t) REQUIRE(covered[t] == 1);
  }
}

TEST_CASE("growing the window never adds windows") {
  WindowingConfig narrow{128, 0.2};
  for (std::size_t length : {1u, 100u, 129u, 1000u, 4096u}) {
    std::size_t prev = window_count(length, narrow);
    for (std::size_t window_len = 160; window_len <= 1024; window_len += 64) {
      std::size_t next = window_count(length, {window_len, 0.2});
      CHECK(next <= prev);
      prev = next;
    }
  }
}

TEST_CASE("configuration validation") {
  CHECK_THROWS(make_windows(sequence_of(10), {1, 0.2}));
  CHECK_THROWS(make_windows(sequence_of(10), {64, 1.0}));
  CHECK_THROWS(make_windows(sequence_of(10), {64, -0.1}));
  TokenSequence empty;
  CHECK_THROWS(make_windows(empty, {64, 0.2}));
}
