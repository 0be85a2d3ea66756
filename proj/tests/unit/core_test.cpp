#include <gtest/gtest.h>

#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>

#include "scbm/core.hpp"
#include "scbm/parallel.hpp"
#include "scbm/random.hpp"
#include "test_util.hpp"

namespace scbm {
namespace {

using test::kind_of;

ClipKey key(const std::string& s, const std::string& c, const std::string& sc = "interstate",
            BinaryLabel l = BinaryLabel::NormalAging) {
  return {SubjectId(s), DriveId(s + "-D1"), ClipId(c), ScenarioId(sc), l};
}

TEST(Labels, BinaryMapping) {
  EXPECT_EQ(binary_label(CognitiveLabel::MCI), BinaryLabel::ADAging);
  EXPECT_EQ(binary_label(CognitiveLabel::AD), BinaryLabel::ADAging);
  EXPECT_EQ(binary_label(CognitiveLabel::NormalAging), BinaryLabel::NormalAging);
}

TEST(Labels, TextRoundTrip) {
  for (auto l : {CognitiveLabel::NormalAging, CognitiveLabel::MCI, CognitiveLabel::AD}) {
    EXPECT_EQ(parse_cognitive_label(to_string(l)), l);
  }
  for (auto l : {BinaryLabel::NormalAging, BinaryLabel::ADAging}) EXPECT_EQ(parse_binary_label(to_string(l)), l);
  for (auto s : {ClipStatus::Pure, ClipStatus::Blackframe, ClipStatus::Missing}) {
    EXPECT_EQ(parse_clip_status(to_string(s)), s);
  }
  EXPECT_EQ(kind_of([] { parse_cognitive_label("dementia"); }), ErrorKind::InvalidArgument);
}

TEST(Ids, EmptyRejected) {
  EXPECT_EQ(kind_of([] { SubjectId(""); }), ErrorKind::InvariantError);
  EXPECT_LT(SubjectId("S001"), SubjectId("S002"));
}

TEST(Segments, LengthBoundary) {
  RouteSegment s{SegmentId("x"), ScenarioId("interstate"), 500.0, 65, "interstate"};
  EXPECT_NO_THROW(s.validate());
  s.length_m = 501;
  EXPECT_EQ(kind_of([&] { s.validate(); }), ErrorKind::InvariantError);
  s.length_m = 0;
  EXPECT_EQ(kind_of([&] { s.validate(); }), ErrorKind::InvariantError);
}

TEST(EmbeddingMatrixTest, RejectsBadRows) {
  EmbeddingMatrix m(3);
  const float ok[] = {1, 2, 3};
  m.add_row(key("S1", "C1"), ok);
  EXPECT_EQ(kind_of([&] { m.add_row(key("S1", "C1"), ok); }), ErrorKind::DuplicateId);
  const float short_row[] = {1, 2};
  EXPECT_EQ(kind_of([&] { m.add_row(key("S1", "C2"), short_row); }), ErrorKind::DimMismatch);
  const float nan_row[] = {1, std::numeric_limits<float>::quiet_NaN(), 3};
  EXPECT_EQ(kind_of([&] { m.add_row(key("S1", "C3"), nan_row); }), ErrorKind::NonFinite);
  EXPECT_EQ(m.rows(), 1u);
}

TEST(EmbeddingMatrixTest, SubsetKeepsOrder) {
  EmbeddingMatrix m(1);
  const char* sc[] = {"b", "a", "b", "a"};
  for (int i = 0; i < 4; ++i) {
    const float v[] = {static_cast<float>(i)};
    m.add_row(key("S1", "C" + std::to_string(i), sc[i]), v);
  }
  EXPECT_EQ(m.scenarios(), (std::vector<ScenarioId>{ScenarioId("b"), ScenarioId("a")}));
  const auto a = m.scenario_subset(ScenarioId("a"));
  ASSERT_EQ(a.rows(), 2u);
  EXPECT_EQ(a.row(0)[0], 1.0f);
  EXPECT_EQ(a.row(1)[0], 3.0f);
  const std::size_t idx[] = {3, 0};
  const auto s = m.select(idx);
  EXPECT_EQ(s.key(0).clip.str(), "C3");
  EXPECT_EQ(s.key(1).clip.str(), "C0");
}

TEST(Random, StreamsAreReproducible) {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
  EXPECT_NE(KeyHasher(0).add("ab").add("c").digest(), KeyHasher(0).add("a").add("bc").digest());
}

TEST(Random, IndexIsUniformAndBounded) {
  Rng r(7);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) {
    const auto k = r.index(7);
    ASSERT_LT(k, 7u);
    ++counts[k];
  }
  for (int c : counts) EXPECT_NEAR(c, 10000, 500);
}

TEST(Random, NormalMoments) {
  Rng r(11);
  double s = 0, s2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = r.normal();
    s += x;
    s2 += x * x;
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.02);
}

TEST(Random, ShuffleIsPermutation) {
  Rng r(3);
  std::vector<int> v(50);
  std::iota(v.begin(), v.end(), 0);
  r.shuffle(v.begin(), v.end());
  auto sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 50; ++i) EXPECT_EQ(sorted[i], i);
}

TEST(Parallel, VisitsEveryIndexOnce) {
  std::vector<std::atomic<int>> hits(1000);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i]++; });
  for (auto& h : hits) EXPECT_EQ(h.load(), 1);
}

TEST(Parallel, RethrowsLowestFailure) {
  try {
    parallel_for(100, [](std::size_t i) {
      if (i == 17 || i == 60) throw Error(ErrorKind::InvalidArgument, std::to_string(i));
    });
    FAIL();
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "17");
  }
}

}  // namespace
}  // namespace scbm
