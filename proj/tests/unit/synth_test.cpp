#include <gtest/gtest.h>

#include <map>

#include "scbm/ingestion.hpp"
#include "scbm/synth.hpp"
#include "test_util.hpp"

namespace scbm {
namespace {

using test::kind_of;
using test::TempDir;

CohortSpec small_spec(std::uint64_t seed) {
  auto spec = CohortSpec::defaults();
  spec.trip_scale = 0.05;
  spec.seed = seed;
  return spec;
}

struct Loaded {
  SegmentCatalog segments;
  SubjectRegistry subjects;
  std::vector<TripRecord> trips;
  std::vector<ClipRecord> clips;
};

Loaded load(const std::filesystem::path& dir) {
  Loaded l;
  l.segments = load_segments(dir / "segments.csv");
  l.subjects = load_subjects(dir / "subjects.csv");
  l.trips = load_trips(dir / "trips.csv", l.segments, l.subjects);
  l.clips = load_clips(dir / "clips.csv", l.segments, l.subjects);
  return l;
}

TEST(Synth, DefaultCohortComposition) {
  TempDir dir;
  const auto files = generate_cohort(small_spec(1));
  write_cohort(files, dir.path());
  const auto l = load(dir.path());
  ASSERT_EQ(l.subjects.size(), 69u);
  std::map<BinaryLabel, int> binary;
  std::map<CognitiveLabel, int> three;
  for (const auto& s : l.subjects.subjects()) {
    ++binary[*s.binary()];
    ++three[*s.label];
    EXPECT_TRUE(s.battery.has_value());
    EXPECT_GE(*s.moca, 0);
    EXPECT_LE(*s.moca, 30);
  }
  EXPECT_EQ(binary[BinaryLabel::NormalAging], 34);
  EXPECT_EQ(binary[BinaryLabel::ADAging], 35);
  EXPECT_EQ(three[CognitiveLabel::MCI], 26);
  EXPECT_EQ(three[CognitiveLabel::AD], 9);
  EXPECT_EQ(l.segments.count(ScenarioId("fwy-interchange")), 632u);
  EXPECT_EQ(l.segments.count(ScenarioId("interstate")), 332u);
  for (const auto& seg : l.segments.segments()) EXPECT_LE(seg.length_m, 500.0);
}

TEST(Synth, ExposureMatchesLedger) {
  TempDir dir;
  const auto files = generate_cohort(small_spec(2));
  write_cohort(files, dir.path());
  const auto l = load(dir.path());
  const auto stats = exposure_stats(l.trips, l.subjects, l.segments);
  ASSERT_EQ(stats.size(), 2u);
  for (std::size_t s = 0; s < 2; ++s) {
    const auto& led = files.ledger["scenarios"][s];
    EXPECT_EQ(stats[s].scenario.str(), led["scenario"].get<std::string>());
    EXPECT_EQ(stats[s].normal_unique, led["normal_unique"].get<std::uint64_t>());
    EXPECT_EQ(stats[s].mci_unique, led["mci_unique"].get<std::uint64_t>());
    EXPECT_EQ(stats[s].ad_unique, led["ad_unique"].get<std::uint64_t>());
    EXPECT_EQ(stats[s].total_trips, led["total_trips"].get<std::uint64_t>());

    std::map<ClipStatus, std::uint64_t> counts;
    for (const auto& c : l.clips)
      if (c.scenario == stats[s].scenario) ++counts[c.status];
    EXPECT_EQ(counts[ClipStatus::Pure], led["clips"]["pure"].get<std::uint64_t>());
    EXPECT_EQ(counts[ClipStatus::Missing], led["clips"]["missing"].get<std::uint64_t>());
  }
  EXPECT_EQ(stats[0].normal_unique, 407u);  // round(8136 * 0.05)

  const auto coverage = coverage_fractions(l.subjects, l.trips, l.segments);
  for (const auto& row : files.ledger["subjects"]) {
    EXPECT_DOUBLE_EQ(coverage.at(SubjectId(row["subject_id"].get<std::string>())), row["coverage"].get<double>());
  }
}

TEST(Synth, CogstatGroupsOrdered) {
  const auto files = generate_cohort(small_spec(3));
  const auto& b = files.ledger["battery_model"];
  EXPECT_GT(b["normal"]["cogstat_mean"].get<double>(), b["mci"]["cogstat_mean"].get<double>());
  EXPECT_GT(b["mci"]["cogstat_mean"].get<double>(), b["ad"]["cogstat_mean"].get<double>());
}

TEST(Synth, SameSeedSameBytes) {
  const auto a = generate_cohort(small_spec(4));
  const auto b = generate_cohort(small_spec(4));
  EXPECT_EQ(a.subjects_csv, b.subjects_csv);
  EXPECT_EQ(a.trips_csv, b.trips_csv);
  EXPECT_EQ(a.clips_csv, b.clips_csv);
  EXPECT_EQ(a.ledger.dump(), b.ledger.dump());
  EXPECT_NE(a.trips_csv, generate_cohort(small_spec(5)).trips_csv);
}

TEST(Synth, ZeroTrips) {
  TempDir dir;
  auto spec = small_spec(6);
  spec.trip_scale = 0;
  write_cohort(generate_cohort(spec), dir.path());
  const auto l = load(dir.path());
  EXPECT_TRUE(l.trips.empty());
  EXPECT_TRUE(l.clips.empty());
}

TEST(Synth, InvalidSpecs) {
  auto spec = small_spec(7);
  spec.n_normal = 0;
  EXPECT_EQ(kind_of([&] { generate_cohort(spec); }), ErrorKind::SpecInvalid);
  spec = small_spec(7);
  spec.n_mci = 0;
  spec.n_ad = 0;
  EXPECT_EQ(kind_of([&] { generate_cohort(spec); }), ErrorKind::SpecInvalid);
  spec = small_spec(7);
  spec.n_ad = 1;
  spec.trip_scale = 1.0;
  EXPECT_EQ(kind_of([&] { generate_cohort(spec); }), ErrorKind::SpecInvalid);
}

TEST(Synth, LedgerDrivesEmbedder) {
  const auto files = generate_cohort(small_spec(8));
  const auto spec = embedder_spec_from_ledger(files.ledger, 32, 1);
  EXPECT_NEAR(spec.separation(ScenarioId("fwy-interchange")), 4.0, 1e-12);
  EXPECT_NEAR(spec.separation(ScenarioId("interstate")), 1.0, 1e-12);
}

}  // namespace
}  // namespace scbm
