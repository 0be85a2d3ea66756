#include <gtest/gtest.h>

#include "scbm/csv.hpp"
#include "scbm/ingestion.hpp"
#include "test_util.hpp"

namespace scbm {
namespace {

using test::kind_of;
using test::TempDir;
using test::write_text;

const std::string kSegHeader = "segment_id,scenario,length_m,speed_limit_mph,functional_class\n";
const std::string kSubjHeader = "subject_id,label,cogstat,moca,C,L,R,B,R_cs,R_rs,T\n";
const std::string kTripHeader = "subject_id,drive_id,segment_id,timestamp\n";
const std::string kClipHeader = "subject_id,drive_id,clip_id,segment_id,status,duration_min,timestamp\n";

struct Fixture {
  TempDir dir;
  SegmentCatalog segments;
  SubjectRegistry subjects;

  Fixture() {
    write_text(dir / "segments.csv", kSegHeader +
                                         "F1,fwy-interchange,190,35,ramp\n"
                                         "F2,fwy-interchange,210,40,ramp\n"
                                         "I1,interstate,320,65,interstate\n"
                                         "I2,interstate,330,60,interstate\n");
    write_text(dir / "subjects.csv", kSubjHeader +
                                         "S1,normal,,27,,,,,,,\n"
                                         "S2,mci,,22,,,,,,,\n"
                                         "S3,ad,,16,,,,,,,\n"
                                         "S4,,,,,,,,,,\n");
    segments = load_segments(dir / "segments.csv");
    subjects = load_subjects(dir / "subjects.csv");
  }
};

ClipRecord clip(const std::string& sc, ClipStatus st, double minutes) {
  ClipRecord c;
  c.subject = SubjectId("S1");
  c.drive = DriveId("D1");
  static int n = 0;
  c.clip = ClipId("C" + std::to_string(++n));
  c.segment = SegmentId(sc == "interstate" ? "I1" : "F1");
  c.scenario = ScenarioId(sc);
  c.status = st;
  c.duration_min = minutes;
  return c;
}

TEST(Csv, SplitsQuotedFields) {
  bool ok = false;
  const auto f = split_csv_line(R"(a,"b,c","d""e",)", ok);
  ASSERT_TRUE(ok);
  EXPECT_EQ(f, (std::vector<std::string>{"a", "b,c", "d\"e", ""}));
  split_csv_line(R"(a,"b)", ok);
  EXPECT_FALSE(ok);
  EXPECT_EQ(csv_escape("x,y"), "\"x,y\"");
}

TEST(Csv, SchemaMarkerAndHeader) {
  TempDir dir;
  write_text(dir / "a.csv", "# schema_version=1\nx,y\n1,2\n");
  const auto doc = read_csv(dir / "a.csv", {"x", "y"});
  ASSERT_EQ(doc.rows.size(), 1u);
  EXPECT_EQ(doc.rows[0].line, 3u);
  write_text(dir / "b.csv", "x,z\n1,2\n");
  EXPECT_EQ(kind_of([&] { read_csv(dir / "b.csv", {"x", "y"}); }), ErrorKind::ParseError);
  write_text(dir / "c.csv", "x,y\n1,2,3\n");
  try {
    read_csv(dir / "c.csv", {"x", "y"});
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(Segments, PartitionByScenario) {
  TempDir dir;
  std::string text = kSegHeader;
  for (int i = 0; i < 632; ++i) text += "F" + std::to_string(i) + ",fwy-interchange,190,35,ramp\n";
  for (int i = 0; i < 332; ++i) text += "I" + std::to_string(i) + ",interstate,320,65,interstate\n";
  write_text(dir / "s.csv", text);
  const auto cat = load_segments(dir / "s.csv");
  EXPECT_EQ(cat.size(), 964u);
  EXPECT_EQ(cat.count(ScenarioId("fwy-interchange")), 632u);
  EXPECT_EQ(cat.count(ScenarioId("interstate")), 332u);
}

TEST(Segments, HeaderOnlyIsEmpty) {
  TempDir dir;
  write_text(dir / "s.csv", kSegHeader);
  EXPECT_EQ(load_segments(dir / "s.csv").size(), 0u);
}

TEST(Segments, OverLengthRejected) {
  TempDir dir;
  write_text(dir / "s.csv", kSegHeader + "F1,fwy-interchange,501,35,ramp\n");
  EXPECT_EQ(kind_of([&] { load_segments(dir / "s.csv"); }), ErrorKind::InvariantError);
  write_text(dir / "d.csv", kSegHeader + "F1,fwy-interchange,100,35,ramp\nF1,interstate,100,35,ramp\n");
  EXPECT_EQ(kind_of([&] { load_segments(dir / "d.csv"); }), ErrorKind::ParseError);
}

TEST(Subjects, BatteryFillsCogstat) {
  TempDir dir;
  write_text(dir / "s.csv", kSubjHeader + "S1,normal,,28,38.7,26.2,10.08,4.4,31,15.7,46.1\n");
  const auto reg = load_subjects(dir / "s.csv");
  EXPECT_NEAR(*reg.at(SubjectId("S1")).cogstat, 350.0, 1e-9);
  write_text(dir / "bad.csv", kSubjHeader + "S1,normal,351,28,38.7,26.2,10.08,4.4,31,15.7,46.1\n");
  EXPECT_EQ(kind_of([&] { load_subjects(dir / "bad.csv"); }), ErrorKind::ParseError);
  write_text(dir / "partial.csv", kSubjHeader + "S1,normal,,28,38.7,,,,,,\n");
  EXPECT_EQ(kind_of([&] { load_subjects(dir / "partial.csv"); }), ErrorKind::ParseError);
  write_text(dir / "moca.csv", kSubjHeader + "S1,normal,,31,,,,,,,\n");
  EXPECT_EQ(kind_of([&] { load_subjects(dir / "moca.csv"); }), ErrorKind::ParseError);
}

TEST(Trips, FileOrderAndReferences) {
  Fixture f;
  write_text(f.dir / "t.csv", kTripHeader +
                                  "S1,D1,F1,2021-03-01T08:00:00Z\n"
                                  "S2,D2,I1,2021-03-01T09:00:00Z\n"
                                  "S1,D1,F2,2021-03-01T08:02:00Z\n");
  const auto trips = load_trips(f.dir / "t.csv", f.segments, f.subjects);
  ASSERT_EQ(trips.size(), 3u);
  EXPECT_EQ(trips[1].subject.str(), "S2");
  EXPECT_EQ(trips[2].segment.str(), "F2");

  write_text(f.dir / "u.csv", kTripHeader + "S1,D1,X9,2021-03-01T08:00:00Z\n");
  EXPECT_EQ(kind_of([&] { load_trips(f.dir / "u.csv", f.segments, f.subjects); }), ErrorKind::UnknownSegment);
  write_text(f.dir / "v.csv", kTripHeader + "S9,D1,F1,2021-03-01T08:00:00Z\n");
  EXPECT_EQ(kind_of([&] { load_trips(f.dir / "v.csv", f.segments, f.subjects); }), ErrorKind::UnknownSubject);
}

TEST(Clips, ScenarioFromSegmentAndDuplicates) {
  Fixture f;
  write_text(f.dir / "c.csv", kClipHeader + "S1,D1,C1,I2,blackframe,0.3,2021-03-01T08:00:00Z\n");
  const auto clips = load_clips(f.dir / "c.csv", f.segments, f.subjects);
  ASSERT_EQ(clips.size(), 1u);
  EXPECT_EQ(clips[0].scenario.str(), "interstate");
  EXPECT_EQ(clips[0].status, ClipStatus::Blackframe);
  write_text(f.dir / "d.csv", kClipHeader + "S1,D1,C1,I2,pure,0.3,x\nS1,D1,C1,F1,pure,0.3,x\n");
  EXPECT_EQ(kind_of([&] { load_clips(f.dir / "d.csv", f.segments, f.subjects); }), ErrorKind::ParseError);
}

TEST(Durations, Fractions) {
  std::vector<ClipRecord> clips{clip("interstate", ClipStatus::Pure, 726), clip("interstate", ClipStatus::Blackframe, 41),
                                clip("interstate", ClipStatus::Missing, 233)};
  const auto d = duration_breakdown(clips);
  EXPECT_DOUBLE_EQ(d.total_min, 1000);
  EXPECT_NEAR(d.pure_fraction, 0.726, 1e-12);
  EXPECT_NEAR(d.blackframe_fraction, 0.041, 1e-12);
  EXPECT_NEAR(d.missing_fraction, 0.233, 1e-12);

  const auto empty = duration_breakdown({});
  EXPECT_EQ(empty.total_min, 0);
  EXPECT_EQ(empty.pure_fraction, 0);
  EXPECT_EQ(empty.missing_fraction, 0);

  const std::vector<ClipRecord> one{clip("interstate", ClipStatus::Pure, 5)};
  EXPECT_EQ(duration_breakdown(one).pure_fraction, 1.0);
}

TEST(Samples, ScenarioAndStatusFilter) {
  Fixture f;
  std::vector<ClipRecord> clips{clip("interstate", ClipStatus::Pure, 1), clip("interstate", ClipStatus::Missing, 1),
                                clip("fwy-interchange", ClipStatus::Pure, 1),
                                clip("interstate", ClipStatus::Blackframe, 1)};
  const auto out = filter_scenario_samples(clips, f.segments, ScenarioId("interstate"));
  ASSERT_EQ(out.size(), 2u);
  EXPECT_EQ(out[0].status, ClipStatus::Pure);
  EXPECT_EQ(out[1].status, ClipStatus::Blackframe);

  std::vector<ClipRecord> missing{clip("interstate", ClipStatus::Missing, 1)};
  EXPECT_TRUE(filter_scenario_samples(missing, f.segments, ScenarioId("interstate")).empty());
  EXPECT_EQ(kind_of([&] { filter_scenario_samples(clips, f.segments, ScenarioId("urban")); }),
            ErrorKind::UnknownScenario);
}

TEST(Exposure, RepeatedTripsCountOnce) {
  Fixture f;
  std::vector<TripRecord> trips;
  for (int i = 0; i < 3; ++i) trips.push_back({SubjectId("S1"), DriveId("D1"), SegmentId("F1"), ""});
  const auto stats = exposure_stats(trips, f.subjects, f.segments);
  ASSERT_EQ(stats.size(), 2u);
  EXPECT_EQ(stats[0].total_unique, 1u);
  EXPECT_EQ(stats[0].total_trips, 3u);
  EXPECT_EQ(stats[0].normal_unique, 1u);
  EXPECT_DOUBLE_EQ(stats[0].avg_trips, 3.0);
  EXPECT_EQ(stats[1].total_trips, 0u);
  EXPECT_EQ(stats[1].avg_trips, 0.0);
}

TEST(Exposure, GroupsAndUnlabeled) {
  Fixture f;
  std::vector<TripRecord> trips{{SubjectId("S1"), DriveId("D1"), SegmentId("F1"), ""},
                                {SubjectId("S2"), DriveId("D2"), SegmentId("F1"), ""},
                                {SubjectId("S2"), DriveId("D2"), SegmentId("F2"), ""},
                                {SubjectId("S3"), DriveId("D3"), SegmentId("F2"), ""},
                                {SubjectId("S3"), DriveId("D4"), SegmentId("F2"), ""}};
  const auto s = exposure_stats(trips, f.subjects, f.segments)[0];
  EXPECT_EQ(s.normal_unique, 1u);
  EXPECT_EQ(s.mci_unique, 2u);
  EXPECT_EQ(s.ad_unique, 1u);
  EXPECT_EQ(s.total_unique, 4u);
  EXPECT_EQ(s.total_trips, 5u);
  EXPECT_EQ(s.active_subjects, 3u);
  EXPECT_DOUBLE_EQ(s.avg_trips, 1.25);
  EXPECT_DOUBLE_EQ(s.trips_per_active_subject, 5.0 / 3.0);

  trips.push_back({SubjectId("S4"), DriveId("D5"), SegmentId("F1"), ""});
  EXPECT_EQ(kind_of([&] { exposure_stats(trips, f.subjects, f.segments); }), ErrorKind::UnlabeledSubject);
}

TEST(Coverage, Gate) {
  Fixture f;
  std::vector<TripRecord> trips{{SubjectId("S1"), DriveId("D1"), SegmentId("F1"), ""},
                                {SubjectId("S1"), DriveId("D1"), SegmentId("F2"), ""},
                                {SubjectId("S2"), DriveId("D2"), SegmentId("F1"), ""},
                                {SubjectId("S2"), DriveId("D2"), SegmentId("F2"), ""},
                                {SubjectId("S2"), DriveId("D2"), SegmentId("I1"), ""},
                                {SubjectId("S2"), DriveId("D2"), SegmentId("I2"), ""}};
  const auto cov = coverage_fractions(f.subjects, trips, f.segments);
  EXPECT_DOUBLE_EQ(cov.at(SubjectId("S1")), 0.5);
  EXPECT_DOUBLE_EQ(cov.at(SubjectId("S2")), 1.0);
  EXPECT_EQ(coverage_gate(f.subjects, trips, f.segments, 0.0).size(), 4u);
  EXPECT_EQ(coverage_gate(f.subjects, trips, f.segments, 1.0), std::vector<SubjectId>{SubjectId("S2")});
  EXPECT_EQ(coverage_gate(f.subjects, trips, f.segments, 0.3).size(), 2u);
  EXPECT_EQ(kind_of([&] { coverage_gate(f.subjects, trips, f.segments, 1.5); }), ErrorKind::InvalidArgument);
}

}  // namespace
}  // namespace scbm
