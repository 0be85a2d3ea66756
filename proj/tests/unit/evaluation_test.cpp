#include <gtest/gtest.h>

#include <fmt/format.h>

#include <nlohmann/json.hpp>
#include <set>

#include "scbm/embedding_store.hpp"
#include "scbm/evaluation.hpp"
#include "test_util.hpp"

namespace scbm {
namespace {

using test::kind_of;

std::vector<ClipKey> cohort_keys(int subjects, int clips_each) {
  std::vector<ClipKey> keys;
  for (int s = 0; s < subjects; ++s) {
    for (int c = 0; c < clips_each; ++c) {
      keys.push_back({SubjectId(fmt::format("S{:03d}", s)), DriveId("D"), ClipId(fmt::format("C{}", c)),
                      ScenarioId("fwy-interchange"), s % 2 ? BinaryLabel::ADAging : BinaryLabel::NormalAging});
    }
  }
  return keys;
}

EmbeddingMatrix planted(double delta, int subjects, int clips_each, std::uint64_t seed, std::size_t dim = 8) {
  const PlantedScenario p[] = {{ScenarioId("fwy-interchange"), delta, 1.0}};
  SyntheticEmbedder e(SyntheticEmbedderSpec::planted(dim, p, seed, std::min<std::size_t>(dim, 4)));
  EmbeddingMatrix m(dim);
  for (const auto& k : cohort_keys(subjects, clips_each)) {
    ClipRecord c{k.subject, k.drive, k.clip, SegmentId("x"), k.scenario, ClipStatus::Pure, 0.1, ""};
    m.add_row(k, e.embed(c, k.label));
  }
  return m;
}

ScenarioResult with_accuracy(const std::string& sc, double a, Protocol p = Protocol::Random) {
  ScenarioResult r;
  r.scenario = ScenarioId(sc);
  r.protocol = p;
  r.mean = {a, a, a, a};
  return r;
}

TEST(RandomSplit, Counts) {
  const auto p = make_random_split(100, 0.2, 1);
  EXPECT_EQ(p.test.size(), 20u);
  EXPECT_EQ(p.train.size(), 80u);
  const auto q = make_random_split(3, 0.5, 1);
  EXPECT_EQ(q.test.size(), 1u);
  EXPECT_EQ(q.train.size(), 2u);
  EXPECT_EQ(make_random_split(100, 0.2, 1).test, p.test);
  EXPECT_NE(make_random_split(100, 0.2, 2).test, p.test);
  EXPECT_EQ(kind_of([] { make_random_split(1, 0.2, 1); }), ErrorKind::TooFewClips);
  EXPECT_EQ(kind_of([] { make_random_split(10, 1.0, 1); }), ErrorKind::InvalidArgument);
}

TEST(RandomSplit, PartitionsIndices) {
  for (const auto& p : make_random_splits(37, 0.3, 10, 5)) {
    std::vector<std::size_t> all(p.train);
    all.insert(all.end(), p.test.begin(), p.test.end());
    std::sort(all.begin(), all.end());
    for (std::size_t i = 0; i < 37; ++i) EXPECT_EQ(all[i], i);
  }
}

TEST(DlsSplit, PaperParameters) {
  const auto keys = cohort_keys(69, 3);
  const auto plans = make_dls_splits(keys, 5, 3, 11);
  ASSERT_EQ(plans.size(), 3u);
  std::set<std::vector<SubjectId>> distinct;
  for (const auto& p : plans) {
    EXPECT_EQ(p.left_out.size(), 5u);
    distinct.insert(p.left_out);
    std::set<SubjectId> test_subjects, train_subjects;
    for (auto i : p.test) test_subjects.insert(keys[i].subject);
    for (auto i : p.train) train_subjects.insert(keys[i].subject);
    EXPECT_EQ(test_subjects.size(), 5u);
    for (const auto& s : test_subjects) EXPECT_FALSE(train_subjects.contains(s));
    EXPECT_EQ(p.train.size() + p.test.size(), keys.size());
  }
  EXPECT_EQ(distinct.size(), 3u);
}

TEST(DlsSplit, TwoSubjects) {
  const auto keys = cohort_keys(2, 4);
  const auto p = make_dls_splits(keys, 1, 1, 3)[0];
  ASSERT_EQ(p.left_out.size(), 1u);
  EXPECT_EQ(p.test.size(), 4u);
  for (auto i : p.test) EXPECT_EQ(keys[i].subject, p.left_out[0]);
  EXPECT_EQ(kind_of([&] { make_dls_splits(keys, 2, 1, 3); }), ErrorKind::NotEnoughSubjects);
}

TEST(DlsSplit, AllButOneSurfacesSingleClass) {
  const auto m = planted(2.0, 4, 5, 1);
  const auto plans = make_dls_splits(m.keys(), 3, 1, 2);
  EXPECT_EQ(kind_of([&] { evaluate_scenario(ScenarioId("fwy-interchange"), m, plans, {}); }),
            ErrorKind::SingleClass);
}

TEST(Evaluate, ChanceAtZeroSeparation) {
  const auto m = planted(0.0, 40, 5, 3);
  const auto plans = make_random_splits(m.rows(), 0.2, 10, 4);
  EvalOptions o;
  o.forest.n_trees = 30;
  const auto r = evaluate_scenario(ScenarioId("fwy-interchange"), m, plans, o);
  EXPECT_NEAR(r.mean.a, 0.5, 0.1);
  ASSERT_TRUE(r.stddev.has_value());
}

TEST(Evaluate, LargeSeparation) {
  const auto m = planted(10.0, 30, 5, 5);
  const auto plans = make_dls_splits(m.keys(), 5, 3, 6);
  EvalOptions o;
  o.forest.n_trees = 30;
  const auto r = evaluate_scenario(ScenarioId("fwy-interchange"), m, plans, o);
  EXPECT_GE(r.mean.a, 0.95);
  EXPECT_EQ(r.protocol, Protocol::DLS);
}

TEST(Evaluate, RunMetricsComposeFromClipPredictions) {
  const auto m = planted(3.0, 10, 4, 7);
  const auto plans = make_random_splits(m.rows(), 0.1, 3, 8);
  EvalOptions o;
  o.forest.n_trees = 15;
  o.classifier_space = FeatureSpace::Reduced;
  const auto r = evaluate_scenario(ScenarioId("fwy-interchange"), m, plans, o);
  for (const auto& run : r.runs) {
    ASSERT_EQ(run.clips.size(), 4u);
    std::vector<BinaryLabel> t, p;
    for (const auto& c : run.clips) {
      t.push_back(c.truth);
      p.push_back(c.predicted);
      EXPECT_EQ(c.truth, m.key(c.row).label);
    }
    const auto oracle = compute_metrics(t, p);
    EXPECT_EQ(run.metrics.tp, oracle.tp);
    EXPECT_EQ(run.metrics.fp, oracle.fp);
    EXPECT_EQ(run.metrics.accuracy, oracle.accuracy);
    EXPECT_EQ(run.metrics_normal_positive.tp, oracle.tn);
  }
}

TEST(Evaluate, RejectsBadPlans) {
  const auto m = planted(1.0, 6, 2, 9);
  auto plans = make_random_splits(m.rows(), 0.2, 2, 1);
  plans[1].protocol = Protocol::DLS;
  EXPECT_EQ(kind_of([&] { evaluate_scenario(ScenarioId("fwy-interchange"), m, plans, {}); }),
            ErrorKind::ProtocolMismatch);
  SplitPlan empty;
  empty.train = {0, 1, 2};
  EXPECT_EQ(kind_of([&] { evaluate_scenario(ScenarioId("fwy-interchange"), m, std::vector{empty}, {}); }),
            ErrorKind::EmptyTest);
}

TEST(Delta, PublishedValuesExact) {
  const auto d = delta_report(with_accuracy("a", 0.7103), with_accuracy("b", 0.5512));
  EXPECT_EQ(d.delta.a, 0.1591);
  const auto ds = delta_report(with_accuracy("a", 0.6981, Protocol::DLS), with_accuracy("b", 0.5217, Protocol::DLS));
  EXPECT_EQ(ds.delta.a, 0.1764);
  EXPECT_EQ(delta_report(with_accuracy("a", 71.03), with_accuracy("b", 55.12)).delta.a, 15.91);
  EXPECT_EQ(delta_report(with_accuracy("a", 69.81), with_accuracy("b", 52.17)).delta.a, 17.64);
  const auto zero = delta_report(with_accuracy("a", 0.8), with_accuracy("b", 0.8));
  EXPECT_EQ(zero.delta.a, 0.0);
  EXPECT_EQ(zero.delta.F1, 0.0);
  EXPECT_EQ(kind_of([] { delta_report(with_accuracy("a", 1), with_accuracy("b", 1, Protocol::DLS)); }),
            ErrorKind::ProtocolMismatch);
}

RunOutcome run_with(std::size_t index, const std::vector<std::pair<std::string, bool>>& clips) {
  RunOutcome r;
  r.run = index;
  std::vector<BinaryLabel> t, p;
  for (const auto& [s, correct] : clips) {
    ClipOutcome c{0, SubjectId(s), BinaryLabel::ADAging, correct ? BinaryLabel::ADAging : BinaryLabel::NormalAging};
    r.clips.push_back(c);
    t.push_back(c.truth);
    p.push_back(c.predicted);
  }
  r.metrics = compute_metrics(t, p);
  return r;
}

TEST(SubjectMiss, ThreeOfTen) {
  std::vector<RunOutcome> runs;
  for (std::size_t i = 0; i < 10; ++i) runs.push_back(run_with(i, {{"S1", i >= 3}, {"S2", true}}));
  runs.push_back(run_with(10, {{"S3", false}}));
  SubjectRegistry reg;
  reg.add({SubjectId("S1"), CognitiveLabel::MCI, {}, 349.5, 21});
  const auto rep = subject_miss_report(runs, reg, 10);
  ASSERT_EQ(rep.rows.size(), 2u);
  EXPECT_EQ(rep.rows[0].subject.str(), "S1");
  EXPECT_EQ(rep.rows[0].n_test, 10u);
  EXPECT_EQ(rep.rows[0].n_error, 3u);
  EXPECT_DOUBLE_EQ(rep.rows[0].percent, 30.0);
  EXPECT_EQ(*rep.rows[0].moca, 21);
  EXPECT_FALSE(rep.rows[1].label.has_value());

  std::size_t tested = 0, right = 0;
  for (const auto& row : rep.rows) {
    tested += row.n_test;
    right += row.n_test - row.n_error;
  }
  EXPECT_NEAR(static_cast<double>(right) / tested, pooled_accuracy(runs, 10), 1e-12);
  EXPECT_EQ(subject_miss_csv(rep).substr(0, 53), "subject_id,label,cogstat,moca,n_test,n_error,percent\n");
}

TEST(Serialization, ResultJsonRoundTrip) {
  const auto m = planted(2.0, 8, 3, 10);
  const auto plans = make_random_splits(m.rows(), 0.25, 3, 2);
  EvalOptions o;
  o.forest.n_trees = 5;
  const auto r = evaluate_scenario(ScenarioId("fwy-interchange"), m, plans, o);
  const auto back = result_from_json(nlohmann::json::parse(result_to_json(r).dump()));
  EXPECT_EQ(back.mean.a, r.mean.a);
  EXPECT_EQ(back.stddev->F1, r.stddev->F1);
  ASSERT_EQ(back.runs.size(), 3u);
  EXPECT_EQ(back.runs[2].clips.size(), r.runs[2].clips.size());
  EXPECT_EQ(back.runs[1].metrics.tp, r.runs[1].metrics.tp);
  const std::vector<ScenarioResult> both{r};
  EXPECT_EQ(results_csv(both), results_csv(std::vector<ScenarioResult>{back}));
}

TEST(Serialization, ResultsCsvRows) {
  auto r = with_accuracy("fwy-interchange", 0.5);
  r.runs.resize(2);
  r.stddev = MetricValues{0.1, 0.1, 0.1, 0.1};
  const auto csv = results_csv(std::vector<ScenarioResult>{r});
  EXPECT_NE(csv.find("scenario,protocol,run,a,P,R,F1\n"), std::string::npos);
  EXPECT_NE(csv.find("fwy-interchange,random,mean,0.5,0.5,0.5,0.5"), std::string::npos);
  EXPECT_NE(csv.find("fwy-interchange,random,std,0.1,"), std::string::npos);
}

}  // namespace
}  // namespace scbm
