#pragma once

#include <cstdint>
#include <nlohmann/json_fwd.hpp>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scbm/classifier.hpp"
#include "scbm/core.hpp"
#include "scbm/ingestion.hpp"
#include "scbm/scenario_rank.hpp"

namespace scbm {

/// Random: clips split without regard to driver. DLS (driver-level
/// separation): k drivers held out entirely per run.
enum class Protocol { Random, DLS };

std::string_view to_string(Protocol protocol) noexcept;
Protocol parse_protocol(std::string_view text);

struct SplitPlan {
  Protocol protocol = Protocol::Random;
  std::size_t run = 0;
  std::vector<std::size_t> train;  // ascending clip indices
  std::vector<std::size_t> test;   // ascending clip indices
  std::vector<SubjectId> left_out;  // DLS only, sorted
};

/// Test count is floor(fraction * N), at least 1. Throws TooFewClips (N < 2)
/// and InvalidArgument (fraction outside (0, 1)).
SplitPlan make_random_split(std::size_t n_clips, double test_fraction, std::uint64_t seed,
                            std::size_t run = 0);

/// `resamples` independent random splits, run i seeded from (seed, i).
std::vector<SplitPlan> make_random_splits(std::size_t n_clips, double test_fraction,
                                          std::size_t resamples, std::uint64_t seed);

/// r leave-k-drivers-out plans over the distinct subjects of `clips`. Each run
/// draws k subjects without replacement; an exact repeat of an earlier run's
/// set is redrawn while unused sets remain. Throws NotEnoughSubjects.
std::vector<SplitPlan> make_dls_splits(std::span<const ClipKey> clips, std::size_t k, std::size_t r,
                                       std::uint64_t seed);

struct MetricValues {
  double a = 0;
  double P = 0;
  double R = 0;
  double F1 = 0;
};

MetricValues values_of(const MetricsReport& m);

struct ClipOutcome {
  std::size_t row = 0;  // index in the scenario's clip list
  SubjectId subject;
  BinaryLabel truth = BinaryLabel::NormalAging;
  BinaryLabel predicted = BinaryLabel::NormalAging;
};

struct RunOutcome {
  std::size_t run = 0;
  MetricsReport metrics;                  // AD-aging positive
  MetricsReport metrics_normal_positive;  // Normal-aging positive
  std::vector<ClipOutcome> clips;
};

struct ScenarioResult {
  ScenarioId scenario;
  Protocol protocol = Protocol::Random;
  std::vector<RunOutcome> runs;
  MetricValues mean;
  std::optional<MetricValues> stddev;  // sample deviation, present for >1 run
  MetricValues mean_normal_positive;
};

struct EvalOptions {
  ForestParams forest;
  std::uint64_t seed = 0;
  FeatureSpace classifier_space = FeatureSpace::Full;
  std::size_t n_components = 50;
};

/// Trains a forest on each plan's train rows of `scenario` and scores its
/// test rows. Plans index the scenario's rows in stored order.
/// Throws SingleClass, EmptyTest, InvalidArgument (index out of range).
ScenarioResult evaluate_scenario(const ScenarioId& scenario, const EmbeddingMatrix& embeddings,
                                 std::span<const SplitPlan> plans, const EvalOptions& options);

/// Per-metric difference first − second under one protocol. Differences are
/// rounded to a 1e-10 grid.
struct DeltaReport {
  Protocol protocol = Protocol::Random;
  ScenarioId first;
  ScenarioId second;
  MetricValues delta;
};

/// Throws ProtocolMismatch.
DeltaReport delta_report(const ScenarioResult& first, const ScenarioResult& second);

struct SubjectMissRow {
  SubjectId subject;
  std::optional<CognitiveLabel> label;
  std::optional<double> cogstat;
  std::optional<double> moca;
  std::size_t n_test = 0;
  std::size_t n_error = 0;
  double percent = 0;
};

struct SubjectMissReport {
  std::vector<SubjectMissRow> rows;  // sorted by subject id; untested subjects omitted
};

/// Pools clip-level test appearances of runs with index < n_resamples.
SubjectMissReport subject_miss_report(std::span<const RunOutcome> runs, const SubjectRegistry& subjects,
                                      std::size_t n_resamples);

/// Correct / total test predictions over runs with index < n_resamples.
double pooled_accuracy(std::span<const RunOutcome> runs, std::size_t n_resamples);

/// `scenario,protocol,run,a,P,R,F1` with per-run rows followed by `mean` and
/// (multi-run) `std` summary rows.
std::string results_csv(std::span<const ScenarioResult> results, bool normal_positive = false);
/// `metric,delta,delta_ds`
std::string delta_csv(const DeltaReport& random, const DeltaReport& dls);
/// `subject_id,label,cogstat,moca,n_test,n_error,percent`
std::string subject_miss_csv(const SubjectMissReport& report);

nlohmann::json result_to_json(const ScenarioResult& result);
ScenarioResult result_from_json(const nlohmann::json& j);

}  // namespace scbm
