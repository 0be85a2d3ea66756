#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <vector>

#include "scbm/config.hpp"
#include "scbm/evaluation.hpp"
#include "scbm/ingestion.hpp"
#include "scbm/scenario_rank.hpp"

namespace scbm {

/// Where a stage reads and writes. Stages communicate only through files in
/// `run_dir`.
struct StageContext {
  PipelineConfig config;
  std::filesystem::path run_dir;
  /// Directory holding subjects.csv, segments.csv, trips.csv, clips.csv and,
  /// for the synthetic embedder, ledger.json. Defaults to run_dir/cohort.
  std::optional<std::filesystem::path> cohort_dir;
  /// Precomputed embedding file; the synthetic embedder is used when absent.
  std::optional<std::filesystem::path> embeddings;
  std::optional<ScenarioId> scenario;
  std::ostream* log = nullptr;

  std::filesystem::path cohort() const { return cohort_dir.value_or(run_dir / "cohort"); }
};

/// Ingested cohort plus the clips that qualify as classifier samples:
/// labeled subjects passing the coverage gate, with an included status.
struct Dataset {
  SegmentCatalog segments;
  SubjectRegistry subjects;
  std::vector<TripRecord> trips;
  std::vector<ClipRecord> clips;
  std::vector<ClipRecord> samples;
};

Dataset load_dataset(const StageContext& ctx);

/// runs/<UTC timestamp>-<seed>
std::filesystem::path default_run_dir(std::uint64_t seed);

void stage_synth(const StageContext& ctx);
/// exposure.csv, durations.csv, coverage.csv
void stage_ingest(const StageContext& ctx);
/// embeddings.sbem and its sidecar index
void stage_embed(const StageContext& ctx);
/// pca_<scenario>.sbem and reduced_<scenario>.sbem per scenario
void stage_reduce(const StageContext& ctx);
/// ranking.csv
ScenarioRanking stage_rank(const StageContext& ctx);
/// evaluation.json, scenarios in ranking order
void stage_evaluate(const StageContext& ctx);
/// results.csv, results_normal_positive.csv, delta.csv, subject_miss.csv
void stage_report(const StageContext& ctx);

struct PipelineSummary {
  ScenarioRanking ranking;
  std::vector<std::pair<ScenarioResult, ScenarioResult>> results;  // (random, dls) per scenario
};

/// Every stage in order, then a forest trained on all samples of the
/// top-ranked scenario (model.json). Synthesizes a cohort first when the
/// cohort directory has no subjects.csv.
PipelineSummary run_pipeline(const StageContext& ctx);

}  // namespace scbm
