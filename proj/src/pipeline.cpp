#include "scbm/pipeline.hpp"

#include <fmt/chrono.h>
#include <fmt/format.h>

#include <chrono>
#include <nlohmann/json.hpp>
#include <unordered_set>

#include "scbm/classifier.hpp"
#include "scbm/csv.hpp"
#include "scbm/embedding_store.hpp"
#include "scbm/random.hpp"
#include "scbm/reduction.hpp"
#include "scbm/synth.hpp"

namespace scbm {

namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kEmbedStream = 0xe3bed;
constexpr std::uint64_t kModelStream = 0xf02e57;

template <class... Args>
void note(const StageContext& ctx, fmt::format_string<Args...> f, Args&&... args) {
  if (ctx.log) *ctx.log << fmt::format(f, std::forward<Args>(args)...) << '\n';
}

void prepare(const StageContext& ctx) {
  ctx.config.validate();
  fs::create_directories(ctx.run_dir);
  write_file_atomic(ctx.run_dir / "config.cfg", ctx.config.render());
}

nlohmann::json read_json(const fs::path& path) {
  const auto text = read_text_file(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::FormatError, fmt::format("{}: {}", path.string(), e.what()));
  }
}

fs::path require(const fs::path& path, std::string_view producer) {
  if (!fs::exists(path)) {
    throw Error(ErrorKind::IoError, fmt::format("{} not found; run `{}` first", path.string(), producer));
  }
  return path;
}

std::vector<ScenarioId> selected_scenarios(const StageContext& ctx, const EmbeddingMatrix& e) {
  auto all = e.scenarios();
  if (!ctx.scenario) return all;
  if (std::find(all.begin(), all.end(), *ctx.scenario) == all.end()) {
    throw Error(ErrorKind::UnknownScenario, fmt::format("no embeddings for scenario '{}'", ctx.scenario->str()));
  }
  return {*ctx.scenario};
}

EmbeddingMatrix load_run_embeddings(const StageContext& ctx) {
  auto e = read_embeddings(require(ctx.run_dir / "embeddings.sbem", "embed"));
  if (ctx.scenario) {
    selected_scenarios(ctx, e);
    return e.scenario_subset(*ctx.scenario);
  }
  return e;
}

std::size_t clamp_components(const PipelineConfig& c, const EmbeddingMatrix& e) {
  const std::size_t limit = e.rows() > 0 ? e.rows() - 1 : 0;
  return std::min({c.n_components, e.dim(), limit});
}

std::uint64_t scenario_seed(std::uint64_t seed, const ScenarioId& scenario) {
  return KeyHasher(seed).add(scenario.str()).digest();
}

std::vector<ScenarioId> ranking_order(const fs::path& path) {
  const auto doc = read_csv(path, {"scenario", "metric", "space", "dist_avg", "rank"});
  std::vector<ScenarioId> out;
  for (const auto& row : doc.rows) out.emplace_back(row.fields[0]);
  return out;
}

std::string fraction_row(const std::string& name, const DurationBreakdown& d) {
  return fmt::format("{},{},{},{},{},{},{},{}", name, format_real(d.total_min), format_real(d.pure_min),
                     format_real(d.blackframe_min), format_real(d.missing_min), format_real(d.pure_fraction),
                     format_real(d.blackframe_fraction), format_real(d.missing_fraction));
}

}  // namespace

fs::path default_run_dir(std::uint64_t seed) {
  const auto now = std::chrono::floor<std::chrono::seconds>(std::chrono::system_clock::now());
  return fs::path("runs") / fmt::format("{:%Y%m%dT%H%M%S}-{}", now, seed);
}

Dataset load_dataset(const StageContext& ctx) {
  const auto dir = ctx.cohort();
  Dataset d;
  d.segments = load_segments(dir / "segments.csv");
  d.subjects = load_subjects(dir / "subjects.csv", CogstatOptions{ctx.config.cogstat_sign_corrected});
  d.trips = load_trips(dir / "trips.csv", d.segments, d.subjects);
  d.clips = load_clips(dir / "clips.csv", d.segments, d.subjects);
  if (ctx.scenario && !d.segments.has_scenario(*ctx.scenario)) {
    throw Error(ErrorKind::UnknownScenario, fmt::format("scenario '{}' has no segments", ctx.scenario->str()));
  }

  const auto gated = coverage_gate(d.subjects, d.trips, d.segments, ctx.config.min_fraction);
  const std::unordered_set<SubjectId> keep(gated.begin(), gated.end());
  const auto statuses = ctx.config.statuses();
  for (const auto& c : d.clips) {
    if (ctx.scenario && c.scenario != *ctx.scenario) continue;
    if (!statuses.contains(c.status) || !keep.contains(c.subject)) continue;
    if (!d.subjects.at(c.subject).label) continue;
    d.samples.push_back(c);
  }
  return d;
}

void stage_synth(const StageContext& ctx) {
  prepare(ctx);
  const auto files = generate_cohort(ctx.config.cohort_spec());
  write_cohort(files, ctx.cohort());
  note(ctx, "synth: cohort written to {}", ctx.cohort().string());
}

void stage_ingest(const StageContext& ctx) {
  prepare(ctx);
  const auto d = load_dataset(ctx);

  std::vector<TripRecord> labeled;
  std::unordered_set<SubjectId> unlabeled;
  for (const auto& t : d.trips) {
    if (d.subjects.at(t.subject).label) {
      labeled.push_back(t);
    } else {
      unlabeled.insert(t.subject);
    }
  }
  if (!unlabeled.empty()) note(ctx, "ingest: {} unlabeled subjects left out of exposure counts", unlabeled.size());

  CsvWriter exposure({"scenario", "normal_unique", "mci_unique", "ad_unique", "total_unique", "total_trips",
                      "active_subjects", "avg_trips", "trips_per_active_subject"});
  for (const auto& e : exposure_stats(labeled, d.subjects, d.segments)) {
    if (ctx.scenario && e.scenario != *ctx.scenario) continue;
    exposure.row({e.scenario.str(), std::to_string(e.normal_unique), std::to_string(e.mci_unique),
                  std::to_string(e.ad_unique), std::to_string(e.total_unique), std::to_string(e.total_trips),
                  std::to_string(e.active_subjects), format_real(e.avg_trips),
                  format_real(e.trips_per_active_subject)});
  }
  write_file_atomic(ctx.run_dir / "exposure.csv", exposure.str());

  std::string durations =
      "scenario,total_min,pure_min,blackframe_min,missing_min,pure_fraction,blackframe_fraction,missing_fraction\n";
  for (const auto& sc : d.segments.scenarios()) {
    if (ctx.scenario && sc != *ctx.scenario) continue;
    std::vector<ClipRecord> subset;
    for (const auto& c : d.clips) {
      if (c.scenario == sc) subset.push_back(c);
    }
    durations += fraction_row(sc.str(), duration_breakdown(subset)) + "\n";
  }
  if (!ctx.scenario) durations += fraction_row("all", duration_breakdown(d.clips)) + "\n";
  write_file_atomic(ctx.run_dir / "durations.csv", durations);

  const auto coverage = coverage_fractions(d.subjects, d.trips, d.segments);
  CsvWriter cov({"subject_id", "label", "coverage", "included"});
  std::size_t excluded = 0;
  for (const auto& s : d.subjects.subjects()) {
    const double f = coverage.at(s.id);
    const bool included = s.label && f >= ctx.config.min_fraction;
    excluded += included ? 0 : 1;
    cov.row({s.id.str(), s.label ? std::string(to_string(*s.label)) : std::string(), format_real(f),
             included ? "true" : "false"});
  }
  write_file_atomic(ctx.run_dir / "coverage.csv", cov.str());
  note(ctx, "ingest: {} subjects, {} trips, {} clips, {} samples, {} subjects excluded", d.subjects.size(),
       d.trips.size(), d.clips.size(), d.samples.size(), excluded);
}

void stage_embed(const StageContext& ctx) {
  prepare(ctx);
  const auto d = load_dataset(ctx);
  EmbeddingMatrix out(ctx.config.dim);
  if (ctx.embeddings) {
    PrecomputedEmbedder embedder(read_embeddings(*ctx.embeddings));
    if (embedder.dim() != ctx.config.dim) {
      throw Error(ErrorKind::DimMismatch, fmt::format("{} holds {}-dimensional rows but dim = {}",
                                                      ctx.embeddings->string(), embedder.dim(), ctx.config.dim));
    }
    out = embed_clips(embedder, d.samples, d.subjects);
  } else {
    const auto ledger = read_json(require(ctx.cohort() / "ledger.json", "synth"));
    SyntheticEmbedder embedder(embedder_spec_from_ledger(ledger, ctx.config.dim,
                                                         derive_seed(ctx.config.require_seed(), kEmbedStream),
                                                         ctx.config.informative_dims));
    out = embed_clips(embedder, d.samples, d.subjects);
  }
  write_embeddings(out, ctx.run_dir / "embeddings.sbem");
  note(ctx, "embed: {} rows x {} dims", out.rows(), out.dim());
}

void stage_reduce(const StageContext& ctx) {
  prepare(ctx);
  const auto e = load_run_embeddings(ctx);
  for (const auto& sc : selected_scenarios(ctx, e)) {
    const auto subset = e.scenario_subset(sc);
    const auto model = pca_fit(subset, clamp_components(ctx.config, subset));
    write_pca_model(model, sc, ctx.run_dir / fmt::format("pca_{}.sbem", sc.str()));
    write_embeddings(pca_transform(model, subset), ctx.run_dir / fmt::format("reduced_{}.sbem", sc.str()));
    note(ctx, "reduce: {} -> {} components{}", sc.str(), model.n_components(),
         model.rank_deficient ? fmt::format(" (rank {})", model.effective_rank) : std::string());
  }
}

ScenarioRanking stage_rank(const StageContext& ctx) {
  prepare(ctx);
  const auto e = load_run_embeddings(ctx);
  const auto ranking =
      rank_scenarios(e, RankOptions{ctx.config.metric, ctx.config.space, ctx.config.n_components});
  write_file_atomic(ctx.run_dir / "ranking.csv", ranking_csv(ranking));
  return ranking;
}

void stage_evaluate(const StageContext& ctx) {
  prepare(ctx);
  const auto e = load_run_embeddings(ctx);
  const auto order = ranking_order(require(ctx.run_dir / "ranking.csv", "rank"));
  const auto present = selected_scenarios(ctx, e);
  const auto& c = ctx.config;

  nlohmann::json doc;
  doc["seed"] = c.require_seed();
  doc["scenarios"] = nlohmann::json::array();
  for (const auto& sc : order) {
    if (std::find(present.begin(), present.end(), sc) == present.end()) continue;
    const auto subset = e.scenario_subset(sc);
    const auto seed = scenario_seed(c.require_seed(), sc);
    EvalOptions opts{c.forest, seed, c.classifier_space, c.n_components};

    const auto random_plans = make_random_splits(subset.rows(), c.test_fraction, c.resamples, derive_seed(seed, 1));
    const auto dls_plans = make_dls_splits(subset.keys(), c.dls_k, c.dls_r, derive_seed(seed, 2));
    const auto random = evaluate_scenario(sc, e, random_plans, opts);
    const auto dls = evaluate_scenario(sc, e, dls_plans, opts);
    doc["scenarios"].push_back({{"scenario", sc.str()}, {"random", result_to_json(random)}, {"dls", result_to_json(dls)}});
    note(ctx, "evaluate: {} random a={:.4f} dls a={:.4f}", sc.str(), random.mean.a, dls.mean.a);
  }
  write_file_atomic(ctx.run_dir / "evaluation.json", doc.dump(2) + "\n");
}

void stage_report(const StageContext& ctx) {
  prepare(ctx);
  const auto doc = read_json(require(ctx.run_dir / "evaluation.json", "evaluate"));
  std::vector<std::pair<ScenarioResult, ScenarioResult>> pairs;
  std::vector<ScenarioResult> flat;
  try {
    for (const auto& s : doc.at("scenarios")) {
      pairs.emplace_back(result_from_json(s.at("random")), result_from_json(s.at("dls")));
      flat.push_back(pairs.back().first);
      flat.push_back(pairs.back().second);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::FormatError, fmt::format("evaluation.json: {}", e.what()));
  }
  if (pairs.empty()) throw Error(ErrorKind::EmptyClass, "evaluation.json holds no scenarios");

  write_file_atomic(ctx.run_dir / "results.csv", results_csv(flat));
  write_file_atomic(ctx.run_dir / "results_normal_positive.csv", results_csv(flat, true));
  if (pairs.size() >= 2) {
    const auto random = delta_report(pairs[0].first, pairs[1].first);
    const auto dls = delta_report(pairs[0].second, pairs[1].second);
    write_file_atomic(ctx.run_dir / "delta.csv", delta_csv(random, dls));
  } else {
    note(ctx, "report: one scenario evaluated, delta.csv skipped");
  }

  const auto subjects =
      load_subjects(ctx.cohort() / "subjects.csv", CogstatOptions{ctx.config.cogstat_sign_corrected});
  const auto misses = subject_miss_report(pairs[0].first.runs, subjects, ctx.config.resamples);
  write_file_atomic(ctx.run_dir / "subject_miss.csv", subject_miss_csv(misses));
}

PipelineSummary run_pipeline(const StageContext& ctx) {
  if (!ctx.cohort_dir && !fs::exists(ctx.cohort() / "subjects.csv")) stage_synth(ctx);
  stage_ingest(ctx);
  stage_embed(ctx);
  stage_reduce(ctx);
  PipelineSummary summary;
  summary.ranking = stage_rank(ctx);
  stage_evaluate(ctx);
  stage_report(ctx);

  const auto doc = read_json(ctx.run_dir / "evaluation.json");
  for (const auto& s : doc.at("scenarios")) {
    summary.results.emplace_back(result_from_json(s.at("random")), result_from_json(s.at("dls")));
  }

  const auto best = summary.ranking.best();
  const auto subset = load_run_embeddings(ctx).scenario_subset(best);
  Eigen::MatrixXd x = to_eigen(subset);
  if (ctx.config.classifier_space == FeatureSpace::Reduced) {
    x = pca_project(pca_fit(x, clamp_components(ctx.config, subset)), x);
  }
  std::vector<BinaryLabel> y;
  for (const auto& k : subset.keys()) y.push_back(k.label);
  const auto model = rf_train(x, y, ctx.config.forest, derive_seed(ctx.config.require_seed(), kModelStream));
  nlohmann::json out = forest_to_json(model);
  out["scenario"] = best.str();
  out["space"] = std::string(to_string(ctx.config.classifier_space));
  write_file_atomic(ctx.run_dir / "model.json", out.dump() + "\n");
  note(ctx, "pipeline: forest trained on {} ({} rows)", best.str(), subset.rows());
  return summary;
}

}  // namespace scbm
