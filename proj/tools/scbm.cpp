#include <fmt/format.h>

#include <CLI11.hpp>
#include <iostream>

#include "scbm/pipeline.hpp"

namespace {

int exit_code(scbm::ErrorKind kind) {
  using K = scbm::ErrorKind;
  switch (kind) {
    case K::ConfigError:
    case K::SpecInvalid:
    case K::InvalidArgument:
      return 2;
    case K::IoError:
    case K::ParseError:
    case K::FormatError:
    case K::ChecksumMismatch:
      return 3;
    case K::InvariantError:
    case K::DuplicateId:
    case K::UnknownSegment:
    case K::UnknownSubject:
    case K::UnknownScenario:
    case K::UnlabeledSubject:
    case K::NonFinite:
    case K::MissingClip:
    case K::DimMismatch:
      return 4;
    default:
      return 5;
  }
}

void print_summary(const scbm::PipelineSummary& s) {
  fmt::print("Sc* = {}\n\nranking\n", s.ranking.best().str());
  for (std::size_t i = 0; i < s.ranking.entries.size(); ++i) {
    const auto& e = s.ranking.entries[i];
    fmt::print("  {}. {:<20} dist_avg={:.6f} ({}, {})\n", i + 1, e.scenario.str(), e.dist_avg,
               scbm::to_string(e.metric), scbm::to_string(e.space));
  }
  fmt::print("\nmetrics (AD-aging positive)\n");
  fmt::print("  {:<20} {:<8} {:>7} {:>7} {:>7} {:>7}\n", "scenario", "protocol", "a", "P", "R", "F1");
  for (const auto& [random, dls] : s.results) {
    for (const auto* r : {&random, &dls}) {
      fmt::print("  {:<20} {:<8} {:>7.4f} {:>7.4f} {:>7.4f} {:>7.4f}\n", r->scenario.str(),
                 scbm::to_string(r->protocol), r->mean.a, r->mean.P, r->mean.R, r->mean.F1);
    }
  }
  if (s.results.size() >= 2) {
    const auto d = scbm::delta_report(s.results[0].first, s.results[1].first);
    const auto ds = scbm::delta_report(s.results[0].second, s.results[1].second);
    fmt::print("\ndelta a={:+.4f} delta_ds a={:+.4f}\n", d.delta.a, ds.delta.a);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scenario-based driving video analysis for cognitive-group separation"};
  app.require_subcommand(1);

  std::string config_path, out_dir, scenario, cohort, embeddings;
  std::optional<std::uint64_t> seed;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "flat key = value config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "run directory");
    sub->add_option("--seed", seed, "overrides the config seed");
    sub->add_option("--scenario", scenario, "restrict the stage to one scenario");
    sub->add_option("--cohort", cohort, "cohort directory (default <run>/cohort)");
  };
  const char* stages[][2] = {
      {"synth", "generate a synthetic cohort"},
      {"ingest", "validate inputs, write exposure and coverage tables"},
      {"embed", "embed clips (synthetic, or --embeddings FILE)"},
      {"reduce", "fit per-scenario PCA"},
      {"rank", "rank scenarios by group distance"},
      {"evaluate", "random and driver-level-separated evaluation"},
      {"report", "results, delta and per-subject miss tables"},
      {"pipeline", "every stage end to end"},
  };
  for (const auto& [name, help] : stages) {
    auto* sub = app.add_subcommand(name, help);
    common(sub);
    if (std::string_view(name) == "embed" || std::string_view(name) == "pipeline") {
      sub->add_option("--embeddings", embeddings, "precomputed embedding file")->check(CLI::ExistingFile);
    }
  }

  CLI11_PARSE(app, argc, argv);
  const std::string stage = app.get_subcommands().front()->get_name();

  try {
    scbm::StageContext ctx;
    ctx.config = scbm::load_config(config_path);
    if (seed) ctx.config.seed = *seed;
    ctx.config.validate();
    if (!out_dir.empty()) {
      ctx.run_dir = out_dir;
    } else if (stage == "synth" || stage == "pipeline") {
      ctx.run_dir = scbm::default_run_dir(*ctx.config.seed);
    } else {
      throw scbm::Error(scbm::ErrorKind::ConfigError, "--out is required for stage " + stage);
    }
    if (!scenario.empty()) ctx.scenario = scbm::ScenarioId(scenario);
    if (!cohort.empty()) ctx.cohort_dir = cohort;
    if (!embeddings.empty()) ctx.embeddings = embeddings;
    ctx.log = &std::cerr;

    if (stage == "synth") scbm::stage_synth(ctx);
    if (stage == "ingest") scbm::stage_ingest(ctx);
    if (stage == "embed") scbm::stage_embed(ctx);
    if (stage == "reduce") scbm::stage_reduce(ctx);
    if (stage == "rank") {
      const auto ranking = scbm::stage_rank(ctx);
      fmt::print("Sc* = {}\n", ranking.best().str());
    }
    if (stage == "evaluate") scbm::stage_evaluate(ctx);
    if (stage == "report") scbm::stage_report(ctx);
    if (stage == "pipeline") print_summary(scbm::run_pipeline(ctx));
    fmt::print(stderr, "run directory: {}\n", ctx.run_dir.string());
  } catch (const scbm::Error& e) {
    fmt::print(stderr, "error[{}]: {}\n", e.kind_name(), e.what());
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    fmt::print(stderr, "error[Internal]: {}\n", e.what());
    return 1;
  }
  return 0;
}
