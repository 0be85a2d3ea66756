#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "scbm/classifier.hpp"
#include "scbm/ingestion.hpp"
#include "scbm/scenario_rank.hpp"
#include "scbm/synth.hpp"

namespace scbm {

/// Every tunable of the pipeline. Read from a flat `key = value` file where
/// `#` starts a comment, keys may appear once, and unknown keys are errors.
struct PipelineConfig {
  std::optional<std::uint64_t> seed;

  std::size_t dim = 6144;
  std::size_t n_components = 50;
  int frame_rate = 1;
  DistanceMetric metric = DistanceMetric::Centroid;
  FeatureSpace space = FeatureSpace::Reduced;
  FeatureSpace classifier_space = FeatureSpace::Full;
  ForestParams forest;

  std::size_t dls_k = 5;
  std::size_t dls_r = 3;
  double test_fraction = 0.2;
  std::size_t resamples = 10;
  double min_fraction = 0.0;
  bool cogstat_sign_corrected = false;
  std::vector<ClipStatus> include_statuses{ClipStatus::Pure, ClipStatus::Blackframe};
  std::size_t informative_dims = 16;

  std::size_t synth_n_normal = 34;
  std::size_t synth_n_mci = 26;
  std::size_t synth_n_ad = 9;
  std::size_t synth_clips_per_subject = 8;
  double synth_trip_scale = 1.0;
  std::map<ScenarioId, double> synth_delta{{ScenarioId("fwy-interchange"), 4.0},
                                           {ScenarioId("interstate"), 1.0}};
  double synth_sigma = 1.0;

  /// Throws ConfigError naming the offending field.
  void validate() const;
  std::uint64_t require_seed() const;
  StatusSet statuses() const;
  CohortSpec cohort_spec() const;

  /// Every field in canonical order, one `key = value` line each.
  std::string render() const;
};

/// Throws ConfigError with the line number for syntax problems.
PipelineConfig parse_config(std::string_view text, const std::string& origin = "config");
PipelineConfig load_config(const std::filesystem::path& path);

}  // namespace scbm
