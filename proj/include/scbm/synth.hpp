#pragma once

#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "scbm/embedding_store.hpp"

namespace scbm {

/// Generation targets for one roadway scenario.
struct ScenarioTarget {
  ScenarioId scenario;
  std::string functional_class;
  std::size_t segments = 0;
  // unique (subject, segment) pairs per three-way group, and all trips
  std::uint64_t normal_unique = 0;
  std::uint64_t mci_unique = 0;
  std::uint64_t ad_unique = 0;
  std::uint64_t total_trips = 0;
  std::vector<double> speed_limits_mph;  // support of the speed-limit draw
  std::vector<double> speed_weights;
  double median_length_mi = 0.2;
  double delta = 0;  // planted class separation, units of sigma
  double sigma = 1;
};

struct CohortSpec {
  std::size_t n_normal = 34;
  std::size_t n_mci = 26;
  std::size_t n_ad = 9;
  std::vector<ScenarioTarget> scenarios;
  /// Clips sampled per subject and scenario (all statuses).
  std::size_t clips_per_subject = 8;
  /// Multiplies every trip target; 1.0 reproduces the targets exactly.
  double trip_scale = 1.0;
  std::uint64_t seed = 0;

  /// Freeway-interchange and interstate scenarios with the published trip
  /// counts and speed/length medians.
  static CohortSpec defaults();
  void validate() const;
};

struct CohortFiles {
  std::string subjects_csv;
  std::string segments_csv;
  std::string trips_csv;
  std::string clips_csv;
  nlohmann::ordered_json ledger;
};

/// Deterministic in the spec: the same seed yields byte-identical files.
/// Throws SpecInvalid.
CohortFiles generate_cohort(const CohortSpec& spec);

/// subjects.csv, segments.csv, trips.csv, clips.csv, ledger.json
void write_cohort(const CohortFiles& files, const std::filesystem::path& dir);

/// Synthetic embedder planted with the ledger's per-scenario delta and sigma.
SyntheticEmbedderSpec embedder_spec_from_ledger(const nlohmann::json& ledger, std::size_t dim,
                                                std::uint64_t seed, std::size_t informative_dims = 16);

}  // namespace scbm
