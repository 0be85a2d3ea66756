#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "scbm/core.hpp"

namespace scbm {

enum class DistanceMetric { Centroid, AvgPairwiseL2 };
enum class FeatureSpace { Reduced, Full };

std::string_view to_string(DistanceMetric metric) noexcept;
std::string_view to_string(FeatureSpace space) noexcept;
DistanceMetric parse_distance_metric(std::string_view text);
FeatureSpace parse_feature_space(std::string_view text);

/// ‖mean(A) − mean(B)‖₂ with one point per row. Throws EmptyClass, DimMismatch.
double centroid_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Mean Euclidean distance over all |A|·|B| cross pairs.
double avg_pairwise_l2(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

double group_distance(DistanceMetric metric, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

struct ScenarioScore {
  ScenarioId scenario;
  double dist_avg = 0;
  DistanceMetric metric = DistanceMetric::Centroid;
  FeatureSpace space = FeatureSpace::Reduced;
  std::size_t n_components = 0;  // 0 in the full space
  bool rank_deficient = false;
};

/// Sorted by dist_avg descending, ties by scenario id ascending.
struct ScenarioRanking {
  std::vector<ScenarioScore> entries;

  const ScenarioId& best() const;
};

struct RankOptions {
  DistanceMetric metric = DistanceMetric::Centroid;
  FeatureSpace space = FeatureSpace::Reduced;
  /// Upper bound on the PCA width; clamped to min(m, rows-1) per scenario.
  std::size_t n_components = 50;
};

/// Scores every scenario in `embeddings` by the distance between its
/// Normal-aging and AD-aging rows. In the reduced space a PCA is fitted to
/// each scenario's own rows. Throws EmptyClass when a scenario lacks a class.
ScenarioRanking rank_scenarios(const EmbeddingMatrix& embeddings, const RankOptions& options);

/// `scenario,metric,space,dist_avg,rank`
std::string ranking_csv(const ScenarioRanking& ranking);

}  // namespace scbm
