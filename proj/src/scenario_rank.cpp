#include "scbm/scenario_rank.hpp"

#include <fmt/format.h>

#include <algorithm>

#include "scbm/csv.hpp"
#include "scbm/parallel.hpp"
#include "scbm/reduction.hpp"

namespace scbm {

namespace {

void check_sets(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() == 0 || b.rows() == 0) throw Error(ErrorKind::EmptyClass, "distance needs nonempty sets");
  if (a.cols() != b.cols()) {
    throw Error(ErrorKind::DimMismatch, fmt::format("set dims differ: {} vs {}", a.cols(), b.cols()));
  }
}

Eigen::MatrixXd rows_of(const Eigen::MatrixXd& data, const std::vector<Eigen::Index>& idx) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), data.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = data.row(idx[i]);
  return out;
}

}  // namespace

std::string_view to_string(DistanceMetric metric) noexcept {
  return metric == DistanceMetric::Centroid ? "centroid" : "avg_l2";
}

std::string_view to_string(FeatureSpace space) noexcept {
  return space == FeatureSpace::Reduced ? "reduced" : "full";
}

DistanceMetric parse_distance_metric(std::string_view text) {
  if (text == "centroid") return DistanceMetric::Centroid;
  if (text == "avg_l2") return DistanceMetric::AvgPairwiseL2;
  throw Error(ErrorKind::InvalidArgument, "metric must be centroid or avg_l2");
}

FeatureSpace parse_feature_space(std::string_view text) {
  if (text == "reduced") return FeatureSpace::Reduced;
  if (text == "full") return FeatureSpace::Full;
  throw Error(ErrorKind::InvalidArgument, "space must be reduced or full");
}

double centroid_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  check_sets(a, b);
  return (a.colwise().mean() - b.colwise().mean()).norm();
}

double avg_pairwise_l2(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  check_sets(a, b);
  double sum = 0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < b.rows(); ++j) sum += (a.row(i) - b.row(j)).norm();
  }
  return sum / (static_cast<double>(a.rows()) * static_cast<double>(b.rows()));
}

double group_distance(DistanceMetric metric, const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return metric == DistanceMetric::Centroid ? centroid_distance(a, b) : avg_pairwise_l2(a, b);
}

const ScenarioId& ScenarioRanking::best() const {
  if (entries.empty()) throw Error(ErrorKind::InvalidArgument, "empty ranking");
  return entries.front().scenario;
}

ScenarioRanking rank_scenarios(const EmbeddingMatrix& embeddings, const RankOptions& options) {
  const auto scenarios = embeddings.scenarios();
  ScenarioRanking ranking;
  ranking.entries.resize(scenarios.size());

  parallel_for(scenarios.size(), [&](std::size_t s) {
    const auto subset = embeddings.scenario_subset(scenarios[s]);
    std::vector<Eigen::Index> normal, ad;
    for (std::size_t i = 0; i < subset.rows(); ++i) {
      (subset.key(i).label == BinaryLabel::NormalAging ? normal : ad).push_back(static_cast<Eigen::Index>(i));
    }
    if (normal.empty() || ad.empty()) {
      throw Error(ErrorKind::EmptyClass, fmt::format("scenario {} has no {} clips", scenarios[s].str(),
                                                     normal.empty() ? "normal" : "ad_aging"));
    }

    ScenarioScore score;
    score.scenario = scenarios[s];
    score.metric = options.metric;
    score.space = options.space;
    Eigen::MatrixXd data = to_eigen(subset);
    if (options.space == FeatureSpace::Reduced) {
      const std::size_t n = std::min({options.n_components, subset.dim(), subset.rows() - 1});
      const auto model = pca_fit(data, n);
      data = pca_project(model, data);
      score.n_components = n;
      score.rank_deficient = model.rank_deficient;
    }
    score.dist_avg = group_distance(options.metric, rows_of(data, normal), rows_of(data, ad));
    ranking.entries[s] = std::move(score);
  });

  std::sort(ranking.entries.begin(), ranking.entries.end(), [](const auto& x, const auto& y) {
    if (x.dist_avg != y.dist_avg) return x.dist_avg > y.dist_avg;
    return x.scenario < y.scenario;
  });
  return ranking;
}

std::string ranking_csv(const ScenarioRanking& ranking) {
  CsvWriter w({"scenario", "metric", "space", "dist_avg", "rank"});
  for (std::size_t i = 0; i < ranking.entries.size(); ++i) {
    const auto& e = ranking.entries[i];
    w.row({e.scenario.str(), std::string(to_string(e.metric)), std::string(to_string(e.space)),
           format_real(e.dist_avg), std::to_string(i + 1)});
  }
  return w.str();
}

}  // namespace scbm
