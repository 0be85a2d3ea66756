#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <nlohmann/json_fwd.hpp>
#include <span>
#include <vector>

#include "scbm/core.hpp"

namespace scbm {

struct ForestParams {
  std::size_t n_trees = 100;
  /// Candidate features per split; 0 means ceil(sqrt(m)).
  std::size_t max_features = 0;
  std::size_t min_leaf = 1;
  /// 0 means unlimited.
  std::size_t max_depth = 0;
  bool bootstrap = true;

  void validate() const;
  std::size_t features_for(std::size_t dim) const;
};

/// Internal nodes route x[feature] <= threshold to `left`. Leaves keep the
/// class counts of the training samples that reached them.
struct TreeNode {
  std::int32_t feature = -1;
  double threshold = 0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::uint32_t n_normal = 0;
  std::uint32_t n_ad = 0;

  bool is_leaf() const noexcept { return feature < 0; }
  /// Majority class; a tie goes to NormalAging.
  BinaryLabel majority() const noexcept {
    return n_ad > n_normal ? BinaryLabel::ADAging : BinaryLabel::NormalAging;
  }

  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

class DecisionTree {
 public:
  DecisionTree() = default;
  explicit DecisionTree(std::vector<TreeNode> nodes);

  const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }
  const TreeNode& leaf_for(std::span<const double> x) const;
  template <class Row>
  BinaryLabel predict_row(const Row& x) const {
    std::int32_t i = 0;
    while (!nodes_[static_cast<std::size_t>(i)].is_leaf()) {
      const auto& n = nodes_[static_cast<std::size_t>(i)];
      i = x[n.feature] <= n.threshold ? n.left : n.right;
    }
    return nodes_[static_cast<std::size_t>(i)].majority();
  }
  std::size_t depth() const;

  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;

 private:
  std::vector<TreeNode> nodes_;
};

struct RandomForestModel {
  std::vector<DecisionTree> trees;
  std::size_t dim = 0;
  ForestParams params;
  std::uint64_t seed = 0;
};

/// Grows one Gini tree over `samples` (row indices into X, repeats allowed).
/// Split thresholds sit midway between consecutive distinct values.
DecisionTree train_tree(const Eigen::MatrixXd& x, std::span<const BinaryLabel> y,
                        std::span<const std::uint32_t> samples, const ForestParams& params,
                        std::uint64_t seed);

/// Each tree sees a bootstrap resample drawn from a stream derived from
/// (seed, tree index).
/// Throws TooFewRows, SingleClass, LengthMismatch.
RandomForestModel rf_train(const Eigen::MatrixXd& x, std::span<const BinaryLabel> y,
                           const ForestParams& params, std::uint64_t seed);

/// Fraction of trees voting AD-aging, per row. Throws DimMismatch.
std::vector<double> rf_predict_proba(const RandomForestModel& model, const Eigen::MatrixXd& x);
/// Majority vote; exactly half the trees voting AD-aging yields NormalAging.
std::vector<BinaryLabel> rf_predict(const RandomForestModel& model, const Eigen::MatrixXd& x);

nlohmann::json forest_to_json(const RandomForestModel& model);
RandomForestModel forest_from_json(const nlohmann::json& j);

struct MetricsReport {
  BinaryLabel positive = BinaryLabel::ADAging;
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
  double accuracy = 0;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  // Set when the ratio had a zero denominator and was reported as 0.
  bool precision_undefined = false;
  bool recall_undefined = false;
  bool f1_undefined = false;

  std::size_t total() const noexcept { return tp + fp + fn + tn; }
};

MetricsReport compute_metrics(std::span<const BinaryLabel> y_true, std::span<const BinaryLabel> y_pred,
                              BinaryLabel positive = BinaryLabel::ADAging);

}  // namespace scbm
