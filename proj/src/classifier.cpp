#include "scbm/classifier.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <numeric>

#include "scbm/parallel.hpp"
#include "scbm/random.hpp"

namespace scbm {

void ForestParams::validate() const {
  if (n_trees == 0) throw Error(ErrorKind::InvalidArgument, "n_trees must be positive");
  if (min_leaf == 0) throw Error(ErrorKind::InvalidArgument, "min_leaf must be positive");
}

std::size_t ForestParams::features_for(std::size_t dim) const {
  if (max_features != 0) return std::min(max_features, dim);
  auto k = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(dim))));
  while (k * k < dim) ++k;
  while (k > 1 && (k - 1) * (k - 1) >= dim) --k;
  return std::clamp<std::size_t>(k, 1, dim);
}

DecisionTree::DecisionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {
  if (nodes_.empty()) throw Error(ErrorKind::InvalidArgument, "a tree needs at least one node");
  for (const auto& n : nodes_) {
    if (n.is_leaf()) continue;
    const auto size = static_cast<std::int32_t>(nodes_.size());
    if (n.left <= 0 || n.right <= 0 || n.left >= size || n.right >= size || !std::isfinite(n.threshold)) {
      throw Error(ErrorKind::InvalidArgument, "malformed tree node");
    }
  }
}

const TreeNode& DecisionTree::leaf_for(std::span<const double> x) const {
  std::size_t i = 0;
  while (!nodes_[i].is_leaf()) {
    const auto& n = nodes_[i];
    i = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
  }
  return nodes_[i];
}

std::size_t DecisionTree::depth() const {
  std::size_t best = 0;
  std::vector<std::pair<std::int32_t, std::size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [i, d] = stack.back();
    stack.pop_back();
    const auto& n = nodes_[static_cast<std::size_t>(i)];
    if (n.is_leaf()) {
      best = std::max(best, d);
    } else {
      stack.push_back({n.left, d + 1});
      stack.push_back({n.right, d + 1});
    }
  }
  return best;
}

namespace {

struct Split {
  std::int32_t feature = -1;
  double threshold = 0;
  double score = -1;  // Σ_children (a² + b²) / n; larger is purer
  std::size_t left_count = 0;
};

class TreeBuilder {
 public:
  TreeBuilder(const Eigen::MatrixXd& x, std::span<const BinaryLabel> y, const ForestParams& params,
              std::uint64_t seed)
      : x_(x), y_(y), params_(params), rng_(seed), features_(static_cast<std::size_t>(x.cols())) {
    std::iota(features_.begin(), features_.end(), 0);
    mtry_ = params.features_for(features_.size());
  }

  std::vector<TreeNode> build(std::vector<std::uint32_t> samples) {
    nodes_.clear();
    grow(std::move(samples), 0);
    return std::move(nodes_);
  }

 private:
  std::int32_t grow(std::vector<std::uint32_t> samples, std::size_t depth) {
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.emplace_back();
    std::uint32_t n_ad = 0;
    for (auto s : samples) n_ad += (y_[s] == BinaryLabel::ADAging);
    nodes_.back().n_ad = n_ad;
    nodes_.back().n_normal = static_cast<std::uint32_t>(samples.size()) - n_ad;

    const bool pure = n_ad == 0 || n_ad == samples.size();
    const bool depth_capped = params_.max_depth != 0 && depth >= params_.max_depth;
    if (pure || depth_capped || samples.size() < 2 * params_.min_leaf) return id;

    const Split split = find_split(samples);
    if (split.feature < 0) return id;

    std::vector<std::uint32_t> left, right;
    left.reserve(split.left_count);
    right.reserve(samples.size() - split.left_count);
    for (auto s : samples) {
      (x_(s, split.feature) <= split.threshold ? left : right).push_back(s);
    }
    samples.clear();
    samples.shrink_to_fit();

    const auto l = grow(std::move(left), depth + 1);
    const auto r = grow(std::move(right), depth + 1);
    auto& node = nodes_[static_cast<std::size_t>(id)];
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.left = l;
    node.right = r;
    return id;
  }

  // Draws features without replacement; stops after mtry candidates once a
  // valid split exists, otherwise keeps drawing until features run out.
  Split find_split(const std::vector<std::uint32_t>& samples) {
    Split best;
    const std::size_t total = features_.size();
    for (std::size_t drawn = 0; drawn < total; ++drawn) {
      if (drawn >= mtry_ && best.feature >= 0) break;
      const auto j = drawn + rng_.index(total - drawn);
      std::swap(features_[drawn], features_[j]);
      evaluate_feature(features_[drawn], samples, best);
    }
    return best;
  }

  void evaluate_feature(std::int32_t feature, const std::vector<std::uint32_t>& samples, Split& best) {
    values_.clear();
    for (auto s : samples) values_.push_back({x_(s, feature), y_[s] == BinaryLabel::ADAging});
    std::sort(values_.begin(), values_.end());

    const double n = static_cast<double>(values_.size());
    double total_ad = 0;
    for (const auto& v : values_) total_ad += v.second;
    double left_ad = 0;
    for (std::size_t i = 0; i + 1 < values_.size(); ++i) {
      left_ad += values_[i].second;
      if (!(values_[i].first < values_[i + 1].first)) continue;
      const std::size_t left_n = i + 1;
      if (left_n < params_.min_leaf || values_.size() - left_n < params_.min_leaf) continue;
      const double ln = static_cast<double>(left_n);
      const double rn = n - ln;
      const double left_normal = ln - left_ad;
      const double right_ad = total_ad - left_ad;
      const double right_normal = rn - right_ad;
      const double score = (left_ad * left_ad + left_normal * left_normal) / ln +
                           (right_ad * right_ad + right_normal * right_normal) / rn;
      if (score > best.score) {
        const double lo = values_[i].first;
        const double hi = values_[i + 1].first;
        double mid = lo + (hi - lo) / 2;
        if (!(mid < hi) || !std::isfinite(mid)) mid = lo;
        best = {feature, mid, score, left_n};
      }
    }
  }

  const Eigen::MatrixXd& x_;
  std::span<const BinaryLabel> y_;
  const ForestParams& params_;
  Rng rng_;
  std::vector<std::int32_t> features_;
  std::size_t mtry_ = 1;
  std::vector<std::pair<double, bool>> values_;
  std::vector<TreeNode> nodes_;
};

}  // namespace

DecisionTree train_tree(const Eigen::MatrixXd& x, std::span<const BinaryLabel> y,
                        std::span<const std::uint32_t> samples, const ForestParams& params,
                        std::uint64_t seed) {
  params.validate();
  if (static_cast<std::size_t>(x.rows()) != y.size()) {
    throw Error(ErrorKind::LengthMismatch, "feature rows and labels differ in length");
  }
  if (samples.empty()) throw Error(ErrorKind::TooFewRows, "tree needs at least one sample");
  TreeBuilder builder(x, y, params, seed);
  return DecisionTree(builder.build({samples.begin(), samples.end()}));
}

RandomForestModel rf_train(const Eigen::MatrixXd& x, std::span<const BinaryLabel> y,
                           const ForestParams& params, std::uint64_t seed) {
  params.validate();
  if (static_cast<std::size_t>(x.rows()) != y.size()) {
    throw Error(ErrorKind::LengthMismatch, "feature rows and labels differ in length");
  }
  if (y.size() < 2) throw Error(ErrorKind::TooFewRows, "training needs at least 2 rows");
  if (x.cols() == 0) throw Error(ErrorKind::DimMismatch, "training data has no features");
  const auto ad = std::count(y.begin(), y.end(), BinaryLabel::ADAging);
  if (ad == 0 || static_cast<std::size_t>(ad) == y.size()) {
    throw Error(ErrorKind::SingleClass, "training labels contain a single class");
  }

  RandomForestModel model;
  model.dim = static_cast<std::size_t>(x.cols());
  model.params = params;
  model.seed = seed;
  model.trees.resize(params.n_trees);

  const auto n = static_cast<std::uint32_t>(y.size());
  parallel_for(params.n_trees, [&](std::size_t t) {
    const auto tree_seed = derive_seed(seed, t);
    std::vector<std::uint32_t> samples(n);
    if (params.bootstrap) {
      Rng draw(derive_seed(tree_seed, 0xb007));
      for (auto& s : samples) s = static_cast<std::uint32_t>(draw.index(n));
    } else {
      std::iota(samples.begin(), samples.end(), 0u);
    }
    TreeBuilder builder(x, y, params, tree_seed);
    model.trees[t] = DecisionTree(builder.build(std::move(samples)));
  });
  return model;
}

std::vector<double> rf_predict_proba(const RandomForestModel& model, const Eigen::MatrixXd& x) {
  if (static_cast<std::size_t>(x.cols()) != model.dim) {
    throw Error(ErrorKind::DimMismatch, fmt::format("input dim {} does not match model dim {}", x.cols(), model.dim));
  }
  if (model.trees.empty()) throw Error(ErrorKind::InvalidArgument, "forest has no trees");
  std::vector<double> out(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const auto row = x.row(i);
    std::size_t votes = 0;
    for (const auto& tree : model.trees) votes += tree.predict_row(row) == BinaryLabel::ADAging;
    out[static_cast<std::size_t>(i)] = static_cast<double>(votes) / static_cast<double>(model.trees.size());
  }
  return out;
}

std::vector<BinaryLabel> rf_predict(const RandomForestModel& model, const Eigen::MatrixXd& x) {
  const auto proba = rf_predict_proba(model, x);
  std::vector<BinaryLabel> out;
  out.reserve(proba.size());
  for (double p : proba) out.push_back(p > 0.5 ? BinaryLabel::ADAging : BinaryLabel::NormalAging);
  return out;
}

nlohmann::json forest_to_json(const RandomForestModel& model) {
  nlohmann::ordered_json j;
  j["dim"] = model.dim;
  j["seed"] = model.seed;
  j["params"] = {{"n_trees", model.params.n_trees},
                 {"max_features", model.params.max_features},
                 {"min_leaf", model.params.min_leaf},
                 {"max_depth", model.params.max_depth},
                 {"bootstrap", model.params.bootstrap}};
  auto trees = nlohmann::ordered_json::array();
  for (const auto& tree : model.trees) {
    auto feature = nlohmann::ordered_json::array();
    auto threshold = nlohmann::ordered_json::array();
    auto left = nlohmann::ordered_json::array();
    auto right = nlohmann::ordered_json::array();
    auto counts = nlohmann::ordered_json::array();
    for (const auto& n : tree.nodes()) {
      feature.push_back(n.feature);
      threshold.push_back(n.threshold);
      left.push_back(n.left);
      right.push_back(n.right);
      counts.push_back({n.n_normal, n.n_ad});
    }
    trees.push_back({{"feature", std::move(feature)},
                     {"threshold", std::move(threshold)},
                     {"left", std::move(left)},
                     {"right", std::move(right)},
                     {"counts", std::move(counts)}});
  }
  j["trees"] = std::move(trees);
  return nlohmann::json::parse(j.dump());
}

RandomForestModel forest_from_json(const nlohmann::json& j) {
  RandomForestModel model;
  try {
    model.dim = j.at("dim").get<std::size_t>();
    model.seed = j.at("seed").get<std::uint64_t>();
    const auto& p = j.at("params");
    model.params.n_trees = p.at("n_trees").get<std::size_t>();
    model.params.max_features = p.at("max_features").get<std::size_t>();
    model.params.min_leaf = p.at("min_leaf").get<std::size_t>();
    model.params.max_depth = p.at("max_depth").get<std::size_t>();
    model.params.bootstrap = p.at("bootstrap").get<bool>();
    for (const auto& t : j.at("trees")) {
      const auto& feature = t.at("feature");
      std::vector<TreeNode> nodes(feature.size());
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        nodes[i].feature = feature.at(i).get<std::int32_t>();
        nodes[i].threshold = t.at("threshold").at(i).get<double>();
        nodes[i].left = t.at("left").at(i).get<std::int32_t>();
        nodes[i].right = t.at("right").at(i).get<std::int32_t>();
        nodes[i].n_normal = t.at("counts").at(i).at(0).get<std::uint32_t>();
        nodes[i].n_ad = t.at("counts").at(i).at(1).get<std::uint32_t>();
        if (!nodes[i].is_leaf() && static_cast<std::size_t>(nodes[i].feature) >= model.dim) {
          throw Error(ErrorKind::InvalidArgument, "split feature outside model dim");
        }
      }
      model.trees.emplace_back(std::move(nodes));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::FormatError, std::string("forest JSON: ") + e.what());
  }
  return model;
}

MetricsReport compute_metrics(std::span<const BinaryLabel> y_true, std::span<const BinaryLabel> y_pred,
                              BinaryLabel positive) {
  if (y_true.size() != y_pred.size() || y_true.empty()) {
    throw Error(ErrorKind::LengthMismatch,
                fmt::format("label vectors must have equal nonzero length ({} vs {})", y_true.size(), y_pred.size()));
  }
  MetricsReport m;
  m.positive = positive;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const bool actual = y_true[i] == positive;
    const bool predicted = y_pred[i] == positive;
    if (actual && predicted) ++m.tp;
    else if (!actual && predicted) ++m.fp;
    else if (actual && !predicted) ++m.fn;
    else ++m.tn;
  }
  const auto ratio = [](std::size_t num, std::size_t den, bool& undefined) {
    undefined = den == 0;
    return undefined ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  m.accuracy = static_cast<double>(m.tp + m.tn) / static_cast<double>(m.total());
  m.precision = ratio(m.tp, m.tp + m.fp, m.precision_undefined);
  m.recall = ratio(m.tp, m.tp + m.fn, m.recall_undefined);
  m.f1_undefined = m.precision + m.recall == 0;
  m.f1 = m.f1_undefined ? 0.0 : 2 * m.precision * m.recall / (m.precision + m.recall);
  return m;
}

}  // namespace scbm
