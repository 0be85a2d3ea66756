#include "scbm/evaluation.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <nlohmann/json.hpp>
#include <set>

#include "scbm/csv.hpp"
#include "scbm/parallel.hpp"
#include "scbm/random.hpp"
#include "scbm/reduction.hpp"

namespace scbm {

namespace {

constexpr double kDeltaQuantum = 1e10;

double snap(double x) { return std::round(x * kDeltaQuantum) / kDeltaQuantum; }

// C(n, k) saturating at `cap`.
std::uint64_t choose_capped(std::uint64_t n, std::uint64_t k, std::uint64_t cap) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  long double c = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    c = c * static_cast<long double>(n - k + i) / static_cast<long double>(i);
    if (c >= static_cast<long double>(cap)) return cap;
  }
  return static_cast<std::uint64_t>(std::llround(c));
}

Eigen::MatrixXd rows_of(const Eigen::MatrixXd& data, std::span<const std::size_t> idx) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), data.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = data.row(static_cast<Eigen::Index>(idx[i]));
  }
  return out;
}

MetricValues summarize_mean(const std::vector<MetricValues>& v) {
  MetricValues m;
  for (const auto& x : v) {
    m.a += x.a;
    m.P += x.P;
    m.R += x.R;
    m.F1 += x.F1;
  }
  const double n = static_cast<double>(v.size());
  return {m.a / n, m.P / n, m.R / n, m.F1 / n};
}

MetricValues summarize_std(const std::vector<MetricValues>& v, const MetricValues& mean) {
  MetricValues s;
  for (const auto& x : v) {
    s.a += (x.a - mean.a) * (x.a - mean.a);
    s.P += (x.P - mean.P) * (x.P - mean.P);
    s.R += (x.R - mean.R) * (x.R - mean.R);
    s.F1 += (x.F1 - mean.F1) * (x.F1 - mean.F1);
  }
  const double d = static_cast<double>(v.size() - 1);
  return {std::sqrt(s.a / d), std::sqrt(s.P / d), std::sqrt(s.R / d), std::sqrt(s.F1 / d)};
}

std::string optional_real(const std::optional<double>& v) { return v ? format_real(*v) : std::string(); }

nlohmann::json metrics_json(const MetricsReport& m) {
  return {{"tp", m.tp}, {"fp", m.fp}, {"fn", m.fn}, {"tn", m.tn}};
}

MetricsReport metrics_from_json(const nlohmann::json& j, BinaryLabel positive) {
  // rebuilt from counts
  std::vector<BinaryLabel> truth, pred;
  const auto other = positive == BinaryLabel::ADAging ? BinaryLabel::NormalAging : BinaryLabel::ADAging;
  auto push = [&](std::size_t n, BinaryLabel t, BinaryLabel p) {
    truth.insert(truth.end(), n, t);
    pred.insert(pred.end(), n, p);
  };
  push(j.at("tp").get<std::size_t>(), positive, positive);
  push(j.at("fp").get<std::size_t>(), other, positive);
  push(j.at("fn").get<std::size_t>(), positive, other);
  push(j.at("tn").get<std::size_t>(), other, other);
  return compute_metrics(truth, pred, positive);
}

}  // namespace

std::string_view to_string(Protocol protocol) noexcept {
  return protocol == Protocol::Random ? "random" : "dls";
}

Protocol parse_protocol(std::string_view text) {
  if (text == "random") return Protocol::Random;
  if (text == "dls") return Protocol::DLS;
  throw Error(ErrorKind::InvalidArgument, "protocol must be random or dls");
}

SplitPlan make_random_split(std::size_t n_clips, double test_fraction, std::uint64_t seed, std::size_t run) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "test_fraction must be within (0, 1)");
  }
  if (n_clips < 2) throw Error(ErrorKind::TooFewClips, "a random split needs at least 2 clips");
  const auto n_test = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::floor(test_fraction * static_cast<double>(n_clips))));

  std::vector<std::size_t> order(n_clips);
  for (std::size_t i = 0; i < n_clips; ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order.begin(), order.end());

  SplitPlan plan;
  plan.protocol = Protocol::Random;
  plan.run = run;
  plan.test.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
  plan.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
  std::sort(plan.test.begin(), plan.test.end());
  std::sort(plan.train.begin(), plan.train.end());
  return plan;
}

std::vector<SplitPlan> make_random_splits(std::size_t n_clips, double test_fraction, std::size_t resamples,
                                          std::uint64_t seed) {
  if (resamples == 0) throw Error(ErrorKind::InvalidArgument, "resamples must be >= 1");
  std::vector<SplitPlan> plans;
  plans.reserve(resamples);
  for (std::size_t r = 0; r < resamples; ++r) {
    plans.push_back(make_random_split(n_clips, test_fraction, derive_seed(seed, r), r));
  }
  return plans;
}

std::vector<SplitPlan> make_dls_splits(std::span<const ClipKey> clips, std::size_t k, std::size_t r,
                                       std::uint64_t seed) {
  if (r == 0) throw Error(ErrorKind::InvalidArgument, "DLS run count must be >= 1");
  std::set<SubjectId> distinct;
  for (const auto& c : clips) distinct.insert(c.subject);
  const std::vector<SubjectId> subjects(distinct.begin(), distinct.end());
  if (k == 0 || k >= subjects.size()) {
    throw Error(ErrorKind::NotEnoughSubjects,
                fmt::format("leave-{}-out needs more than {} subjects, have {}", k, k, subjects.size()));
  }

  const auto possible = choose_capped(subjects.size(), k, std::numeric_limits<std::uint64_t>::max());
  std::set<std::vector<std::size_t>> used;
  std::vector<SplitPlan> plans;
  Rng rng(seed);
  for (std::size_t run = 0; run < r; ++run) {
    std::vector<std::size_t> chosen;
    for (int attempt = 0; attempt < 1000; ++attempt) {
      std::vector<std::size_t> pool(subjects.size());
      for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
      for (std::size_t i = 0; i < k; ++i) std::swap(pool[i], pool[i + rng.index(pool.size() - i)]);
      chosen.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
      std::sort(chosen.begin(), chosen.end());
      if (!used.contains(chosen) || used.size() >= possible) break;
    }
    used.insert(chosen);

    SplitPlan plan;
    plan.protocol = Protocol::DLS;
    plan.run = run;
    std::set<SubjectId> held;
    for (auto i : chosen) {
      held.insert(subjects[i]);
      plan.left_out.push_back(subjects[i]);
    }
    for (std::size_t i = 0; i < clips.size(); ++i) {
      (held.contains(clips[i].subject) ? plan.test : plan.train).push_back(i);
    }
    plans.push_back(std::move(plan));
  }
  return plans;
}

MetricValues values_of(const MetricsReport& m) { return {m.accuracy, m.precision, m.recall, m.f1}; }

ScenarioResult evaluate_scenario(const ScenarioId& scenario, const EmbeddingMatrix& embeddings,
                                 std::span<const SplitPlan> plans, const EvalOptions& options) {
  if (plans.empty()) throw Error(ErrorKind::InvalidArgument, "no split plans to evaluate");
  const auto subset = embeddings.scenario_subset(scenario);
  const Eigen::MatrixXd data = to_eigen(subset);
  std::vector<BinaryLabel> labels;
  labels.reserve(subset.rows());
  for (const auto& key : subset.keys()) labels.push_back(key.label);

  ScenarioResult result;
  result.scenario = scenario;
  result.protocol = plans.front().protocol;
  result.runs.resize(plans.size());

  for (const auto& plan : plans) {
    if (plan.protocol != result.protocol) {
      throw Error(ErrorKind::ProtocolMismatch, "plans mix protocols");
    }
    for (auto i : plan.train) {
      if (i >= subset.rows()) throw Error(ErrorKind::InvalidArgument, "plan index outside scenario clips");
    }
    for (auto i : plan.test) {
      if (i >= subset.rows()) throw Error(ErrorKind::InvalidArgument, "plan index outside scenario clips");
    }
    if (plan.test.empty()) {
      throw Error(ErrorKind::EmptyTest, fmt::format("run {} of {} has no test clips", plan.run, scenario.str()));
    }
  }

  parallel_for(plans.size(), [&](std::size_t p) {
    const auto& plan = plans[p];
    Eigen::MatrixXd train_x = rows_of(data, plan.train);
    Eigen::MatrixXd test_x = rows_of(data, plan.test);
    std::vector<BinaryLabel> train_y, test_y;
    for (auto i : plan.train) train_y.push_back(labels[i]);
    for (auto i : plan.test) test_y.push_back(labels[i]);

    if (options.classifier_space == FeatureSpace::Reduced) {
      if (train_x.rows() < 2) throw Error(ErrorKind::TooFewRows, "reduced classifier needs >= 2 train rows");
      const auto n = std::min({options.n_components, static_cast<std::size_t>(train_x.cols()),
                               static_cast<std::size_t>(train_x.rows() - 1)});
      const auto model = pca_fit(train_x, n);
      train_x = pca_project(model, train_x);
      test_x = pca_project(model, test_x);
    }

    const auto run_seed = derive_seed(options.seed, (static_cast<std::uint64_t>(plan.protocol) << 32) | plan.run);
    const auto forest = rf_train(train_x, train_y, options.forest, run_seed);
    const auto pred = rf_predict(forest, test_x);

    auto& out = result.runs[p];
    out.run = plan.run;
    out.metrics = compute_metrics(test_y, pred, BinaryLabel::ADAging);
    out.metrics_normal_positive = compute_metrics(test_y, pred, BinaryLabel::NormalAging);
    out.clips.reserve(plan.test.size());
    for (std::size_t i = 0; i < plan.test.size(); ++i) {
      out.clips.push_back({plan.test[i], subset.key(plan.test[i]).subject, test_y[i], pred[i]});
    }
  });

  std::vector<MetricValues> ad_pos, normal_pos;
  for (const auto& run : result.runs) {
    ad_pos.push_back(values_of(run.metrics));
    normal_pos.push_back(values_of(run.metrics_normal_positive));
  }
  result.mean = summarize_mean(ad_pos);
  result.mean_normal_positive = summarize_mean(normal_pos);
  if (ad_pos.size() > 1) result.stddev = summarize_std(ad_pos, result.mean);
  return result;
}

DeltaReport delta_report(const ScenarioResult& first, const ScenarioResult& second) {
  if (first.protocol != second.protocol) {
    throw Error(ErrorKind::ProtocolMismatch, "cannot difference results of different protocols");
  }
  DeltaReport d;
  d.protocol = first.protocol;
  d.first = first.scenario;
  d.second = second.scenario;
  d.delta = {snap(first.mean.a - second.mean.a), snap(first.mean.P - second.mean.P),
             snap(first.mean.R - second.mean.R), snap(first.mean.F1 - second.mean.F1)};
  return d;
}

SubjectMissReport subject_miss_report(std::span<const RunOutcome> runs, const SubjectRegistry& subjects,
                                      std::size_t n_resamples) {
  std::map<SubjectId, std::pair<std::size_t, std::size_t>> counts;
  for (const auto& run : runs) {
    if (run.run >= n_resamples) continue;
    for (const auto& c : run.clips) {
      auto& [n_test, n_error] = counts[c.subject];
      ++n_test;
      n_error += c.truth != c.predicted;
    }
  }
  SubjectMissReport report;
  for (const auto& [id, tally] : counts) {
    SubjectMissRow row;
    row.subject = id;
    if (const auto* s = subjects.find(id)) {
      row.label = s->label;
      row.cogstat = s->cogstat;
      row.moca = s->moca;
    }
    row.n_test = tally.first;
    row.n_error = tally.second;
    row.percent = 100.0 * static_cast<double>(row.n_error) / static_cast<double>(row.n_test);
    report.rows.push_back(std::move(row));
  }
  return report;
}

double pooled_accuracy(std::span<const RunOutcome> runs, std::size_t n_resamples) {
  std::size_t total = 0, correct = 0;
  for (const auto& run : runs) {
    if (run.run >= n_resamples) continue;
    total += run.metrics.total();
    correct += run.metrics.tp + run.metrics.tn;
  }
  return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
}

std::string results_csv(std::span<const ScenarioResult> results, bool normal_positive) {
  CsvWriter w({"scenario", "protocol", "run", "a", "P", "R", "F1"});
  auto emit = [&](const ScenarioResult& r, const std::string& run, const MetricValues& v) {
    w.row({r.scenario.str(), std::string(to_string(r.protocol)), run, format_real(v.a), format_real(v.P),
           format_real(v.R), format_real(v.F1)});
  };
  for (const auto& r : results) {
    for (const auto& run : r.runs) {
      emit(r, std::to_string(run.run), values_of(normal_positive ? run.metrics_normal_positive : run.metrics));
    }
    emit(r, "mean", normal_positive ? r.mean_normal_positive : r.mean);
    if (!normal_positive && r.stddev) emit(r, "std", *r.stddev);
  }
  return w.str();
}

std::string delta_csv(const DeltaReport& random, const DeltaReport& dls) {
  CsvWriter w({"metric", "delta", "delta_ds"});
  w.row({"a", format_real(random.delta.a), format_real(dls.delta.a)});
  w.row({"P", format_real(random.delta.P), format_real(dls.delta.P)});
  w.row({"R", format_real(random.delta.R), format_real(dls.delta.R)});
  w.row({"F1", format_real(random.delta.F1), format_real(dls.delta.F1)});
  return w.str();
}

std::string subject_miss_csv(const SubjectMissReport& report) {
  CsvWriter w({"subject_id", "label", "cogstat", "moca", "n_test", "n_error", "percent"});
  for (const auto& r : report.rows) {
    w.row({r.subject.str(), r.label ? std::string(to_string(*r.label)) : std::string(), optional_real(r.cogstat),
           optional_real(r.moca), std::to_string(r.n_test), std::to_string(r.n_error), format_real(r.percent)});
  }
  return w.str();
}

nlohmann::json result_to_json(const ScenarioResult& result) {
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& run : result.runs) {
    nlohmann::json clips = nlohmann::json::array();
    for (const auto& c : run.clips) {
      clips.push_back({c.row, c.subject.str(), std::string(to_string(c.truth)), std::string(to_string(c.predicted))});
    }
    runs.push_back({{"run", run.run},
                    {"ad_positive", metrics_json(run.metrics)},
                    {"normal_positive", metrics_json(run.metrics_normal_positive)},
                    {"clips", std::move(clips)}});
  }
  return {{"scenario", result.scenario.str()},
          {"protocol", std::string(to_string(result.protocol))},
          {"runs", std::move(runs)}};
}

ScenarioResult result_from_json(const nlohmann::json& j) {
  ScenarioResult r;
  try {
    r.scenario = ScenarioId(j.at("scenario").get<std::string>());
    r.protocol = parse_protocol(j.at("protocol").get<std::string>());
    std::vector<MetricValues> ad_pos, normal_pos;
    for (const auto& jr : j.at("runs")) {
      RunOutcome run;
      run.run = jr.at("run").get<std::size_t>();
      run.metrics = metrics_from_json(jr.at("ad_positive"), BinaryLabel::ADAging);
      run.metrics_normal_positive = metrics_from_json(jr.at("normal_positive"), BinaryLabel::NormalAging);
      for (const auto& jc : jr.at("clips")) {
        run.clips.push_back({jc.at(0).get<std::size_t>(), SubjectId(jc.at(1).get<std::string>()),
                             parse_binary_label(jc.at(2).get<std::string>()),
                             parse_binary_label(jc.at(3).get<std::string>())});
      }
      ad_pos.push_back(values_of(run.metrics));
      normal_pos.push_back(values_of(run.metrics_normal_positive));
      r.runs.push_back(std::move(run));
    }
    if (r.runs.empty()) throw Error(ErrorKind::FormatError, "evaluation result without runs");
    r.mean = summarize_mean(ad_pos);
    r.mean_normal_positive = summarize_mean(normal_pos);
    if (ad_pos.size() > 1) r.stddev = summarize_std(ad_pos, r.mean);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::FormatError, std::string("evaluation JSON: ") + e.what());
  }
  return r;
}

}  // namespace scbm
