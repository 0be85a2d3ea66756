#include "scbm/reduction.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>
#include <nlohmann/json.hpp>

#include "scbm/csv.hpp"
#include "scbm/embedding_store.hpp"

namespace scbm {

Eigen::MatrixXd to_eigen(const EmbeddingMatrix& matrix) {
  Eigen::MatrixXd out(matrix.rows(), matrix.dim());
  for (std::size_t i = 0; i < matrix.rows(); ++i) {
    auto row = matrix.row(i);
    for (std::size_t j = 0; j < matrix.dim(); ++j) out(i, j) = row[j];
  }
  return out;
}

PcaModel pca_fit(const Eigen::MatrixXd& data, std::size_t n) {
  const auto rows = static_cast<std::size_t>(data.rows());
  const auto dim = static_cast<std::size_t>(data.cols());
  if (rows < 2) throw Error(ErrorKind::TooFewRows, "PCA needs at least 2 rows");
  if (n == 0 || n > std::min(dim, rows - 1)) {
    throw Error(ErrorKind::InvalidArgument,
                fmt::format("n_components {} outside [1, min(m={}, rows-1={})]", n, dim, rows - 1));
  }

  PcaModel model;
  model.mean = data.colwise().mean().transpose();
  const Eigen::MatrixXd centered = data.rowwise() - model.mean.transpose();

  Eigen::BDCSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  const double tol = static_cast<double>(std::max(rows, dim)) * std::numeric_limits<double>::epsilon() * smax;

  model.components = svd.matrixV().leftCols(static_cast<Eigen::Index>(n));
  model.explained_variance.resize(static_cast<Eigen::Index>(n));
  model.effective_rank = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    if (sv(i) > tol && smax > 0) {
      model.explained_variance(i) = sv(i) * sv(i) / static_cast<double>(rows - 1);
      ++model.effective_rank;
    } else {
      model.explained_variance(i) = 0.0;
    }

    auto col = model.components.col(i);
    Eigen::Index arg = 0;
    double best = -1;
    for (Eigen::Index j = 0; j < col.size(); ++j) {
      if (std::abs(col(j)) > best) {
        best = std::abs(col(j));
        arg = j;
      }
    }
    if (col(arg) < 0) col = -col;
  }
  model.rank_deficient = model.effective_rank < n;
  return model;
}

PcaModel pca_fit(const EmbeddingMatrix& matrix, std::size_t n) { return pca_fit(to_eigen(matrix), n); }

Eigen::MatrixXd pca_project(const PcaModel& model, const Eigen::MatrixXd& data) {
  if (static_cast<std::size_t>(data.cols()) != model.input_dim()) {
    throw Error(ErrorKind::DimMismatch, fmt::format("data dim {} does not match model dim {}",
                                                    data.cols(), model.input_dim()));
  }
  return (data.rowwise() - model.mean.transpose()) * model.components;
}

EmbeddingMatrix pca_transform(const PcaModel& model, const EmbeddingMatrix& matrix) {
  if (matrix.dim() != model.input_dim()) {
    throw Error(ErrorKind::DimMismatch, fmt::format("matrix dim {} does not match model dim {}",
                                                    matrix.dim(), model.input_dim()));
  }
  const Eigen::MatrixXd reduced = pca_project(model, to_eigen(matrix));
  EmbeddingMatrix out(model.n_components());
  std::vector<float> row(model.n_components());
  for (std::size_t i = 0; i < matrix.rows(); ++i) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      row[j] = static_cast<float>(reduced(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
    out.add_row(matrix.key(i), row);
  }
  return out;
}

Eigen::MatrixXd pca_reconstruct(const PcaModel& model, const Eigen::MatrixXd& reduced) {
  if (static_cast<std::size_t>(reduced.cols()) != model.n_components()) {
    throw Error(ErrorKind::DimMismatch, "reduced width does not match component count");
  }
  return (reduced * model.components.transpose()).rowwise() + model.mean.transpose();
}

void write_pca_model(const PcaModel& model, const ScenarioId& scenario, const std::filesystem::path& path) {
  EmbeddingMatrix rows(model.input_dim());
  std::vector<float> buf(model.input_dim());
  for (std::size_t k = 0; k < model.n_components(); ++k) {
    for (std::size_t j = 0; j < buf.size(); ++j) {
      buf[j] = static_cast<float>(model.components(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)));
    }
    rows.add_row({SubjectId("pca"), DriveId("component"), ClipId(std::to_string(k)), scenario,
                  BinaryLabel::NormalAging},
                 buf);
  }
  write_embeddings(rows, path);

  nlohmann::ordered_json meta;
  meta["scenario"] = scenario.str();
  meta["input_dim"] = model.input_dim();
  meta["n_components"] = model.n_components();
  meta["effective_rank"] = model.effective_rank;
  meta["rank_deficient"] = model.rank_deficient;
  meta["explained_variance"] = std::vector<double>(model.explained_variance.data(),
                                                   model.explained_variance.data() + model.explained_variance.size());
  meta["mean"] = std::vector<double>(model.mean.data(), model.mean.data() + model.mean.size());
  auto meta_path = path;
  meta_path += ".meta.json";
  write_file_atomic(meta_path, meta.dump(1) + "\n");
}

}  // namespace scbm
