#pragma once

#include <Eigen/Dense>
#include <filesystem>

#include "scbm/core.hpp"

namespace scbm {

/// Fitted principal-component projection.
struct PcaModel {
  Eigen::VectorXd mean;                // m
  Eigen::MatrixXd components;          // m x n, orthonormal columns
  Eigen::VectorXd explained_variance;  // n, nonincreasing
  /// Number of components with a nonzero singular value. When smaller than
  /// n the trailing components span part of the null space and carry zero
  /// variance.
  std::size_t effective_rank = 0;
  bool rank_deficient = false;

  std::size_t input_dim() const noexcept { return static_cast<std::size_t>(mean.size()); }
  std::size_t n_components() const noexcept { return static_cast<std::size_t>(components.cols()); }
};

/// Copies the embedding rows into a double matrix (rows = samples).
Eigen::MatrixXd to_eigen(const EmbeddingMatrix& matrix);

/// Top-n principal directions of the mean-centered rows, covariance scaled
/// by 1/(rows-1). Each component's largest-magnitude coordinate is made
/// positive.
/// Throws TooFewRows (rows < 2) and InvalidArgument (n outside [1, min(m, rows-1)]).
PcaModel pca_fit(const Eigen::MatrixXd& data, std::size_t n);
PcaModel pca_fit(const EmbeddingMatrix& matrix, std::size_t n);

/// Row i -> componentsᵀ (x_i − mean). Throws DimMismatch.
Eigen::MatrixXd pca_project(const PcaModel& model, const Eigen::MatrixXd& data);
EmbeddingMatrix pca_transform(const PcaModel& model, const EmbeddingMatrix& matrix);

/// Maps reduced rows back into the input space.
Eigen::MatrixXd pca_reconstruct(const PcaModel& model, const Eigen::MatrixXd& reduced);

/// Components as rows of an embedding container plus `<path>.meta.json`
/// holding the mean, variances, and rank information.
void write_pca_model(const PcaModel& model, const ScenarioId& scenario, const std::filesystem::path& path);

}  // namespace scbm
