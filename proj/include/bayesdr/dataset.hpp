#pragma once

#include <Eigen/Dense>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "bayesdr/rng.hpp"

namespace bayesdr {

enum class VariableKind { binary, continuous };

const char* to_string(VariableKind kind);

/// Mean and (n-1) standard deviation of a raw covariate column.
struct ColumnScale {
  double mean = 0.0;
  double sd = 1.0;
};

struct Standardized {
  Eigen::MatrixXd values;
  std::vector<ColumnScale> meta;
};

/// Centres every column to mean 0 and scales to unit (n-1) sd.
/// Throws ZeroVarianceColumn for a constant column.
Standardized standardize(const Eigen::MatrixXd& raw);

/// Returns kBinary when every entry is exactly 0 or 1.
VariableKind detect_kind(const Eigen::VectorXd& v);

/// Observed sample (X, T, Y). Immutable once built; covariates are stored
/// standardized and the original column scales are kept in std_meta().
class Dataset {
 public:
  Dataset(const Eigen::MatrixXd& raw_x, Eigen::VectorXd t, Eigen::VectorXd y,
          VariableKind t_kind, VariableKind y_kind,
          std::vector<std::string> covariate_names = {});

  /// Kinds are detected from the values.
  static Dataset from_raw(const Eigen::MatrixXd& raw_x, Eigen::VectorXd t, Eigen::VectorXd y,
                          std::vector<std::string> covariate_names = {});

  Eigen::Index n() const { return x_.rows(); }
  Eigen::Index p() const { return x_.cols(); }
  const Eigen::MatrixXd& x() const { return x_; }
  const Eigen::VectorXd& t() const { return t_; }
  const Eigen::VectorXd& y() const { return y_; }
  VariableKind t_kind() const { return t_kind_; }
  VariableKind y_kind() const { return y_kind_; }
  const std::vector<ColumnScale>& std_meta() const { return meta_; }
  const std::vector<std::string>& covariate_names() const { return names_; }

 private:
  Eigen::MatrixXd x_;
  Eigen::VectorXd t_;
  Eigen::VectorXd y_;
  VariableKind t_kind_;
  VariableKind y_kind_;
  std::vector<ColumnScale> meta_;
  std::vector<std::string> names_;
};

/// Row indices (0-based) of one nonparametric bootstrap draw.
struct BootstrapIndex {
  std::vector<std::size_t> indices;
  RngStream stream;
};

/// A resampled dataset: rows are indices into a shared, read-only Dataset.
class DatasetView {
 public:
  DatasetView(std::shared_ptr<const Dataset> base, std::vector<std::size_t> rows);

  std::size_t n() const { return rows_.size(); }
  /// Original row index of resampled row i.
  std::size_t row(std::size_t i) const { return rows_[i]; }
  std::span<const std::size_t> rows() const { return rows_; }
  double x(std::size_t i, Eigen::Index j) const { return base_->x()(rows_[i], j); }
  double t(std::size_t i) const { return base_->t()[rows_[i]]; }
  double y(std::size_t i) const { return base_->y()[rows_[i]]; }
  const Dataset& base() const { return *base_; }

 private:
  std::shared_ptr<const Dataset> base_;
  std::vector<std::size_t> rows_;
};

/// n indices drawn uniformly with replacement from [0, n).
std::vector<std::size_t> bootstrap_indices(std::size_t n, Rng& rng);

/// Draws a resample of `data` from `stream`; same stream, same rows.
std::pair<DatasetView, BootstrapIndex> resample(std::shared_ptr<const Dataset> data,
                                                RngStream stream);

/// Multiplicity of each original row in an index vector.
Eigen::VectorXd row_counts(std::span<const std::size_t> indices, std::size_t n);

std::vector<std::size_t> identity_rows(std::size_t n);

}  // namespace bayesdr
