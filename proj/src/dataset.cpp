#include "bayesdr/dataset.hpp"

#include <cmath>
#include <numeric>

#include "bayesdr/errors.hpp"

namespace bayesdr {

const char* to_string(VariableKind kind) {
  return kind == VariableKind::binary ? "binary" : "continuous";
}

Standardized standardize(const Eigen::MatrixXd& raw) {
  const Eigen::Index n = raw.rows();
  if (n < 2) throw DataError("standardize needs at least two rows");
  Standardized out{raw, std::vector<ColumnScale>(static_cast<std::size_t>(raw.cols()))};
  for (Eigen::Index j = 0; j < raw.cols(); ++j) {
    const double mean = raw.col(j).mean();
    const double ss = (raw.col(j).array() - mean).square().sum();
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (!(sd > 0.0) || sd <= 1e-12 * std::max(1.0, std::abs(mean))) {
      throw ZeroVarianceColumn(static_cast<std::size_t>(j));
    }
    out.values.col(j) = (raw.col(j).array() - mean) / sd;
    out.meta[static_cast<std::size_t>(j)] = ColumnScale{mean, sd};
  }
  return out;
}

VariableKind detect_kind(const Eigen::VectorXd& v) {
  for (double value : v) {
    if (value != 0.0 && value != 1.0) return VariableKind::continuous;
  }
  return VariableKind::binary;
}

namespace {

void check_binary(const Eigen::VectorXd& v, const char* what) {
  for (double value : v) {
    if (value != 0.0 && value != 1.0) {
      throw DataError(std::string(what) + " is declared binary but contains " +
                      std::to_string(value));
    }
  }
}

}  // namespace

Dataset::Dataset(const Eigen::MatrixXd& raw_x, Eigen::VectorXd t, Eigen::VectorXd y,
                 VariableKind t_kind, VariableKind y_kind,
                 std::vector<std::string> covariate_names)
    : t_(std::move(t)), y_(std::move(y)), t_kind_(t_kind), y_kind_(y_kind),
      names_(std::move(covariate_names)) {
  const Eigen::Index n = raw_x.rows();
  if (n < 2) throw DataError("dataset needs at least two rows");
  if (raw_x.cols() < 1) throw DataError("dataset needs at least one covariate");
  if (t_.size() != n || y_.size() != n) {
    throw DataError("treatment/outcome length does not match covariate rows");
  }
  if (!raw_x.allFinite() || !t_.allFinite() || !y_.allFinite()) {
    throw DataError("dataset contains non-finite values");
  }
  if (t_kind_ == VariableKind::binary) {
    check_binary(t_, "treatment");
    const double treated = t_.sum();
    if (treated < 1.0 || treated > static_cast<double>(n) - 1.0) {
      throw DataError("binary treatment needs at least one treated and one control unit");
    }
  }
  if (y_kind_ == VariableKind::binary) check_binary(y_, "outcome");
  if (names_.empty()) {
    for (Eigen::Index j = 0; j < raw_x.cols(); ++j) names_.push_back("X" + std::to_string(j + 1));
  }
  if (static_cast<Eigen::Index>(names_.size()) != raw_x.cols()) {
    throw DataError("covariate name count does not match columns");
  }
  Standardized s = standardize(raw_x);
  x_ = std::move(s.values);
  meta_ = std::move(s.meta);
}

Dataset Dataset::from_raw(const Eigen::MatrixXd& raw_x, Eigen::VectorXd t, Eigen::VectorXd y,
                          std::vector<std::string> covariate_names) {
  const VariableKind tk = detect_kind(t);
  const VariableKind yk = detect_kind(y);
  return Dataset(raw_x, std::move(t), std::move(y), tk, yk, std::move(covariate_names));
}

DatasetView::DatasetView(std::shared_ptr<const Dataset> base, std::vector<std::size_t> rows)
    : base_(std::move(base)), rows_(std::move(rows)) {
  const auto n = static_cast<std::size_t>(base_->n());
  for (std::size_t r : rows_) {
    if (r >= n) throw DataError("row index out of range in dataset view");
  }
}

std::vector<std::size_t> bootstrap_indices(std::size_t n, Rng& rng) {
  std::vector<std::size_t> out(n);
  for (auto& idx : out) idx = static_cast<std::size_t>(rng.index(n));
  return out;
}

std::pair<DatasetView, BootstrapIndex> resample(std::shared_ptr<const Dataset> data,
                                                RngStream stream) {
  const auto n = static_cast<std::size_t>(data->n());
  if (n < 2) throw DataError("resample needs at least two rows");
  Rng rng(stream);
  BootstrapIndex index{bootstrap_indices(n, rng), stream};
  DatasetView view(std::move(data), index.indices);
  return {std::move(view), std::move(index)};
}

Eigen::VectorXd row_counts(std::span<const std::size_t> indices, std::size_t n) {
  Eigen::VectorXd counts = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
  for (std::size_t i : indices) counts[static_cast<Eigen::Index>(i)] += 1.0;
  return counts;
}

std::vector<std::size_t> identity_rows(std::size_t n) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return rows;
}

}  // namespace bayesdr
