#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "bayesdr/dataset.hpp"

namespace bayesdr {

/// RFC-4180 table: header plus rows of raw cell strings.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable parse_csv(std::istream& in);
CsvTable read_csv(const std::string& path);

/// Quotes a cell only when it contains a comma, quote or line break.
std::string csv_escape(const std::string& cell);
void write_csv_row(std::ostream& out, const std::vector<std::string>& cells);

/// Builds a Dataset from a CSV file. The named treatment and outcome
/// columns are pulled out; every other column becomes a covariate.
/// Unknown column names raise ConfigError; empty, NA or non-numeric cells
/// raise DataError.
Dataset load_dataset(const std::string& path, const std::string& treatment_col,
                     const std::string& outcome_col);
Dataset dataset_from_table(const CsvTable& table, const std::string& treatment_col,
                           const std::string& outcome_col);

/// Writes X (raw scale), T and Y with header X1..Xp,T,Y.
void write_dataset_csv(std::ostream& out, const Eigen::MatrixXd& raw_x,
                       const Eigen::VectorXd& t, const Eigen::VectorXd& y);

/// Shortest decimal string that round-trips the double.
std::string format_double(double value);

}  // namespace bayesdr
