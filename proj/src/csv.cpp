#include "bayesdr/csv.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "bayesdr/errors.hpp"

namespace bayesdr {

CsvTable parse_csv(std::istream& in) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string cell;
  bool in_quotes = false;
  bool cell_started = false;
  char c;
  auto end_cell = [&] {
    record.push_back(std::move(cell));
    cell.clear();
    cell_started = false;
  };
  auto end_record = [&] {
    end_cell();
    // Skip fully blank lines.
    if (!(record.size() == 1 && record[0].empty())) records.push_back(std::move(record));
    record.clear();
  };
  while (in.get(c)) {
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get(c);
          cell.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        cell.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (cell_started && !cell.empty()) throw DataError("stray quote inside unquoted CSV cell");
        in_quotes = true;
        cell_started = true;
        break;
      case ',':
        end_cell();
        break;
      case '\r':
        if (in.peek() == '\n') in.get(c);
        end_record();
        break;
      case '\n':
        end_record();
        break;
      default:
        cell.push_back(c);
        cell_started = true;
    }
  }
  if (in_quotes) throw DataError("unterminated quoted CSV cell");
  if (cell_started || !cell.empty() || !record.empty()) end_record();

  if (records.empty()) throw DataError("CSV input is empty; a header row is required");
  CsvTable table;
  table.header = std::move(records.front());
  // Strip a UTF-8 byte order mark.
  if (!table.header.empty() && table.header[0].rfind("\xEF\xBB\xBF", 0) == 0) {
    table.header[0].erase(0, 3);
  }
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != table.header.size()) {
      throw DataError("CSV row " + std::to_string(r + 1) + " has " +
                      std::to_string(records[r].size()) + " cells, header has " +
                      std::to_string(table.header.size()));
    }
    table.rows.push_back(std::move(records[r]));
  }
  return table;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open input file '" + path + "'");
  return parse_csv(in);
}

std::string csv_escape(const std::string& cell) {
  if (cell.find_first_of(",\"\r\n") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

void write_csv_row(std::ostream& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out << ',';
    out << csv_escape(cells[i]);
  }
  out << '\n';
}

namespace {

double parse_number(const std::string& raw, std::size_t row, const std::string& column) {
  std::string s = raw;
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.pop_back();
  std::size_t start = s.find_first_not_of(" \t");
  s = start == std::string::npos ? std::string() : s.substr(start);
  if (s.empty() || s == "NA" || s == "NaN" || s == "nan" || s == "null") {
    throw DataError("missing value in column '" + column + "' at data row " +
                    std::to_string(row + 1));
  }
  double value = 0.0;
  const char* first = s.data();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value)) {
    throw DataError("non-numeric value '" + raw + "' in column '" + column + "' at data row " +
                    std::to_string(row + 1));
  }
  return value;
}

std::size_t find_column(const CsvTable& table, const std::string& name, const char* role) {
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (table.header[i] == name) return i;
  }
  throw ConfigError("MissingColumn", std::string(role) + " column '" + name + "' not found in header");
}

}  // namespace

Dataset dataset_from_table(const CsvTable& table, const std::string& treatment_col,
                           const std::string& outcome_col) {
  const std::size_t t_idx = find_column(table, treatment_col, "treatment");
  const std::size_t y_idx = find_column(table, outcome_col, "outcome");
  if (t_idx == y_idx) throw ConfigError("treatment and outcome columns must differ");
  std::vector<std::size_t> cov_idx;
  std::vector<std::string> names;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i == t_idx || i == y_idx) continue;
    cov_idx.push_back(i);
    names.push_back(table.header[i]);
  }
  if (cov_idx.empty()) throw DataError("CSV has no covariate columns");
  const auto n = static_cast<Eigen::Index>(table.rows.size());
  Eigen::MatrixXd x(n, static_cast<Eigen::Index>(cov_idx.size()));
  Eigen::VectorXd t(n), y(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& row = table.rows[static_cast<std::size_t>(r)];
    const auto ru = static_cast<std::size_t>(r);
    t[r] = parse_number(row[t_idx], ru, table.header[t_idx]);
    y[r] = parse_number(row[y_idx], ru, table.header[y_idx]);
    for (std::size_t j = 0; j < cov_idx.size(); ++j) {
      x(r, static_cast<Eigen::Index>(j)) = parse_number(row[cov_idx[j]], ru, names[j]);
    }
  }
  return Dataset::from_raw(x, std::move(t), std::move(y), std::move(names));
}

Dataset load_dataset(const std::string& path, const std::string& treatment_col,
                     const std::string& outcome_col) {
  return dataset_from_table(read_csv(path), treatment_col, outcome_col);
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

void write_dataset_csv(std::ostream& out, const Eigen::MatrixXd& raw_x,
                       const Eigen::VectorXd& t, const Eigen::VectorXd& y) {
  std::vector<std::string> header;
  for (Eigen::Index j = 0; j < raw_x.cols(); ++j) header.push_back("X" + std::to_string(j + 1));
  header.emplace_back("T");
  header.emplace_back("Y");
  write_csv_row(out, header);
  std::vector<std::string> cells(header.size());
  for (Eigen::Index i = 0; i < raw_x.rows(); ++i) {
    for (Eigen::Index j = 0; j < raw_x.cols(); ++j) {
      cells[static_cast<std::size_t>(j)] = format_double(raw_x(i, j));
    }
    cells[cells.size() - 2] = format_double(t[i]);
    cells[cells.size() - 1] = format_double(y[i]);
    write_csv_row(out, cells);
  }
}

}  // namespace bayesdr
