#pragma once

#include <stdexcept>
#include <string>

namespace bayesdr {

/// Base class for every error raised by the library. The three
/// subclasses map onto the CLI exit codes (config 2, data 3, numeric 4).
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

class ConfigError : public Error {
 public:
  using Error::Error;
  explicit ConfigError(const std::string& what) : Error("ConfigError", what) {}
};

class DataError : public Error {
 public:
  using Error::Error;
  explicit DataError(const std::string& what) : Error("DataError", what) {}
};

class NumericError : public Error {
 public:
  using Error::Error;
  explicit NumericError(const std::string& what) : Error("NumericError", what) {}
};

class ZeroVarianceColumn : public DataError {
 public:
  explicit ZeroVarianceColumn(std::size_t column)
      : DataError("ZeroVarianceColumn",
                  "column " + std::to_string(column) + " has zero variance"),
        column_(column) {}
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t column_;
};

class DegenerateResponse : public DataError {
 public:
  explicit DegenerateResponse(const std::string& what)
      : DataError("DegenerateResponse", what) {}
};

class NonPositiveBandwidth : public ConfigError {
 public:
  explicit NonPositiveBandwidth(double phi)
      : ConfigError("NonPositiveBandwidth",
                    "GP bandwidth must be positive, got " + std::to_string(phi)) {}
};

class UnknownScenario : public ConfigError {
 public:
  explicit UnknownScenario(const std::string& name)
      : ConfigError("UnknownScenario", "unknown scenario '" + name + "'") {}
};

class RequiresTwoDraws : public NumericError {
 public:
  explicit RequiresTwoDraws(const std::string& what)
      : NumericError("RequiresTwoDraws", what) {}
};

class TooFewRows : public NumericError {
 public:
  explicit TooFewRows(const std::string& what) : NumericError("TooFewRows", what) {}
};

class TooFewCols : public NumericError {
 public:
  explicit TooFewCols(const std::string& what) : NumericError("TooFewCols", what) {}
};

class RankDeficientDesign : public NumericError {
 public:
  explicit RankDeficientDesign(const std::string& what)
      : NumericError("RankDeficientDesign", what) {}
};

}  // namespace bayesdr
