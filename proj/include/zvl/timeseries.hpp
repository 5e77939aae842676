#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "zvl/error.hpp"

namespace zvl {

/// Row-major table of scalar diagnostics. Column 0 is the key, `t` unless
/// built with `keyed` (drift tables use `dt`, sample tables `sample_id`).
class TimeSeries {
 public:
  TimeSeries() : columns_{"t"} {}
  explicit TimeSeries(std::vector<std::string> extra) : columns_{"t"} {
    columns_.insert(columns_.end(), extra.begin(), extra.end());
  }

  static TimeSeries keyed(std::string key, std::vector<std::string> extra) {
    TimeSeries s(std::move(extra));
    s.columns_[0] = std::move(key);
    return s;
  }

  const std::vector<std::string>& columns() const noexcept { return columns_; }
  const std::vector<std::vector<double>>& rows() const noexcept { return rows_; }
  std::size_t size() const noexcept { return rows_.size(); }
  bool empty() const noexcept { return rows_.empty(); }

  void append(std::vector<double> row) {
    if (row.size() != columns_.size())
      throw Error(Errc::invalid_parameter, "row has " + std::to_string(row.size()) +
                                               " values, expected " +
                                               std::to_string(columns_.size()));
    rows_.push_back(std::move(row));
  }

  bool has(const std::string& name) const {
    return std::find(columns_.begin(), columns_.end(), name) != columns_.end();
  }

  std::size_t index(const std::string& name) const {
    auto it = std::find(columns_.begin(), columns_.end(), name);
    if (it == columns_.end()) throw Error(Errc::invalid_parameter, "no column " + name);
    return static_cast<std::size_t>(it - columns_.begin());
  }

  std::vector<double> column(const std::string& name) const {
    const std::size_t c = index(name);
    std::vector<double> out;
    out.reserve(rows_.size());
    for (const auto& r : rows_) out.push_back(r[c]);
    return out;
  }

  std::vector<double> times() const { return column(columns_[0]); }

  /// Appends a column computed elsewhere (e.g. running integrals).
  void add_column(const std::string& name, const std::vector<double>& values) {
    if (values.size() != rows_.size())
      throw Error(Errc::invalid_parameter, "column " + name + " has wrong length");
    columns_.push_back(name);
    for (std::size_t i = 0; i < rows_.size(); ++i) rows_[i].push_back(values[i]);
  }

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<double>> rows_;
};

}  // namespace zvl
