#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace subgeo {

/// One evaluated inequality `lhs <= rhs + slack` (or `lhs < rhs` when strict).
struct CheckRow {
  std::string predicate;
  std::vector<double> at;  // location: grid point(s), (t, x), (s, t), ...
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  bool strict = false;
  bool ok = true;

  /// Signed distance to violation; negative means the row failed.
  [[nodiscard]] double margin() const { return rhs + slack - lhs; }
};

/// Outcome of a condition check.
///
/// Violations are report content, never exceptions. Reports from disjoint
/// pieces of a check merge associatively (rows concatenate, constants and
/// series are unioned, the pass flag is a conjunction).
class CheckReport {
 public:
  explicit CheckReport(std::string name = {});

  const std::string& name() const { return name_; }

  /// Record `lhs <= rhs + slack`. Returns whether the row holds.
  bool require_le(std::string predicate, std::vector<double> at, double lhs,
                  double rhs, double slack = 0.0);
  /// Record `lhs < rhs`.
  bool require_lt(std::string predicate, std::vector<double> at, double lhs,
                  double rhs);

  void fail(std::string note);
  void note(std::string text) { notes_.push_back(std::move(text)); }
  void mark_unreliable(std::string why);

  void set_constant(const std::string& key, double value) { constants_[key] = value; }
  std::optional<double> constant(const std::string& key) const;
  void set_series(const std::string& key, std::vector<double> values) {
    series_[key] = std::move(values);
  }

  [[nodiscard]] bool passed() const { return passed_ && !unreliable_; }
  [[nodiscard]] bool unreliable() const { return unreliable_; }
  [[nodiscard]] const std::vector<CheckRow>& rows() const { return rows_; }
  [[nodiscard]] const std::vector<std::string>& notes() const { return notes_; }
  [[nodiscard]] const std::map<std::string, double>& constants() const { return constants_; }
  [[nodiscard]] const std::map<std::string, std::vector<double>>& series() const {
    return series_;
  }

  /// First failing row in insertion order.
  [[nodiscard]] std::optional<CheckRow> first_violation() const;
  /// Row with the smallest margin (the tightest or the worst violated).
  [[nodiscard]] std::optional<CheckRow> worst() const;
  /// Smallest margin over all rows; +inf for an empty report.
  [[nodiscard]] double worst_margin() const;
  /// Largest lhs - rhs over rows of a given predicate (-inf when absent).
  [[nodiscard]] double worst_residual(const std::string& predicate) const;
  [[nodiscard]] std::size_t violation_count() const;

  CheckReport& merge(const CheckReport& other);

  std::string summary_line() const;

 private:
  std::string name_;
  bool passed_ = true;
  bool unreliable_ = false;
  std::vector<CheckRow> rows_;
  std::vector<std::string> notes_;
  std::map<std::string, double> constants_;
  std::map<std::string, std::vector<double>> series_;
};

}  // namespace subgeo
