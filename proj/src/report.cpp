#include "subgeo/report.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

namespace subgeo {

CheckReport::CheckReport(std::string name) : name_(std::move(name)) {}

bool CheckReport::require_le(std::string predicate, std::vector<double> at,
                             double lhs, double rhs, double slack) {
  CheckRow row{std::move(predicate), std::move(at), lhs, rhs, slack, false, true};
  row.ok = std::isfinite(lhs) && !std::isnan(rhs) && lhs <= rhs + slack;
  passed_ = passed_ && row.ok;
  rows_.push_back(std::move(row));
  return rows_.back().ok;
}

bool CheckReport::require_lt(std::string predicate, std::vector<double> at,
                             double lhs, double rhs) {
  CheckRow row{std::move(predicate), std::move(at), lhs, rhs, 0.0, true, true};
  row.ok = std::isfinite(lhs) && !std::isnan(rhs) && lhs < rhs;
  passed_ = passed_ && row.ok;
  rows_.push_back(std::move(row));
  return rows_.back().ok;
}

void CheckReport::fail(std::string note) {
  passed_ = false;
  notes_.push_back(std::move(note));
}

void CheckReport::mark_unreliable(std::string why) {
  unreliable_ = true;
  notes_.push_back("unreliable: " + std::move(why));
}

std::optional<double> CheckReport::constant(const std::string& key) const {
  auto it = constants_.find(key);
  if (it == constants_.end()) return std::nullopt;
  return it->second;
}

std::optional<CheckRow> CheckReport::first_violation() const {
  for (const auto& row : rows_)
    if (!row.ok) return row;
  return std::nullopt;
}

std::optional<CheckRow> CheckReport::worst() const {
  if (rows_.empty()) return std::nullopt;
  const CheckRow* best = &rows_.front();
  for (const auto& row : rows_)
    if (row.margin() < best->margin()) best = &row;
  return *best;
}

double CheckReport::worst_margin() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& row : rows_) m = std::min(m, row.margin());
  return m;
}

double CheckReport::worst_residual(const std::string& predicate) const {
  double m = -std::numeric_limits<double>::infinity();
  for (const auto& row : rows_)
    if (row.predicate == predicate) m = std::max(m, row.lhs - row.rhs);
  return m;
}

std::size_t CheckReport::violation_count() const {
  std::size_t n = 0;
  for (const auto& row : rows_) n += row.ok ? 0 : 1;
  return n;
}

CheckReport& CheckReport::merge(const CheckReport& other) {
  passed_ = passed_ && other.passed_;
  unreliable_ = unreliable_ || other.unreliable_;
  rows_.insert(rows_.end(), other.rows_.begin(), other.rows_.end());
  notes_.insert(notes_.end(), other.notes_.begin(), other.notes_.end());
  for (const auto& [k, v] : other.constants_) constants_[k] = v;
  for (const auto& [k, v] : other.series_) series_[k] = v;
  return *this;
}

std::string CheckReport::summary_line() const {
  char buf[256];
  const auto w = worst();
  if (w) {
    std::snprintf(buf, sizeof buf, "%s: %s (%zu rows, %zu violations, worst %s margin %.6g)",
                  name_.c_str(), passed() ? "pass" : "FAIL", rows_.size(),
                  violation_count(), w->predicate.c_str(), w->margin());
  } else {
    std::snprintf(buf, sizeof buf, "%s: %s (no rows)", name_.c_str(),
                  passed() ? "pass" : "FAIL");
  }
  return buf;
}

}  // namespace subgeo
