#pragma once

#include <cstring>
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "clarsta/types.hpp"

namespace clarsta {

/// Append-only record of objective evaluations. Points are identified by their
/// exact bit pattern, so asking for a point already on record never calls the
/// oracle again.
template <typename Scalar>
class EvaluationLedger {
 public:
  struct Record {
    Vector<Scalar> point;
    Scalar value;
    bool feasible;
  };

  std::size_t nf() const { return records_.size(); }
  const Record& operator[](std::size_t i) const { return records_.at(i); }
  const std::vector<Record>& records() const { return records_; }

  std::optional<std::size_t> find(const Vector<Scalar>& point) const {
    const auto it = index_.find(key(point));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  /// Stores a new evaluation. The point must not already be on record.
  std::size_t append(Vector<Scalar> point, Scalar value, bool feasible) {
    auto [it, inserted] = index_.emplace(key(point), records_.size());
    if (!inserted) throw std::logic_error("EvaluationLedger: point evaluated twice");
    records_.push_back({std::move(point), value, feasible});
    return it->second;
  }

  /// Index of the lowest value among feasible records; earliest wins ties.
  std::optional<std::size_t> best_feasible() const {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < records_.size(); ++i) {
      if (records_[i].feasible && (!best || records_[i].value < records_[*best].value)) best = i;
    }
    return best;
  }

  /// True when every stored point has a distinct bit pattern.
  bool points_unique() const { return index_.size() == records_.size(); }

 private:
  static std::string key(const Vector<Scalar>& point) {
    std::string k(static_cast<std::size_t>(point.size()) * sizeof(Scalar), '\0');
    std::memcpy(k.data(), point.data(), k.size());
    return k;
  }

  std::vector<Record> records_;
  std::unordered_map<std::string, std::size_t> index_;
};

}  // namespace clarsta
