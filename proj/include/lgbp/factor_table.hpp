#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace lgbp {

using VarId = int;

/// Log-space payload. Extended precision keeps the lifted and ground engines
/// in lock-step far longer on oscillating models, where rounding noise is
/// amplified every iteration.
using LogReal = long double;

// Values below this are treated as log-zero.
inline constexpr double kLogFloor = -700.0;

/// Dense potential over an ordered variable scope, stored in log space.
/// Layout is row-major with the first scope variable most significant.
class FactorTable {
public:
  FactorTable() : logv_(1, 0.0) {}  // scalar one

  FactorTable(std::vector<VarId> scope, std::vector<int> cards);
  FactorTable(std::vector<VarId> scope, std::vector<int> cards,
              std::vector<LogReal> logValues);

  static FactorTable scalar(double logValue);

  const std::vector<VarId>& scope() const { return scope_; }
  const std::vector<int>& cards() const { return cards_; }
  const std::vector<LogReal>& logValues() const { return logv_; }
  std::vector<LogReal>& logValues() { return logv_; }
  std::size_t size() const { return logv_.size(); }

  int cardOf(VarId v) const;
  bool hasVar(VarId v) const;

  /// Flat index of an assignment given in scope order.
  std::size_t indexOf(const std::vector<int>& assignment) const;
  LogReal logAt(const std::vector<int>& assignment) const;

private:
  std::vector<VarId> scope_;
  std::vector<int> cards_;
  std::vector<LogReal> logv_;
};

FactorTable multiply(const FactorTable& a, const FactorTable& b);
FactorTable divide(const FactorTable& num, const FactorTable& den);
FactorTable marginalize_sum(const FactorTable& t, const std::vector<VarId>& keep);
FactorTable rename(const FactorTable& t,
                   const std::vector<std::pair<VarId, VarId>>& mapping);
FactorTable power(const FactorTable& t, long k);
FactorTable normalize(const FactorTable& t);

/// log(sum(exp(values))) in index order.
LogReal log_total(const FactorTable& t);

/// Convex combination in log space: (1-lambda)*old + lambda*next.
/// Scopes must be identical (same order).
FactorTable damp(const FactorTable& oldTable, const FactorTable& nextTable,
                 double lambda);

/// Max absolute log difference; scopes must contain the same variables.
double max_abs_log_diff(const FactorTable& a, const FactorTable& b);

/// Running count of table operations, used to check that lifted iteration
/// cost does not depend on the domain size.
std::uint64_t table_op_count();
void reset_table_op_count();

}  // namespace lgbp
