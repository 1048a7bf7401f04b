#include "lgbp/factor_table.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <set>
#include <string>

#include "lgbp/errors.hpp"

namespace lgbp {

namespace {

std::atomic<std::uint64_t> g_opCount{0};

void countOp() { g_opCount.fetch_add(1, std::memory_order_relaxed); }

LogReal logAdd(LogReal a, LogReal b) {
  if (a == -std::numeric_limits<LogReal>::infinity()) return b;
  if (b == -std::numeric_limits<LogReal>::infinity()) return a;
  LogReal m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

LogReal clampLog(LogReal v) { return v < kLogFloor ? kLogFloor : v; }

// Stride of each axis of `rscope` into t's flat index (0 for absent vars).
std::vector<std::size_t> alignedStrides(const FactorTable& t,
                                        const std::vector<VarId>& rscope) {
  const auto& sc = t.scope();
  const auto& cd = t.cards();
  std::vector<std::size_t> own(sc.size());
  std::size_t s = 1;
  for (int i = static_cast<int>(sc.size()) - 1; i >= 0; --i) {
    own[i] = s;
    s *= static_cast<std::size_t>(cd[i]);
  }
  std::vector<std::size_t> out(rscope.size(), 0);
  for (std::size_t i = 0; i < rscope.size(); ++i) {
    for (std::size_t j = 0; j < sc.size(); ++j) {
      if (sc[j] == rscope[i]) out[i] = own[j];
    }
  }
  return out;
}

struct Odometer {
  explicit Odometer(const std::vector<int>& cards)
      : cards_(cards), digits_(cards.size(), 0) {}

  const std::vector<int>& digits() const { return digits_; }

  bool next() {
    for (int i = static_cast<int>(digits_.size()) - 1; i >= 0; --i) {
      if (++digits_[i] < cards_[i]) return true;
      digits_[i] = 0;
    }
    return false;
  }

  const std::vector<int>& cards_;
  std::vector<int> digits_;
};

void checkSharedCards(const FactorTable& a, const FactorTable& b) {
  for (std::size_t i = 0; i < a.scope().size(); ++i) {
    VarId v = a.scope()[i];
    if (b.hasVar(v) && b.cardOf(v) != a.cards()[i]) {
      fail(ErrorCode::CardinalityMismatch,
           "variable " + std::to_string(v) + " has conflicting cardinalities");
    }
  }
}

}  // namespace

FactorTable::FactorTable(std::vector<VarId> scope, std::vector<int> cards)
    : scope_(std::move(scope)), cards_(std::move(cards)) {
  if (scope_.size() != cards_.size()) {
    fail(ErrorCode::Internal, "scope/cards size mismatch");
  }
  std::set<VarId> uniq(scope_.begin(), scope_.end());
  if (uniq.size() != scope_.size()) {
    fail(ErrorCode::Internal, "duplicate variable in scope");
  }
  std::size_t n = 1;
  for (int c : cards_) n *= static_cast<std::size_t>(c);
  logv_.assign(n, 0.0);
}

FactorTable::FactorTable(std::vector<VarId> scope, std::vector<int> cards,
                         std::vector<LogReal> logValues)
    : FactorTable(std::move(scope), std::move(cards)) {
  if (logValues.size() != logv_.size()) {
    fail(ErrorCode::TableLengthMismatch,
         "expected " + std::to_string(logv_.size()) + " values, got " +
             std::to_string(logValues.size()));
  }
  logv_ = std::move(logValues);
}

FactorTable FactorTable::scalar(double logValue) {
  FactorTable t;
  t.logv_[0] = logValue;
  return t;
}

int FactorTable::cardOf(VarId v) const {
  for (std::size_t i = 0; i < scope_.size(); ++i) {
    if (scope_[i] == v) return cards_[i];
  }
  fail(ErrorCode::UnknownVariable, "variable " + std::to_string(v));
}

bool FactorTable::hasVar(VarId v) const {
  return std::find(scope_.begin(), scope_.end(), v) != scope_.end();
}

std::size_t FactorTable::indexOf(const std::vector<int>& assignment) const {
  std::size_t idx = 0;
  for (std::size_t i = 0; i < scope_.size(); ++i) {
    idx = idx * static_cast<std::size_t>(cards_[i]) +
          static_cast<std::size_t>(assignment[i]);
  }
  return idx;
}

LogReal FactorTable::logAt(const std::vector<int>& assignment) const {
  return logv_[indexOf(assignment)];
}

FactorTable multiply(const FactorTable& a, const FactorTable& b) {
  countOp();
  checkSharedCards(a, b);
  std::vector<VarId> rscope = a.scope();
  std::vector<int> rcards = a.cards();
  for (std::size_t i = 0; i < b.scope().size(); ++i) {
    if (!a.hasVar(b.scope()[i])) {
      rscope.push_back(b.scope()[i]);
      rcards.push_back(b.cards()[i]);
    }
  }
  FactorTable out(rscope, rcards);
  auto sa = alignedStrides(a, rscope);
  auto sb = alignedStrides(b, rscope);
  if (rscope.empty()) {
    out.logValues()[0] = clampLog(a.logValues()[0] + b.logValues()[0]);
    return out;
  }
  Odometer od(rcards);
  std::size_t i = 0;
  do {
    std::size_t ia = 0, ib = 0;
    for (std::size_t k = 0; k < rscope.size(); ++k) {
      ia += sa[k] * static_cast<std::size_t>(od.digits()[k]);
      ib += sb[k] * static_cast<std::size_t>(od.digits()[k]);
    }
    out.logValues()[i++] = clampLog(a.logValues()[ia] + b.logValues()[ib]);
  } while (od.next());
  return out;
}

FactorTable divide(const FactorTable& num, const FactorTable& den) {
  countOp();
  for (VarId v : den.scope()) {
    if (!num.hasVar(v)) {
      fail(ErrorCode::ScopeNotContained,
           "denominator variable " + std::to_string(v) + " not in numerator");
    }
  }
  checkSharedCards(den, num);
  FactorTable out(num.scope(), num.cards());
  auto sd = alignedStrides(den, num.scope());
  if (num.scope().empty()) {
    LogReal a = num.logValues()[0], b = den.logValues()[0];
    out.logValues()[0] = (a <= kLogFloor && b <= kLogFloor) ? 0.0 : clampLog(a - b);
    return out;
  }
  Odometer od(num.cards());
  std::size_t i = 0;
  do {
    std::size_t id = 0;
    for (std::size_t k = 0; k < num.scope().size(); ++k) {
      id += sd[k] * static_cast<std::size_t>(od.digits()[k]);
    }
    LogReal a = num.logValues()[i], b = den.logValues()[id];
    out.logValues()[i++] = (a <= kLogFloor && b <= kLogFloor) ? 0.0 : clampLog(a - b);
  } while (od.next());
  return out;
}

FactorTable marginalize_sum(const FactorTable& t, const std::vector<VarId>& keep) {
  countOp();
  std::vector<int> kcards;
  kcards.reserve(keep.size());
  for (VarId v : keep) {
    if (!t.hasVar(v)) {
      fail(ErrorCode::UnknownVariable,
           "variable " + std::to_string(v) + " not in scope");
    }
    kcards.push_back(t.cardOf(v));
  }
  FactorTable out(keep, kcards);
  std::fill(out.logValues().begin(), out.logValues().end(),
            -std::numeric_limits<LogReal>::infinity());
  auto so = alignedStrides(out, t.scope());
  if (t.scope().empty()) {
    out.logValues()[0] = t.logValues()[0];
    return out;
  }
  Odometer od(t.cards());
  std::size_t i = 0;
  do {
    std::size_t io = 0;
    for (std::size_t k = 0; k < t.scope().size(); ++k) {
      io += so[k] * static_cast<std::size_t>(od.digits()[k]);
    }
    out.logValues()[io] = logAdd(out.logValues()[io], t.logValues()[i++]);
  } while (od.next());
  for (LogReal& v : out.logValues()) v = clampLog(v);
  return out;
}

FactorTable rename(const FactorTable& t,
                   const std::vector<std::pair<VarId, VarId>>& mapping) {
  countOp();
  std::vector<VarId> nscope(t.scope().size());
  std::vector<bool> covered(t.scope().size(), false);
  for (const auto& [from, to] : mapping) {
    bool found = false;
    for (std::size_t i = 0; i < t.scope().size(); ++i) {
      if (t.scope()[i] == from) {
        if (covered[i]) fail(ErrorCode::NotABijection, "duplicate source variable");
        covered[i] = true;
        nscope[i] = to;
        found = true;
      }
    }
    if (!found) {
      fail(ErrorCode::NotABijection,
           "mapping source " + std::to_string(from) + " not in scope");
    }
  }
  for (std::size_t i = 0; i < t.scope().size(); ++i) {
    if (!covered[i]) {
      fail(ErrorCode::NotABijection,
           "scope variable " + std::to_string(t.scope()[i]) + " not mapped");
    }
  }
  std::set<VarId> targets(nscope.begin(), nscope.end());
  if (targets.size() != nscope.size()) {
    fail(ErrorCode::NotABijection, "mapping targets collide");
  }
  return FactorTable(nscope, t.cards(), t.logValues());
}

FactorTable power(const FactorTable& t, long k) {
  countOp();
  if (k < 0) fail(ErrorCode::NegativeExponent, "power exponent < 0");
  FactorTable out(t.scope(), t.cards());
  for (std::size_t i = 0; i < t.size(); ++i) {
    LogReal v = t.logValues()[i] * static_cast<LogReal>(k);
    out.logValues()[i] = std::clamp<LogReal>(v, kLogFloor, 700.0);
  }
  return out;
}

LogReal log_total(const FactorTable& t) {
  LogReal m = *std::max_element(t.logValues().begin(), t.logValues().end());
  LogReal s = 0.0;
  for (LogReal v : t.logValues()) s += std::exp(v - m);
  return m + std::log(s);
}

FactorTable normalize(const FactorTable& t) {
  countOp();
  LogReal z = log_total(t);
  FactorTable out(t.scope(), t.cards());
  for (std::size_t i = 0; i < t.size(); ++i) {
    out.logValues()[i] = clampLog(t.logValues()[i] - z);
  }
  return out;
}

FactorTable damp(const FactorTable& oldTable, const FactorTable& nextTable,
                 double lambda) {
  countOp();
  if (oldTable.scope() != nextTable.scope()) {
    fail(ErrorCode::Internal, "damp requires identical scopes");
  }
  FactorTable out(oldTable.scope(), oldTable.cards());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out.logValues()[i] =
        (1.0 - lambda) * oldTable.logValues()[i] + lambda * nextTable.logValues()[i];
  }
  return out;
}

double max_abs_log_diff(const FactorTable& a, const FactorTable& b) {
  FactorTable br = marginalize_sum(b, a.scope());
  LogReal d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    d = std::max(d, std::abs(a.logValues()[i] - br.logValues()[i]));
  }
  return static_cast<double>(d);
}

std::uint64_t table_op_count() { return g_opCount.load(); }
void reset_table_op_count() { g_opCount.store(0); }

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::UnknownPredicate: return "UnknownPredicate";
    case ErrorCode::UnknownDomain: return "UnknownDomain";
    case ErrorCode::TableLengthMismatch: return "TableLengthMismatch";
    case ErrorCode::NonPositiveValue: return "NonPositiveValue";
    case ErrorCode::ArityUnsupported: return "ArityUnsupported";
    case ErrorCode::ConstantTerm: return "ConstantTerm";
    case ErrorCode::LvarDomainMismatch: return "LvarDomainMismatch";
    case ErrorCode::DomainTooSmall: return "DomainTooSmall";
    case ErrorCode::StateSpaceTooLarge: return "StateSpaceTooLarge";
    case ErrorCode::CardinalityMismatch: return "CardinalityMismatch";
    case ErrorCode::ScopeNotContained: return "ScopeNotContained";
    case ErrorCode::UnknownVariable: return "UnknownVariable";
    case ErrorCode::NotABijection: return "NotABijection";
    case ErrorCode::NegativeExponent: return "NegativeExponent";
    case ErrorCode::NoContainingRegion: return "NoContainingRegion";
    case ErrorCode::NoAssociation: return "NoAssociation";
    case ErrorCode::OuterRegionsDontCoverFactors: return "OuterRegionsDontCoverFactors";
    case ErrorCode::Internal: return "Internal";
  }
  return "Unknown";
}

}  // namespace lgbp
