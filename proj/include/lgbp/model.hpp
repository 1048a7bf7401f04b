#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "lgbp/factor_table.hpp"

namespace lgbp {

struct DomainDecl {
  std::string name;
  int size = 0;  // objects are addressed 1..size
};

struct PredicateDecl {
  std::string name;
  std::vector<int> argDomains;  // domain indices; arity 1 or 2
  int range = 2;                // states per ground atom
};

/// Atom over logical variables, e.g. fr(X,Y). Terms are lvar indices local
/// to the enclosing parfactor.
struct Atom {
  int pred = -1;
  std::vector<int> lvars;

  auto operator<=>(const Atom&) const = default;
};

struct Parfactor {
  std::vector<std::string> lvarNames;        // order of first occurrence
  std::vector<int> lvarDomains;              // domain index per lvar
  std::vector<Atom> atoms;                   // the ordered set A
  std::vector<std::pair<int, int>> constraints;  // unordered lvar pairs, X != Y
  FactorTable table;                         // log space, axes follow atoms

  bool hasConstraint(int a, int b) const;
};

struct ParfactorModel {
  std::vector<DomainDecl> domains;
  std::vector<PredicateDecl> predicates;
  std::vector<Parfactor> parfactors;

  int domainIndex(const std::string& name) const;     // -1 if absent
  int predicateIndex(const std::string& name) const;  // -1 if absent
  std::vector<std::string> predicateNames() const;

  /// True when every predicate argument lives in one single domain.
  bool singleDomain() const;
};

struct GroundAtom {
  int pred = -1;
  std::vector<int> objects;  // 1-based domain object indices

  auto operator<=>(const GroundAtom&) const = default;
};

std::string ground_atom_name(const GroundAtom& a,
                             const std::vector<std::string>& predNames);

/// Registry assigning dense VarIds to ground atoms.
class VariablePool {
public:
  VarId intern(const GroundAtom& atom, int card);
  VarId lookup(const GroundAtom& atom) const;  // -1 if absent
  const GroundAtom& atom(VarId id) const { return atoms_[id]; }
  int card(VarId id) const { return cards_[id]; }
  std::size_t size() const { return atoms_.size(); }

private:
  std::vector<GroundAtom> atoms_;
  std::vector<int> cards_;
  std::map<GroundAtom, VarId> index_;
};

struct GroundFactor {
  FactorTable table;            // scope = substituted atoms, parfactor order
  std::vector<VarId> scope;     // same order as table scope
  int parfactor = -1;           // provenance
};

struct GroundMrf {
  VariablePool vars;
  std::vector<GroundFactor> factors;
};

/// Parse a model file (grammar: domain / predicate / parfactor lines).
ParfactorModel parse_model(const std::string& text);

/// Split every parfactor into all-distinct-lvar parfactors, one per
/// constraint-consistent lvar partition. Partitions that would place the
/// same object twice inside one atom are dropped; duplicate atoms created
/// by merging are removed by diagonal restriction of the table.
ParfactorModel shatter(const ParfactorModel& model);

/// Ground a shattered model: one factor per injective lvar assignment.
GroundMrf ground(const ParfactorModel& model);

/// Exact marginal over `query` by full enumeration.
FactorTable exact_marginal(const GroundMrf& mrf, const std::vector<GroundAtom>& query,
                           std::size_t stateCap = (std::size_t{1} << 24));

}  // namespace lgbp
