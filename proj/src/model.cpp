#include "lgbp/model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstring>
#include <functional>
#include <limits>
#include <set>
#include <sstream>

#include "lgbp/errors.hpp"

namespace lgbp {

bool Parfactor::hasConstraint(int a, int b) const {
  for (const auto& [x, y] : constraints) {
    if ((x == a && y == b) || (x == b && y == a)) return true;
  }
  return false;
}

int ParfactorModel::domainIndex(const std::string& name) const {
  for (std::size_t i = 0; i < domains.size(); ++i) {
    if (domains[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

int ParfactorModel::predicateIndex(const std::string& name) const {
  for (std::size_t i = 0; i < predicates.size(); ++i) {
    if (predicates[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

std::vector<std::string> ParfactorModel::predicateNames() const {
  std::vector<std::string> out;
  out.reserve(predicates.size());
  for (const auto& p : predicates) out.push_back(p.name);
  return out;
}

bool ParfactorModel::singleDomain() const {
  std::set<int> used;
  for (const auto& p : predicates) used.insert(p.argDomains.begin(), p.argDomains.end());
  return used.size() <= 1;
}

std::string ground_atom_name(const GroundAtom& a,
                             const std::vector<std::string>& predNames) {
  std::string s = predNames[a.pred] + "(";
  for (std::size_t i = 0; i < a.objects.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(a.objects[i]);
  }
  return s + ")";
}

VarId VariablePool::intern(const GroundAtom& atom, int card) {
  auto it = index_.find(atom);
  if (it != index_.end()) return it->second;
  VarId id = static_cast<VarId>(atoms_.size());
  atoms_.push_back(atom);
  cards_.push_back(card);
  index_.emplace(atom, id);
  return id;
}

VarId VariablePool::lookup(const GroundAtom& atom) const {
  auto it = index_.find(atom);
  return it == index_.end() ? -1 : it->second;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

struct LineScanner {
  const std::string& s;
  int line;
  std::size_t pos = 0;

  [[noreturn]] void err(const std::string& msg) const {
    fail(ErrorCode::SyntaxError, "line " + std::to_string(line) + ", col " +
                                     std::to_string(pos + 1) + ": " + msg);
  }

  void skipWs() {
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
  }

  bool atEnd() {
    skipWs();
    return pos >= s.size() || s[pos] == '#';
  }

  bool tryConsume(char c) {
    skipWs();
    if (pos < s.size() && s[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!tryConsume(c)) err(std::string("expected '") + c + "'");
  }

  bool tryKeyword(const std::string& kw) {
    skipWs();
    if (s.compare(pos, kw.size(), kw) != 0) return false;
    std::size_t after = pos + kw.size();
    if (after < s.size() &&
        (std::isalnum(static_cast<unsigned char>(s[after])) || s[after] == '_')) {
      return false;
    }
    pos = after;
    return true;
  }

  std::string identifier() {
    skipWs();
    std::size_t start = pos;
    while (pos < s.size() &&
           (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_')) {
      ++pos;
    }
    if (pos == start) err("expected identifier");
    return s.substr(start, pos - start);
  }

  long integer() {
    skipWs();
    std::size_t start = pos;
    if (pos < s.size() && (s[pos] == '-' || s[pos] == '+')) ++pos;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos == start) err("expected integer");
    return std::stol(s.substr(start, pos - start));
  }

  double number() {
    skipWs();
    std::size_t start = pos;
    while (pos < s.size() && (std::isdigit(static_cast<unsigned char>(s[pos])) ||
                              std::strchr("+-.eE", s[pos]) != nullptr)) {
      ++pos;
    }
    if (pos == start) err("expected number");
    try {
      return std::stod(s.substr(start, pos - start));
    } catch (const std::exception&) {
      err("malformed number");
    }
  }
};

bool isLvarName(const std::string& name) {
  return !name.empty() && std::isupper(static_cast<unsigned char>(name[0]));
}

void parseParfactor(LineScanner& sc, ParfactorModel& model) {
  Parfactor pf;
  auto lvarIndex = [&](const std::string& name, int domain) {
    for (std::size_t i = 0; i < pf.lvarNames.size(); ++i) {
      if (pf.lvarNames[i] == name) {
        if (pf.lvarDomains[i] != domain) {
          fail(ErrorCode::LvarDomainMismatch,
               "line " + std::to_string(sc.line) + ": lvar " + name +
                   " used with two different domains");
        }
        return static_cast<int>(i);
      }
    }
    pf.lvarNames.push_back(name);
    pf.lvarDomains.push_back(domain);
    return static_cast<int>(pf.lvarNames.size() - 1);
  };

  // Atom list.
  while (true) {
    std::string predName = sc.identifier();
    int pred = model.predicateIndex(predName);
    if (pred < 0) {
      fail(ErrorCode::UnknownPredicate,
           "line " + std::to_string(sc.line) + ": " + predName);
    }
    const PredicateDecl& decl = model.predicates[pred];
    Atom atom;
    atom.pred = pred;
    sc.expect('(');
    std::size_t argPos = 0;
    while (true) {
      std::string term = sc.identifier();
      if (!isLvarName(term)) {
        fail(ErrorCode::ConstantTerm,
             "line " + std::to_string(sc.line) + ": constant term '" + term +
                 "' not supported (lvars start with an uppercase letter)");
      }
      if (argPos >= decl.argDomains.size()) {
        fail(ErrorCode::SyntaxError, "line " + std::to_string(sc.line) +
                                         ": too many arguments for " + predName);
      }
      atom.lvars.push_back(lvarIndex(term, decl.argDomains[argPos]));
      ++argPos;
      if (!sc.tryConsume(',')) break;
    }
    sc.expect(')');
    if (argPos != decl.argDomains.size()) {
      fail(ErrorCode::SyntaxError, "line " + std::to_string(sc.line) +
                                       ": wrong argument count for " + predName);
    }
    pf.atoms.push_back(atom);
    if (!sc.tryConsume(',')) break;
  }

  if (sc.tryKeyword("where")) {
    while (true) {
      std::string a = sc.identifier();
      sc.expect('!');
      sc.expect('=');
      std::string b = sc.identifier();
      auto find = [&](const std::string& n) {
        for (std::size_t i = 0; i < pf.lvarNames.size(); ++i) {
          if (pf.lvarNames[i] == n) return static_cast<int>(i);
        }
        fail(ErrorCode::SyntaxError, "line " + std::to_string(sc.line) +
                                         ": constraint lvar " + n +
                                         " does not appear in any atom");
      };
      int ia = find(a), ib = find(b);
      if (ia != ib && !pf.hasConstraint(ia, ib)) {
        pf.constraints.emplace_back(std::min(ia, ib), std::max(ia, ib));
      }
      if (!sc.tryConsume(',')) break;
    }
  }

  if (!sc.tryKeyword("values")) sc.err("expected 'values'");
  sc.expect('[');
  std::vector<double> vals;
  while (true) {
    double v = sc.number();
    if (!(v > 0.0)) {
      fail(ErrorCode::NonPositiveValue,
           "line " + std::to_string(sc.line) + ": table values must be > 0");
    }
    vals.push_back(v);
    if (!sc.tryConsume(',')) break;
  }
  sc.expect(']');
  if (!sc.atEnd()) sc.err("trailing input");

  std::size_t expected = 1;
  for (const Atom& a : pf.atoms) {
    expected *= static_cast<std::size_t>(model.predicates[a.pred].range);
  }
  if (vals.size() != expected) {
    fail(ErrorCode::TableLengthMismatch,
         "line " + std::to_string(sc.line) + ": expected " +
             std::to_string(expected) + " values, got " + std::to_string(vals.size()));
  }

  // Store axes over placeholder variable ids 0..k-1 (one per atom position);
  // real ids are assigned at grounding time.
  std::vector<VarId> scope;
  std::vector<int> cards;
  std::vector<LogReal> logv(vals.size());
  for (std::size_t i = 0; i < pf.atoms.size(); ++i) {
    scope.push_back(static_cast<VarId>(i));
    cards.push_back(model.predicates[pf.atoms[i].pred].range);
  }
  for (std::size_t i = 0; i < vals.size(); ++i) logv[i] = std::log(vals[i]);
  pf.table = FactorTable(scope, cards, logv);
  model.parfactors.push_back(std::move(pf));
}

}  // namespace

ParfactorModel parse_model(const std::string& text) {
  ParfactorModel model;
  std::istringstream in(text);
  std::string line;
  int lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    LineScanner sc{line, lineNo};
    if (sc.atEnd()) continue;
    if (sc.tryKeyword("domain")) {
      DomainDecl d;
      d.name = sc.identifier();
      sc.expect('=');
      long n = sc.integer();
      if (n < 1) fail(ErrorCode::SyntaxError,
                      "line " + std::to_string(lineNo) + ": domain size must be >= 1");
      if (model.domainIndex(d.name) >= 0) {
        fail(ErrorCode::SyntaxError,
             "line " + std::to_string(lineNo) + ": duplicate domain " + d.name);
      }
      d.size = static_cast<int>(n);
      if (!sc.atEnd()) sc.err("trailing input");
      model.domains.push_back(d);
    } else if (sc.tryKeyword("predicate")) {
      PredicateDecl p;
      p.name = sc.identifier();
      if (model.predicateIndex(p.name) >= 0) {
        fail(ErrorCode::SyntaxError,
             "line " + std::to_string(lineNo) + ": duplicate predicate " + p.name);
      }
      sc.expect('(');
      while (true) {
        std::string dn = sc.identifier();
        int di = model.domainIndex(dn);
        if (di < 0) {
          fail(ErrorCode::UnknownDomain, "line " + std::to_string(lineNo) + ": " + dn);
        }
        p.argDomains.push_back(di);
        if (!sc.tryConsume(',')) break;
      }
      sc.expect(')');
      if (p.argDomains.empty() || p.argDomains.size() > 2) {
        fail(ErrorCode::ArityUnsupported,
             "line " + std::to_string(lineNo) + ": arity must be 1 or 2");
      }
      if (sc.tryKeyword("range")) {
        long k = sc.integer();
        if (k < 2) fail(ErrorCode::SyntaxError,
                        "line " + std::to_string(lineNo) + ": range must be >= 2");
        p.range = static_cast<int>(k);
      }
      if (!sc.atEnd()) sc.err("trailing input");
      model.predicates.push_back(p);
    } else if (sc.tryKeyword("parfactor")) {
      parseParfactor(sc, model);
    } else {
      sc.err("expected 'domain', 'predicate' or 'parfactor'");
    }
  }
  return model;
}

// ---------------------------------------------------------------------------
// Shattering

namespace {

/// All partitions of {0..n-1} as block-assignment vectors (block[i] is the
/// block id of lvar i; block ids appear in first-use order).
std::vector<std::vector<int>> setPartitions(int n) {
  std::vector<std::vector<int>> out;
  std::vector<int> block(n, 0);
  std::function<void(int, int)> rec = [&](int i, int blocks) {
    if (i == n) {
      out.push_back(block);
      return;
    }
    for (int b = 0; b <= blocks; ++b) {
      block[i] = b;
      rec(i + 1, blocks + (b == blocks ? 1 : 0));
    }
  };
  rec(0, 0);
  return out;
}

}  // namespace

ParfactorModel shatter(const ParfactorModel& model) {
  ParfactorModel out;
  out.domains = model.domains;
  out.predicates = model.predicates;

  for (const Parfactor& pf : model.parfactors) {
    int n = static_cast<int>(pf.lvarNames.size());
    for (const auto& block : setPartitions(n)) {
      // Consistent with existing constraints?
      bool ok = true;
      for (const auto& [a, b] : pf.constraints) {
        if (block[a] == block[b]) ok = false;
      }
      if (!ok) continue;
      // Merging must not duplicate an object inside a single atom.
      for (const Atom& a : pf.atoms) {
        if (a.lvars.size() == 2 && block[a.lvars[0]] == block[a.lvars[1]]) ok = false;
      }
      if (!ok) continue;
      // Merged blocks must agree on domains.
      int nBlocks = *std::max_element(block.begin(), block.end()) + 1;
      std::vector<int> repr(nBlocks, -1);
      for (int i = 0; i < n; ++i) {
        if (repr[block[i]] < 0) {
          repr[block[i]] = i;
        } else if (pf.lvarDomains[repr[block[i]]] != pf.lvarDomains[i]) {
          ok = false;
        }
      }
      if (!ok) continue;

      Parfactor npf;
      for (int b = 0; b < nBlocks; ++b) {
        npf.lvarNames.push_back(pf.lvarNames[repr[b]]);
        npf.lvarDomains.push_back(pf.lvarDomains[repr[b]]);
      }
      // Substitute and deduplicate atoms; remember each original atom's
      // position in the deduplicated list for the diagonal restriction.
      std::vector<int> atomPos(pf.atoms.size());
      for (std::size_t i = 0; i < pf.atoms.size(); ++i) {
        Atom a;
        a.pred = pf.atoms[i].pred;
        for (int lv : pf.atoms[i].lvars) a.lvars.push_back(block[lv]);
        auto it = std::find(npf.atoms.begin(), npf.atoms.end(), a);
        if (it == npf.atoms.end()) {
          atomPos[i] = static_cast<int>(npf.atoms.size());
          npf.atoms.push_back(a);
        } else {
          atomPos[i] = static_cast<int>(it - npf.atoms.begin());
        }
      }
      // All-pairs inequality constraints within one domain.
      for (int a = 0; a < nBlocks; ++a) {
        for (int b = a + 1; b < nBlocks; ++b) {
          if (npf.lvarDomains[a] == npf.lvarDomains[b]) {
            npf.constraints.emplace_back(a, b);
          }
        }
      }
      // Diagonal-restricted table over the deduplicated atoms.
      std::vector<VarId> scope;
      std::vector<int> cards;
      for (std::size_t i = 0; i < npf.atoms.size(); ++i) {
        scope.push_back(static_cast<VarId>(i));
        cards.push_back(out.predicates[npf.atoms[i].pred].range);
      }
      FactorTable nt(scope, cards);
      std::vector<int> assign(npf.atoms.size(), 0);
      std::size_t flat = 0;
      while (true) {
        std::vector<int> old(pf.atoms.size());
        for (std::size_t i = 0; i < pf.atoms.size(); ++i) old[i] = assign[atomPos[i]];
        nt.logValues()[flat] = pf.table.logAt(old);
        // advance
        int i = static_cast<int>(assign.size()) - 1;
        for (; i >= 0; --i) {
          if (++assign[i] < cards[i]) break;
          assign[i] = 0;
        }
        ++flat;
        if (i < 0) break;
      }
      npf.table = std::move(nt);
      out.parfactors.push_back(std::move(npf));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Grounding

GroundMrf ground(const ParfactorModel& model) {
  GroundMrf mrf;
  for (const Parfactor& pf : model.parfactors) {
    // Enough objects for the all-distinct lvars of each domain?
    for (std::size_t d = 0; d < model.domains.size(); ++d) {
      int count = 0;
      for (int dom : pf.lvarDomains) {
        if (dom == static_cast<int>(d)) ++count;
      }
      if (count > model.domains[d].size) {
        fail(ErrorCode::DomainTooSmall,
             "parfactor needs " + std::to_string(count) + " distinct objects of domain " +
                 model.domains[d].name + " but only " +
                 std::to_string(model.domains[d].size) + " exist");
      }
    }
    int n = static_cast<int>(pf.lvarNames.size());
    std::vector<int> assign(n, 0);
    std::function<void(int)> rec = [&](int i) {
      if (i == n) {
        GroundFactor gf;
        gf.parfactor = static_cast<int>(&pf - model.parfactors.data());
        std::vector<VarId> scope;
        for (const Atom& a : pf.atoms) {
          GroundAtom ga;
          ga.pred = a.pred;
          for (int lv : a.lvars) ga.objects.push_back(assign[lv]);
          scope.push_back(mrf.vars.intern(ga, model.predicates[a.pred].range));
        }
        gf.scope = scope;
        gf.table = FactorTable(scope, pf.table.cards(), pf.table.logValues());
        mrf.factors.push_back(std::move(gf));
        return;
      }
      int N = model.domains[pf.lvarDomains[i]].size;
      for (int o = 1; o <= N; ++o) {
        bool ok = true;
        for (const auto& [a, b] : pf.constraints) {
          int other = (a == i) ? b : (b == i) ? a : -1;
          if (other >= 0 && other < i && assign[other] == o) ok = false;
        }
        if (!ok) continue;
        assign[i] = o;
        rec(i + 1);
      }
    };
    rec(0);
  }
  return mrf;
}

// ---------------------------------------------------------------------------
// Exact marginalization by full enumeration.

FactorTable exact_marginal(const GroundMrf& mrf, const std::vector<GroundAtom>& query,
                           std::size_t stateCap) {
  std::size_t states = 1;
  for (std::size_t v = 0; v < mrf.vars.size(); ++v) {
    states *= static_cast<std::size_t>(mrf.vars.card(static_cast<VarId>(v)));
    if (states > stateCap) {
      fail(ErrorCode::StateSpaceTooLarge,
           "joint state space exceeds cap of " + std::to_string(stateCap));
    }
  }
  std::vector<VarId> qvars;
  std::vector<int> qcards;
  for (const GroundAtom& a : query) {
    VarId id = mrf.vars.lookup(a);
    if (id < 0) fail(ErrorCode::UnknownVariable, "query atom not in model");
    qvars.push_back(id);
    qcards.push_back(mrf.vars.card(id));
  }

  int n = static_cast<int>(mrf.vars.size());
  std::vector<int> assign(n, 0);
  FactorTable marg(qvars, qcards);
  std::fill(marg.logValues().begin(), marg.logValues().end(),
            -std::numeric_limits<LogReal>::infinity());

  // Per-factor scope assignment buffers.
  std::vector<std::vector<int>> fassign(mrf.factors.size());
  for (std::size_t f = 0; f < mrf.factors.size(); ++f) {
    fassign[f].resize(mrf.factors[f].scope.size());
  }
  std::vector<int> qassign(qvars.size());

  while (true) {
    LogReal logp = 0.0;
    for (std::size_t f = 0; f < mrf.factors.size(); ++f) {
      const auto& scope = mrf.factors[f].scope;
      for (std::size_t i = 0; i < scope.size(); ++i) fassign[f][i] = assign[scope[i]];
      logp += mrf.factors[f].table.logAt(fassign[f]);
    }
    for (std::size_t i = 0; i < qvars.size(); ++i) qassign[i] = assign[qvars[i]];
    std::size_t idx = marg.indexOf(qassign);
    LogReal cur = marg.logValues()[idx];
    if (cur == -std::numeric_limits<LogReal>::infinity()) {
      marg.logValues()[idx] = logp;
    } else {
      LogReal m = std::max(cur, logp);
      marg.logValues()[idx] = m + std::log(std::exp(cur - m) + std::exp(logp - m));
    }
    int i = n - 1;
    for (; i >= 0; --i) {
      if (++assign[i] < mrf.vars.card(static_cast<VarId>(i))) break;
      assign[i] = 0;
    }
    if (i < 0) break;
  }
  return normalize(marg);
}

}  // namespace lgbp
