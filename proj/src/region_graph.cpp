#include "lgbp/region_graph.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <thread>

#include "lgbp/errors.hpp"

namespace lgbp {

namespace {

using Scope = std::vector<VarId>;  // sorted

Scope intersect(const Scope& a, const Scope& b) {
  Scope out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(out));
  return out;
}

bool isSubset(const Scope& a, const Scope& b) {
  return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

void parallelFor(int n, int threads, const std::function<void(int)>& body) {
  if (threads <= 1 || n < 2) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  int nt = std::min(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(nt);
  for (int t = 0; t < nt; ++t) {
    pool.emplace_back([&, t] {
      for (int i = t; i < n; i += nt) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

void RegionGraph::rebuildCaches(const GroundMrf& mrf) {
  int R = static_cast<int>(regions.size());
  inEdges.assign(R, {});
  outEdges.assign(R, {});
  for (std::size_t e = 0; e < edges.size(); ++e) {
    outEdges[edges[e].first].push_back(static_cast<int>(e));
    inEdges[edges[e].second].push_back(static_cast<int>(e));
  }
  outer.clear();
  for (int r = 0; r < R; ++r) {
    if (inEdges[r].empty()) outer.push_back(r);
  }
  // Descendants via DFS over out-edges.
  desc.assign(R, {});
  for (int r = 0; r < R; ++r) {
    std::set<int> seen;
    std::vector<int> stack{r};
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int e : outEdges[u]) {
        int v = edges[e].second;
        if (seen.insert(v).second) stack.push_back(v);
      }
    }
    seen.erase(r);
    desc[r].assign(seen.begin(), seen.end());
  }
  // Correction edges for the parent-to-child update rule.
  corrEdges.assign(R, {});
  for (int r = 0; r < R; ++r) {
    std::set<int> excluded(desc[r].begin(), desc[r].end());
    excluded.insert(r);
    for (int gamma : desc[r]) {
      for (int e : inEdges[gamma]) {
        int rho = edges[e].first;
        if (!excluded.count(rho)) corrEdges[r].push_back(e);
      }
    }
  }
  // Factor membership and log-space factor products.
  priors.clear();
  priors.reserve(R);
  for (int r = 0; r < R; ++r) {
    regions[r].factorIdx.clear();
    std::vector<int> cards;
    for (VarId v : regions[r].scope) cards.push_back(mrf.vars.card(v));
    FactorTable prior(regions[r].scope, cards);
    for (std::size_t f = 0; f < mrf.factors.size(); ++f) {
      Scope fs = mrf.factors[f].scope;
      std::sort(fs.begin(), fs.end());
      if (isSubset(fs, regions[r].scope)) {
        regions[r].factorIdx.push_back(static_cast<int>(f));
        prior = multiply(prior, mrf.factors[f].table);
      }
    }
    priors.push_back(std::move(prior));
  }
}

std::vector<std::vector<VarId>> default_outer_scopes(const GroundMrf& mrf) {
  std::vector<Scope> scopes;
  for (const auto& f : mrf.factors) {
    Scope s = f.scope;
    std::sort(s.begin(), s.end());
    scopes.push_back(s);
  }
  std::sort(scopes.begin(), scopes.end());
  scopes.erase(std::unique(scopes.begin(), scopes.end()), scopes.end());
  // Keep only maximal scopes; contained factors are absorbed.
  std::vector<Scope> out;
  for (const Scope& s : scopes) {
    bool maximal = true;
    for (const Scope& t : scopes) {
      if (s != t && isSubset(s, t)) maximal = false;
    }
    if (maximal) out.push_back(s);
  }
  return out;
}

RegionGraph build_region_graph(const GroundMrf& mrf,
                               const std::vector<std::vector<VarId>>& outerScopes,
                               Closure closure) {
  std::vector<Scope> scopes;
  for (Scope s : outerScopes) {
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    if (s.empty()) fail(ErrorCode::Internal, "empty outer scope");
    if (std::find(scopes.begin(), scopes.end(), s) == scopes.end()) {
      scopes.push_back(s);
    }
  }
  for (const auto& f : mrf.factors) {
    Scope fs = f.scope;
    std::sort(fs.begin(), fs.end());
    bool covered = false;
    for (const Scope& s : scopes) {
      if (isSubset(fs, s)) covered = true;
    }
    if (!covered) {
      fail(ErrorCode::OuterRegionsDontCoverFactors,
           "a factor scope is not contained in any outer region");
    }
  }

  std::set<Scope> all(scopes.begin(), scopes.end());
  if (closure == Closure::Intersections) {
    // Pairwise intersections, first on outer regions, then on the results.
    std::vector<Scope> frontier(scopes);
    while (!frontier.empty()) {
      std::vector<Scope> added;
      std::vector<Scope> current(all.begin(), all.end());
      for (const Scope& a : frontier) {
        for (const Scope& b : current) {
          if (a == b || isSubset(a, b) || isSubset(b, a)) continue;
          Scope c = intersect(a, b);
          if (!c.empty() && !all.count(c)) {
            all.insert(c);
            added.push_back(c);
          }
        }
      }
      frontier = std::move(added);
    }
  } else {
    // All (d-1)-subsets, iterated down to singletons.
    std::vector<Scope> frontier(scopes);
    while (!frontier.empty()) {
      std::vector<Scope> added;
      for (const Scope& s : frontier) {
        if (s.size() < 2) continue;
        for (std::size_t drop = 0; drop < s.size(); ++drop) {
          Scope c;
          for (std::size_t i = 0; i < s.size(); ++i) {
            if (i != drop) c.push_back(s[i]);
          }
          if (!all.count(c)) {
            all.insert(c);
            added.push_back(c);
          }
        }
      }
      frontier = std::move(added);
    }
  }

  RegionGraph g;
  std::vector<Scope> ordered(all.begin(), all.end());
  // Larger regions first, then lexicographic, for stable ids.
  std::sort(ordered.begin(), ordered.end(), [](const Scope& a, const Scope& b) {
    if (a.size() != b.size()) return a.size() > b.size();
    return a < b;
  });
  for (const Scope& s : ordered) g.regions.push_back({s, {}});

  // Edges to maximal proper subsets within the region set.
  for (int p = 0; p < static_cast<int>(g.regions.size()); ++p) {
    for (int c = 0; c < static_cast<int>(g.regions.size()); ++c) {
      const Scope& sp = g.regions[p].scope;
      const Scope& scp = g.regions[c].scope;
      if (p == c || scp.size() >= sp.size() || !isSubset(scp, sp)) continue;
      bool maximal = true;
      for (int m = 0; m < static_cast<int>(g.regions.size()); ++m) {
        const Scope& sm = g.regions[m].scope;
        if (m == p || m == c) continue;
        if (sm.size() > scp.size() && sm.size() < sp.size() &&
            isSubset(scp, sm) && isSubset(sm, sp)) {
          maximal = false;
          break;
        }
      }
      if (maximal) g.edges.emplace_back(p, c);
    }
  }
  g.rebuildCaches(mrf);
  return g;
}

std::vector<std::string> validate_region_graph(const RegionGraph& g) {
  std::vector<std::string> violations;
  int R = static_cast<int>(g.regions.size());

  auto scopeName = [&](int r) {
    std::string s = "{";
    for (VarId v : g.regions[r].scope) s += std::to_string(v) + " ";
    return s + "}";
  };

  // Reachability, computed fresh (caches are not trusted here).
  std::vector<std::set<int>> reach(R);
  std::vector<std::vector<int>> out(R);
  for (const auto& [p, c] : g.edges) out[p].push_back(c);
  for (int r = 0; r < R; ++r) {
    std::vector<int> stack{r};
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int v : out[u]) {
        if (reach[r].insert(v).second) stack.push_back(v);
      }
    }
    if (reach[r].count(r)) violations.push_back("cycle through region " + scopeName(r));
  }

  // Condition (1): intersections of incomparable regions are present.
  std::set<Scope> present;
  for (const Region& r : g.regions) present.insert(r.scope);
  for (int a = 0; a < R; ++a) {
    for (int b = a + 1; b < R; ++b) {
      const Scope& sa = g.regions[a].scope;
      const Scope& sb = g.regions[b].scope;
      if (isSubset(sa, sb) || isSubset(sb, sa)) continue;
      Scope c = intersect(sa, sb);
      if (!c.empty() && !present.count(c)) {
        violations.push_back("condition 1: missing intersection of " + scopeName(a) +
                             " and " + scopeName(b));
      }
    }
  }
  // Condition (2): beta subset of alpha iff beta is a descendant of alpha.
  for (int a = 0; a < R; ++a) {
    for (int b = 0; b < R; ++b) {
      if (a == b) continue;
      bool subset = g.regions[b].scope.size() < g.regions[a].scope.size() &&
                    isSubset(g.regions[b].scope, g.regions[a].scope);
      bool descendant = reach[a].count(b) > 0;
      if (subset != descendant) {
        violations.push_back("condition 2: " + scopeName(b) +
                             (subset ? " is a subset but not a descendant of "
                                     : " is a descendant but not a subset of ") +
                             scopeName(a));
      }
    }
  }
  // Condition (3): parent-less regions are exactly the declared outer ones.
  std::set<int> parentless;
  for (int r = 0; r < R; ++r) parentless.insert(r);
  for (const auto& [p, c] : g.edges) parentless.erase(c);
  std::set<int> declared(g.outer.begin(), g.outer.end());
  if (parentless != declared) {
    violations.push_back("condition 3: parent-less regions differ from outer regions");
  }
  return violations;
}

MessageStore init_messages(const RegionGraph& g) {
  MessageStore ms;
  for (const auto& [p, c] : g.edges) {
    const FactorTable& prior = g.priors[c];
    FactorTable uniform(prior.scope(), prior.cards());
    ms.cur.push_back(normalize(uniform));
  }
  ms.next = ms.cur;
  return ms;
}

FactorTable compute_belief(const RegionGraph& g, const MessageStore& msgs, int alpha) {
  FactorTable b = g.priors[alpha];
  for (int e : g.inEdges[alpha]) b = multiply(b, msgs.cur[e]);
  for (int e : g.corrEdges[alpha]) b = multiply(b, msgs.cur[e]);
  return normalize(b);
}

FactorTable update_message(const RegionGraph& g, const MessageStore& msgs,
                           const std::vector<FactorTable>& beliefs, int edgeId,
                           double lambda) {
  const auto& [alpha, beta] = g.edges[edgeId];
  FactorTable marg = marginalize_sum(beliefs[alpha], g.regions[beta].scope);
  FactorTable ratio = divide(marg, beliefs[beta]);
  FactorTable candidate = normalize(multiply(msgs.cur[edgeId], ratio));
  return normalize(damp(msgs.cur[edgeId], candidate, lambda));
}

GroundGbp::GroundGbp(const RegionGraph& g, GbpOptions opts)
    : graph_(&g), opts_(std::move(opts)), msgs_(init_messages(g)) {
  beliefs_.resize(g.regions.size());
}

void GroundGbp::computeBeliefs() {
  parallelFor(static_cast<int>(graph_->regions.size()), opts_.threads, [&](int r) {
    beliefs_[r] = compute_belief(*graph_, msgs_, r);
  });
}

double GroundGbp::step() {
  computeBeliefs();
  std::vector<double> resid(graph_->edges.size(), 0.0);
  parallelFor(static_cast<int>(graph_->edges.size()), opts_.threads, [&](int e) {
    msgs_.next[e] = update_message(*graph_, msgs_, beliefs_, e, opts_.damping);
    resid[e] = max_abs_log_diff(msgs_.cur[e], msgs_.next[e]);
  });
  double r = 0.0;
  for (double d : resid) r = std::max(r, d);
  std::swap(msgs_.cur, msgs_.next);
  return r;
}

GbpResult run_ground_gbp(const RegionGraph& g, const GbpOptions& opts) {
  GroundGbp engine(g, opts);
  GbpResult res;
  for (int it = 1; it <= opts.iterations; ++it) {
    double r = engine.step();
    if (opts.onBeliefs) opts.onBeliefs(it, engine.beliefs());
    res.residuals.push_back(r);
    res.iterationsUsed = it;
    if (r < opts.tolerance) {
      res.converged = true;
      break;
    }
  }
  engine.computeBeliefs();
  res.beliefs = engine.beliefs();
  return res;
}

}  // namespace lgbp
