#include "lgbp/lifted_gbp.hpp"

#include <algorithm>
#include <cmath>

#include "lgbp/errors.hpp"

namespace lgbp {

namespace {

LogReal uniformLog(int card) { return -std::log(static_cast<LogReal>(card)); }

/// Message scope for an edge: the child's variables in atom order.
FactorTable uniformMessage(const LiftedRegionGraph& g, const LiftedEdge& e) {
  const LiftedRegion& child = g.regions[e.child];
  std::vector<int> cards;
  std::vector<LogReal> logv;
  std::size_t total = 1;
  for (VarId v : child.vars) {
    cards.push_back(g.pool.card(v));
    total *= static_cast<std::size_t>(g.pool.card(v));
  }
  LogReal u = 0.0;
  for (int c : cards) u += uniformLog(c);
  logv.assign(total, u);
  return FactorTable(child.vars, cards, std::move(logv));
}

}  // namespace

LiftedMessageStore init_lifted_messages(const LiftedRegionGraph& g) {
  LiftedMessageStore msgs;
  for (const LiftedEdge& e : g.edges) {
    msgs.cur.push_back(uniformMessage(g, e));
  }
  msgs.next = msgs.cur;
  return msgs;
}

FactorTable lifted_belief(const LiftedRegionGraph& g,
                          const LiftedMessageStore& msgs, int alpha, int N) {
  const LiftedRegion& region = g.regions[alpha];
  FactorTable b = region.prior;
  for (int e : g.inEdges[alpha]) {
    long k = g.edges[e].kappa(N);
    if (k > 0) b = multiply(b, power(msgs.cur[e], k));
  }
  const LocalGraph& local = g.locals[alpha];
  for (std::size_t gi = 1; gi < local.nodes.size(); ++gi) {
    const LocalNode& gamma = local.nodes[gi];
    const LiftedRegion& cls = g.regions[gamma.liftedClass];
    FactorTable acc;
    bool any = false;
    for (int e : g.inEdges[gamma.liftedClass]) {
      long k = g.edges[e].kappa(N);
      auto it = local.localPar.find({static_cast<int>(gi), e});
      if (it != local.localPar.end()) k -= it->second;
      if (k < 0) {
        fail(ErrorCode::NegativeExponent,
             "counting number below local parent count");
      }
      if (k == 0) continue;
      acc = any ? multiply(acc, power(msgs.cur[e], k)) : power(msgs.cur[e], k);
      any = true;
    }
    if (!any) continue;
    std::vector<std::pair<VarId, VarId>> mapping;
    for (std::size_t k = 0; k < cls.vars.size(); ++k) {
      mapping.emplace_back(cls.vars[k], region.vars[gamma.canonMap[k]]);
    }
    b = multiply(b, rename(acc, mapping));
  }
  return normalize(b);
}

FactorTable update_lifted_message(const LiftedRegionGraph& g,
                                  const LiftedMessageStore& msgs,
                                  const std::vector<FactorTable>& beliefs,
                                  int edgeId, double lambda) {
  const LiftedEdge& e = g.edges[edgeId];
  const LiftedRegion& parent = g.regions[e.parent];
  const LiftedRegion& child = g.regions[e.child];

  // Keep the subset variables ordered so that after renaming the scope is
  // the child's variables in atom order, stable across iterations.
  std::vector<std::pair<int, int>> order;  // (child atom, parent atom)
  for (std::size_t i = 0; i < e.subsetAtoms.size(); ++i) {
    order.emplace_back(e.sigmaAtoms[i], e.subsetAtoms[i]);
  }
  std::sort(order.begin(), order.end());
  std::vector<VarId> keep;
  std::vector<std::pair<VarId, VarId>> mapping;
  for (const auto& [c, p] : order) {
    keep.push_back(parent.vars[p]);
    mapping.emplace_back(parent.vars[p], child.vars[c]);
  }

  FactorTable t = marginalize_sum(beliefs[e.parent], keep);
  t = rename(t, mapping);
  t = divide(t, beliefs[e.child]);
  t = multiply(t, msgs.cur[edgeId]);
  t = normalize(t);
  t = damp(msgs.cur[edgeId], t, lambda);
  return normalize(t);
}

LiftedGbp::LiftedGbp(const LiftedRegionGraph& g, LiftedGbpOptions opts)
    : graph_(&g), opts_(std::move(opts)), msgs_(init_lifted_messages(g)) {
  if (opts_.domainSize <= 0) {
    fail(ErrorCode::DomainTooSmall, "lifted GBP needs a positive domain size");
  }
}

void LiftedGbp::computeBeliefs() {
  beliefs_.clear();
  for (int r = 0; r < static_cast<int>(graph_->regions.size()); ++r) {
    beliefs_.push_back(lifted_belief(*graph_, msgs_, r, opts_.domainSize));
  }
}

double LiftedGbp::step() {
  computeBeliefs();
  double residual = 0.0;
  for (int e = 0; e < static_cast<int>(graph_->edges.size()); ++e) {
    msgs_.next[e] =
        update_lifted_message(*graph_, msgs_, beliefs_, e, opts_.damping);
    residual = std::max(residual, max_abs_log_diff(msgs_.next[e], msgs_.cur[e]));
  }
  std::swap(msgs_.cur, msgs_.next);
  return residual;
}

LiftedGbpResult run_lifted_gbp(const LiftedRegionGraph& g,
                               const LiftedGbpOptions& opts) {
  LiftedGbp engine(g, opts);
  LiftedGbpResult result;
  for (int it = 1; it <= opts.iterations; ++it) {
    double residual = engine.step();
    if (opts.onBeliefs) opts.onBeliefs(it, engine.beliefs());
    result.residuals.push_back(residual);
    result.iterationsUsed = it;
    if (residual < opts.tolerance) {
      result.converged = true;
      break;
    }
  }
  engine.computeBeliefs();
  result.beliefs = engine.beliefs();
  return result;
}

FactorTable query_marginal(const LiftedRegionGraph& g,
                           const std::vector<FactorTable>& beliefs,
                           const ParfactorModel& model, const GroundAtom& atom) {
  Csg singleton = build_csg({atom}, g.predNames);
  auto [canon, mapping] = canonize(singleton, model);
  int cls = g.classOf(canon.canonForm);
  if (cls < 0) {
    fail(ErrorCode::NoContainingRegion,
         "no canonical region covers " + ground_atom_name(atom, g.predNames));
  }
  const LiftedRegion& region = g.regions[cls];
  FactorTable m = marginalize_sum(beliefs[cls], {region.vars[0]});
  return normalize(m);
}

}  // namespace lgbp
