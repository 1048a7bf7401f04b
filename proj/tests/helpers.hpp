#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "lgbp/compare.hpp"
#include "lgbp/lifted_gbp.hpp"
#include "lgbp/lifted_graph.hpp"
#include "lgbp/model.hpp"
#include "lgbp/region_graph.hpp"

namespace helpers {

using namespace lgbp;

inline ParfactorModel loadShattered(const char* text, int n) {
  ParfactorModel m = parse_model(text);
  for (DomainDecl& d : m.domains) d.size = n;
  return shatter(m);
}

inline std::vector<GroundAtom> scopeAtoms(const GroundMrf& mrf,
                                          const std::vector<VarId>& scope) {
  std::vector<GroundAtom> atoms;
  for (VarId v : scope) atoms.push_back(mrf.vars.atom(v));
  return atoms;
}

inline int classOfScope(const LiftedRegionGraph& lg, const ParfactorModel& model,
                        const GroundMrf& mrf, const std::vector<VarId>& scope) {
  Csg csg = build_csg(scopeAtoms(mrf, scope), lg.predNames);
  auto [canon, mapping] = canonize(csg, model);
  return lg.classOf(canon.canonForm);
}

inline GroundAtom applyMap(const GroundAtom& a, const NodeMap& phi) {
  GroundAtom img;
  img.pred = a.pred;
  for (int o : a.objects) img.objects.push_back(phi.at(o));
  return img;
}

/// Lifted edges that a ground parent/child region pair instantiates.
/// `childAtomImage` pins the association of the ground child: canonical atom
/// k of the child class names the ground atom childAtomImage[k]. When empty,
/// the lexicographically smallest isomorphism is used. Pinning makes the
/// attribution unique even across parallel edges.
inline std::vector<int> matchingLiftedEdges(
    const LiftedRegionGraph& lg, const ParfactorModel& model,
    const GroundMrf& mrf, const std::vector<VarId>& parentScope,
    const std::vector<VarId>& childScope,
    std::vector<GroundAtom> childAtomImage = {}) {
  int clsP = classOfScope(lg, model, mrf, parentScope);
  int clsC = classOfScope(lg, model, mrf, childScope);
  Csg parentCsg = build_csg(scopeAtoms(mrf, parentScope), lg.predNames);
  const auto& clsAtoms = lg.regions[clsP].cluster.atoms;
  const auto& childClsAtoms = lg.regions[clsC].cluster.atoms;
  if (childAtomImage.empty()) {
    Csg childCsg = build_csg(scopeAtoms(mrf, childScope), lg.predNames);
    auto childIsos = enumerate_isomorphisms(lg.regions[clsC].csg, childCsg);
    const NodeMap& phiC = *std::min_element(childIsos.begin(), childIsos.end());
    for (const GroundAtom& a : childClsAtoms) {
      childAtomImage.push_back(applyMap(a, phiC));
    }
  }

  std::vector<int> out;
  for (std::size_t e = 0; e < lg.edges.size(); ++e) {
    const LiftedEdge& edge = lg.edges[e];
    if (edge.parent != clsP || edge.child != clsC) continue;
    bool matched = false;
    for (const NodeMap& phiP :
         enumerate_isomorphisms(lg.regions[clsP].csg, parentCsg)) {
      bool ok = true;
      for (std::size_t i = 0; i < edge.subsetAtoms.size() && ok; ++i) {
        ok = applyMap(clsAtoms[edge.subsetAtoms[i]], phiP) ==
             childAtomImage[edge.sigmaAtoms[i]];
      }
      if (ok) {
        matched = true;
        break;
      }
    }
    if (matched) out.push_back(static_cast<int>(e));
  }
  return out;
}

/// Permute the objects of every atom in the pool; returns var -> var.
inline std::map<VarId, VarId> permuteVars(const GroundMrf& mrf,
                                          const std::map<int, int>& perm) {
  std::map<VarId, VarId> out;
  for (std::size_t v = 0; v < mrf.vars.size(); ++v) {
    GroundAtom a = mrf.vars.atom(static_cast<VarId>(v));
    for (int& o : a.objects) {
      auto it = perm.find(o);
      if (it != perm.end()) o = it->second;
    }
    VarId img = mrf.vars.lookup(a);
    if (img < 0) return {};
    out[static_cast<VarId>(v)] = img;
  }
  return out;
}

/// Max log deviation from message symmetry under a variable permutation
/// across `iters` flooding iterations.
inline double messageSymmetryError(const RegionGraph& rg, const GroundMrf& mrf,
                                   const std::map<int, int>& objPerm, int iters,
                                   double damping = 0.5) {
  auto varMap = permuteVars(mrf, objPerm);
  if (varMap.empty()) return 1e18;

  std::map<std::vector<VarId>, int> regionByScope;
  for (std::size_t r = 0; r < rg.regions.size(); ++r) {
    regionByScope[rg.regions[r].scope] = static_cast<int>(r);
  }
  auto regionImage = [&](int r) {
    std::vector<VarId> scope;
    for (VarId v : rg.regions[r].scope) scope.push_back(varMap.at(v));
    std::sort(scope.begin(), scope.end());
    return regionByScope.at(scope);
  };
  std::map<std::pair<int, int>, int> edgeByPair;
  for (std::size_t e = 0; e < rg.edges.size(); ++e) {
    edgeByPair[rg.edges[e]] = static_cast<int>(e);
  }
  std::vector<int> edgeImage(rg.edges.size());
  for (std::size_t e = 0; e < rg.edges.size(); ++e) {
    edgeImage[e] = edgeByPair.at(
        {regionImage(rg.edges[e].first), regionImage(rg.edges[e].second)});
  }
  auto renamed = [&](const FactorTable& t) {
    std::vector<std::pair<VarId, VarId>> mapping;
    for (VarId v : t.scope()) mapping.emplace_back(v, varMap.at(v));
    return rename(t, mapping);
  };

  GbpOptions opts;
  opts.damping = damping;
  GroundGbp engine(rg, opts);
  double worst = 0.0;
  for (int it = 0; it < iters; ++it) {
    engine.step();
    for (std::size_t e = 0; e < rg.edges.size(); ++e) {
      FactorTable img = renamed(engine.messages().cur[e]);
      worst = std::max(
          worst, max_abs_log_diff(img, engine.messages().cur[edgeImage[e]]));
    }
  }
  return worst;
}

inline FactorTable groundAtomMarginal(const RegionGraph& rg,
                                      const std::vector<FactorTable>& beliefs,
                                      VarId v) {
  int best = -1;
  for (std::size_t r = 0; r < rg.regions.size(); ++r) {
    const auto& scope = rg.regions[r].scope;
    if (!std::binary_search(scope.begin(), scope.end(), v)) continue;
    if (best < 0 || scope.size() < rg.regions[best].scope.size()) {
      best = static_cast<int>(r);
    }
  }
  return normalize(marginalize_sum(beliefs[best], {v}));
}

}  // namespace helpers
