#include "lgbp/lifted_graph.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

#include "lgbp/errors.hpp"

namespace lgbp {

long LiftedEdge::kappa(int N) const {
  if (N < nBeta + nRest) {
    fail(ErrorCode::DomainTooSmall,
         "kappa needs N >= " + std::to_string(nBeta + nRest));
  }
  long k = 1;
  for (int i = 1; i <= nRest; ++i) k *= static_cast<long>(N - nBeta - i + 1);
  return k;
}

std::string LiftedEdge::kappaSymbolic() const {
  if (nRest == 0) return "1";
  std::string s;
  for (int i = 1; i <= nRest; ++i) {
    int off = nBeta + i - 1;
    s += off == 0 ? "(N)" : "(N-" + std::to_string(off) + ")";
  }
  return s;
}

int LiftedRegionGraph::classOf(const std::string& canonForm) const {
  auto it = byForm.find(canonForm);
  return it == byForm.end() ? -1 : it->second;
}

namespace {

std::string serializeCandidate(const MappingCandidate& c) {
  std::string s;
  for (int a : c.subsetAtoms) s += std::to_string(a) + ",";
  s += "->";
  for (int a : c.sigmaAtoms) s += std::to_string(a) + ",";
  return s;
}

/// Log product of all parfactor groundings whose atoms fit inside `scope`.
FactorTable regionPrior(const ParfactorModel& model, const LiftedRegion& region,
                        VariablePool& pool) {
  std::set<int> objectSet;
  for (const GroundAtom& a : region.cluster.atoms) {
    objectSet.insert(a.objects.begin(), a.objects.end());
  }
  std::vector<int> objects(objectSet.begin(), objectSet.end());
  std::set<GroundAtom> scopeAtoms(region.cluster.atoms.begin(),
                                  region.cluster.atoms.end());

  std::vector<int> cards;
  for (VarId v : region.vars) cards.push_back(pool.card(v));
  FactorTable prior(region.vars, cards);

  for (const Parfactor& pf : model.parfactors) {
    int n = static_cast<int>(pf.lvarNames.size());
    std::vector<int> assign(n, 0);
    std::function<void(int)> rec = [&](int i) {
      if (i == n) {
        std::vector<VarId> scope;
        for (const Atom& a : pf.atoms) {
          GroundAtom ga;
          ga.pred = a.pred;
          for (int lv : a.lvars) ga.objects.push_back(assign[lv]);
          if (!scopeAtoms.count(ga)) return;
          scope.push_back(pool.lookup(ga));
        }
        prior = multiply(prior, FactorTable(scope, pf.table.cards(),
                                            pf.table.logValues()));
        return;
      }
      for (int o : objects) {
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
  return prior;
}

struct Builder {
  const ParfactorModel& model;
  LiftedRegionGraph g;

  explicit Builder(const ParfactorModel& m) : model(m) {
    g.predNames = m.predicateNames();
  }

  int addRegion(const std::vector<GroundAtom>& cluster) {
    Csg raw = build_csg(cluster, g.predNames);
    auto [canon, mapping] = canonize(raw, model);
    auto it = g.byForm.find(canon.canonForm);
    if (it != g.byForm.end()) return it->second;
    LiftedRegion region;
    region.cluster = canon;
    for (const GroundAtom& a : region.cluster.atoms) {
      region.vars.push_back(g.pool.intern(a, model.predicates[a.pred].range));
    }
    region.csg = build_csg(region.cluster.atoms, g.predNames);
    std::set<int> objs;
    for (const GroundAtom& a : region.cluster.atoms) {
      objs.insert(a.objects.begin(), a.objects.end());
    }
    region.objectCount = static_cast<int>(objs.size());
    region.prior = regionPrior(model, region, g.pool);
    int id = static_cast<int>(g.regions.size());
    g.regions.push_back(std::move(region));
    g.byForm.emplace(canon.canonForm, id);
    return id;
  }

  void generate() {
    for (const auto& cluster : canonical_outer_clusters(model)) addRegion(cluster);

    int dmax = 0;
    for (const auto& r : g.regions) {
      dmax = std::max(dmax, static_cast<int>(r.cluster.atoms.size()));
    }
    for (int d = dmax; d >= 2; --d) {
      std::vector<int> level;
      for (int r = 0; r < static_cast<int>(g.regions.size()); ++r) {
        if (static_cast<int>(g.regions[r].cluster.atoms.size()) == d) {
          level.push_back(r);
        }
      }
      for (int alpha : level) {
        std::map<int, std::vector<MappingCandidate>> byChild;
        // Copy: addRegion below may grow g.regions and move the storage.
        const auto atoms = g.regions[alpha].cluster.atoms;
        for (int drop = 0; drop < d; ++drop) {
          std::vector<int> subsetIdx;
          std::vector<GroundAtom> subset;
          for (int i = 0; i < d; ++i) {
            if (i == drop) continue;
            subsetIdx.push_back(i);
            subset.push_back(atoms[i]);
          }
          int child = addRegion(subset);
          const LiftedRegion& childRegion = g.regions[child];
          Csg subsetCsg = build_csg(subset, g.predNames);
          for (const NodeMap& iso :
               enumerate_isomorphisms(subsetCsg, childRegion.csg)) {
            MappingCandidate cand;
            cand.subsetAtoms = subsetIdx;
            cand.sigmaObjects = iso;
            bool ok = true;
            for (const GroundAtom& a : subset) {
              GroundAtom img;
              img.pred = a.pred;
              for (int o : a.objects) img.objects.push_back(iso.at(o));
              auto it = std::find(childRegion.cluster.atoms.begin(),
                                  childRegion.cluster.atoms.end(), img);
              if (it == childRegion.cluster.atoms.end()) {
                ok = false;
                break;
              }
              cand.sigmaAtoms.push_back(
                  static_cast<int>(it - childRegion.cluster.atoms.begin()));
            }
            if (!ok) fail(ErrorCode::Internal, "isomorphism does not map atoms");
            auto& cands = byChild[child];
            bool dup = false;  // distinct node maps cannot alias, but be safe
            for (const auto& c : cands) {
              if (c.subsetAtoms == cand.subsetAtoms &&
                  c.sigmaAtoms == cand.sigmaAtoms) {
                dup = true;
              }
            }
            if (!dup) cands.push_back(std::move(cand));
          }
        }
        for (auto& [child, cands] : byChild) {
          for (const MappingCandidate& c :
               filter_redundant_mappings(g.regions[alpha].csg, cands)) {
            LiftedEdge e;
            e.parent = alpha;
            e.child = child;
            e.subsetAtoms = c.subsetAtoms;
            e.sigmaAtoms = c.sigmaAtoms;
            e.sigmaObjects = c.sigmaObjects;
            e.nBeta = static_cast<int>(c.sigmaObjects.size());
            e.nRest = g.regions[alpha].objectCount - e.nBeta;
            g.edges.push_back(std::move(e));
          }
        }
      }
    }
    rebuildEdgeCaches();
  }

  void rebuildEdgeCaches() {
    g.inEdges.assign(g.regions.size(), {});
    g.outEdges.assign(g.regions.size(), {});
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
      g.outEdges[g.edges[e].parent].push_back(static_cast<int>(e));
      g.inEdges[g.edges[e].child].push_back(static_cast<int>(e));
    }
  }

  void contract() {
    while (true) {
      int victim = -1;
      for (int r = 0; r < static_cast<int>(g.regions.size()); ++r) {
        if (g.inEdges[r].size() == 1 && g.edges[g.inEdges[r][0]].nRest == 0) {
          victim = r;
          break;
        }
      }
      if (victim < 0) break;
      const LiftedEdge in = g.edges[g.inEdges[victim][0]];
      std::vector<LiftedEdge> replacements;
      for (int oe : g.outEdges[victim]) {
        const LiftedEdge& out = g.edges[oe];
        LiftedEdge e;
        e.parent = in.parent;
        e.child = out.child;
        // Parent atoms whose image under the in-edge lies in the out-edge's
        // subset; kappa == 1 on the in-edge makes objects correspond 1:1.
        for (std::size_t i = 0; i < in.subsetAtoms.size(); ++i) {
          auto pos = std::find(out.subsetAtoms.begin(), out.subsetAtoms.end(),
                               in.sigmaAtoms[i]);
          if (pos == out.subsetAtoms.end()) continue;
          e.subsetAtoms.push_back(in.subsetAtoms[i]);
          e.sigmaAtoms.push_back(
              out.sigmaAtoms[pos - out.subsetAtoms.begin()]);
        }
        NodeMap invIn;  // victim object -> parent object
        for (const auto& [p, v] : in.sigmaObjects) invIn[v] = p;
        for (const auto& [v, c] : out.sigmaObjects) {
          e.sigmaObjects[invIn.at(v)] = c;
        }
        e.nBeta = out.nBeta;
        e.nRest = g.regions[in.parent].objectCount - e.nBeta;
        replacements.push_back(std::move(e));
      }
      // Drop all edges touching the victim, append replacements, and keep
      // the region list compact.
      std::vector<LiftedEdge> kept;
      for (const LiftedEdge& e : g.edges) {
        if (e.parent != victim && e.child != victim) kept.push_back(e);
      }
      // Two contracted routes can compose to the same mapping; that mapping
      // stands for one ground edge class, so keep a single copy.
      auto sameEdge = [](const LiftedEdge& a, const LiftedEdge& b) {
        return a.parent == b.parent && a.child == b.child &&
               a.subsetAtoms == b.subsetAtoms && a.sigmaAtoms == b.sigmaAtoms &&
               a.sigmaObjects == b.sigmaObjects;
      };
      for (LiftedEdge& e : replacements) {
        bool dup = false;
        for (const LiftedEdge& k : kept) {
          if (sameEdge(e, k)) dup = true;
        }
        if (!dup) kept.push_back(std::move(e));
      }
      for (LiftedEdge& e : kept) {
        if (e.parent > victim) --e.parent;
        if (e.child > victim) --e.child;
      }
      g.byForm.erase(g.regions[victim].cluster.canonForm);
      for (auto& [form, id] : g.byForm) {
        if (id > victim) --id;
      }
      g.regions.erase(g.regions.begin() + victim);
      g.edges = std::move(kept);
      rebuildEdgeCaches();
    }
  }

  std::set<int> reachableClasses(int alpha) const {
    std::set<int> seen;
    std::vector<int> stack{alpha};
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int e : g.outEdges[u]) {
        if (seen.insert(g.edges[e].child).second) stack.push_back(g.edges[e].child);
      }
    }
    return seen;
  }

  /// CSG of the parent class `rho` of a lifted in-edge of gamma*, with the
  /// colors of atoms mapped into gamma* augmented by the child atom index.
  Csg colorAugmentedLifted(const LiftedEdge& e) const {
    const LiftedRegion& rho = g.regions[e.parent];
    std::vector<std::string> colors(rho.cluster.atoms.size());
    for (std::size_t i = 0; i < rho.cluster.atoms.size(); ++i) {
      colors[i] = g.predNames[rho.cluster.atoms[i].pred];
    }
    for (std::size_t i = 0; i < e.subsetAtoms.size(); ++i) {
      colors[e.subsetAtoms[i]] += "=" + std::to_string(e.sigmaAtoms[i]);
    }
    return coloredCsg(rho.cluster.atoms, colors);
  }

  static Csg coloredCsg(const std::vector<GroundAtom>& atoms,
                        const std::vector<std::string>& colors) {
    Csg c;
    std::set<int> nodes;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      const GroundAtom& a = atoms[i];
      if (a.objects.size() == 1) {
        nodes.insert(a.objects[0]);
        c.edges.push_back({a.objects[0], a.objects[0], colors[i]});
      } else {
        nodes.insert(a.objects[0]);
        nodes.insert(a.objects[1]);
        c.edges.push_back({a.objects[0], a.objects[1], colors[i]});
      }
    }
    c.nodes.assign(nodes.begin(), nodes.end());
    std::sort(c.edges.begin(), c.edges.end());
    return c;
  }

  LocalGraph buildLocal(int alpha) const {
    const LiftedRegion& region = g.regions[alpha];
    int n = static_cast<int>(region.cluster.atoms.size());
    std::set<int> reachable = reachableClasses(alpha);
    LocalGraph local;
    LocalNode root;
    for (int i = 0; i < n; ++i) root.atoms.push_back(i);
    root.liftedClass = alpha;
    for (int i = 0; i < n; ++i) root.canonMap.push_back(i);
    local.nodes.push_back(root);

    for (unsigned mask = 1; mask + 1 < (1u << n); ++mask) {
      std::vector<int> idx;
      std::vector<GroundAtom> cluster;
      for (int i = 0; i < n; ++i) {
        if (mask & (1u << i)) {
          idx.push_back(i);
          cluster.push_back(region.cluster.atoms[i]);
        }
      }
      Csg sub = build_csg(cluster, g.predNames);
      auto [canon, mapping] = canonize(sub, model);
      int cls = g.classOf(canon.canonForm);
      if (cls < 0 || !reachable.count(cls)) continue;
      LocalNode node;
      node.atoms = idx;
      node.liftedClass = cls;
      // sigma(gamma* -> gamma): lexicographically smallest isomorphism from
      // the class CSG onto this subset's CSG.
      auto isos = enumerate_isomorphisms(g.regions[cls].csg, sub);
      if (isos.empty()) fail(ErrorCode::Internal, "class CSG not isomorphic");
      const NodeMap& sigma = *std::min_element(isos.begin(), isos.end());
      node.canonMap = canonToLocalAtoms(cls, sigma, region, idx);
      local.nodes.push_back(std::move(node));
    }

    // Edges: maximal containment within the local node set.
    auto contains = [&](const LocalNode& a, const LocalNode& b) {
      return a.atoms.size() > b.atoms.size() &&
             std::includes(a.atoms.begin(), a.atoms.end(), b.atoms.begin(),
                           b.atoms.end());
    };
    for (std::size_t p = 0; p < local.nodes.size(); ++p) {
      for (std::size_t c = 0; c < local.nodes.size(); ++c) {
        if (p == c || !contains(local.nodes[p], local.nodes[c])) continue;
        bool maximal = true;
        for (std::size_t m = 0; m < local.nodes.size(); ++m) {
          if (m == p || m == c) continue;
          if (contains(local.nodes[p], local.nodes[m]) &&
              contains(local.nodes[m], local.nodes[c])) {
            maximal = false;
            break;
          }
        }
        if (maximal) {
          local.edges.emplace_back(static_cast<int>(p), static_cast<int>(c));
        }
      }
    }

    for (std::size_t gi = 1; gi < local.nodes.size(); ++gi) {
      associate(alpha, local, static_cast<int>(gi));
    }
    return local;
  }

  /// Convert a node map (canonical object -> region object) of class `cls`
  /// into an atom map: canonical atom k -> region atom index.
  std::vector<int> canonToLocalAtoms(int cls, const NodeMap& sigma,
                                     const LiftedRegion& region,
                                     const std::vector<int>& idx) const {
    std::vector<int> out;
    for (const GroundAtom& a : g.regions[cls].cluster.atoms) {
      GroundAtom img;
      img.pred = a.pred;
      for (int o : a.objects) img.objects.push_back(sigma.at(o));
      int found = -1;
      for (int i : idx) {
        if (region.cluster.atoms[i] == img) found = i;
      }
      if (found < 0) fail(ErrorCode::Internal, "sigma image atom missing");
      out.push_back(found);
    }
    return out;
  }

  /// The G / G* matching: associate every local edge into `gi` with the
  /// lifted edge it instantiates, and bump the localPar count.
  void associate(int alpha, LocalGraph& local, int gi) const {
    const LiftedRegion& region = g.regions[alpha];
    const LocalNode& gamma = local.nodes[gi];

    // Tag of a region atom = its canonical index in gamma*.
    std::map<int, int> tag;
    for (std::size_t k = 0; k < gamma.canonMap.size(); ++k) {
      tag[gamma.canonMap[k]] = static_cast<int>(k);
    }

    std::vector<std::pair<int, Csg>> liftedSide;  // (edge id, G* graph)
    for (int e : g.inEdges[gamma.liftedClass]) {
      liftedSide.emplace_back(e, colorAugmentedLifted(g.edges[e]));
    }

    for (const auto& [p, c] : local.edges) {
      if (c != gi) continue;
      const LocalNode& rho = local.nodes[p];
      std::vector<GroundAtom> atoms;
      std::vector<std::string> colors;
      for (int i : rho.atoms) {
        atoms.push_back(region.cluster.atoms[i]);
        std::string col = g.predNames[region.cluster.atoms[i].pred];
        auto it = tag.find(i);
        if (it != tag.end()) col += "=" + std::to_string(it->second);
        colors.push_back(col);
      }
      Csg gGraph = coloredCsg(atoms, colors);
      int matched = -1;
      for (const auto& [e, gStar] : liftedSide) {
        if (!enumerate_isomorphisms(gGraph, gStar).empty()) {
          if (matched >= 0) {
            fail(ErrorCode::Internal, "local parent matches two lifted edges");
          }
          matched = e;
        }
      }
      if (matched < 0) {
        fail(ErrorCode::NoAssociation,
             "local parent matches no lifted edge (construction bug)");
      }
      ++local.localPar[{gi, matched}];
    }
  }
};

}  // namespace

std::vector<std::vector<GroundAtom>> canonical_outer_clusters(
    const ParfactorModel& model) {
  if (!model.singleDomain()) {
    fail(ErrorCode::LvarDomainMismatch,
         "lifted inference requires a single-domain model");
  }
  std::vector<std::vector<GroundAtom>> out;
  for (const Parfactor& pf : model.parfactors) {
    std::vector<GroundAtom> cluster;
    for (const Atom& a : pf.atoms) {
      GroundAtom ga;
      ga.pred = a.pred;
      for (int lv : a.lvars) ga.objects.push_back(lv + 1);
      if (std::find(cluster.begin(), cluster.end(), ga) == cluster.end()) {
        cluster.push_back(ga);
      }
    }
    out.push_back(std::move(cluster));
  }
  return out;
}

std::vector<MappingCandidate> filter_redundant_mappings(
    const Csg& parentCsg, const std::vector<MappingCandidate>& candidates) {
  std::vector<MappingCandidate> sorted = candidates;
  std::sort(sorted.begin(), sorted.end(),
            [](const MappingCandidate& a, const MappingCandidate& b) {
              return serializeCandidate(a) < serializeCandidate(b);
            });
  std::vector<MappingCandidate> out;
  for (const MappingCandidate& cand : sorted) {
    bool redundant = false;
    for (const MappingCandidate& kept : out) {
      // Map from cand's subset objects to kept's, via the shared child.
      NodeMap invKept;
      for (const auto& [p, c] : kept.sigmaObjects) invKept[c] = p;
      NodeMap partial;
      for (const auto& [p, c] : cand.sigmaObjects) partial[p] = invKept.at(c);
      if (extends_to_automorphism(parentCsg, partial)) {
        redundant = true;
        break;
      }
    }
    if (!redundant) out.push_back(cand);
  }
  return out;
}

LiftedRegionGraph generate_lifted_region_graph(const ParfactorModel& model,
                                               const LiftedGraphOptions& opts) {
  Builder b(model);
  b.generate();
  if (opts.contractNonIntersections) b.contract();
  b.g.locals.clear();
  for (int r = 0; r < static_cast<int>(b.g.regions.size()); ++r) {
    b.g.locals.push_back(b.buildLocal(r));
  }
  return std::move(b.g);
}

std::string serialize_lifted_graph(const LiftedRegionGraph& g) {
  std::ostringstream out;
  for (std::size_t r = 0; r < g.regions.size(); ++r) {
    out << "region " << r << " " << g.regions[r].cluster.canonForm << "\n";
  }
  for (const LiftedEdge& e : g.edges) {
    out << "edge " << e.parent << "->" << e.child << " beta=[";
    for (int a : e.subsetAtoms) out << a << " ";
    out << "] sigma=[";
    for (int a : e.sigmaAtoms) out << a << " ";
    out << "] kappa=" << e.kappaSymbolic() << "\n";
  }
  for (std::size_t r = 0; r < g.locals.size(); ++r) {
    for (const auto& [key, count] : g.locals[r].localPar) {
      out << "localPar region=" << r << " node=" << key.first
          << " edge=" << key.second << " count=" << count << "\n";
    }
  }
  return out.str();
}

}  // namespace lgbp
