#include "lgbp/export.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"

namespace lgbp {

namespace {

using nlohmann::json;

std::string scopeLabel(const std::vector<VarId>& scope, const VariablePool& pool,
                       const std::vector<std::string>& predNames) {
  std::string s;
  for (std::size_t i = 0; i < scope.size(); ++i) {
    if (i) s += ", ";
    s += ground_atom_name(pool.atom(scope[i]), predNames);
  }
  return "{" + s + "}";
}

std::string clusterLabel(const CanonicalCluster& c,
                         const std::vector<std::string>& predNames) {
  std::string s;
  for (std::size_t i = 0; i < c.atoms.size(); ++i) {
    if (i) s += ", ";
    s += ground_atom_name(c.atoms[i], predNames);
  }
  return "{" + s + "}";
}

json atomJson(const GroundAtom& a, const std::vector<std::string>& predNames) {
  return json{{"pred", predNames[a.pred]}, {"objects", a.objects}};
}

std::string sigmaLabel(const LiftedEdge& e, const LiftedRegionGraph& g) {
  const auto& parent = g.regions[e.parent].cluster.atoms;
  const auto& child = g.regions[e.child].cluster.atoms;
  std::string s;
  for (std::size_t i = 0; i < e.subsetAtoms.size(); ++i) {
    if (i) s += ", ";
    s += ground_atom_name(parent[e.subsetAtoms[i]], g.predNames) + ">" +
         ground_atom_name(child[e.sigmaAtoms[i]], g.predNames);
  }
  return s;
}

}  // namespace

std::string region_graph_to_dot(const RegionGraph& g, const GroundMrf& mrf,
                                const std::vector<std::string>& predNames) {
  std::ostringstream out;
  out << "digraph regions {\n  rankdir=TB;\n";
  for (std::size_t r = 0; r < g.regions.size(); ++r) {
    out << "  r" << r << " [label=\""
        << scopeLabel(g.regions[r].scope, mrf.vars, predNames) << "\"];\n";
  }
  for (const auto& [p, c] : g.edges) {
    out << "  r" << p << " -> r" << c << ";\n";
  }
  out << "}\n";
  return out.str();
}

std::string region_graph_to_json(const RegionGraph& g, const GroundMrf& mrf,
                                 const std::vector<std::string>& predNames) {
  json j;
  j["schemaVersion"] = 1;
  j["regions"] = json::array();
  for (std::size_t r = 0; r < g.regions.size(); ++r) {
    json atoms = json::array();
    for (VarId v : g.regions[r].scope) {
      atoms.push_back(atomJson(mrf.vars.atom(v), predNames));
    }
    bool outer = std::find(g.outer.begin(), g.outer.end(),
                           static_cast<int>(r)) != g.outer.end();
    j["regions"].push_back({{"id", r}, {"atoms", atoms}, {"outer", outer}});
  }
  j["edges"] = json::array();
  for (const auto& [p, c] : g.edges) {
    j["edges"].push_back({{"parent", p}, {"child", c}});
  }
  return j.dump(2) + "\n";
}

std::string lifted_graph_to_dot(const LiftedRegionGraph& g) {
  std::ostringstream out;
  out << "digraph lifted {\n  rankdir=TB;\n";
  for (std::size_t r = 0; r < g.regions.size(); ++r) {
    out << "  r" << r << " [label=\""
        << clusterLabel(g.regions[r].cluster, g.predNames) << "\"];\n";
  }
  for (const LiftedEdge& e : g.edges) {
    out << "  r" << e.parent << " -> r" << e.child << " [label=\"kappa="
        << e.kappaSymbolic() << "\\nsigma: " << sigmaLabel(e, g) << "\"];\n";
  }
  out << "}\n";
  return out.str();
}

std::string lifted_graph_to_json(const LiftedRegionGraph& g) {
  json j;
  j["schemaVersion"] = 1;
  j["regions"] = json::array();
  for (std::size_t r = 0; r < g.regions.size(); ++r) {
    json atoms = json::array();
    for (const GroundAtom& a : g.regions[r].cluster.atoms) {
      atoms.push_back(atomJson(a, g.predNames));
    }
    j["regions"].push_back({{"id", r},
                            {"atoms", atoms},
                            {"objects", g.regions[r].objectCount},
                            {"outer", g.inEdges[r].empty()}});
  }
  j["edges"] = json::array();
  for (const LiftedEdge& e : g.edges) {
    json sigma = json::array();
    for (std::size_t i = 0; i < e.subsetAtoms.size(); ++i) {
      sigma.push_back({{"parentAtom", e.subsetAtoms[i]},
                       {"childAtom", e.sigmaAtoms[i]}});
    }
    j["edges"].push_back({{"parent", e.parent},
                          {"child", e.child},
                          {"sigma", sigma},
                          {"kappa", e.kappaSymbolic()}});
  }
  return j.dump(2) + "\n";
}

std::string lifted_beliefs_to_json(const LiftedRegionGraph& g,
                                   const std::vector<FactorTable>& beliefs) {
  json j;
  j["schemaVersion"] = 1;
  j["regions"] = json::array();
  for (std::size_t r = 0; r < beliefs.size(); ++r) {
    json atoms = json::array();
    for (const GroundAtom& a : g.regions[r].cluster.atoms) {
      atoms.push_back(atomJson(a, g.predNames));
    }
    std::vector<double> values;
    double sum = 0.0;
    for (double lv : beliefs[r].logValues()) {
      values.push_back(std::exp(lv));
      sum += values.back();
    }
    j["regions"].push_back({{"id", r},
                            {"atoms", atoms},
                            {"belief", values},
                            {"sum", sum}});
  }
  return j.dump(2) + "\n";
}

std::string residual_trace_to_csv(const std::vector<double>& residuals) {
  std::ostringstream out;
  out << "iteration,max_residual\n";
  out.precision(17);
  for (std::size_t i = 0; i < residuals.size(); ++i) {
    out << (i + 1) << "," << residuals[i] << "\n";
  }
  return out.str();
}

}  // namespace lgbp
