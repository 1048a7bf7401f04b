#pragma once

#include <map>
#include <string>
#include <vector>

#include "lgbp/csg.hpp"
#include "lgbp/factor_table.hpp"
#include "lgbp/model.hpp"

namespace lgbp {

/// A canonical region: scope is a canonical cluster (canonize is a fixed
/// point on it); prior is the log product of all parfactor groundings that
/// fit inside the scope.
struct LiftedRegion {
  CanonicalCluster cluster;
  std::vector<VarId> vars;  // one per cluster atom, same order
  Csg csg;
  FactorTable prior;
  int objectCount = 0;
};

struct LiftedEdge {
  int parent = -1;
  int child = -1;
  std::vector<int> subsetAtoms;  // parent atom indices forming beta, sorted
  std::vector<int> sigmaAtoms;   // sigmaAtoms[i]: child atom index of
                                 // parent atom subsetAtoms[i]
  NodeMap sigmaObjects;          // parent object -> child object
  int nBeta = 0;                 // objects referenced by beta
  int nRest = 0;                 // objects of alpha not referenced by beta

  /// kappa(N) = prod_{i=1..nRest} (N - nBeta - i + 1).
  long kappa(int N) const;
  std::string kappaSymbolic() const;  // e.g. "(N-1)(N-2)" or "1"
};

/// Local graph of a canonical region: all subsets of its scope whose
/// canonical class appears in the lifted graph, arranged as a region graph
/// rooted at the region itself.
struct LocalNode {
  std::vector<int> atoms;  // region atom indices, sorted; node 0 is the root
  int liftedClass = -1;
  /// Chosen sigma(gamma* -> gamma): canonical atom index k of the class
  /// maps to region atom canonMap[k].
  std::vector<int> canonMap;
};

struct LocalGraph {
  std::vector<LocalNode> nodes;
  std::vector<std::pair<int, int>> edges;  // (parent node, child node)
  /// (local node, lifted edge id) -> |localPar|.
  std::map<std::pair<int, int>, int> localPar;
};

struct LiftedRegionGraph {
  std::vector<LiftedRegion> regions;
  std::vector<LiftedEdge> edges;
  std::vector<std::vector<int>> inEdges, outEdges;  // region -> edge ids
  std::vector<LocalGraph> locals;
  std::map<std::string, int> byForm;  // canonForm -> region id
  VariablePool pool;                  // canonical atom variables
  std::vector<std::string> predNames;

  int classOf(const std::string& canonForm) const;
};

struct LiftedGraphOptions {
  /// Remove regions that are the target of a single edge with kappa == 1,
  /// reconnecting their parent to their children.
  bool contractNonIntersections = false;
};

/// One canonical outer region per shattered parfactor (deduplicated by
/// canonical form; tables of coinciding parfactors are merged).
std::vector<std::vector<GroundAtom>> canonical_outer_clusters(
    const ParfactorModel& model);

LiftedRegionGraph generate_lifted_region_graph(const ParfactorModel& model,
                                               const LiftedGraphOptions& opts = {});

/// Candidate mapping of one (d-1)-subset of a parent onto a canonical child.
struct MappingCandidate {
  std::vector<int> subsetAtoms;  // parent atom indices, sorted
  std::vector<int> sigmaAtoms;   // child atom index per subset entry
  NodeMap sigmaObjects;
};

/// Keep one candidate per orbit of the parent-CSG automorphism group
/// (two candidates are redundant iff composing one mapping with the
/// inverse of the other extends to an automorphism of the parent's CSG).
std::vector<MappingCandidate> filter_redundant_mappings(
    const Csg& parentCsg, const std::vector<MappingCandidate>& candidates);

/// Structural fingerprint of the graph; independent of the domain size.
std::string serialize_lifted_graph(const LiftedRegionGraph& g);

}  // namespace lgbp
