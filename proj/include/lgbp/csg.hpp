#pragma once

#include <map>
#include <string>
#include <vector>

#include "lgbp/model.hpp"

namespace lgbp {

struct CsgEdge {
  int src = 0;
  int dst = 0;
  std::string color;

  auto operator<=>(const CsgEdge&) const = default;
};

/// Cluster signature: directed colored multigraph over object indices.
/// A unary atom p(i) contributes a self-edge (i,i,'p'); a binary atom
/// r(i,j) contributes a directed edge (i,j,'r').
struct Csg {
  std::vector<int> nodes;  // sorted, exactly the objects referenced by edges
  std::vector<CsgEdge> edges;
};

/// Node bijection between two CSGs (source object -> target object).
using NodeMap = std::map<int, int>;

struct CanonicalCluster {
  std::vector<GroundAtom> atoms;  // canonical labels 1..n, sorted-edge order
  std::string canonForm;
};

Csg build_csg(const std::vector<GroundAtom>& cluster,
              const std::vector<std::string>& predNames);

/// Canonical labeling: minimal sorted edge encoding over all labelings that
/// respect the color-degree cell order. Returns the canonical cluster and
/// the mapping original object -> canonical label.
std::pair<CanonicalCluster, NodeMap> canonize(const Csg& g,
                                              const ParfactorModel& model);

std::string encode_csg(const Csg& g);

/// All edge-color-preserving node bijections g1 -> g2 (empty iff not
/// isomorphic).
std::vector<NodeMap> enumerate_isomorphisms(const Csg& g1, const Csg& g2);

/// True iff some automorphism of g agrees with `partial` everywhere it is
/// defined.
bool extends_to_automorphism(const Csg& g, const NodeMap& partial);

std::string csg_to_dot(const Csg& g);

}  // namespace lgbp
