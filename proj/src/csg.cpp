#include "lgbp/csg.hpp"

#include <algorithm>
#include <functional>
#include <set>
#include <sstream>

#include "lgbp/errors.hpp"

namespace lgbp {

namespace {

std::map<int, std::string> nodeInvariants(const Csg& g) {
  std::map<int, std::vector<std::string>> tokens;
  for (int n : g.nodes) tokens[n];
  for (const CsgEdge& e : g.edges) {
    if (e.src == e.dst) {
      tokens[e.src].push_back("s:" + e.color);
    } else {
      tokens[e.src].push_back("o:" + e.color);
      tokens[e.dst].push_back("i:" + e.color);
    }
  }
  std::map<int, std::string> inv;
  for (auto& [n, ts] : tokens) {
    std::sort(ts.begin(), ts.end());
    std::string s;
    for (const auto& t : ts) s += t + ";";
    inv[n] = s;
  }
  return inv;
}

/// Nodes grouped into cells ordered by invariant; nodes within a cell are
/// ordered by object id.
std::vector<std::vector<int>> invariantCells(const Csg& g) {
  auto inv = nodeInvariants(g);
  std::map<std::string, std::vector<int>> byInv;
  for (const auto& [n, s] : inv) byInv[s].push_back(n);
  std::vector<std::vector<int>> cells;
  for (auto& [s, ns] : byInv) {
    std::sort(ns.begin(), ns.end());
    cells.push_back(ns);
  }
  return cells;
}

/// Invoke fn for every labeling that assigns canonical labels cell by cell.
/// The labeling maps original object -> label (1-based).
void forEachCellLabeling(const std::vector<std::vector<int>>& cells,
                         const std::function<void(const NodeMap&)>& fn) {
  std::vector<std::vector<int>> perms = cells;  // mutated via next_permutation
  NodeMap labeling;
  std::function<void(std::size_t)> rec = [&](std::size_t c) {
    if (c == perms.size()) {
      fn(labeling);
      return;
    }
    std::vector<int>& cell = perms[c];
    std::sort(cell.begin(), cell.end());
    int base = 1;
    for (std::size_t k = 0; k < c; ++k) base += static_cast<int>(perms[k].size());
    do {
      for (std::size_t i = 0; i < cell.size(); ++i) {
        labeling[cell[i]] = base + static_cast<int>(i);
      }
      rec(c + 1);
    } while (std::next_permutation(cell.begin(), cell.end()));
  };
  rec(0);
}

std::string encodeRelabeled(const Csg& g, const NodeMap& labeling) {
  std::vector<CsgEdge> edges;
  edges.reserve(g.edges.size());
  for (const CsgEdge& e : g.edges) {
    edges.push_back({labeling.at(e.src), labeling.at(e.dst), e.color});
  }
  std::sort(edges.begin(), edges.end(),
            [](const CsgEdge& a, const CsgEdge& b) {
              return std::tie(a.color, a.src, a.dst) < std::tie(b.color, b.src, b.dst);
            });
  std::ostringstream out;
  out << g.nodes.size() << ";";
  for (const CsgEdge& e : edges) {
    out << e.color << ":" << e.src << ">" << e.dst << "|";
  }
  return out.str();
}

}  // namespace

Csg build_csg(const std::vector<GroundAtom>& cluster,
              const std::vector<std::string>& predNames) {
  if (cluster.empty()) fail(ErrorCode::Internal, "empty cluster");
  Csg g;
  std::set<int> nodes;
  for (const GroundAtom& a : cluster) {
    if (a.objects.size() == 1) {
      nodes.insert(a.objects[0]);
      g.edges.push_back({a.objects[0], a.objects[0], predNames[a.pred]});
    } else if (a.objects.size() == 2) {
      nodes.insert(a.objects[0]);
      nodes.insert(a.objects[1]);
      g.edges.push_back({a.objects[0], a.objects[1], predNames[a.pred]});
    } else {
      fail(ErrorCode::ArityUnsupported, "atom arity must be 1 or 2");
    }
  }
  g.nodes.assign(nodes.begin(), nodes.end());
  std::sort(g.edges.begin(), g.edges.end());
  return g;
}

std::string encode_csg(const Csg& g) {
  NodeMap identity;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    identity[g.nodes[i]] = static_cast<int>(i) + 1;
  }
  return encodeRelabeled(g, identity);
}

std::pair<CanonicalCluster, NodeMap> canonize(const Csg& g,
                                              const ParfactorModel& model) {
  auto cells = invariantCells(g);
  std::string best;
  NodeMap bestMap;
  forEachCellLabeling(cells, [&](const NodeMap& labeling) {
    std::string enc = encodeRelabeled(g, labeling);
    if (best.empty() || enc < best) {
      best = enc;
      bestMap = labeling;
    }
  });

  CanonicalCluster cc;
  cc.canonForm = best;
  // Decode atoms from the canonical edge list.
  std::vector<CsgEdge> edges;
  for (const CsgEdge& e : g.edges) {
    edges.push_back({bestMap.at(e.src), bestMap.at(e.dst), e.color});
  }
  std::sort(edges.begin(), edges.end(), [](const CsgEdge& a, const CsgEdge& b) {
    return std::tie(a.color, a.src, a.dst) < std::tie(b.color, b.src, b.dst);
  });
  for (const CsgEdge& e : edges) {
    int pred = model.predicateIndex(e.color);
    if (pred < 0) fail(ErrorCode::Internal, "unknown edge color " + e.color);
    GroundAtom a;
    a.pred = pred;
    if (model.predicates[pred].argDomains.size() == 1) {
      a.objects = {e.src};
    } else {
      a.objects = {e.src, e.dst};
    }
    cc.atoms.push_back(a);
  }
  return {cc, bestMap};
}

std::vector<NodeMap> enumerate_isomorphisms(const Csg& g1, const Csg& g2) {
  std::vector<NodeMap> out;
  if (g1.nodes.size() != g2.nodes.size() || g1.edges.size() != g2.edges.size()) {
    return out;
  }
  auto inv1 = nodeInvariants(g1);
  auto inv2 = nodeInvariants(g2);
  std::map<std::string, std::vector<int>> cells1, cells2;
  for (const auto& [n, s] : inv1) cells1[s].push_back(n);
  for (const auto& [n, s] : inv2) cells2[s].push_back(n);
  if (cells1.size() != cells2.size()) return out;
  for (const auto& [s, ns] : cells1) {
    auto it = cells2.find(s);
    if (it == cells2.end() || it->second.size() != ns.size()) return out;
  }

  std::map<CsgEdge, int> target;
  for (const CsgEdge& e : g2.edges) ++target[e];
  auto preserves = [&](const NodeMap& m) {
    std::map<CsgEdge, int> mapped;
    for (const CsgEdge& e : g1.edges) {
      ++mapped[{m.at(e.src), m.at(e.dst), e.color}];
    }
    return mapped == target;
  };

  // Enumerate per-cell bijections.
  std::vector<std::pair<std::vector<int>, std::vector<int>>> pairs;
  for (auto& [s, ns] : cells1) {
    auto t = cells2[s];
    std::sort(t.begin(), t.end());
    pairs.emplace_back(ns, t);
  }
  NodeMap m;
  std::function<void(std::size_t)> rec = [&](std::size_t c) {
    if (c == pairs.size()) {
      if (preserves(m)) out.push_back(m);
      return;
    }
    auto& [src, dst] = pairs[c];
    std::sort(dst.begin(), dst.end());
    do {
      for (std::size_t i = 0; i < src.size(); ++i) m[src[i]] = dst[i];
      rec(c + 1);
    } while (std::next_permutation(dst.begin(), dst.end()));
  };
  rec(0);
  return out;
}

bool extends_to_automorphism(const Csg& g, const NodeMap& partial) {
  for (const auto& [src, dst] : partial) {
    if (!std::binary_search(g.nodes.begin(), g.nodes.end(), src) ||
        !std::binary_search(g.nodes.begin(), g.nodes.end(), dst)) {
      return false;
    }
  }
  for (const NodeMap& a : enumerate_isomorphisms(g, g)) {
    bool agrees = true;
    for (const auto& [src, dst] : partial) {
      if (a.at(src) != dst) {
        agrees = false;
        break;
      }
    }
    if (agrees) return true;
  }
  return false;
}

std::string csg_to_dot(const Csg& g) {
  std::ostringstream out;
  out << "digraph csg {\n";
  for (int n : g.nodes) out << "  n" << n << " [label=\"" << n << "\"];\n";
  for (const CsgEdge& e : g.edges) {
    out << "  n" << e.src << " -> n" << e.dst << " [label=\"" << e.color
        << "\", color=\"" << e.color << "\"];\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace lgbp
