#pragma once

#include <functional>
#include <string>
#include <vector>

#include "lgbp/factor_table.hpp"
#include "lgbp/model.hpp"

namespace lgbp {

struct Region {
  std::vector<VarId> scope;     // sorted
  std::vector<int> factorIdx;   // all MRF factors with scope inside this one
};

/// How the region set is closed, starting from the outer regions.
///  - Intersections: iterated pairwise intersections (the classic recipe).
///  - Subsets: iterated (d-1)-subsets, the ground counterpart of the lifted
///    graph generation; used when comparing against lifted GBP.
enum class Closure { Intersections, Subsets };

struct RegionGraph {
  std::vector<Region> regions;
  std::vector<std::pair<int, int>> edges;  // (parent region, child region)
  std::vector<int> outer;                  // parent-less region ids

  // Derived caches.
  std::vector<std::vector<int>> inEdges;    // region -> edge ids into it
  std::vector<std::vector<int>> outEdges;   // region -> edge ids out of it
  std::vector<std::vector<int>> desc;       // region -> descendant region ids
  std::vector<std::vector<int>> corrEdges;  // region -> edge ids (rho->gamma),
                                            // gamma in Desc, rho not in
                                            // {alpha} u Desc(alpha)
  std::vector<FactorTable> priors;          // region -> log product of factors

  void rebuildCaches(const GroundMrf& mrf);
};

RegionGraph build_region_graph(const GroundMrf& mrf,
                               const std::vector<std::vector<VarId>>& outerScopes,
                               Closure closure = Closure::Intersections);

/// Outer scopes = maximal ground factor scopes.
std::vector<std::vector<VarId>> default_outer_scopes(const GroundMrf& mrf);

/// Empty iff region-graph conditions (1)-(3) all hold.
std::vector<std::string> validate_region_graph(const RegionGraph& g);

struct MessageStore {
  std::vector<FactorTable> cur, next;
};

MessageStore init_messages(const RegionGraph& g);

FactorTable compute_belief(const RegionGraph& g, const MessageStore& msgs, int alpha);

FactorTable update_message(const RegionGraph& g, const MessageStore& msgs,
                           const std::vector<FactorTable>& beliefs, int edgeId,
                           double lambda);

struct GbpOptions {
  int iterations = 500;
  double damping = 0.5;
  double tolerance = 1e-9;
  int threads = 1;
  /// Called after the belief phase of every iteration (1-based).
  std::function<void(int, const std::vector<FactorTable>&)> onBeliefs;
};

struct GbpResult {
  std::vector<FactorTable> beliefs;
  bool converged = false;
  int iterationsUsed = 0;
  std::vector<double> residuals;
};

/// Stepper for the synchronous flooding schedule: every iteration computes
/// all beliefs from the current buffer, then all messages into the next
/// buffer, then swaps.
class GroundGbp {
public:
  GroundGbp(const RegionGraph& g, GbpOptions opts);

  /// One flooding iteration; returns the max-abs log-message residual.
  double step();
  void computeBeliefs();

  const std::vector<FactorTable>& beliefs() const { return beliefs_; }
  const MessageStore& messages() const { return msgs_; }
  const RegionGraph& graph() const { return *graph_; }

private:
  const RegionGraph* graph_;
  GbpOptions opts_;
  MessageStore msgs_;
  std::vector<FactorTable> beliefs_;
};

GbpResult run_ground_gbp(const RegionGraph& g, const GbpOptions& opts = {});

}  // namespace lgbp
