#pragma once

#include <functional>
#include <vector>

#include "lgbp/lifted_graph.hpp"

namespace lgbp {

struct LiftedGbpOptions {
  int domainSize = 0;  // N; required
  int iterations = 500;
  double damping = 0.5;
  double tolerance = 1e-9;
  /// Called after the belief phase of every iteration (1-based).
  std::function<void(int, const std::vector<FactorTable>&)> onBeliefs;
};

struct LiftedGbpResult {
  std::vector<FactorTable> beliefs;  // one per canonical region
  bool converged = false;
  int iterationsUsed = 0;
  std::vector<double> residuals;
};

struct LiftedMessageStore {
  std::vector<FactorTable> cur, next;  // one per lifted edge
};

LiftedMessageStore init_lifted_messages(const LiftedRegionGraph& g);

/// Belief of a canonical region: prior, counting-number powers of the
/// incoming messages, and for every local descendant the renamed product of
/// its class's incoming messages with the local parents discounted.
FactorTable lifted_belief(const LiftedRegionGraph& g,
                          const LiftedMessageStore& msgs, int alpha, int N);

FactorTable update_lifted_message(const LiftedRegionGraph& g,
                                  const LiftedMessageStore& msgs,
                                  const std::vector<FactorTable>& beliefs,
                                  int edgeId, double lambda);

class LiftedGbp {
public:
  LiftedGbp(const LiftedRegionGraph& g, LiftedGbpOptions opts);

  double step();  // one flooding iteration; returns the message residual
  void computeBeliefs();

  const std::vector<FactorTable>& beliefs() const { return beliefs_; }
  const LiftedMessageStore& messages() const { return msgs_; }
  const LiftedRegionGraph& graph() const { return *graph_; }

private:
  const LiftedRegionGraph* graph_;
  LiftedGbpOptions opts_;
  LiftedMessageStore msgs_;
  std::vector<FactorTable> beliefs_;
};

LiftedGbpResult run_lifted_gbp(const LiftedRegionGraph& g,
                               const LiftedGbpOptions& opts);

/// Marginal of one ground atom, read off the belief of its canonical
/// singleton region (all groundings of a class share it).
FactorTable query_marginal(const LiftedRegionGraph& g,
                           const std::vector<FactorTable>& beliefs,
                           const ParfactorModel& model, const GroundAtom& atom);

}  // namespace lgbp
