#pragma once

#include <utility>
#include <vector>

#include "lgbp/lifted_gbp.hpp"
#include "lgbp/lifted_graph.hpp"
#include "lgbp/region_graph.hpp"

namespace lgbp {

/// Link from a ground region to its canonical class: renaming the lifted
/// belief by `renameToGround` puts it on the ground region's variables.
struct GroundAssociation {
  int liftedClass = -1;
  std::vector<std::pair<VarId, VarId>> renameToGround;
};

/// One association per ground region. Fails if some ground region's
/// canonical form is missing from the lifted graph.
std::vector<GroundAssociation> associate_ground_regions(
    const LiftedRegionGraph& lifted, const ParfactorModel& model,
    const RegionGraph& rg, const GroundMrf& mrf);

struct CompareOptions {
  int domainSize = 0;
  int iterations = 500;
  double damping = 0.5;
  double tolerance = 1e-9;
};

struct CompareResult {
  bool groundConverged = false;
  bool liftedConverged = false;
  int iterationsUsed = 0;
  double maxDiscrepancy = 0.0;             // over all iterations and regions
  std::vector<double> discrepancies;       // per iteration
  std::vector<double> residuals;           // lifted residual per iteration
  std::vector<FactorTable> liftedBeliefs;  // final
  std::vector<FactorTable> groundBeliefs;  // final
};

/// Run ground and lifted GBP in lock-step on a shattered model and track the
/// worst belief discrepancy per iteration. The ground graph is built with
/// the subset closure so both graphs instantiate the same region classes.
CompareResult run_lockstep_compare(const ParfactorModel& model,
                                   const LiftedRegionGraph& lifted,
                                   const CompareOptions& opts);

}  // namespace lgbp
