#include "lgbp/compare.hpp"

#include <algorithm>

#include "lgbp/errors.hpp"

namespace lgbp {

std::vector<GroundAssociation> associate_ground_regions(
    const LiftedRegionGraph& lifted, const ParfactorModel& model,
    const RegionGraph& rg, const GroundMrf& mrf) {
  std::vector<GroundAssociation> out;
  for (const Region& region : rg.regions) {
    std::vector<GroundAtom> atoms;
    for (VarId v : region.scope) atoms.push_back(mrf.vars.atom(v));
    Csg csg = build_csg(atoms, lifted.predNames);
    auto [canon, mapping] = canonize(csg, model);
    int cls = lifted.classOf(canon.canonForm);
    if (cls < 0) {
      fail(ErrorCode::NoContainingRegion,
           "ground region class missing from the lifted graph");
    }
    auto isos = enumerate_isomorphisms(lifted.regions[cls].csg, csg);
    if (isos.empty()) fail(ErrorCode::Internal, "class CSG not isomorphic");
    const NodeMap& sigma = *std::min_element(isos.begin(), isos.end());
    GroundAssociation assoc;
    assoc.liftedClass = cls;
    for (std::size_t k = 0; k < lifted.regions[cls].cluster.atoms.size(); ++k) {
      const GroundAtom& a = lifted.regions[cls].cluster.atoms[k];
      GroundAtom img;
      img.pred = a.pred;
      for (int o : a.objects) img.objects.push_back(sigma.at(o));
      VarId v = mrf.vars.lookup(img);
      if (v < 0) fail(ErrorCode::Internal, "sigma image atom not in the MRF");
      assoc.renameToGround.emplace_back(lifted.regions[cls].vars[k], v);
    }
    out.push_back(std::move(assoc));
  }
  return out;
}

CompareResult run_lockstep_compare(const ParfactorModel& model,
                                   const LiftedRegionGraph& lifted,
                                   const CompareOptions& opts) {
  ParfactorModel sized = model;
  for (DomainDecl& d : sized.domains) d.size = opts.domainSize;
  GroundMrf mrf = ground(sized);
  RegionGraph rg = build_region_graph(mrf, default_outer_scopes(mrf),
                                      Closure::Subsets);
  auto assoc = associate_ground_regions(lifted, sized, rg, mrf);

  GbpOptions gOpts;
  gOpts.iterations = opts.iterations;
  gOpts.damping = opts.damping;
  gOpts.tolerance = opts.tolerance;
  GroundGbp groundEngine(rg, gOpts);

  LiftedGbpOptions lOpts;
  lOpts.domainSize = opts.domainSize;
  lOpts.iterations = opts.iterations;
  lOpts.damping = opts.damping;
  lOpts.tolerance = opts.tolerance;
  LiftedGbp liftedEngine(lifted, lOpts);

  CompareResult result;
  for (int it = 1; it <= opts.iterations; ++it) {
    double gRes = groundEngine.step();
    double lRes = liftedEngine.step();
    double worst = 0.0;
    for (std::size_t r = 0; r < rg.regions.size(); ++r) {
      FactorTable renamed = rename(liftedEngine.beliefs()[assoc[r].liftedClass],
                                   assoc[r].renameToGround);
      worst = std::max(worst,
                       max_abs_log_diff(groundEngine.beliefs()[r], renamed));
    }
    result.discrepancies.push_back(worst);
    result.residuals.push_back(lRes);
    result.maxDiscrepancy = std::max(result.maxDiscrepancy, worst);
    result.iterationsUsed = it;
    if (gRes < opts.tolerance && lRes < opts.tolerance) {
      result.groundConverged = true;
      result.liftedConverged = true;
      break;
    }
  }
  groundEngine.computeBeliefs();
  liftedEngine.computeBeliefs();
  result.groundBeliefs = groundEngine.beliefs();
  result.liftedBeliefs = liftedEngine.beliefs();
  return result;
}

}  // namespace lgbp
