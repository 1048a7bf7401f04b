#pragma once

#include <string>
#include <vector>

#include "lgbp/lifted_graph.hpp"
#include "lgbp/region_graph.hpp"

namespace lgbp {

std::string region_graph_to_dot(const RegionGraph& g, const GroundMrf& mrf,
                                const std::vector<std::string>& predNames);
std::string region_graph_to_json(const RegionGraph& g, const GroundMrf& mrf,
                                 const std::vector<std::string>& predNames);

std::string lifted_graph_to_dot(const LiftedRegionGraph& g);
std::string lifted_graph_to_json(const LiftedRegionGraph& g);

/// Per-region belief dump: atom list, natural-space table, sum check.
std::string lifted_beliefs_to_json(const LiftedRegionGraph& g,
                                   const std::vector<FactorTable>& beliefs);

std::string residual_trace_to_csv(const std::vector<double>& residuals);

}  // namespace lgbp
