#pragma once

#include <string>
#include <vector>

#include "paraflow/efpa.hpp"
#include "paraflow/instance.hpp"
#include "paraflow/mcfi.hpp"

namespace paraflow {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// TNTP network file: BPR cost per link, directed instance. Isolated
// vertices are dropped and node ids compacted.
InstanceBundle parse_tntp(const std::string& net_text);

// total demand D aggregated over a TNTP trips file
double parse_trips_total(const std::string& trips_text);

// {"nodes": [...], "pipes": [{"from","to","beta"}...],
//  "scenario": {node: net extraction}} -> undirected Weymouth instance
InstanceBundle parse_gas_json(const std::string& text);

// original vertex/node labels (gas node names; 1-based ids for TNTP)
int resolve_node(const InstanceBundle& bundle, const std::string& label);

std::string solution_to_json(const ParametricSolution& sol);
std::string solution_to_json(const InterpolatedSolution& sol);
ParametricSolution parametric_from_json(const std::string& text);
InterpolatedSolution interpolated_from_json(const std::string& text);

std::string solution_to_csv(const ParametricSolution& sol,
                            const std::vector<double>& grid);
std::string solution_to_csv(const InterpolatedSolution& sol,
                            const std::vector<double>& grid);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace paraflow
