#pragma once

#include <string>

#include <json.hpp>

#include "evaluator.hpp"
#include "exact.hpp"
#include "ga.hpp"
#include "harness.hpp"
#include "lp.hpp"

namespace evselca {

// Wraps nlohmann parse errors into InputError with a source label.
nlohmann::json parse_json(const std::string& text, const std::string& what);

nlohmann::json instance_to_json(const Instance& inst);
Instance instance_from_json(const nlohmann::json& j);

// Stable content fingerprint of an instance, independent of the JSON
// formatting it arrived in.
std::string instance_hash(const Instance& inst);

nlohmann::json clusters_to_json(const ClusterInstance& ci, double intra_cap_frac);

nlohmann::json plan_to_json(const RechargePlan& plan);
RechargePlan plan_from_json(const nlohmann::json& j, int expected_genes);

nlohmann::json deployment_to_json(const Deployment& dep);
Deployment deployment_from_json(const nlohmann::json& j);

nlohmann::json schedule_to_json(const Schedule& s);
nlohmann::json cost_to_json(const CostBreakdown& c);
nlohmann::json violations_to_json(const std::vector<Violation>& v);

GenSpec gen_spec_from_json(const nlohmann::json& j);
nlohmann::json gen_spec_to_json(const GenSpec& spec);
GaConfig ga_config_from_json(const nlohmann::json& j);
nlohmann::json ga_config_to_json(const GaConfig& cfg);
ExactConfig exact_config_from_json(const nlohmann::json& j);
nlohmann::json exact_config_to_json(const ExactConfig& cfg);
SweepSpec sweep_spec_from_json(const nlohmann::json& j);

SolutionValues solution_values_from_json(const nlohmann::json& j);

nlohmann::json ga_result_to_json(const GaResult& res);
nlohmann::json exact_result_to_json(const ExactResult& res);
nlohmann::json replay_result_to_json(const ReplayResult& res);
nlohmann::json sweep_outcome_to_json(const SweepOutcome& outcome);

// Canonical dump: two-space indent, keys sorted by the object ordering.
std::string dump_json(const nlohmann::json& j);

}  // namespace evselca
