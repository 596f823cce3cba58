#pragma once

#include <json.hpp>
#include <memory>
#include <string>

#include "reachkit/harness/experiments.hpp"
#include "reachkit/planner/scp.hpp"
#include "reachkit/randup/randup.hpp"
#include "reachkit/robup/robup.hpp"

namespace reachkit::harness {

using nlohmann::json;

// ------------------------------------------------------------ json helpers

json load_json(const std::string& path);
void write_text(const std::string& path, const std::string& text);
void ensure_dir(const std::string& path);

/// Validates the versioned schema tag, e.g. "reachkit/reach/v1".
void require_schema(const json& j, const std::string& expected);

Eigen::VectorXd vector_from_json(const json& j);
json vector_to_json(const Eigen::VectorXd& v);
Eigen::MatrixXd matrix_from_json(const json& j);  // row-major nested arrays
json matrix_to_json(const Eigen::MatrixXd& m);

/// Box bounds where null entries mean unbounded (+-inf).
geometry::AxisAlignedBox box_from_json(const json& j);
json box_to_json(const geometry::AxisAlignedBox& b);

// --------------------------------------------------------- problem loading

std::shared_ptr<dynamics::DynamicsModel> model_from_json(const json& j,
                                                         const std::string& base_dir);
randup::UncertaintySpec uncertainty_from_json(const json& j, int horizon);
randup::SamplerConfig sampler_from_json(const json& j);
robup::AdversarialConfig adversarial_from_json(const json& j);

struct ReachProblem {
  std::shared_ptr<dynamics::DynamicsModel> model;
  randup::UncertaintySpec uncertainty;
  randup::SamplerConfig sampler;
  robup::AdversarialConfig adversarial;
  Eigen::VectorXd lipschitz_constants;  // empty unless configured
  bool lipschitz_literal = false;
  bool include_particles = false;
};

ReachProblem reach_problem_from_json(const json& j, const std::string& base_dir);
planner::OcpSpec plan_problem_from_json(const json& j, const std::string& base_dir,
                                        std::vector<Eigen::VectorXd>* init_states);

// ----------------------------------------------------------- result output

json reach_estimate_to_json(const randup::ReachEstimate& estimate, bool include_particles);
json diagnostics_to_json(const std::vector<robup::SweepDiagnostics>& diagnostics);
json plan_result_to_json(const planner::ScpResult& result);

std::string reach_estimate_to_csv(const randup::ReachEstimate& estimate);
std::string trajectory_to_csv(const std::vector<Eigen::VectorXd>& states,
                              const std::vector<Eigen::VectorXd>& controls);
std::string coverage_report_to_csv(const CoverageReport& report);
std::string sweep_result_to_csv(const SweepResult& result);
std::string sensitivity_to_csv(const std::vector<SensitivityRow>& rows);

}  // namespace reachkit::harness
