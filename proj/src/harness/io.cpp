#include "reachkit/harness/io.hpp"

#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace reachkit::harness {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string resolve_path(const std::string& path, const std::string& base_dir) {
  std::filesystem::path p(path);
  if (p.is_absolute() || base_dir.empty()) return path;
  return (std::filesystem::path(base_dir) / p).string();
}

// Fixed-precision float formatting for CSV output; shortest-round-trip JSON
// comes from the json library itself. Both are deterministic.
std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  in >> j;
  return j;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

void ensure_dir(const std::string& path) {
  std::error_code ec;
  std::filesystem::create_directories(path, ec);
  if (ec) throw std::runtime_error("cannot create directory " + path);
}

void require_schema(const json& j, const std::string& expected) {
  if (!j.contains("schema") || !j["schema"].is_string()) {
    throw std::invalid_argument("config: missing schema field (expected " + expected + ")");
  }
  if (j["schema"].get<std::string>() != expected) {
    throw std::invalid_argument("config: schema " + j["schema"].get<std::string>() +
                                " does not match expected " + expected);
  }
}

Eigen::VectorXd vector_from_json(const json& j) {
  if (!j.is_array()) throw std::invalid_argument("config: expected an array of numbers");
  Eigen::VectorXd v(j.size());
  for (size_t i = 0; i < j.size(); ++i) {
    v(static_cast<Eigen::Index>(i)) = j[i].is_null() ? kInf : j[i].get<double>();
  }
  return v;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json j = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v(i));
  return j;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  if (!j.is_array() || j.empty()) throw std::invalid_argument("config: expected a matrix");
  const size_t rows = j.size(), cols = j[0].size();
  Eigen::MatrixXd m(rows, cols);
  for (size_t r = 0; r < rows; ++r) {
    if (j[r].size() != cols) throw std::invalid_argument("config: ragged matrix");
    for (size_t c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
  json j = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    j.push_back(std::move(row));
  }
  return j;
}

geometry::AxisAlignedBox box_from_json(const json& j) {
  Eigen::VectorXd lo = vector_from_json(j.at("lower"));
  Eigen::VectorXd hi = vector_from_json(j.at("upper"));
  for (Eigen::Index i = 0; i < lo.size(); ++i) {
    if (j.at("lower")[static_cast<size_t>(i)].is_null()) lo(i) = -kInf;
  }
  return {lo, hi};
}

json box_to_json(const geometry::AxisAlignedBox& b) {
  return json{{"lower", vector_to_json(b.lower)}, {"upper", vector_to_json(b.upper)}};
}

std::shared_ptr<dynamics::DynamicsModel> model_from_json(const json& j,
                                                         const std::string& base_dir) {
  const std::string name = j.at("name").get<std::string>();
  if (name == "additive_linear") {
    return std::make_shared<dynamics::AdditiveLinear>(j.at("n").get<int>(),
                                                      j.value("control_bound", 1.0));
  }
  if (name == "double_integrator") {
    return std::make_shared<dynamics::DoubleIntegrator>();
  }
  if (name == "mlp_residual") {
    const auto weights =
        dynamics::MlpWeights::load(resolve_path(j.at("weights").get<std::string>(), base_dir));
    return std::make_shared<dynamics::MlpResidual>(weights, j.value("state_dim", 4),
                                                   j.value("control_dim", 2));
  }
  if (name == "spacecraft13") {
    return std::make_shared<dynamics::Spacecraft13>(j.value("dt", 5.0));
  }
  if (name == "planar_spacecraft") {
    return std::make_shared<dynamics::PlanarSpacecraft>(j.value("dt", 5.0));
  }
  throw std::invalid_argument("config: unknown model " + name);
}

randup::UncertaintySpec uncertainty_from_json(const json& j, int horizon) {
  randup::UncertaintySpec spec;
  spec.horizon = horizon;
  const json& x0 = j.at("x0");
  const std::string type = x0.value("type", "box");
  if (type == "box") {
    spec.x0_set = box_from_json(x0);
  } else if (type == "ellipsoid") {
    spec.x0_set = geometry::Ellipsoid(vector_from_json(x0.at("center")),
                                      matrix_from_json(x0.at("shape")));
  } else {
    throw std::invalid_argument("config: unknown x0 set type " + type);
  }

  if (j.contains("controls")) {
    const json& c = j.at("controls");
    const std::string ctype = c.value("type", "box");
    if (ctype == "box") {
      spec.control_sets =
          randup::UncertaintySpec::replicate_controls(box_from_json(c), horizon);
    } else if (ctype == "sequence") {
      std::vector<Eigen::VectorXd> seq;
      for (const auto& u : c.at("values")) seq.push_back(vector_from_json(u));
      if (static_cast<int>(seq.size()) != horizon) {
        throw std::invalid_argument("config: control sequence length must match the horizon");
      }
      spec.control_sets = randup::UncertaintySpec::singleton_controls(seq);
    } else {
      throw std::invalid_argument("config: unknown control set type " + ctype);
    }
  }
  if (j.contains("theta")) spec.theta_set = box_from_json(j.at("theta"));
  if (j.contains("disturbance")) spec.disturbance_set = box_from_json(j.at("disturbance"));
  return spec;
}

namespace {

randup::BlockDistribution dist_from_json(const json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "uniform") return randup::BlockDistribution::uniform();
    throw std::invalid_argument("config: unknown distribution " + j.get<std::string>());
  }
  if (j.contains("beta")) {
    return randup::BlockDistribution::beta_shape(j["beta"][0].get<double>(),
                                                 j["beta"][1].get<double>());
  }
  throw std::invalid_argument("config: malformed distribution spec");
}

}  // namespace

randup::SamplerConfig sampler_from_json(const json& j) {
  randup::SamplerConfig cfg;
  cfg.seed = j.value("seed", 0ULL);
  cfg.particles = j.value("particles", 100);
  if (j.contains("distributions")) {
    const json& d = j["distributions"];
    if (d.contains("x0")) cfg.x0_dist = dist_from_json(d["x0"]);
    if (d.contains("control")) cfg.control_dist = dist_from_json(d["control"]);
    if (d.contains("theta")) cfg.theta_dist = dist_from_json(d["theta"]);
    if (d.contains("disturbance")) cfg.disturbance_dist = dist_from_json(d["disturbance"]);
  }
  return cfg;
}

robup::AdversarialConfig adversarial_from_json(const json& j) {
  robup::AdversarialConfig adv;
  adv.step_size = j.value("step_size", 1.0);
  adv.iterations = j.value("iterations", 1);
  adv.cov_regularizer = j.value("cov_regularizer", 1e-8);
  return adv;
}

ReachProblem reach_problem_from_json(const json& j, const std::string& base_dir) {
  require_schema(j, "reachkit/reach/v1");
  ReachProblem problem;
  problem.model = model_from_json(j.at("model"), base_dir);
  const int horizon = j.at("horizon").get<int>();
  problem.uncertainty = uncertainty_from_json(j.at("uncertainty"), horizon);
  if (problem.uncertainty.control_sets.empty()) {
    throw std::invalid_argument("config: reach problem needs control sets");
  }
  if (j.contains("sampler")) problem.sampler = sampler_from_json(j["sampler"]);
  if (j.contains("adversarial")) problem.adversarial = adversarial_from_json(j["adversarial"]);
  if (j.contains("lipschitz")) {
    problem.lipschitz_constants = vector_from_json(j["lipschitz"].at("constants"));
    problem.lipschitz_literal = j["lipschitz"].value("convention", "sqrt") == "literal";
  }
  if (j.contains("output")) {
    problem.include_particles = j["output"].value("include_particles", false);
  }
  return problem;
}

planner::OcpSpec plan_problem_from_json(const json& j, const std::string& base_dir,
                                        std::vector<Eigen::VectorXd>* init_states) {
  require_schema(j, "reachkit/plan/v1");
  planner::OcpSpec spec;
  spec.model = model_from_json(j.at("model"), base_dir);
  spec.horizon = j.at("horizon").get<int>();
  spec.mu0 = vector_from_json(j.at("mu0"));
  spec.theta_bar = j.contains("theta_nominal") ? vector_from_json(j["theta_nominal"])
                                               : Eigen::VectorXd(0);
  spec.w_bar = j.contains("disturbance_nominal")
                   ? vector_from_json(j["disturbance_nominal"])
                   : Eigen::VectorXd::Zero(spec.model->disturbance_dim());
  spec.uncertainty = uncertainty_from_json(j.at("uncertainty"), spec.horizon);
  spec.state_bounds = box_from_json(j.at("state_bounds"));
  spec.control_bounds = box_from_json(j.at("control_bounds"));
  spec.goal_box = box_from_json(j.at("goal"));
  spec.position_dim = j.at("position_dim").get<int>();
  if (j.contains("obstacles")) {
    for (const auto& o : j["obstacles"]) {
      planner::Obstacle obs;
      const std::string type = o.value("type", "sphere");
      obs.kind = type == "cylinder" ? planner::Obstacle::Kind::Cylinder
                                    : planner::Obstacle::Kind::Sphere;
      const Eigen::VectorXd c = vector_from_json(o.at("center"));
      obs.center.head(c.size()) = c;
      obs.radius = o.at("radius").get<double>();
      if (o.contains("axis")) {
        const Eigen::VectorXd a = vector_from_json(o["axis"]);
        obs.axis.head(a.size()) = a;
      }
      spec.obstacles.push_back(obs);
    }
  }
  const json& cost = j.at("cost");
  {
    const int m = spec.model->control_dim();
    if (cost.contains("control_weight") && cost["control_weight"].is_array()) {
      spec.cost.control_weight = matrix_from_json(cost["control_weight"]);
    } else {
      spec.cost.control_weight =
          cost.value("control_weight", 1.0) * Eigen::MatrixXd::Identity(m, m);
    }
    spec.cost.terminal_velocity_weight = cost.value("terminal_velocity_weight", 0.0);
    spec.cost.velocity_offset = cost.value("velocity_offset", 0);
    spec.cost.velocity_dim = cost.value("velocity_dim", 0);
  }
  if (j.contains("scp")) {
    const json& s = j["scp"];
    spec.scp.max_iterations = s.value("max_iterations", 15);
    spec.scp.convergence_tol = s.value("tol", 1e-4);
    spec.scp.trust_region = s.value("trust_region", 0.0);
    spec.scp.trust_region_controls = s.value("trust_region_controls", 0.0);
    spec.scp.penalty_weight = s.value("penalty_weight", 100.0);
    spec.scp.qp_tol = s.value("qp_tol", 1e-7);
    spec.scp.qp_max_iterations = s.value("qp_max_iterations", 40000);
    if (s.contains("reach")) {
      const json& r = s["reach"];
      spec.scp.reach_method = r.value("method", "robup") == "randup"
                                  ? planner::ReachMethod::RandUp
                                  : planner::ReachMethod::RobUp;
      spec.scp.reach_particles = r.value("particles", 100);
      spec.scp.reach_adv_iterations = r.value("adv_iterations", 1);
      spec.scp.reach_step_size = r.value("step_size", 1.0);
      spec.scp.reach_seed = r.value("seed", 0ULL);
    }
    if (s.contains("audit")) {
      spec.scp.audit_particles = s["audit"].value("particles", 1000);
      spec.scp.audit_seed = s["audit"].value("seed", 1234567ULL);
    }
  }

  if (init_states) {
    init_states->clear();
    if (j.contains("initialization") && j["initialization"].is_object() &&
        j["initialization"].contains("waypoints")) {
      // Piecewise-linear position path through the waypoints, uniformly
      // parameterized over the horizon; non-position states stay at mu0.
      std::vector<Eigen::VectorXd> wps;
      wps.push_back(spec.mu0.head(spec.position_dim));
      for (const auto& w : j["initialization"]["waypoints"]) {
        wps.push_back(vector_from_json(w));
      }
      const int segments = static_cast<int>(wps.size()) - 1;
      for (int k = 0; k <= spec.horizon; ++k) {
        const double t = static_cast<double>(k) / spec.horizon * segments;
        const int seg = std::min(segments - 1, static_cast<int>(t));
        const double frac = t - seg;
        Eigen::VectorXd x = spec.mu0;
        x.head(spec.position_dim) = (1.0 - frac) * wps[seg] + frac * wps[seg + 1];
        init_states->push_back(std::move(x));
      }
    }
  }
  return spec;
}

json reach_estimate_to_json(const randup::ReachEstimate& estimate, bool include_particles) {
  json steps = json::array();
  for (int k = 0; k <= estimate.horizon(); ++k) {
    const auto& s = estimate.steps[k];
    json js;
    js["k"] = k;
    js["center"] = vector_to_json(s.center);
    js["outer_box"] = box_to_json(s.outer_box);
    js["outer_ellipsoid"] = json{{"center", vector_to_json(s.outer_ellipsoid.center)},
                                 {"shape", matrix_to_json(s.outer_ellipsoid.shape)}};
    if (s.hull) {
      json facets = json::array();
      for (const auto& f : s.hull->facets) {
        facets.push_back(json{{"normal", vector_to_json(f.normal)}, {"offset", f.offset}});
      }
      json vertices = json::array();
      for (const auto& v : s.hull->vertices) vertices.push_back(vector_to_json(v));
      js["hull"] = json{{"vertices", std::move(vertices)},
                        {"facets", std::move(facets)},
                        {"degenerate_rank", s.hull->degenerate_rank},
                        {"dimension", s.hull->dimension}};
    } else {
      js["hull"] = nullptr;
    }
    if (include_particles) js["particles"] = matrix_to_json(s.particles);
    steps.push_back(std::move(js));
  }
  return json{{"schema", "reachkit/reach_estimate/v1"},
              {"horizon", estimate.horizon()},
              {"steps", std::move(steps)}};
}

json diagnostics_to_json(const std::vector<robup::SweepDiagnostics>& diagnostics) {
  json arr = json::array();
  for (size_t i = 0; i < diagnostics.size(); ++i) {
    arr.push_back(json{{"sweep", i + 1},
                       {"mean_metric", diagnostics[i].mean_metric},
                       {"clamped_fraction", diagnostics[i].clamped_fraction}});
  }
  return arr;
}

json plan_result_to_json(const planner::ScpResult& result) {
  json states = json::array();
  for (const auto& x : result.states) states.push_back(vector_to_json(x));
  json controls = json::array();
  for (const auto& u : result.controls) controls.push_back(vector_to_json(u));
  json history = json::array();
  for (const auto& h : result.history) {
    history.push_back(json{{"iteration", h.iteration},
                           {"cost", h.cost},
                           {"merit", h.merit},
                           {"step_norm", h.step_norm},
                           {"trust_region", h.trust_region},
                           {"accepted", h.accepted},
                           {"qp_feasible", h.qp_feasible}});
  }
  json tube = json::array();
  for (const auto& b : result.reach_boxes) tube.push_back(box_to_json(b));
  return json{{"schema", "reachkit/plan_solution/v1"},
              {"status", planner::to_string(result.status)},
              {"iterations", result.iterations},
              {"cost", result.cost},
              {"states", std::move(states)},
              {"controls", std::move(controls)},
              {"history", std::move(history)},
              {"reach_boxes", std::move(tube)},
              {"audit", json{{"particles", result.audit.particles},
                             {"bound_violations", result.audit.bound_violations},
                             {"obstacle_violations", result.audit.obstacle_violations},
                             {"goal_violations", result.audit.goal_violations},
                             {"worst_obstacle_distance", result.audit.worst_obstacle_distance}}}};
}

std::string reach_estimate_to_csv(const randup::ReachEstimate& estimate) {
  std::ostringstream os;
  os << "k,dim,center,box_lower,box_upper\n";
  for (int k = 0; k <= estimate.horizon(); ++k) {
    const auto& s = estimate.steps[k];
    for (Eigen::Index i = 0; i < s.center.size(); ++i) {
      os << k << "," << i << "," << fmt(s.center(i)) << "," << fmt(s.outer_box.lower(i)) << ","
         << fmt(s.outer_box.upper(i)) << "\n";
    }
  }
  return os.str();
}

std::string trajectory_to_csv(const std::vector<Eigen::VectorXd>& states,
                              const std::vector<Eigen::VectorXd>& controls) {
  std::ostringstream os;
  const int n = states.empty() ? 0 : static_cast<int>(states.front().size());
  const int m = controls.empty() ? 0 : static_cast<int>(controls.front().size());
  os << "k";
  for (int i = 0; i < n; ++i) os << ",x" << i;
  for (int i = 0; i < m; ++i) os << ",u" << i;
  os << "\n";
  for (size_t k = 0; k < states.size(); ++k) {
    os << k;
    for (int i = 0; i < n; ++i) os << "," << fmt(states[k](i));
    for (int i = 0; i < m; ++i) {
      if (k < controls.size()) {
        os << "," << fmt(controls[k](i));
      } else {
        os << ",";
      }
    }
    os << "\n";
  }
  return os.str();
}

std::string coverage_report_to_csv(const CoverageReport& report) {
  std::ostringstream os;
  os << "method,M,k,mean,std\n";
  for (const auto& row : report.rows) {
    os << row.method << "," << row.budget << "," << row.k << "," << fmt(row.mean) << ","
       << fmt(row.stddev) << "\n";
  }
  return os.str();
}

std::string sweep_result_to_csv(const SweepResult& result) {
  std::ostringstream os;
  os << "M,n_adv,relative_volume\n";
  for (const auto& row : result.rows) {
    os << row.particles << "," << row.adv_iterations << "," << fmt(row.mean_relative_volume)
       << "\n";
  }
  return os.str();
}

std::string sensitivity_to_csv(const std::vector<SensitivityRow>& rows) {
  std::ostringstream os;
  os << "k,particle,signed_distance,theta,disturbance\n";
  for (const auto& row : rows) {
    os << row.k << "," << row.particle_index << "," << fmt(row.signed_distance) << ",\"";
    for (Eigen::Index i = 0; i < row.theta.size(); ++i) {
      os << (i ? ";" : "") << fmt(row.theta(i));
    }
    os << "\",\"";
    for (Eigen::Index i = 0; i < row.disturbance.size(); ++i) {
      os << (i ? ";" : "") << fmt(row.disturbance(i));
    }
    os << "\"\n";
  }
  return os.str();
}

}  // namespace reachkit::harness
