#include "mssr/catalog.hpp"

#include <cmath>

namespace mssr {

namespace {

constexpr double kGamma0 = 2.8e-5;   // per engine, 1/hour
constexpr double kLambda0 = 7.26e-5; // gearbox, 1/hour

// Shared row assembly so the constant-rate and Weibull variants produce
// bit-identical matrices when their rates coincide.
RateMatrix propulsion_matrix(double gamma_t, double lambda_t) {
  RateMatrix q = RateMatrix::Zero(3, 3);
  q(0, 1) = 2.0 * gamma_t;
  q(0, 2) = lambda_t;
  q(0, 0) = -(q(0, 1) + q(0, 2));
  q(1, 2) = gamma_t + lambda_t;
  q(1, 1) = -q(1, 2);
  return q;
}

// Flow transmission element rates, per year.
constexpr double kLam1 = 7.0, kMu1 = 100.0;    // pipe 1 fail / repair
constexpr double kLam2 = 10.0, kMu2 = 80.0;    // pipe 2 fail / repair
constexpr double kLam3Full = 10.0;             // pipe 3 full -> partial
constexpr double kMu3Full = 110.0;             // pipe 3 partial -> full
constexpr double kLam3Part = 7.0;              // pipe 3 partial -> failed
constexpr double kMu3Part = 120.0;             // pipe 3 failed -> partial

// Element-local state codes.
constexpr int kUp = 0, kDown = 1;
constexpr int kFull = 0, kPart = 1, kFail = 2;

// Joint states ordered so that curves line up with the usual presentation of
// this system: state 0 is everything up, later states add failures roughly in
// the order they first become reachable.
constexpr std::array<std::array<int, 3>, 12> kFlowStates = {{
    {kUp, kUp, kFull},
    {kDown, kUp, kFull},
    {kUp, kDown, kFull},
    {kUp, kUp, kPart},
    {kDown, kDown, kFull},
    {kDown, kUp, kPart},
    {kUp, kDown, kPart},
    {kUp, kUp, kFail},
    {kDown, kDown, kPart},
    {kDown, kUp, kFail},
    {kUp, kDown, kFail},
    {kDown, kDown, kFail},
}};

int flow_state_index(int e1, int e2, int e3) {
  for (int k = 0; k < 12; ++k) {
    if (kFlowStates[k][0] == e1 && kFlowStates[k][1] == e2 &&
        kFlowStates[k][2] == e3) {
      return k;
    }
  }
  throw ContractViolationError("flow state tuple not in table");
}

RateMatrix flow_generator() {
  RateMatrix q = RateMatrix::Zero(12, 12);
  for (int s = 0; s < 12; ++s) {
    const auto [e1, e2, e3] = kFlowStates[s];
    auto link = [&](int to_e1, int to_e2, int to_e3, double rate) {
      q(s, flow_state_index(to_e1, to_e2, to_e3)) += rate;
    };
    if (e1 == kUp) {
      link(kDown, e2, e3, kLam1);
    } else {
      link(kUp, e2, e3, kMu1);
    }
    if (e2 == kUp) {
      link(e1, kDown, e3, kLam2);
    } else {
      link(e1, kUp, e3, kMu2);
    }
    switch (e3) {
      case kFull:
        link(e1, e2, kPart, kLam3Full);
        break;
      case kPart:
        link(e1, e2, kFull, kMu3Full);
        link(e1, e2, kFail, kLam3Part);
        break;
      case kFail:
        link(e1, e2, kPart, kMu3Part);
        break;
    }
  }
  for (int s = 0; s < 12; ++s) {
    double off = 0.0;
    for (int j = 0; j < 12; ++j) {
      if (j != s) off += q(s, j);
    }
    q(s, s) = -off;
  }
  return q;
}

MssModel two_state_element(double fail_rate, double repair_rate,
                           const std::string& id) {
  MssModel m;
  m.num_states = 2;
  m.time_homogeneous = true;
  RateMatrix q(2, 2);
  q << -fail_rate, fail_rate, repair_rate, -repair_rate;
  m.rate_matrix_fn = [q](double) { return q; };
  m.initial_distribution = Eigen::Vector2d(1.0, 0.0);
  m.time_unit = "years";
  m.id = id;
  return m;
}

}  // namespace

MssModel build_example1() {
  MssModel m;
  m.num_states = 3;
  m.time_homogeneous = true;
  const RateMatrix q = propulsion_matrix(kGamma0, kLambda0);
  m.rate_matrix_fn = [q](double) { return q; };
  m.initial_distribution = Eigen::Vector3d(1.0, 0.0, 0.0);
  m.time_unit = "hours";
  m.id = "example1";
  return m;
}

MssModel build_example2(double alpha, double beta) {
  if (!(alpha > 0.0) || !(beta > 0.0)) {
    throw ConfigError("Weibull shape parameters must be positive");
  }
  MssModel m;
  m.num_states = 3;
  m.time_homogeneous = false;
  m.rate_matrix_fn = [alpha, beta](double t) {
    const double lambda_t = kLambda0 * alpha * std::pow(t, alpha - 1.0);
    const double gamma_t = kGamma0 * beta * std::pow(t, beta - 1.0);
    return propulsion_matrix(gamma_t, lambda_t);
  };
  m.initial_distribution = Eigen::Vector3d(1.0, 0.0, 0.0);
  m.time_unit = "hours";
  m.id = "example2";
  return m;
}

MssModel build_example3() {
  MssModel m;
  m.num_states = 12;
  m.time_homogeneous = true;
  const RateMatrix q = flow_generator();
  m.rate_matrix_fn = [q](double) { return q; };
  m.initial_distribution = Eigen::VectorXd::Zero(12);
  m.initial_distribution[0] = 1.0;

  // g = min(pipe1 flow + pipe2 flow, pipe3 capacity), tons per minute.
  Eigen::VectorXd g(12);
  for (int s = 0; s < 12; ++s) {
    const auto [e1, e2, e3] = kFlowStates[s];
    const double inflow = (e1 == kUp ? 1.5 : 0.0) + (e2 == kUp ? 2.0 : 0.0);
    const double capacity = (e3 == kFull ? 4.0 : (e3 == kPart ? 1.8 : 0.0));
    g[s] = std::min(inflow, capacity);
  }
  m.performance_rates = g;
  m.time_unit = "years";
  m.id = "example3";
  return m;
}

FlowComposition example3_composition() {
  FlowComposition c;
  c.components.push_back(two_state_element(kLam1, kMu1, "example3.pipe1"));
  c.components.push_back(two_state_element(kLam2, kMu2, "example3.pipe2"));

  MssModel pipe3;
  pipe3.num_states = 3;
  pipe3.time_homogeneous = true;
  RateMatrix q(3, 3);
  q << -kLam3Full, kLam3Full, 0.0,
       kMu3Full, -(kMu3Full + kLam3Part), kLam3Part,
       0.0, kMu3Part, -kMu3Part;
  pipe3.rate_matrix_fn = [q](double) { return q; };
  pipe3.initial_distribution = Eigen::Vector3d(1.0, 0.0, 0.0);
  pipe3.time_unit = "years";
  pipe3.id = "example3.pipe3";
  c.components.push_back(pipe3);

  c.joint_states.assign(kFlowStates.begin(), kFlowStates.end());
  return c;
}

std::vector<std::string> catalog_model_names() {
  return {"example1", "example2", "example3"};
}

MssModel build_model(const std::string& name) {
  if (name == "example1") return build_example1();
  if (name == "example2") return build_example2();
  if (name == "example3") return build_example3();
  throw LookupError("unknown catalog model: " + name);
}

std::string model_description(const std::string& name) {
  if (name == "example1") {
    return "3-state propulsion module, constant failure rates (1/hour)";
  }
  if (name == "example2") {
    return "3-state propulsion module, Weibull time-dependent rates (1/hour)";
  }
  if (name == "example3") {
    return "12-state flow transmission system, three repairable pipes (1/year)";
  }
  throw LookupError("unknown catalog model: " + name);
}

ExperimentPreset preset(const std::string& name) {
  ExperimentPreset p;
  p.model_id = name;
  if (name == "example1") {
    p.collocation = {0.0, 60000.0, 5000};
    p.iterations = 80000;
    p.schedule = LearningRateSchedule::constant(1e-3);
    p.evaluation = {0.0, 80000.0, 5001};
    p.oracle_step = 80000.0 / 100000.0;
  } else if (name == "example2") {
    p.collocation = {0.0, 300.0, 300};
    p.iterations = 150000;
    p.schedule = LearningRateSchedule::polynomial(1e-3, 8e-5, 150000);
    p.evaluation = {0.0, 300.0, 301};
    // Must divide the evaluation spacing of 1.0 exactly; 1/400 does, and the
    // step-halving check certifies it comfortably.
    p.oracle_step = 300.0 / 120000.0;
  } else if (name == "example3") {
    p.collocation = {0.0, 0.2, 500};
    p.iterations = 40000;
    p.schedule = LearningRateSchedule::constant(1e-3);
    p.evaluation = {0.0, 0.2, 501};
    p.oracle_step = 2e-6;
  } else {
    throw LookupError("unknown preset: " + name);
  }
  return p;
}

}  // namespace mssr
