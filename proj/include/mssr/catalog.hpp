#pragma once

#include <array>
#include <string>
#include <vector>

#include "mssr/mss_model.hpp"
#include "mssr/optim.hpp"

namespace mssr {

struct GridSpec {
  double t_start = 0.0;
  double t_end = 0.0;
  int num_points = 0;

  bool operator==(const GridSpec&) const = default;
};

// Everything needed to reproduce one benchmark run: which model, where the
// collocation and evaluation grids live, how long to train, and the schedule.
struct ExperimentPreset {
  std::string model_id;
  GridSpec collocation;
  long iterations = 0;
  LearningRateSchedule schedule;
  bool pcgrad = true;
  GridSpec evaluation;
  double oracle_step = 0.0;  // certified RK4 internal step for this model
  std::uint64_t seed = 42;
};

// 3-state propulsion module: two redundant engines (rate gamma each) in
// series with a gearbox (rate lambda), constant rates, state 2 absorbing.
MssModel build_example1();

// Same chain with Weibull hazards lambda(t) = lambda0*alpha*t^(alpha-1),
// gamma(t) = gamma0*beta*t^(beta-1). Shape parameters (1,1) degenerate to
// build_example1's constant matrix.
MssModel build_example2(double alpha = 2.0, double beta = 2.0);

// 12-state flow transmission system: two 2-state pipes feeding a 3-state
// pipe, composed into the joint chain over independent elements. Performance
// per state is min(inflow, outflow capacity) in tons per minute.
MssModel build_example3();

// The component chains and joint-state table behind build_example3, exposed
// so the factorization of marginals can be checked against per-component
// solves. joint_states[k] = (element1 state, element2 state, element3 state)
// for joint state k, in the same order as the model's states.
struct FlowComposition {
  std::vector<MssModel> components;
  std::vector<std::array<int, 3>> joint_states;
};
FlowComposition example3_composition();

std::vector<std::string> catalog_model_names();

// Builds a catalog model by name ("example2" uses shape defaults 2,2).
MssModel build_model(const std::string& name);

std::string model_description(const std::string& name);

ExperimentPreset preset(const std::string& name);

}  // namespace mssr
