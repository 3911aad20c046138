#include "mssr/optim.hpp"

#include <cmath>
#include <sstream>

namespace mssr {

LearningRateSchedule LearningRateSchedule::constant(double rate) {
  if (!(rate > 0.0)) {
    throw ConfigError("learning rate must be positive");
  }
  LearningRateSchedule s;
  s.kind = Kind::constant;
  s.initial_rate = rate;
  s.final_rate = rate;
  return s;
}

LearningRateSchedule LearningRateSchedule::polynomial(double initial_rate,
                                                      double final_rate,
                                                      long total_steps,
                                                      double power) {
  if (!(initial_rate > 0.0) || !(final_rate > 0.0)) {
    throw ConfigError("learning rates must be positive");
  }
  if (final_rate > initial_rate) {
    throw ConfigError("polynomial decay needs final_rate <= initial_rate");
  }
  if (total_steps <= 0) {
    throw ConfigError("polynomial decay needs total_steps > 0");
  }
  if (!(power > 0.0)) {
    throw ConfigError("polynomial decay needs power > 0");
  }
  LearningRateSchedule s;
  s.kind = Kind::polynomial_decay;
  s.initial_rate = initial_rate;
  s.final_rate = final_rate;
  s.total_steps = total_steps;
  s.power = power;
  return s;
}

double schedule_rate(const LearningRateSchedule& schedule, long k) {
  if (k < 0) {
    throw ContractViolationError("schedule_rate: step must be >= 0");
  }
  if (schedule.kind == LearningRateSchedule::Kind::constant) {
    return schedule.initial_rate;
  }
  if (k >= schedule.total_steps) {
    return schedule.final_rate;
  }
  const double frac =
      1.0 - static_cast<double>(k) / static_cast<double>(schedule.total_steps);
  return schedule.final_rate +
         (schedule.initial_rate - schedule.final_rate) *
             std::pow(frac, schedule.power);
}

void adam_step(AdamState& state, Eigen::VectorXd& params,
               const Eigen::VectorXd& gradient, double rate) {
  if (params.size() != gradient.size() || params.size() != state.m.size()) {
    throw ContractViolationError("adam_step: dimension mismatch");
  }
  if (!(rate > 0.0) || !std::isfinite(rate)) {
    throw ContractViolationError("adam_step: rate must be positive and finite");
  }
  if (!gradient.allFinite()) {
    std::ostringstream os;
    os << "non-finite gradient at optimizer step " << state.k;
    throw DivergenceError(os.str(), state.k);
  }

  state.m = state.beta1 * state.m + (1.0 - state.beta1) * gradient;
  state.v.array() =
      state.beta2 * state.v.array() +
      (1.0 - state.beta2) * gradient.array().square();
  state.k += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.k));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.k));
  params.array() -= (rate / bc1) * state.m.array() /
                    ((state.v.array() / bc2).sqrt() + state.epsilon);
}

double clip_gradient_max_norm(Eigen::VectorXd& gradient, double max_norm) {
  if (!(max_norm > 0.0)) {
    throw ConfigError("gradient clip needs max_norm > 0");
  }
  const double norm = gradient.norm();
  if (norm <= max_norm || norm == 0.0) {
    return 1.0;
  }
  const double scale = max_norm / norm;
  gradient *= scale;
  return scale;
}

}  // namespace mssr
