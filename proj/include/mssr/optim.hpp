#pragma once

#include <Eigen/Dense>

#include "mssr/errors.hpp"

namespace mssr {

struct LearningRateSchedule {
  enum class Kind { constant, polynomial_decay };

  Kind kind = Kind::constant;
  double initial_rate = 1e-3;
  double final_rate = 1e-3;
  long total_steps = 0;   // decay horizon; unused for constant
  double power = 1.0;

  static LearningRateSchedule constant(double rate);
  static LearningRateSchedule polynomial(double initial_rate, double final_rate,
                                         long total_steps, double power = 1.0);

  bool operator==(const LearningRateSchedule&) const = default;
};

// rate(k): constant schedules ignore k; polynomial decay interpolates
// final + (initial - final) * (1 - k/total)^power and clamps to final once
// k reaches total_steps.
double schedule_rate(const LearningRateSchedule& schedule, long k);

struct AdamState {
  Eigen::VectorXd m;
  Eigen::VectorXd v;
  long k = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  explicit AdamState(Eigen::Index p)
      : m(Eigen::VectorXd::Zero(p)), v(Eigen::VectorXd::Zero(p)) {}
};

// Standard bias-corrected Adam update, in place. Throws DivergenceError
// (carrying the step counter) on non-finite gradient entries.
void adam_step(AdamState& state, Eigen::VectorXd& params,
               const Eigen::VectorXd& gradient, double rate);

// Scales the gradient down to max_norm when it is longer; returns the factor
// applied (1.0 when untouched). Off by default everywhere; exists for
// experimentation only.
double clip_gradient_max_norm(Eigen::VectorXd& gradient, double max_norm);

}  // namespace mssr
