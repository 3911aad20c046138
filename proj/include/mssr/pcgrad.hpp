#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "mssr/errors.hpp"

namespace mssr {

// One flat gradient per task, all the same length. Labels are optional and
// only surface in diagnostics.
struct TaskGradients {
  std::vector<Eigen::VectorXd> grads;
  std::vector<std::string> labels;
};

// (a.b)/(|a||b|), clamped into [-1, 1] against floating-point overshoot.
// Zero-norm inputs are a contract violation; conflict tests inside the
// projection use the dot-product sign instead and treat zero gradients as
// non-conflicting.
double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

struct ProjectionResult {
  Eigen::VectorXd update;                   // sum of the surgered gradients
  std::vector<Eigen::VectorXd> projected;   // per-task gradients after surgery
  int projection_count = 0;                 // projections actually applied
};

// Projecting-conflicting-gradients surgery: each task's gradient visits the
// other tasks' original gradients in a seeded-random order and, whenever the
// running vector conflicts with one (negative dot product), drops its
// component along it. The update is the sum of the surgered gradients. With
// two tasks the visit order has no effect; the seed still fixes it for more.
ProjectionResult project_conflicting_detailed(const TaskGradients& grads,
                                              std::uint64_t rng_seed);

Eigen::VectorXd project_conflicting(const TaskGradients& grads,
                                    std::uint64_t rng_seed);

}  // namespace mssr
