#include "mssr/pcgrad.hpp"

#include <algorithm>
#include <random>

namespace mssr {

namespace {

// Fisher-Yates with an explicit index draw; std::shuffle's internal
// distribution differs between standard libraries, and visit order must be a
// pure function of the seed everywhere.
void seeded_permutation(std::vector<int>& items, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace

double cosine_similarity(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) {
    throw ContractViolationError("cosine_similarity: length mismatch");
  }
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) {
    throw ContractViolationError(
        "cosine_similarity is undefined for zero-norm gradients");
  }
  return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

ProjectionResult project_conflicting_detailed(const TaskGradients& grads,
                                              std::uint64_t rng_seed) {
  const std::size_t k = grads.grads.size();
  if (k == 0) {
    throw ContractViolationError("project_conflicting: no task gradients");
  }
  const Eigen::Index p = grads.grads[0].size();
  for (const auto& g : grads.grads) {
    if (g.size() != p) {
      throw ContractViolationError(
          "project_conflicting: task gradients differ in length");
    }
  }

  ProjectionResult result;
  result.projected = grads.grads;
  std::mt19937_64 order_seeds(rng_seed);

  for (std::size_t i = 0; i < k; ++i) {
    std::vector<int> others;
    others.reserve(k - 1);
    for (std::size_t j = 0; j < k; ++j) {
      if (j != i) others.push_back(static_cast<int>(j));
    }
    // One independent draw per task, all derived from the caller's seed.
    if (others.size() > 1) {
      seeded_permutation(others, order_seeds());
    }

    Eigen::VectorXd& pc = result.projected[i];
    for (int j : others) {
      const Eigen::VectorXd& gj = grads.grads[j];
      const double dot = pc.dot(gj);
      if (dot < 0.0) {
        const double norm_sq = gj.squaredNorm();
        if (norm_sq == 0.0) continue;  // zero gradients cannot interfere
        pc -= (dot / norm_sq) * gj;
        ++result.projection_count;
      }
    }
  }

  result.update = Eigen::VectorXd::Zero(p);
  for (const auto& pc : result.projected) {
    result.update += pc;
  }
  return result;
}

Eigen::VectorXd project_conflicting(const TaskGradients& grads,
                                    std::uint64_t rng_seed) {
  return project_conflicting_detailed(grads, rng_seed).update;
}

}  // namespace mssr
