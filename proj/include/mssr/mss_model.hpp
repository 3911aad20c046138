#pragma once

#include <Eigen/Dense>

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mssr/errors.hpp"

namespace mssr {

// Transition rate matrix (generator) Q(t): off-diagonals >= 0, every row sums
// to zero, units 1/time.
using RateMatrix = Eigen::MatrixXd;
using RateMatrixFn = std::function<RateMatrix(double)>;

// Full definition of a multi-state Markov problem: state space 0..M, the
// generator as a function of time, the initial distribution s0, and an
// optional real-valued performance rate per state.
struct MssModel {
  int num_states = 0;  // M+1
  RateMatrixFn rate_matrix_fn;
  Eigen::VectorXd initial_distribution;
  std::optional<Eigen::VectorXd> performance_rates;
  std::string time_unit;  // free-form label, documentation only
  std::string id;         // catalog name, empty for ad hoc models

  // True when rate_matrix_fn ignores t. Callers use this to hoist the single
  // matrix out of inner loops; the function form stays the one code path.
  bool time_homogeneous = false;

  RateMatrix rate_matrix(double t) const { return rate_matrix_fn(t); }
};

// Probability vector p(t) with its timestamp. Entries in [0,1], sum 1, both
// within 1e-9 for integrator output; the network head normalizes exactly.
struct StateProbability {
  double t = 0.0;
  Eigen::VectorXd p;
};

// Acceptance-state selector for reliability aggregation: either an explicit
// 0/1 indicator per state, or a performance threshold that derives the
// indicator from the model's performance rates (delta_i = 1 iff g_i >= w).
struct ReliabilityQuery {
  std::optional<Eigen::VectorXd> delta;
  std::optional<double> threshold;

  static ReliabilityQuery with_delta(Eigen::VectorXd d) {
    ReliabilityQuery q;
    q.delta = std::move(d);
    return q;
  }
  static ReliabilityQuery with_threshold(double w) {
    ReliabilityQuery q;
    q.threshold = w;
    return q;
  }
};

struct ValidationIssue {
  double t = 0.0;
  int row = -1;  // -1 when the issue is not tied to a matrix row
  double magnitude = 0.0;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool ok() const { return issues.empty(); }
};

// Right-hand side of the Kolmogorov forward equation p' = p Q(t), returned as
// a vector of the same length as p. Its entries sum to zero (probability flux
// conservation) because Q's rows do.
Eigen::VectorXd kolmogorov_rhs(const MssModel& model, double t,
                               const Eigen::VectorXd& p);

// Checks every model invariant (initial distribution, row sums, rate signs)
// at each sample time. Violations become report entries, never throws.
ValidationReport validate_model(const MssModel& model,
                                const std::vector<double>& sample_times);

// R = sum_i delta_i p_i. Threshold queries need the model to derive delta;
// passing one without performance rates is a ConfigError.
double aggregate_reliability(const Eigen::VectorXd& p,
                             const ReliabilityQuery& query,
                             const MssModel* model = nullptr);

// Probability of each distinct performance rate, keyed in descending rate
// order so report columns read from best state to failure.
using PerformanceDistribution = std::map<double, double, std::greater<double>>;

PerformanceDistribution aggregate_performance_distribution(
    const Eigen::VectorXd& p, const MssModel& model);

// Distinct performance rates (descending) with the member states of each
// group; the grouping behind aggregate_performance_distribution and the
// performance-channel views in the harness.
std::vector<std::pair<double, std::vector<int>>> performance_groups(
    const MssModel& model);

}  // namespace mssr
