#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "mssr/mss_model.hpp"

namespace mssr {

enum class Provenance { oracle_rk4, closed_form, pinn };

std::string to_string(Provenance p);
Provenance provenance_from_string(const std::string& s);

struct SolverMetadata {
  double internal_step = 0.0;  // 0 when not produced by the integrator
  double max_defect = 0.0;     // worst |row sum - 1| seen at emission
  std::string checkpoint;      // producing checkpoint, for pinn provenance
};

// Dense trajectory: one row of channel values per time. Channels are state
// probabilities unless a performance aggregation renamed them.
struct TrajectoryTable {
  Eigen::VectorXd times;
  Eigen::MatrixXd rows;  // times.size() x channels
  std::vector<std::string> channel_names;
  Provenance provenance = Provenance::oracle_rk4;
  std::string model_id;
  SolverMetadata metadata;

  int num_channels() const { return static_cast<int>(rows.cols()); }
};

// Inclusive equally spaced grid with exact endpoints.
Eigen::VectorXd time_grid(double t_start, double t_end, int num_points);

std::vector<std::string> state_channel_names(int num_states);

// Integrates p' = p Q(t) from the model's initial distribution with the
// classical 4th-order Runge-Kutta scheme at a fixed internal step, emitting
// num_output_points rows equally spaced on [0, t_end]. The internal step must
// divide the output spacing. Emitted rows are renormalized when the
// probability-sum defect is at most 1e-9; larger defects (or any defect above
// 1e-6 at an internal step) raise InstabilityError.
TrajectoryTable solve_rk4(const MssModel& model, double t_end,
                          int num_output_points, double internal_step);

// Exact solution of the homogeneous 3-state series-parallel chain used by
// catalog model "example1" (state 0 full, state 1 degraded, state 2
// absorbing): p0 = exp(-(2g+l)t), p1 = 2(exp(-(g+l)t) - exp(-(2g+l)t)).
Eigen::Vector3d solve_closed_form_example1(double t, double gamma,
                                           double lambda);

// Step-halving certification: max over output points of the infinity-norm
// difference between the step-h and step-h/2 solutions.
double richardson_check(const MssModel& model, double t_end,
                        int num_output_points, double internal_step);

}  // namespace mssr
