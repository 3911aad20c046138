#pragma once

#include <Eigen/Dense>

#include <vector>

#include "mssr/mss_model.hpp"
#include "mssr/network.hpp"

namespace mssr {

// Equally spaced residual evaluation times, endpoints included. The network
// consumes t / t_scale with t_scale fixed to t_end, so the training domain
// maps onto [0, 1] exactly.
struct CollocationGrid {
  double t_start = 0.0;
  double t_end = 0.0;
  int num_points = 0;
  Eigen::VectorXd points;
  double t_scale = 0.0;

  static CollocationGrid make(double t_start, double t_end, int num_points);
};

struct LossBreakdown {
  double loss_u = 0.0;   // squared error against s0 at t = 0
  double loss_f = 0.0;   // mean over points of the squared residual norm
  double weight = 1.0;   // W, applied to loss_f in total()
  Eigen::VectorXd per_state;  // loss_f split by state; sums to loss_f

  double total() const { return loss_u + weight * loss_f; }
};

struct TaskGradientResult {
  LossBreakdown breakdown;
  Eigen::VectorXd grad_u;
  Eigen::VectorXd grad_f;
};

// Evaluates both loss groups and their parameter gradients over a fixed grid.
// Work is split into fixed-size column blocks that are reduced in block
// order, so results are bit-identical for any worker-thread count. Gradients
// use analytic head adjoints: with r = (1/T)*du/dtau - Q^T u per point,
//   dL_f/du    = -(2/N) Q r
//   dL_f/dudot = (2/(N*T)) r
// and the initial-condition loss seeds dL_u/du = 2(u - s0) at tau = 0.
class LossEngine {
 public:
  LossEngine(MssModel model, CollocationGrid grid, int threads = 1);

  const CollocationGrid& grid() const { return grid_; }
  const MssModel& model() const { return model_; }

  LossBreakdown evaluate(const NetworkParameters& params,
                         double weight = 1.0) const;
  TaskGradientResult gradients(const NetworkParameters& params) const;

  // One task per state: gradients of the per-state components of loss_f, in
  // state order. Their sum equals gradients().grad_f.
  std::vector<Eigen::VectorXd> per_state_residual_gradients(
      const NetworkParameters& params) const;

  // Residual vectors r(t_j) as columns, for diagnostics and tests.
  Eigen::MatrixXd residual_details(const NetworkParameters& params) const;

 private:
  MssModel model_;
  CollocationGrid grid_;
  int threads_;
  Eigen::RowVectorXd taus_;
  // Transposed generators per collocation point; a single entry when the
  // model is time-homogeneous.
  std::vector<Eigen::MatrixXd> qt_;

  const Eigen::MatrixXd& qt_at(int point) const {
    return qt_[model_.time_homogeneous ? 0 : point];
  }
  template <typename PerBlock>
  void for_each_block(PerBlock&& per_block) const;
};

double initial_condition_loss(const NetworkParameters& params,
                              const MssModel& model);

struct ResidualLossResult {
  double loss = 0.0;
  Eigen::VectorXd per_state;
  Eigen::MatrixXd residuals;  // num_states x num_points
};

ResidualLossResult residual_loss(const NetworkParameters& params,
                                 const MssModel& model,
                                 const CollocationGrid& grid);

LossBreakdown combined_loss(const NetworkParameters& params,
                            const MssModel& model, const CollocationGrid& grid,
                            double weight);

}  // namespace mssr
