#include "mssr/loss.hpp"

#include <atomic>
#include <cmath>
#include <thread>

#include "mssr/oracle.hpp"

namespace mssr {

namespace {

// Fixed block width for the collocation dimension. Independent of the thread
// count on purpose: the per-block partials and their block-ordered reduction
// are what make results reproducible bit-for-bit however the blocks are
// scheduled.
constexpr int kBlockSize = 1024;

}  // namespace

CollocationGrid CollocationGrid::make(double t_start, double t_end,
                                      int num_points) {
  if (num_points < 2) {
    throw ContractViolationError("collocation grid needs at least 2 points");
  }
  if (!(t_end > t_start) || !(t_end > 0.0) || t_start < 0.0) {
    throw ContractViolationError(
        "collocation grid needs 0 <= t_start < t_end");
  }
  CollocationGrid g;
  g.t_start = t_start;
  g.t_end = t_end;
  g.num_points = num_points;
  g.points = time_grid(t_start, t_end, num_points);
  g.t_scale = t_end;
  return g;
}

LossEngine::LossEngine(MssModel model, CollocationGrid grid, int threads)
    : model_(std::move(model)), grid_(std::move(grid)),
      threads_(std::max(1, threads)) {
  if (grid_.points.size() != grid_.num_points || grid_.t_scale <= 0.0) {
    throw ContractViolationError("loss engine needs a grid built by make()");
  }
  if (model_.initial_distribution.size() != model_.num_states) {
    throw ContractViolationError("loss engine: model initial distribution invalid");
  }
  taus_ = (grid_.points / grid_.t_scale).transpose();
  if (model_.time_homogeneous) {
    qt_.push_back(model_.rate_matrix_fn(0.0).transpose());
  } else {
    qt_.reserve(grid_.num_points);
    for (int j = 0; j < grid_.num_points; ++j) {
      qt_.push_back(model_.rate_matrix_fn(grid_.points[j]).transpose());
    }
  }
}

template <typename PerBlock>
void LossEngine::for_each_block(PerBlock&& per_block) const {
  const int n = grid_.num_points;
  const int num_blocks = (n + kBlockSize - 1) / kBlockSize;
  auto run = [&](int b) {
    const int start = b * kBlockSize;
    const int count = std::min(kBlockSize, n - start);
    per_block(b, start, count);
  };
  if (threads_ == 1 || num_blocks == 1) {
    for (int b = 0; b < num_blocks; ++b) run(b);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  const int workers = std::min(threads_, num_blocks);
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int b = next.fetch_add(1); b < num_blocks; b = next.fetch_add(1)) {
        run(b);
      }
    });
  }
  for (auto& t : pool) t.join();
}

LossBreakdown LossEngine::evaluate(const NetworkParameters& params,
                                   double weight) const {
  const int c = model_.num_states;
  const int n = grid_.num_points;
  const int num_blocks = (n + kBlockSize - 1) / kBlockSize;
  const double inv_scale = 1.0 / grid_.t_scale;

  std::vector<double> block_loss(num_blocks, 0.0);
  std::vector<Eigen::VectorXd> block_per_state(num_blocks);
  for_each_block([&](int b, int start, int count) {
    const BatchRecord rec =
        forward_batch(params, taus_.segment(start, count), true);
    Eigen::MatrixXd r = rec.udot * inv_scale;
    if (model_.time_homogeneous) {
      r.noalias() -= qt_[0] * rec.u;
    } else {
      for (int j = 0; j < count; ++j) {
        r.col(j).noalias() -= qt_[start + j] * rec.u.col(j);
      }
    }
    block_per_state[b] = r.array().square().rowwise().sum();
    block_loss[b] = block_per_state[b].sum();
  });

  LossBreakdown out;
  out.weight = weight;
  out.per_state = Eigen::VectorXd::Zero(c);
  double total = 0.0;
  for (int b = 0; b < num_blocks; ++b) {
    total += block_loss[b];
    out.per_state += block_per_state[b];
  }
  out.loss_f = total / n;
  out.per_state /= n;
  out.loss_u = initial_condition_loss(params, model_);
  return out;
}

TaskGradientResult LossEngine::gradients(const NetworkParameters& params) const {
  const int c = model_.num_states;
  const int n = grid_.num_points;
  const int num_blocks = (n + kBlockSize - 1) / kBlockSize;
  const double inv_scale = 1.0 / grid_.t_scale;

  std::vector<double> block_loss(num_blocks, 0.0);
  std::vector<Eigen::VectorXd> block_per_state(num_blocks);
  std::vector<Eigen::VectorXd> block_grad(num_blocks);
  for_each_block([&](int b, int start, int count) {
    const BatchRecord rec =
        forward_batch(params, taus_.segment(start, count), true);
    Eigen::MatrixXd r = rec.udot * inv_scale;
    if (model_.time_homogeneous) {
      r.noalias() -= qt_[0] * rec.u;
    } else {
      for (int j = 0; j < count; ++j) {
        r.col(j).noalias() -= qt_[start + j] * rec.u.col(j);
      }
    }
    block_per_state[b] = r.array().square().rowwise().sum();
    block_loss[b] = block_per_state[b].sum();

    const double scale = 2.0 / n;
    Eigen::MatrixXd gu(c, count);
    if (model_.time_homogeneous) {
      gu.noalias() = qt_[0].transpose() * r;
      gu *= -scale;
    } else {
      for (int j = 0; j < count; ++j) {
        gu.col(j).noalias() = qt_[start + j].transpose() * r.col(j);
      }
      gu *= -scale;
    }
    const Eigen::MatrixXd gv = (scale * inv_scale) * r;
    block_grad[b] = backward_batch(params, rec, gu, gv);
  });

  TaskGradientResult out;
  out.breakdown.per_state = Eigen::VectorXd::Zero(c);
  out.grad_f = Eigen::VectorXd::Zero(params.values().size());
  double total = 0.0;
  for (int b = 0; b < num_blocks; ++b) {
    total += block_loss[b];
    out.breakdown.per_state += block_per_state[b];
    out.grad_f += block_grad[b];
  }
  out.breakdown.loss_f = total / n;
  out.breakdown.per_state /= n;

  // Initial-condition task: one evaluation at tau = 0.
  const BatchRecord rec0 =
      forward_batch(params, Eigen::RowVectorXd::Zero(1), false);
  const Eigen::VectorXd diff =
      rec0.u.col(0) - model_.initial_distribution;
  out.breakdown.loss_u = diff.squaredNorm();
  out.grad_u = backward_batch(params, rec0, 2.0 * diff, Eigen::MatrixXd());
  return out;
}

std::vector<Eigen::VectorXd> LossEngine::per_state_residual_gradients(
    const NetworkParameters& params) const {
  const int c = model_.num_states;
  const int n = grid_.num_points;
  const int num_blocks = (n + kBlockSize - 1) / kBlockSize;
  const double inv_scale = 1.0 / grid_.t_scale;
  const double scale = 2.0 / n;

  std::vector<std::vector<Eigen::VectorXd>> block_grads(num_blocks);
  for_each_block([&](int b, int start, int count) {
    const BatchRecord rec =
        forward_batch(params, taus_.segment(start, count), true);
    Eigen::MatrixXd r = rec.udot * inv_scale;
    for (int j = 0; j < count; ++j) {
      r.col(j).noalias() -= qt_at(start + j) * rec.u.col(j);
    }
    block_grads[b].reserve(c);
    for (int i = 0; i < c; ++i) {
      // Only state i's residual row feeds task i; its u-adjoint spreads
      // through column i of Q.
      Eigen::MatrixXd gu(c, count);
      Eigen::MatrixXd gv = Eigen::MatrixXd::Zero(c, count);
      gv.row(i) = (scale * inv_scale) * r.row(i);
      for (int j = 0; j < count; ++j) {
        gu.col(j) = (-scale * r(i, j)) * qt_at(start + j).transpose().col(i);
      }
      block_grads[b].push_back(backward_batch(params, rec, gu, gv));
    }
  });

  std::vector<Eigen::VectorXd> grads(
      c, Eigen::VectorXd::Zero(params.values().size()));
  for (int b = 0; b < num_blocks; ++b) {
    for (int i = 0; i < c; ++i) grads[i] += block_grads[b][i];
  }
  return grads;
}

Eigen::MatrixXd LossEngine::residual_details(
    const NetworkParameters& params) const {
  const int n = grid_.num_points;
  const double inv_scale = 1.0 / grid_.t_scale;
  Eigen::MatrixXd residuals(model_.num_states, n);
  for_each_block([&](int, int start, int count) {
    const BatchRecord rec =
        forward_batch(params, taus_.segment(start, count), true);
    for (int j = 0; j < count; ++j) {
      residuals.col(start + j) =
          rec.udot.col(j) * inv_scale - qt_at(start + j) * rec.u.col(j);
    }
  });
  return residuals;
}

double initial_condition_loss(const NetworkParameters& params,
                              const MssModel& model) {
  if (model.initial_distribution.size() !=
      params.architecture().output_dim) {
    throw ContractViolationError(
        "network output width does not match the model's state count");
  }
  const BatchRecord rec =
      forward_batch(params, Eigen::RowVectorXd::Zero(1), false);
  return (rec.u.col(0) - model.initial_distribution).squaredNorm();
}

ResidualLossResult residual_loss(const NetworkParameters& params,
                                 const MssModel& model,
                                 const CollocationGrid& grid) {
  const LossEngine engine(model, grid);
  ResidualLossResult out;
  out.residuals = engine.residual_details(params);
  out.per_state = out.residuals.array().square().rowwise().sum() /
                  grid.num_points;
  out.loss = out.per_state.sum();
  return out;
}

LossBreakdown combined_loss(const NetworkParameters& params,
                            const MssModel& model, const CollocationGrid& grid,
                            double weight) {
  if (!(weight > 0.0)) {
    throw ContractViolationError("combined_loss: weight must be > 0");
  }
  return LossEngine(model, grid).evaluate(params, weight);
}

}  // namespace mssr
