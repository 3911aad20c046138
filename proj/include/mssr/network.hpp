#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

#include "mssr/errors.hpp"

namespace mssr {

// MLP shape: scalar time input, tanh hidden layers, softmax output head (one
// probability per state). Activations are fixed by this architecture; the
// fields exist so configs and checkpoints can echo them.
struct NetworkArchitecture {
  int input_dim = 1;
  std::vector<int> hidden = {50, 50};
  int output_dim = 2;

  std::vector<int> layer_sizes() const;  // [input, hidden..., output]
  int num_layers() const { return static_cast<int>(hidden.size()) + 1; }
  Eigen::Index parameter_count() const;
  void validate() const;
  bool operator==(const NetworkArchitecture&) const = default;
};

// Where layer k's weight matrix (rows x cols, column-major) and bias live in
// the flat parameter vector.
struct LayerLayout {
  Eigen::Index weight_offset = 0;
  Eigen::Index bias_offset = 0;
  int rows = 0;
  int cols = 0;
};

class NetworkParameters {
 public:
  explicit NetworkParameters(NetworkArchitecture arch);

  const NetworkArchitecture& architecture() const { return arch_; }
  const std::vector<LayerLayout>& layout() const { return layout_; }
  int num_layers() const { return static_cast<int>(layout_.size()); }

  Eigen::VectorXd& values() { return values_; }
  const Eigen::VectorXd& values() const { return values_; }

  Eigen::Map<const Eigen::MatrixXd> weight(int layer) const;
  Eigen::Map<const Eigen::VectorXd> bias(int layer) const;
  Eigen::Map<Eigen::MatrixXd> weight(int layer);
  Eigen::Map<Eigen::VectorXd> bias(int layer);

 private:
  NetworkArchitecture arch_;
  std::vector<LayerLayout> layout_;
  Eigen::VectorXd values_;
};

// Symmetric-uniform fan-based weights (bounds +-sqrt(6/(fan_in+fan_out))),
// zero biases. The raw engine output is mapped to doubles explicitly so the
// draw is identical across standard libraries.
NetworkParameters initialize_parameters(const NetworkArchitecture& arch,
                                        std::uint64_t seed);

// Everything a reverse sweep needs from one batched evaluation: layer inputs
// and their input-tangents (column = sample), plus the softmax head values,
// tangents, and the tangent working term w = zdot - <u, zdot>.
struct BatchRecord {
  std::vector<Eigen::MatrixXd> acts;      // acts[0] = inputs (1 x N)
  std::vector<Eigen::MatrixXd> acts_dot;
  Eigen::MatrixXd u;
  Eigen::MatrixXd udot;
  bool has_tangent = false;

  int batch_size() const { return static_cast<int>(u.cols()); }
};

// Values u and exact input-derivatives du/d(input) for a batch of scalar
// inputs, carrying one dual (value, tangent) pair through every layer.
// with_tangent=false skips the tangent stream for value-only evaluation.
BatchRecord forward_batch(const NetworkParameters& params,
                          const Eigen::RowVectorXd& inputs,
                          bool with_tangent = true);

// Accumulates d(loss)/d(parameters) for a scalar loss whose adjoints with
// respect to the head are known: gu = dL/du and gv = dL/d(udot), both
// output_dim x N (gv may be empty when the loss ignores the tangent). This
// is the reverse half of forward-over-reverse differentiation; the returned
// vector is aligned with the NetworkParameters layout.
Eigen::VectorXd backward_batch(const NetworkParameters& params,
                               const BatchRecord& record,
                               const Eigen::MatrixXd& gu,
                               const Eigen::MatrixXd& gv);

struct ForwardResult {
  Eigen::VectorXd u;
  Eigen::VectorXd du_dt;  // derivative w.r.t. the (normalized) input
  BatchRecord record;
};

ForwardResult forward(const NetworkParameters& params, double t);

}  // namespace mssr
