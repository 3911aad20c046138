#include "mssr/network.hpp"

#include <cmath>
#include <random>

namespace mssr {

namespace {

// tanh through exp because Eigen vectorizes array exp for doubles while its
// tanh falls back to scalar libm calls. The clamp keeps exp in range; beyond
// |x| = 19 tanh is +-1 to within one ulp anyway.
template <typename Derived>
auto tanh_fast(const Eigen::ArrayBase<Derived>& x) {
  return 1.0 - 2.0 / ((2.0 * x).min(38.0).max(-38.0).exp() + 1.0);
}

double next_uniform(std::mt19937_64& rng) {
  // top 53 bits -> [0, 1); explicit so the mapping does not depend on the
  // standard library's distribution implementation
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace

std::vector<int> NetworkArchitecture::layer_sizes() const {
  std::vector<int> sizes;
  sizes.reserve(hidden.size() + 2);
  sizes.push_back(input_dim);
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(output_dim);
  return sizes;
}

Eigen::Index NetworkArchitecture::parameter_count() const {
  const auto sizes = layer_sizes();
  Eigen::Index count = 0;
  for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
    count += static_cast<Eigen::Index>(sizes[k] + 1) * sizes[k + 1];
  }
  return count;
}

void NetworkArchitecture::validate() const {
  if (input_dim != 1) {
    throw ContractViolationError(
        "network input must be the single time coordinate");
  }
  if (output_dim < 2) {
    throw ContractViolationError("softmax head needs output_dim >= 2");
  }
  for (int w : hidden) {
    if (w < 1) {
      throw ContractViolationError("hidden layer widths must be >= 1");
    }
  }
}

NetworkParameters::NetworkParameters(NetworkArchitecture arch)
    : arch_(std::move(arch)) {
  arch_.validate();
  const auto sizes = arch_.layer_sizes();
  Eigen::Index offset = 0;
  for (std::size_t k = 0; k + 1 < sizes.size(); ++k) {
    LayerLayout l;
    l.cols = sizes[k];
    l.rows = sizes[k + 1];
    l.weight_offset = offset;
    offset += static_cast<Eigen::Index>(l.rows) * l.cols;
    l.bias_offset = offset;
    offset += l.rows;
    layout_.push_back(l);
  }
  values_ = Eigen::VectorXd::Zero(offset);
}

Eigen::Map<const Eigen::MatrixXd> NetworkParameters::weight(int layer) const {
  const auto& l = layout_.at(layer);
  return {values_.data() + l.weight_offset, l.rows, l.cols};
}

Eigen::Map<const Eigen::VectorXd> NetworkParameters::bias(int layer) const {
  const auto& l = layout_.at(layer);
  return {values_.data() + l.bias_offset, l.rows};
}

Eigen::Map<Eigen::MatrixXd> NetworkParameters::weight(int layer) {
  const auto& l = layout_.at(layer);
  return {values_.data() + l.weight_offset, l.rows, l.cols};
}

Eigen::Map<Eigen::VectorXd> NetworkParameters::bias(int layer) {
  const auto& l = layout_.at(layer);
  return {values_.data() + l.bias_offset, l.rows};
}

NetworkParameters initialize_parameters(const NetworkArchitecture& arch,
                                        std::uint64_t seed) {
  NetworkParameters params(arch);
  std::mt19937_64 rng(seed);
  auto& v = params.values();
  for (const auto& l : params.layout()) {
    const double limit = std::sqrt(6.0 / (l.cols + l.rows));
    const Eigen::Index n = static_cast<Eigen::Index>(l.rows) * l.cols;
    for (Eigen::Index i = 0; i < n; ++i) {
      v[l.weight_offset + i] = limit * (2.0 * next_uniform(rng) - 1.0);
    }
    // biases stay zero
  }
  return params;
}

BatchRecord forward_batch(const NetworkParameters& params,
                          const Eigen::RowVectorXd& inputs,
                          bool with_tangent) {
  if (!inputs.allFinite()) {
    throw ContractViolationError("network inputs must be finite");
  }
  const int num_layers = params.num_layers();
  const Eigen::Index n = inputs.size();

  BatchRecord rec;
  rec.has_tangent = with_tangent;
  rec.acts.resize(num_layers);
  rec.acts_dot.resize(num_layers);
  rec.acts[0] = inputs;
  if (with_tangent) {
    rec.acts_dot[0] = Eigen::RowVectorXd::Ones(n);
  }

  Eigen::MatrixXd z;
  for (int k = 0; k + 1 < num_layers; ++k) {
    z.noalias() = params.weight(k) * rec.acts[k];
    z.colwise() += params.bias(k);
    rec.acts[k + 1] = tanh_fast(z.array());
    if (with_tangent) {
      z.noalias() = params.weight(k) * rec.acts_dot[k];  // zdot
      rec.acts_dot[k + 1] =
          (1.0 - rec.acts[k + 1].array().square()) * z.array();
    }
  }

  const int last = num_layers - 1;
  z.noalias() = params.weight(last) * rec.acts[last];
  z.colwise() += params.bias(last);
  const Eigen::RowVectorXd zmax = z.colwise().maxCoeff();
  rec.u = (z.rowwise() - zmax).array().exp();
  const Eigen::RowVectorXd sums = rec.u.colwise().sum();
  rec.u = rec.u * sums.cwiseInverse().asDiagonal();

  if (with_tangent) {
    z.noalias() = params.weight(last) * rec.acts_dot[last];  // zdot
    const Eigen::RowVectorXd s = rec.u.cwiseProduct(z).colwise().sum();
    rec.udot = rec.u.cwiseProduct(z.rowwise() - s);
  }
  return rec;
}

Eigen::VectorXd backward_batch(const NetworkParameters& params,
                               const BatchRecord& record,
                               const Eigen::MatrixXd& gu,
                               const Eigen::MatrixXd& gv) {
  const int num_layers = params.num_layers();
  const bool tangent = gv.size() > 0;
  if (gu.rows() != record.u.rows() || gu.cols() != record.u.cols()) {
    throw ContractViolationError("backward_batch: gu shape mismatch");
  }
  if (tangent) {
    if (!record.has_tangent) {
      throw ContractViolationError(
          "backward_batch: tangent adjoints need a tangent-carrying record");
    }
    if (gv.rows() != record.u.rows() || gv.cols() != record.u.cols()) {
      throw ContractViolationError("backward_batch: gv shape mismatch");
    }
  }

  Eigen::VectorXd grad = Eigen::VectorXd::Zero(params.values().size());

  // Softmax head: u = softmax(z), udot = u.*(zdot - <u, zdot>). For scalar L
  // with known gu = dL/du and gv = dL/dudot,
  //   dL/dzdot = u.*(gv - <gv,u>)
  //   dL/dz    = u.*(gu - <gu,u>) + gv.*udot - u*<gv,udot> - udot*<gv,u>
  // where <,> is the per-column dot product.
  const Eigen::MatrixXd& u = record.u;
  const Eigen::RowVectorXd d_gu_u = gu.cwiseProduct(u).colwise().sum();
  Eigen::MatrixXd gz = u.cwiseProduct(gu) - u * d_gu_u.asDiagonal();
  Eigen::MatrixXd gzdot;
  if (tangent) {
    const Eigen::MatrixXd& ud = record.udot;
    const Eigen::RowVectorXd d_gv_u = gv.cwiseProduct(u).colwise().sum();
    const Eigen::RowVectorXd d_gv_ud = gv.cwiseProduct(ud).colwise().sum();
    gz += gv.cwiseProduct(ud) - u * d_gv_ud.asDiagonal() -
          ud * d_gv_u.asDiagonal();
    gzdot = u.cwiseProduct(gv) - u * d_gv_u.asDiagonal();
  }

  for (int k = num_layers - 1; k >= 0; --k) {
    const auto& l = params.layout()[k];
    Eigen::Map<Eigen::MatrixXd> gw(grad.data() + l.weight_offset, l.rows,
                                   l.cols);
    Eigen::Map<Eigen::VectorXd> gb(grad.data() + l.bias_offset, l.rows);
    gw.noalias() = gz * record.acts[k].transpose();
    if (tangent) {
      gw.noalias() += gzdot * record.acts_dot[k].transpose();
    }
    gb = gz.rowwise().sum();

    if (k == 0) break;

    Eigen::MatrixXd ga = params.weight(k).transpose() * gz;
    // Hidden activation k: a = tanh(z), adot = (1-a^2).*zdot, so
    //   dL/dz    = ga.*(1-a^2) - 2*gadot.*a.*adot
    //   dL/dzdot = gadot.*(1-a^2)
    const auto& a = record.acts[k];
    const Eigen::ArrayXXd one_m = 1.0 - a.array().square();
    if (tangent) {
      Eigen::MatrixXd gadot = params.weight(k).transpose() * gzdot;
      gz = (ga.array() * one_m -
            2.0 * gadot.array() * a.array() * record.acts_dot[k].array())
               .matrix();
      gzdot = (gadot.array() * one_m).matrix();
    } else {
      gz = (ga.array() * one_m).matrix();
    }
  }
  return grad;
}

ForwardResult forward(const NetworkParameters& params, double t) {
  if (!std::isfinite(t)) {
    throw ContractViolationError("forward: input must be finite");
  }
  ForwardResult result;
  result.record =
      forward_batch(params, Eigen::RowVectorXd::Constant(1, t), true);
  result.u = result.record.u.col(0);
  result.du_dt = result.record.udot.col(0);
  return result;
}

}  // namespace mssr
