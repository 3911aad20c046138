#include "mssr/tape.hpp"

#include <cmath>

namespace mssr::ad {

namespace {

// Keeps runaway expressions (e.g. a residual loss over thousands of points)
// from exhausting memory; such losses belong on the structured engine.
constexpr std::size_t kMaxNodes = 50'000'000;

Var make(Tape* tape, int index) { return Var{tape, index}; }

void require_same_tape(Var a, Var b) {
  if (a.tape != b.tape || a.tape == nullptr) {
    throw ContractViolationError("tape variables belong to different tapes");
  }
}

}  // namespace

void Tape::check_capacity() const {
  if (values_.size() >= kMaxNodes) {
    throw CapabilityError(
        "recorded expression exceeds the tape node budget; evaluate large "
        "losses through the structured loss engine instead");
  }
}

int Tape::constant(double value) {
  check_capacity();
  nodes_.push_back({});
  values_.push_back(value);
  return static_cast<int>(values_.size()) - 1;
}

int Tape::leaf(double value) { return constant(value); }

int Tape::unary(double value, int a, double pa) {
  check_capacity();
  nodes_.push_back({a, -1, pa, 0.0});
  values_.push_back(value);
  return static_cast<int>(values_.size()) - 1;
}

int Tape::binary(double value, int a, double pa, int b, double pb) {
  check_capacity();
  nodes_.push_back({a, b, pa, pb});
  values_.push_back(value);
  return static_cast<int>(values_.size()) - 1;
}

std::vector<double> Tape::adjoints(int root) const {
  if (root < 0 || root >= static_cast<int>(values_.size())) {
    throw ContractViolationError("adjoints: root is not a tape node");
  }
  std::vector<double> adj(values_.size(), 0.0);
  adj[root] = 1.0;
  for (int i = root; i >= 0; --i) {
    const double a = adj[i];
    if (a == 0.0) continue;
    const Node& n = nodes_[i];
    if (n.a >= 0) adj[n.a] += n.pa * a;
    if (n.b >= 0) adj[n.b] += n.pb * a;
  }
  return adj;
}

Var operator+(Var a, Var b) {
  require_same_tape(a, b);
  return make(a.tape, a.tape->binary(a.value() + b.value(), a.index, 1.0,
                                     b.index, 1.0));
}
Var operator+(Var a, double b) {
  return make(a.tape, a.tape->unary(a.value() + b, a.index, 1.0));
}
Var operator+(double a, Var b) { return b + a; }

Var operator-(Var a, Var b) {
  require_same_tape(a, b);
  return make(a.tape, a.tape->binary(a.value() - b.value(), a.index, 1.0,
                                     b.index, -1.0));
}
Var operator-(Var a, double b) {
  return make(a.tape, a.tape->unary(a.value() - b, a.index, 1.0));
}
Var operator-(double a, Var b) {
  return make(b.tape, b.tape->unary(a - b.value(), b.index, -1.0));
}
Var operator-(Var a) {
  return make(a.tape, a.tape->unary(-a.value(), a.index, -1.0));
}

Var operator*(Var a, Var b) {
  require_same_tape(a, b);
  return make(a.tape, a.tape->binary(a.value() * b.value(), a.index, b.value(),
                                     b.index, a.value()));
}
Var operator*(Var a, double b) {
  return make(a.tape, a.tape->unary(a.value() * b, a.index, b));
}
Var operator*(double a, Var b) { return b * a; }

Var operator/(Var a, Var b) {
  require_same_tape(a, b);
  const double bv = b.value();
  return make(a.tape, a.tape->binary(a.value() / bv, a.index, 1.0 / bv,
                                     b.index, -a.value() / (bv * bv)));
}
Var operator/(Var a, double b) { return a * (1.0 / b); }
Var operator/(double a, Var b) {
  const double bv = b.value();
  return make(b.tape, b.tape->unary(a / bv, b.index, -a / (bv * bv)));
}

Var tanh(Var a) {
  const double t = std::tanh(a.value());
  return make(a.tape, a.tape->unary(t, a.index, 1.0 - t * t));
}

Var exp(Var a) {
  const double e = std::exp(a.value());
  return make(a.tape, a.tape->unary(e, a.index, e));
}

Var square(Var a) {
  const double v = a.value();
  return make(a.tape, a.tape->unary(v * v, a.index, 2.0 * v));
}

Var sum(const std::vector<Var>& xs) {
  if (xs.empty()) {
    throw ContractViolationError("sum of an empty variable list");
  }
  Var acc = xs[0];
  for (std::size_t i = 1; i < xs.size(); ++i) acc = acc + xs[i];
  return acc;
}

Var mean(const std::vector<Var>& xs) {
  return sum(xs) / static_cast<double>(xs.size());
}

TapeNetwork::TapeNetwork(Tape& tape, const NetworkParameters& params)
    : tape_(&tape), params_(&params) {
  const auto& values = params.values();
  leaves_.reserve(values.size());
  for (Eigen::Index i = 0; i < values.size(); ++i) {
    leaves_.push_back(tape_->leaf(values[i]));
  }
}

TapeNetwork::Eval TapeNetwork::evaluate(double input) const {
  if (!std::isfinite(input)) {
    throw ContractViolationError("evaluate: input must be finite");
  }
  Tape& tape = *tape_;
  const auto& layout = params_->layout();

  auto weight_var = [&](int layer, int row, int col) {
    const auto& l = layout[layer];
    return make(&tape, leaves_[l.weight_offset +
                               static_cast<Eigen::Index>(col) * l.rows + row]);
  };
  auto bias_var = [&](int layer, int row) {
    return make(&tape, leaves_[layout[layer].bias_offset + row]);
  };

  std::vector<Var> val{make(&tape, tape.constant(input))};
  std::vector<Var> dot{make(&tape, tape.constant(1.0))};

  const int num_layers = params_->num_layers();
  for (int k = 0; k < num_layers; ++k) {
    const auto& l = layout[k];
    std::vector<Var> zval, zdot;
    zval.reserve(l.rows);
    zdot.reserve(l.rows);
    for (int r = 0; r < l.rows; ++r) {
      Var zv = bias_var(k, r);
      Var zd = weight_var(k, r, 0) * dot[0];
      zv = zv + weight_var(k, r, 0) * val[0];
      for (int c = 1; c < l.cols; ++c) {
        const Var w = weight_var(k, r, c);
        zv = zv + w * val[c];
        zd = zd + w * dot[c];
      }
      zval.push_back(zv);
      zdot.push_back(zd);
    }
    if (k + 1 < num_layers) {
      val.clear();
      dot.clear();
      for (int r = 0; r < l.rows; ++r) {
        const Var a = tanh(zval[r]);
        val.push_back(a);
        dot.push_back((1.0 - square(a)) * zdot[r]);
      }
    } else {
      val = std::move(zval);
      dot = std::move(zdot);
    }
  }

  // Softmax head on duals: u = softmax(z), du = u.*(zdot - <u, zdot>). The
  // max shift is a plain constant; softmax is invariant under it.
  double zmax = val[0].value();
  for (const Var& z : val) zmax = std::max(zmax, z.value());
  std::vector<Var> e;
  e.reserve(val.size());
  for (const Var& z : val) e.push_back(exp(z - zmax));
  const Var denom = sum(e);

  Eval out;
  out.u.reserve(val.size());
  for (const Var& ei : e) out.u.push_back(ei / denom);
  Var s = out.u[0] * dot[0];
  for (std::size_t i = 1; i < val.size(); ++i) {
    s = s + out.u[i] * dot[i];
  }
  out.du_dt.reserve(val.size());
  for (std::size_t i = 0; i < val.size(); ++i) {
    out.du_dt.push_back(out.u[i] * (dot[i] - s));
  }
  return out;
}

std::vector<Var> TapeNetwork::second_time_derivative(double) const {
  throw CapabilityError(
      "second time derivatives are not a recorded primitive of this engine");
}

}  // namespace mssr::ad

namespace mssr {

Eigen::VectorXd loss_gradient(const NetworkParameters& params,
                              const ad::LossEvaluator& evaluator) {
  ad::Tape tape;
  ad::TapeNetwork net(tape, params);
  const ad::Var out = evaluator(tape, net);
  if (out.tape != &tape) {
    throw ContractViolationError(
        "loss evaluator returned a variable from a different tape");
  }
  const std::vector<double> adj = tape.adjoints(out.index);
  Eigen::VectorXd grad(params.values().size());
  const auto& leaves = net.leaves();
  for (Eigen::Index i = 0; i < grad.size(); ++i) {
    grad[i] = adj[leaves[i]];
  }
  return grad;
}

}  // namespace mssr
