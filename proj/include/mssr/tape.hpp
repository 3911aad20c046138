#pragma once

#include <Eigen/Dense>

#include <functional>
#include <vector>

#include "mssr/errors.hpp"
#include "mssr/network.hpp"

namespace mssr::ad {

// Recording reverse-mode differentiator for scalar expressions. Every
// operation appends a node holding its parents and the local partials, so one
// reverse sweep yields exact adjoints for all leaves. Intended for loss
// expressions at test/diagnostic scale; the structured engine in loss.cpp
// covers the training hot path without a tape.
class Tape {
 public:
  int constant(double value);  // no derivative tracked
  int leaf(double value);      // differentiable leaf
  int unary(double value, int a, double pa);
  int binary(double value, int a, double pa, int b, double pb);

  double value(int index) const { return values_[index]; }
  std::size_t size() const { return values_.size(); }

  // Adjoints of every node with respect to node `root`; nodes are recorded in
  // topological order, so a single reverse pass suffices.
  std::vector<double> adjoints(int root) const;

 private:
  struct Node {
    int a = -1;
    int b = -1;
    double pa = 0.0;
    double pb = 0.0;
  };
  std::vector<Node> nodes_;
  std::vector<double> values_;

  void check_capacity() const;
};

struct Var {
  Tape* tape = nullptr;
  int index = -1;
  double value() const { return tape->value(index); }
};

Var operator+(Var a, Var b);
Var operator+(Var a, double b);
Var operator+(double a, Var b);
Var operator-(Var a, Var b);
Var operator-(Var a, double b);
Var operator-(double a, Var b);
Var operator-(Var a);
Var operator*(Var a, Var b);
Var operator*(Var a, double b);
Var operator*(double a, Var b);
Var operator/(Var a, Var b);
Var operator/(Var a, double b);
Var operator/(double a, Var b);
Var tanh(Var a);
Var exp(Var a);
Var square(Var a);
Var sum(const std::vector<Var>& xs);
Var mean(const std::vector<Var>& xs);

// Records a full network evaluation (values and exact input-tangents) on a
// tape, with one differentiable leaf per parameter in layout order.
class TapeNetwork {
 public:
  TapeNetwork(Tape& tape, const NetworkParameters& params);

  struct Eval {
    std::vector<Var> u;
    std::vector<Var> du_dt;  // derivative w.r.t. the given input
  };
  Eval evaluate(double input) const;

  // Not recorded by this engine; always throws CapabilityError so callers
  // composing unsupported expressions fail loudly instead of silently.
  std::vector<Var> second_time_derivative(double input) const;

  const std::vector<int>& leaves() const { return leaves_; }

 private:
  Tape* tape_;
  const NetworkParameters* params_;
  std::vector<int> leaves_;
};

using LossEvaluator = std::function<Var(Tape&, TapeNetwork&)>;

}  // namespace mssr::ad

namespace mssr {

// d(evaluator)/d(params) as a flat vector aligned with the parameter layout.
// The evaluator composes network evaluations, du/dt, and arithmetic through
// the tape API above.
Eigen::VectorXd loss_gradient(const NetworkParameters& params,
                              const ad::LossEvaluator& evaluator);

}  // namespace mssr
