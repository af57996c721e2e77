#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "csforge/nn/autograd.hpp"

namespace csforge::nn {

// A persistent trainable tensor. Every parameter carries the name of the
// partition it belongs to (embed, enc_p0, enc_p1, enc_sh, dec_sh, dec_p0,
// dec_p1), which the optimizer and checkpoints preserve.
struct Param {
  std::string name;
  std::string partition;
  Matrix value;
  Matrix m;  // Adam first moment
  Matrix v;  // Adam second moment
  std::int64_t steps = 0;

  Param(std::string n, std::string part, Matrix val)
      : name(std::move(n)),
        partition(std::move(part)),
        value(std::move(val)) {
    m = Matrix::Zero(value.rows(), value.cols());
    v = Matrix::Zero(value.rows(), value.cols());
  }
};

// Binds persistent parameters into one tape's graph. Each parameter gets
// at most one leaf node per step, so reuse inside the graph accumulates
// gradients in a single place. Parameters never bound in a step are not
// touched by the optimizer at all - that is what keeps an update through
// one language path bitwise away from the other side's private layers.
class ParamBinder {
public:
  explicit ParamBinder(Tape& tape, bool frozen = false)
      : tape_(tape), frozen_(frozen) {}

  NodePtr operator()(Param& p) {
    auto it = bound_.find(&p);
    if (it != bound_.end()) return it->second;
    auto node = tape_.leaf(p.value, !frozen_);
    bound_.emplace(&p, node);
    order_.push_back(&p);
    return node;
  }

  const std::vector<Param*>& bound_params() const { return order_; }

  const Matrix& grad_of(Param& p) const {
    return bound_.at(&p)->grad;
  }

  bool is_bound(const Param& p) const {
    return bound_.count(const_cast<Param*>(&p)) > 0;
  }

private:
  Tape& tape_;
  bool frozen_ = false;
  std::unordered_map<Param*, NodePtr> bound_;
  std::vector<Param*> order_;
};

// Adam with bias correction. Moments and step counts live on the
// parameters themselves and only advance for parameters that took part in
// the step (lazy updates).
class Adam {
public:
  explicit Adam(double lr = 1e-4, double beta1 = 0.9, double beta2 = 0.999,
                double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  double learning_rate() const { return lr_; }
  void set_learning_rate(double lr) { lr_ = lr; }

  void step(const ParamBinder& binder) {
    for (Param* p : binder.bound_params()) apply(*p, binder.grad_of(*p));
  }

  void apply(Param& p, const Matrix& grad) {
    ++p.steps;
    p.m = beta1_ * p.m + (1.0 - beta1_) * grad;
    p.v = beta2_ * p.v.array().matrix() +
          (1.0 - beta2_) * grad.cwiseProduct(grad);
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(p.steps));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(p.steps));
    Matrix mhat = p.m / bc1;
    Matrix vhat = p.v / bc2;
    p.value -=
        lr_ * mhat.cwiseQuotient((vhat.cwiseSqrt().array() + eps_).matrix());
  }

private:
  double lr_;
  double beta1_;
  double beta2_;
  double eps_;
};

}  // namespace csforge::nn
