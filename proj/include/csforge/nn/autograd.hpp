#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "csforge/error.hpp"

namespace csforge::nn {

using Matrix = Eigen::MatrixXd;

// One value in the computation graph. Gradients accumulate in grad, which
// always matches value's shape.
struct Node {
  Matrix value;
  Matrix grad;
  bool needs_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;

  explicit Node(Matrix v, bool ng) : value(std::move(v)), needs_grad(ng) {
    grad = Matrix::Zero(value.rows(), value.cols());
  }
};

using NodePtr = std::shared_ptr<Node>;

// Records nodes in creation order, which is a valid topological order, so
// reverse iteration back-propagates correctly. One tape per training step.
class Tape {
public:
  NodePtr leaf(Matrix v, bool needs_grad = false) {
    auto n = std::make_shared<Node>(std::move(v), needs_grad);
    nodes_.push_back(n);
    return n;
  }

  NodePtr make(Matrix v, std::vector<NodePtr> parents,
               std::function<void(Node&)> backward) {
    bool ng = false;
    for (const auto& p : parents) ng = ng || p->needs_grad;
    auto n = std::make_shared<Node>(std::move(v), ng);
    if (ng) {
      n->parents = std::move(parents);
      n->backward = std::move(backward);
    }
    nodes_.push_back(n);
    return n;
  }

  void backward(const NodePtr& loss) {
    if (loss->value.size() != 1)
      throw ConfigError("backward target must be a scalar node");
    loss->grad(0, 0) = 1.0;
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
      Node& n = **it;
      if (n.needs_grad && n.backward) n.backward(n);
    }
  }

  std::size_t size() const { return nodes_.size(); }

private:
  std::vector<NodePtr> nodes_;
};

inline NodePtr add(Tape& t, const NodePtr& a, const NodePtr& b) {
  return t.make(a->value + b->value, {a, b}, [a, b](Node& out) {
    if (a->needs_grad) a->grad += out.grad;
    if (b->needs_grad) b->grad += out.grad;
  });
}

// Adds a 1 x d row vector to every row of a (n x d).
inline NodePtr add_rowvec(Tape& t, const NodePtr& a, const NodePtr& b) {
  Matrix v = a->value.rowwise() + b->value.row(0);
  return t.make(std::move(v), {a, b}, [a, b](Node& out) {
    if (a->needs_grad) a->grad += out.grad;
    if (b->needs_grad) b->grad.row(0) += out.grad.colwise().sum();
  });
}

inline NodePtr add_const(Tape& t, const NodePtr& a, const Matrix& c) {
  return t.make(a->value + c, {a}, [a](Node& out) {
    if (a->needs_grad) a->grad += out.grad;
  });
}

inline NodePtr scale(Tape& t, const NodePtr& a, double s) {
  return t.make(a->value * s, {a}, [a, s](Node& out) {
    if (a->needs_grad) a->grad += s * out.grad;
  });
}

inline NodePtr matmul(Tape& t, const NodePtr& a, const NodePtr& b) {
  return t.make(a->value * b->value, {a, b}, [a, b](Node& out) {
    if (a->needs_grad) a->grad += out.grad * b->value.transpose();
    if (b->needs_grad) b->grad += a->value.transpose() * out.grad;
  });
}

// a * b^T without materializing a transpose node.
inline NodePtr matmul_nt(Tape& t, const NodePtr& a, const NodePtr& b) {
  return t.make(a->value * b->value.transpose(), {a, b}, [a, b](Node& out) {
    if (a->needs_grad) a->grad += out.grad * b->value;
    if (b->needs_grad) b->grad += out.grad.transpose() * a->value;
  });
}

inline NodePtr relu(Tape& t, const NodePtr& a) {
  return t.make(a->value.cwiseMax(0.0), {a}, [a](Node& out) {
    if (!a->needs_grad) return;
    a->grad += (a->value.array() > 0.0).cast<double>().matrix().cwiseProduct(
        out.grad);
  });
}

inline NodePtr softmax_rows(Tape& t, const NodePtr& a) {
  Matrix y(a->value.rows(), a->value.cols());
  for (Eigen::Index r = 0; r < a->value.rows(); ++r) {
    const double mx = a->value.row(r).maxCoeff();
    Eigen::ArrayXd e = (a->value.row(r).array() - mx).exp();
    y.row(r) = (e / e.sum()).matrix();
  }
  return t.make(std::move(y), {a}, [a](Node& out) {
    if (!a->needs_grad) return;
    for (Eigen::Index r = 0; r < out.value.rows(); ++r) {
      const auto yr = out.value.row(r).array();
      const auto gr = out.grad.row(r).array();
      const double dot = (gr * yr).sum();
      a->grad.row(r) += ((gr - dot) * yr).matrix();
    }
  });
}

// Row-wise layer norm with learned gain and bias (both 1 x d).
inline NodePtr layer_norm(Tape& t, const NodePtr& x, const NodePtr& gain,
                          const NodePtr& bias, double eps = 1e-6) {
  const Eigen::Index n = x->value.rows();
  const Eigen::Index d = x->value.cols();
  Matrix xhat(n, d);
  Eigen::VectorXd inv_std(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const double mu = x->value.row(r).mean();
    const double var = (x->value.row(r).array() - mu).square().mean();
    inv_std(r) = 1.0 / std::sqrt(var + eps);
    xhat.row(r) = ((x->value.row(r).array() - mu) * inv_std(r)).matrix();
  }
  Matrix y =
      (xhat.array().rowwise() * gain->value.row(0).array()).matrix().rowwise() +
      bias->value.row(0);
  auto xh = std::make_shared<Matrix>(std::move(xhat));
  auto is = std::make_shared<Eigen::VectorXd>(std::move(inv_std));
  return t.make(std::move(y), {x, gain, bias},
                [x, gain, bias, xh, is](Node& out) {
    if (bias->needs_grad) bias->grad.row(0) += out.grad.colwise().sum();
    if (gain->needs_grad)
      gain->grad.row(0) += out.grad.cwiseProduct(*xh).colwise().sum();
    if (!x->needs_grad) return;
    for (Eigen::Index r = 0; r < x->value.rows(); ++r) {
      Eigen::RowVectorXd dxhat =
          (out.grad.row(r).array() * gain->value.row(0).array()).matrix();
      const double mean_dxhat = dxhat.mean();
      const double mean_dxhat_xhat =
          (dxhat.array() * xh->row(r).array()).mean();
      x->grad.row(r) +=
          ((*is)(r) * (dxhat.array() - mean_dxhat -
                       xh->row(r).array() * mean_dxhat_xhat))
              .matrix();
    }
  });
}

// Gathers embedding rows for the id sequence; backward scatter-adds.
inline NodePtr embedding_rows(Tape& t, const NodePtr& table,
                              const std::vector<std::size_t>& ids) {
  Matrix v(static_cast<Eigen::Index>(ids.size()), table->value.cols());
  for (std::size_t i = 0; i < ids.size(); ++i)
    v.row(static_cast<Eigen::Index>(i)) =
        table->value.row(static_cast<Eigen::Index>(ids[i]));
  return t.make(std::move(v), {table}, [table, ids](Node& out) {
    if (!table->needs_grad) return;
    for (std::size_t i = 0; i < ids.size(); ++i)
      table->grad.row(static_cast<Eigen::Index>(ids[i])) +=
          out.grad.row(static_cast<Eigen::Index>(i));
  });
}

inline NodePtr slice_cols(Tape& t, const NodePtr& a, Eigen::Index start,
                          Eigen::Index len) {
  Matrix v = a->value.middleCols(start, len);
  return t.make(std::move(v), {a}, [a, start, len](Node& out) {
    if (a->needs_grad) a->grad.middleCols(start, len) += out.grad;
  });
}

inline NodePtr concat_cols(Tape& t, const std::vector<NodePtr>& parts) {
  Eigen::Index cols = 0;
  for (const auto& p : parts) cols += p->value.cols();
  Matrix v(parts.front()->value.rows(), cols);
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    v.middleCols(at, p->value.cols()) = p->value;
    at += p->value.cols();
  }
  return t.make(std::move(v), parts, [parts](Node& out) {
    Eigen::Index at = 0;
    for (const auto& p : parts) {
      if (p->needs_grad)
        p->grad += out.grad.middleCols(at, p->value.cols());
      at += p->value.cols();
    }
  });
}

inline NodePtr sum_all(Tape& t, const NodePtr& a) {
  Matrix v(1, 1);
  v(0, 0) = a->value.sum();
  return t.make(std::move(v), {a}, [a](Node& out) {
    if (a->needs_grad)
      a->grad.array() += out.grad(0, 0);
  });
}

// Scalar sum of a (.) weights, for probing intermediate matrices.
inline NodePtr weighted_sum(Tape& t, const NodePtr& a, const Matrix& w) {
  Matrix v(1, 1);
  v(0, 0) = a->value.cwiseProduct(w).sum();
  return t.make(std::move(v), {a}, [a, w](Node& out) {
    if (a->needs_grad) a->grad += out.grad(0, 0) * w;
  });
}

// Sum over rows of -log softmax(logits)[target]; returns a 1 x 1 node.
inline NodePtr cross_entropy_sum(Tape& t, const NodePtr& logits,
                                 const std::vector<std::size_t>& targets) {
  if (static_cast<std::size_t>(logits->value.rows()) != targets.size())
    throw ConfigError("cross_entropy_sum: row/target count mismatch");
  const Eigen::Index n = logits->value.rows();
  Matrix probs(n, logits->value.cols());
  double total = 0.0;
  for (Eigen::Index r = 0; r < n; ++r) {
    const double mx = logits->value.row(r).maxCoeff();
    Eigen::ArrayXd e = (logits->value.row(r).array() - mx).exp();
    const double z = e.sum();
    probs.row(r) = (e / z).matrix();
    const double log_p =
        logits->value(r, static_cast<Eigen::Index>(targets[r])) - mx -
        std::log(z);
    total -= log_p;
  }
  auto pr = std::make_shared<Matrix>(std::move(probs));
  Matrix v(1, 1);
  v(0, 0) = total;
  return t.make(std::move(v), {logits}, [logits, pr, targets](Node& out) {
    if (!logits->needs_grad) return;
    const double g = out.grad(0, 0);
    Matrix d = *pr;
    for (Eigen::Index r = 0; r < d.rows(); ++r)
      d(r, static_cast<Eigen::Index>(targets[r])) -= 1.0;
    logits->grad += g * d;
  });
}

}  // namespace csforge::nn
