#ifndef DISCO_TENSOR_HPP
#define DISCO_TENSOR_HPP

// Dense row-major float64 tensors with tape-free reverse-mode autodiff.
//
// A Tensor is a shared handle to a node holding a value, an optional
// gradient and, for results of differentiable ops, links to its parents
// plus a closure that pushes the node's gradient into them. backward()
// topologically sorts the nodes reachable from a scalar loss and runs each
// closure once, in reverse order. Leaves (parameters) accumulate gradients
// across calls until zero_grad().

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "disco/error.hpp"
#include "disco/random.hpp"

namespace disco::ad {

using Shape = std::vector<std::size_t>;

inline std::size_t numel(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

inline std::string shape_str(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

namespace detail {

struct Node {
  Shape shape;
  std::vector<double> value;
  std::vector<double> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward;
};

inline bool& grad_mode() {
  thread_local bool enabled = true;
  return enabled;
}

}  // namespace detail

// Disables graph recording on this thread for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard() : previous_(detail::grad_mode()) { detail::grad_mode() = false; }
  ~NoGradGuard() { detail::grad_mode() = previous_; }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

inline bool grad_enabled() { return detail::grad_mode(); }

class Tensor {
 public:
  Tensor() = default;

  static Tensor from(Shape shape, std::vector<double> values, bool requires_grad = false) {
    if (numel(shape) != values.size()) {
      throw DimensionError("tensor data of length " + std::to_string(values.size()) + " does not fit shape " +
                           shape_str(shape));
    }
    auto node = std::make_shared<detail::Node>();
    node->shape = std::move(shape);
    node->value = std::move(values);
    node->requires_grad = requires_grad;
    if (requires_grad) node->grad.assign(node->value.size(), 0.0);
    return Tensor(std::move(node));
  }

  static Tensor zeros(Shape shape, bool requires_grad = false) {
    std::vector<double> v(numel(shape), 0.0);
    return from(std::move(shape), std::move(v), requires_grad);
  }

  static Tensor scalar(double v) { return from({1}, {v}); }

  static Tensor vector(std::vector<double> v) {
    Shape s{v.size()};
    return from(std::move(s), std::move(v));
  }

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t dim(std::size_t i) const { return node_->shape.at(i); }
  std::size_t size() const { return node_->value.size(); }

  std::span<const double> data() const { return node_->value; }
  std::span<double> mutable_data() { return node_->value; }
  double operator[](std::size_t i) const { return node_->value[i]; }

  double item() const {
    if (size() != 1) throw UsageError("item() on tensor of shape " + shape_str(shape()));
    return node_->value[0];
  }

  bool requires_grad() const { return node_->requires_grad; }
  std::span<const double> grad() const { return node_->grad; }
  std::span<double> mutable_grad() { return node_->grad; }

  void zero_grad() { std::fill(node_->grad.begin(), node_->grad.end(), 0.0); }

  // Values copied into a fresh leaf without history.
  Tensor detach(bool requires_grad = false) const { return from(shape(), node_->value, requires_grad); }

  void backward() const;

  const std::shared_ptr<detail::Node>& node() const { return node_; }

 private:
  explicit Tensor(std::shared_ptr<detail::Node> node) : node_(std::move(node)) {}

  friend Tensor make_result(Shape, std::vector<double>, const std::vector<Tensor>&, std::function<void(detail::Node&)>);

  std::shared_ptr<detail::Node> node_;
};

// Creates an op result; history is recorded only when grad mode is on and
// some parent requires a gradient.
inline Tensor make_result(Shape shape, std::vector<double> value, const std::vector<Tensor>& parents,
                          std::function<void(detail::Node&)> backward) {
  auto node = std::make_shared<detail::Node>();
  node->shape = std::move(shape);
  node->value = std::move(value);
  if (detail::grad_mode()) {
    for (const Tensor& p : parents) node->requires_grad = node->requires_grad || p.requires_grad();
  }
  if (node->requires_grad) {
    for (const Tensor& p : parents) node->parents.push_back(p.node());
    node->backward = std::move(backward);
  }
  return Tensor(std::move(node));
}

inline void Tensor::backward() const {
  if (size() != 1) throw UsageError("backward() needs a scalar loss, got shape " + shape_str(shape()));
  if (!requires_grad()) return;

  // Iterative post-order DFS: parents land before children.
  std::vector<detail::Node*> order;
  std::unordered_set<detail::Node*> visited;
  std::vector<std::pair<detail::Node*, std::size_t>> stack{{node_.get(), 0}};
  visited.insert(node_.get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      detail::Node* p = node->parents[next++].get();
      if (p->requires_grad && visited.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  for (detail::Node* n : order) {
    if (n->backward) n->grad.assign(n->value.size(), 0.0);
    else if (n->grad.size() != n->value.size()) n->grad.assign(n->value.size(), 0.0);
  }
  node_->grad[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if ((*it)->backward) (*it)->backward(**it);
  }
}

namespace detail {

inline std::vector<double>* grad_of(Node& self, std::size_t parent) {
  auto& p = self.parents[parent];
  return p->requires_grad ? &p->grad : nullptr;
}

inline void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
}

inline void require_rank(const char* op, const Tensor& a, std::size_t rank) {
  if (a.rank() != rank) {
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " + shape_str(a.shape()));
  }
}

template <typename F, typename DF>
Tensor unary(const Tensor& a, F f, DF df_from_output) {
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(a[i]);
  return make_result(a.shape(), std::move(out), {a}, [df_from_output](Node& self) {
    auto* ga = grad_of(self, 0);
    if (!ga) return;
    const auto& x = self.parents[0]->value;
    for (std::size_t i = 0; i < self.grad.size(); ++i) (*ga)[i] += self.grad[i] * df_from_output(x[i], self.value[i]);
  });
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Linear algebra

// [m,k]x[k,n] -> [m,n]; [m,k]x[k] -> [m]; [k]x[k,n] -> [n]; [k]x[k] -> [1].
inline Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.rank() < 1 || a.rank() > 2 || b.rank() < 1 || b.rank() > 2) {
    throw DimensionError("matmul: unsupported ranks " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
  const std::size_t m = a.rank() == 2 ? a.dim(0) : 1;
  const std::size_t k = a.rank() == 2 ? a.dim(1) : a.dim(0);
  const std::size_t kb = b.dim(0);
  const std::size_t n = b.rank() == 2 ? b.dim(1) : 1;
  if (k != kb) throw DimensionError("matmul: shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  Shape shape;
  if (a.rank() == 2) shape.push_back(m);
  if (b.rank() == 2) shape.push_back(n);
  if (shape.empty()) shape.push_back(1);

  std::vector<double> out(m * n, 0.0);
  const double* A = a.data().data();
  const double* B = b.data().data();
  for (std::size_t i = 0; i < m; ++i) {
    double* row = out.data() + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = A[i * k + p];
      if (av == 0.0) continue;
      const double* brow = B + p * n;
      for (std::size_t j = 0; j < n; ++j) row[j] += av * brow[j];
    }
  }
  return make_result(std::move(shape), std::move(out), {a, b}, [m, k, n](detail::Node& self) {
    const double* A = self.parents[0]->value.data();
    const double* B = self.parents[1]->value.data();
    const double* G = self.grad.data();
    if (auto* ga = detail::grad_of(self, 0)) {
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          double acc = 0.0;
          for (std::size_t j = 0; j < n; ++j) acc += G[i * n + j] * B[p * n + j];
          (*ga)[i * k + p] += acc;
        }
      }
    }
    if (auto* gb = detail::grad_of(self, 1)) {
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t p = 0; p < k; ++p) {
          const double av = A[i * k + p];
          if (av == 0.0) continue;
          for (std::size_t j = 0; j < n; ++j) (*gb)[p * n + j] += av * G[i * n + j];
        }
      }
    }
  });
}

// ---------------------------------------------------------------------------
// Elementwise

inline Tensor add(const Tensor& a, const Tensor& b) {
  detail::require_same_shape("add", a, b);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
  return make_result(a.shape(), std::move(out), {a, b}, [](detail::Node& self) {
    for (std::size_t k = 0; k < 2; ++k) {
      if (auto* g = detail::grad_of(self, k)) {
        for (std::size_t i = 0; i < self.grad.size(); ++i) (*g)[i] += self.grad[i];
      }
    }
  });
}

inline Tensor sub(const Tensor& a, const Tensor& b) {
  detail::require_same_shape("sub", a, b);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] - b[i];
  return make_result(a.shape(), std::move(out), {a, b}, [](detail::Node& self) {
    if (auto* g = detail::grad_of(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) (*g)[i] += self.grad[i];
    }
    if (auto* g = detail::grad_of(self, 1)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) (*g)[i] -= self.grad[i];
    }
  });
}

inline Tensor mul(const Tensor& a, const Tensor& b) {
  detail::require_same_shape("mul", a, b);
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] * b[i];
  return make_result(a.shape(), std::move(out), {a, b}, [](detail::Node& self) {
    const auto& x = self.parents[0]->value;
    const auto& y = self.parents[1]->value;
    if (auto* g = detail::grad_of(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) (*g)[i] += self.grad[i] * y[i];
    }
    if (auto* g = detail::grad_of(self, 1)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) (*g)[i] += self.grad[i] * x[i];
    }
  });
}

// a + b where b is a scalar or matches the trailing dimensions of a
// (e.g. a bias row added to every row of a matrix).
inline Tensor add_broadcast(const Tensor& a, const Tensor& b) {
  const bool scalar = b.size() == 1;
  const bool trailing = b.rank() <= a.rank() && std::equal(b.shape().rbegin(), b.shape().rend(), a.shape().rbegin());
  if (!scalar && !trailing) {
    throw DimensionError("add_broadcast: shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
  const std::size_t period = b.size();
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i % period];
  return make_result(a.shape(), std::move(out), {a, b}, [period](detail::Node& self) {
    if (auto* g = detail::grad_of(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) (*g)[i] += self.grad[i];
    }
    if (auto* g = detail::grad_of(self, 1)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) (*g)[i % period] += self.grad[i];
    }
  });
}

inline Tensor scale(const Tensor& a, double c) {
  return detail::unary(a, [c](double x) { return c * x; }, [c](double, double) { return c; });
}

inline Tensor tanh(const Tensor& a) {
  return detail::unary(a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

inline Tensor sigmoid(const Tensor& a) {
  return detail::unary(
      a, [](double x) { return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); },
      [](double, double y) { return y * (1.0 - y); });
}

// ELU with alpha = 1.
inline Tensor elu(const Tensor& a) {
  return detail::unary(a, [](double x) { return x > 0 ? x : std::expm1(x); },
                       [](double x, double y) { return x > 0 ? 1.0 : y + 1.0; });
}

// ---------------------------------------------------------------------------
// Structural

inline Tensor concat(const std::vector<Tensor>& parts) {
  std::vector<double> out;
  std::vector<std::size_t> sizes;
  for (const Tensor& p : parts) {
    detail::require_rank("concat", p, 1);
    out.insert(out.end(), p.data().begin(), p.data().end());
    sizes.push_back(p.size());
  }
  Shape shape{out.size()};
  return make_result(std::move(shape), std::move(out), parts, [sizes](detail::Node& self) {
    std::size_t off = 0;
    for (std::size_t k = 0; k < sizes.size(); ++k) {
      if (auto* g = detail::grad_of(self, k)) {
        for (std::size_t i = 0; i < sizes[k]; ++i) (*g)[i] += self.grad[off + i];
      }
      off += sizes[k];
    }
  });
}

// Rank-1 tensors of equal length -> matrix with one row each.
inline Tensor stack(const std::vector<Tensor>& rows) {
  if (rows.empty()) throw DimensionError("stack: no rows");
  const std::size_t d = rows.front().size();
  std::vector<double> out;
  out.reserve(rows.size() * d);
  for (const Tensor& r : rows) {
    detail::require_rank("stack", r, 1);
    if (r.size() != d) throw DimensionError("stack: row shape " + shape_str(r.shape()) + " vs [" + std::to_string(d) + "]");
    out.insert(out.end(), r.data().begin(), r.data().end());
  }
  return make_result({rows.size(), d}, std::move(out), rows, [d](detail::Node& self) {
    for (std::size_t k = 0; k < self.parents.size(); ++k) {
      if (auto* g = detail::grad_of(self, k)) {
        for (std::size_t i = 0; i < d; ++i) (*g)[i] += self.grad[k * d + i];
      }
    }
  });
}

// Row i of a matrix (embedding lookup).
inline Tensor row(const Tensor& m, std::size_t i) {
  detail::require_rank("row", m, 2);
  if (i >= m.dim(0)) throw DimensionError("row: index " + std::to_string(i) + " outside " + shape_str(m.shape()));
  const std::size_t d = m.dim(1);
  std::vector<double> out(m.data().begin() + static_cast<std::ptrdiff_t>(i * d),
                          m.data().begin() + static_cast<std::ptrdiff_t>((i + 1) * d));
  return make_result({d}, std::move(out), {m}, [i, d](detail::Node& self) {
    if (auto* g = detail::grad_of(self, 0)) {
      for (std::size_t k = 0; k < d; ++k) (*g)[i * d + k] += self.grad[k];
    }
  });
}

inline Tensor slice(const Tensor& v, std::size_t offset, std::size_t length) {
  detail::require_rank("slice", v, 1);
  if (offset + length > v.size()) {
    throw DimensionError("slice: [" + std::to_string(offset) + ", +" + std::to_string(length) + ") outside " +
                         shape_str(v.shape()));
  }
  std::vector<double> out(v.data().begin() + static_cast<std::ptrdiff_t>(offset),
                          v.data().begin() + static_cast<std::ptrdiff_t>(offset + length));
  return make_result({length}, std::move(out), {v}, [offset](detail::Node& self) {
    if (auto* g = detail::grad_of(self, 0)) {
      for (std::size_t k = 0; k < self.grad.size(); ++k) (*g)[offset + k] += self.grad[k];
    }
  });
}

inline Tensor reshape(const Tensor& t, Shape shape) {
  if (numel(shape) != t.size()) throw DimensionError("reshape: " + shape_str(t.shape()) + " vs " + shape_str(shape));
  std::vector<double> out(t.data().begin(), t.data().end());
  return make_result(std::move(shape), std::move(out), {t}, [](detail::Node& self) {
    if (auto* g = detail::grad_of(self, 0)) {
      for (std::size_t k = 0; k < self.grad.size(); ++k) (*g)[k] += self.grad[k];
    }
  });
}

// ---------------------------------------------------------------------------
// Reductions

inline Tensor sum(const Tensor& t) {
  double s = 0.0;
  for (double x : t.data()) s += x;
  return make_result({1}, {s}, {t}, [](detail::Node& self) {
    if (auto* g = detail::grad_of(self, 0)) {
      for (double& x : *g) x += self.grad[0];
    }
  });
}

// Elementwise sum of equally shaped tensors.
inline Tensor add_n(const std::vector<Tensor>& terms) {
  if (terms.empty()) throw DimensionError("add_n: no terms");
  std::vector<double> out(terms.front().size(), 0.0);
  for (const Tensor& t : terms) {
    detail::require_same_shape("add_n", terms.front(), t);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += t[i];
  }
  return make_result(terms.front().shape(), std::move(out), terms, [](detail::Node& self) {
    for (std::size_t k = 0; k < self.parents.size(); ++k) {
      if (auto* g = detail::grad_of(self, k)) {
        for (std::size_t i = 0; i < self.grad.size(); ++i) (*g)[i] += self.grad[i];
      }
    }
  });
}

inline Tensor pick(const Tensor& v, std::size_t i) {
  if (i >= v.size()) throw DimensionError("pick: index " + std::to_string(i) + " outside " + shape_str(v.shape()));
  return make_result({1}, {v[i]}, {v}, [i](detail::Node& self) {
    if (auto* g = detail::grad_of(self, 0)) (*g)[i] += self.grad[0];
  });
}

inline Tensor softmax(const Tensor& v) {
  detail::require_rank("softmax", v, 1);
  const double mx = *std::max_element(v.data().begin(), v.data().end());
  std::vector<double> out(v.size());
  double z = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) z += out[i] = std::exp(v[i] - mx);
  for (double& x : out) x /= z;
  return make_result(v.shape(), std::move(out), {v}, [](detail::Node& self) {
    if (auto* g = detail::grad_of(self, 0)) {
      double dot = 0.0;
      for (std::size_t i = 0; i < self.grad.size(); ++i) dot += self.grad[i] * self.value[i];
      for (std::size_t i = 0; i < self.grad.size(); ++i) (*g)[i] += self.value[i] * (self.grad[i] - dot);
    }
  });
}

inline Tensor log_softmax(const Tensor& v) {
  detail::require_rank("log_softmax", v, 1);
  const double mx = *std::max_element(v.data().begin(), v.data().end());
  double z = 0.0;
  for (double x : v.data()) z += std::exp(x - mx);
  const double lse = mx + std::log(z);
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = v[i] - lse;
  return make_result(v.shape(), std::move(out), {v}, [](detail::Node& self) {
    if (auto* g = detail::grad_of(self, 0)) {
      double total = 0.0;
      for (double x : self.grad) total += x;
      for (std::size_t i = 0; i < self.grad.size(); ++i) (*g)[i] += self.grad[i] - std::exp(self.value[i]) * total;
    }
  });
}

// ---------------------------------------------------------------------------
// Network building blocks

// Inverted dropout; identity when not training or rate == 0.
inline Tensor dropout(const Tensor& x, double rate, bool training, Rng& rng) {
  if (rate < 0.0 || rate >= 1.0) throw UsageError("dropout rate must be in [0, 1)");
  if (!training || rate == 0.0) return x;
  const double keep = 1.0 - rate;
  std::vector<double> mask(x.size());
  for (double& m : mask) m = rng.uniform() < keep ? 1.0 / keep : 0.0;
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x[i] * mask[i];
  return make_result(x.shape(), std::move(out), {x}, [mask = std::move(mask)](detail::Node& self) {
    if (auto* g = detail::grad_of(self, 0)) {
      for (std::size_t i = 0; i < self.grad.size(); ++i) (*g)[i] += self.grad[i] * mask[i];
    }
  });
}

// Convolution over character rows followed by max-pooling over positions.
// chars: [len, d] (already padded, len >= window); filters: [F, window*d].
// Returns [F]: for each filter the maximum response over all windows.
inline Tensor conv1d_maxpool(const Tensor& chars, const Tensor& filters, std::size_t window) {
  detail::require_rank("conv1d_maxpool", chars, 2);
  detail::require_rank("conv1d_maxpool", filters, 2);
  const std::size_t len = chars.dim(0), d = chars.dim(1), F = filters.dim(0);
  if (window == 0 || filters.dim(1) != window * d) {
    throw DimensionError("conv1d_maxpool: shape mismatch " + shape_str(chars.shape()) + " vs " + shape_str(filters.shape()) +
                         " with window " + std::to_string(window));
  }
  if (len < window) throw DimensionError("conv1d_maxpool: sequence " + shape_str(chars.shape()) + " shorter than window");
  const std::size_t width = window * d;
  const double* C = chars.data().data();
  const double* W = filters.data().data();
  std::vector<double> out(F, -std::numeric_limits<double>::infinity());
  std::vector<std::size_t> argmax(F, 0);
  for (std::size_t p = 0; p + window <= len; ++p) {
    const double* x = C + p * d;  // window rows are contiguous
    for (std::size_t f = 0; f < F; ++f) {
      double r = 0.0;
      for (std::size_t k = 0; k < width; ++k) r += W[f * width + k] * x[k];
      if (r > out[f]) {
        out[f] = r;
        argmax[f] = p;
      }
    }
  }
  return make_result({F}, std::move(out), {chars, filters},
                     [argmax = std::move(argmax), d, width](detail::Node& self) {
                       const double* C = self.parents[0]->value.data();
                       const double* W = self.parents[1]->value.data();
                       auto* gc = detail::grad_of(self, 0);
                       auto* gw = detail::grad_of(self, 1);
                       for (std::size_t f = 0; f < argmax.size(); ++f) {
                         const double g = self.grad[f];
                         const std::size_t base = argmax[f] * d;
                         for (std::size_t k = 0; k < width; ++k) {
                           if (gc) (*gc)[base + k] += g * W[f * width + k];
                           if (gw) (*gw)[f * width + k] += g * C[base + k];
                         }
                       }
                     });
}

struct LstmWeights {
  Tensor weight;  // [4H, in + H], gate blocks ordered input, forget, cell, output
  Tensor bias;    // [4H]
};

struct LstmState {
  Tensor h;
  Tensor c;
};

inline LstmState lstm_cell(const Tensor& x, const LstmState& prev, const LstmWeights& w) {
  const std::size_t H = prev.h.size();
  if (w.weight.rank() != 2 || w.weight.dim(0) != 4 * H || w.weight.dim(1) != x.size() + H) {
    throw DimensionError("lstm_cell: weight " + shape_str(w.weight.shape()) + " vs input " + shape_str(x.shape()) +
                         " and state " + shape_str(prev.h.shape()));
  }
  Tensor gates = add(matmul(w.weight, concat({x, prev.h})), w.bias);
  Tensor i = sigmoid(slice(gates, 0, H));
  Tensor f = sigmoid(slice(gates, H, H));
  Tensor g = tanh(slice(gates, 2 * H, H));
  Tensor o = sigmoid(slice(gates, 3 * H, H));
  Tensor c = add(mul(f, prev.c), mul(i, g));
  Tensor h = mul(o, tanh(c));
  return {h, c};
}

// ---------------------------------------------------------------------------
// Initialisation

// Uniform in +-sqrt(6 / (fan_in + fan_out)).
inline Tensor glorot(std::size_t rows, std::size_t cols, Rng& rng) {
  const double bound = std::sqrt(6.0 / static_cast<double>(rows + cols));
  std::vector<double> v(rows * cols);
  for (double& x : v) x = rng.uniform(-bound, bound);
  return Tensor::from({rows, cols}, std::move(v), true);
}

inline Tensor parameter_zeros(Shape shape) { return Tensor::zeros(std::move(shape), true); }

// ---------------------------------------------------------------------------
// Gradient checking

struct GradCheckOptions {
  double step = 1e-5;
  std::size_t max_coords_per_param = 0;  // 0 = every coordinate
  std::uint64_t seed = 0;
};

// Max over checked coordinates of |analytic - numeric| / max(1, |analytic| + |numeric|),
// numeric gradients by central differences. `loss` must be deterministic.
inline double grad_check(const std::function<Tensor()>& loss, std::vector<Tensor> params, const GradCheckOptions& opt = {}) {
  if (opt.step <= 0.0) throw UsageError("grad_check: step must be positive");
  for (Tensor& p : params) p.zero_grad();
  loss().backward();
  std::vector<std::vector<double>> analytic;
  for (const Tensor& p : params) analytic.emplace_back(p.grad().begin(), p.grad().end());

  Rng rng(opt.seed);
  NoGradGuard no_grad;
  double worst = 0.0;
  for (std::size_t k = 0; k < params.size(); ++k) {
    Tensor& p = params[k];
    std::vector<std::size_t> coords(p.size());
    std::iota(coords.begin(), coords.end(), std::size_t{0});
    if (opt.max_coords_per_param && coords.size() > opt.max_coords_per_param) {
      rng.shuffle(coords);
      coords.resize(opt.max_coords_per_param);
    }
    for (std::size_t c : coords) {
      double& x = p.mutable_data()[c];
      const double saved = x;
      x = saved + opt.step;
      const double up = loss().item();
      x = saved - opt.step;
      const double down = loss().item();
      x = saved;
      const double numeric = (up - down) / (2.0 * opt.step);
      const double a = analytic[k][c];
      worst = std::max(worst, std::abs(a - numeric) / std::max(1.0, std::abs(a) + std::abs(numeric)));
    }
  }
  return worst;
}

}  // namespace disco::ad

#endif  // DISCO_TENSOR_HPP
