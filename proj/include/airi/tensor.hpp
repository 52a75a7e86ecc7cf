// Copyright 2026 The AIRI Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Dense row-major tensors with reverse-mode automatic differentiation.
//
// A tensor is a handle to a graph node. Ops record their inputs and a
// backward closure when any input requires gradients and grad mode is on.
// The network runs in float; BasicTensor<double> exists for gradient checks.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <string>
#include <type_traits>
#include <unordered_set>
#include <vector>

#include <Eigen/Core>

#include "airi/error.hpp"
#include "airi/rng.hpp"

namespace airi {

using Shape = std::vector<int>;

inline std::size_t shape_numel(const Shape& s) {
  std::size_t n = 1;
  for (int d : s) n *= static_cast<std::size_t>(d);
  return n;
}

inline std::string shape_str(const Shape& s) {
  std::string out = "[";
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (i) out += ", ";
    out += std::to_string(s[i]);
  }
  return out + "]";
}

namespace detail {
inline thread_local bool grad_enabled = true;
}

// Disables graph recording on this thread for its lifetime.
class NoGradGuard {
 public:
  NoGradGuard() : previous_(detail::grad_enabled) { detail::grad_enabled = false; }
  ~NoGradGuard() { detail::grad_enabled = previous_; }
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

template <class T>
struct Node {
  Shape shape;
  std::vector<T> value;
  std::vector<T> grad;
  bool requires_grad = false;
  std::vector<std::shared_ptr<Node>> parents;
  // Reads this node's grad and accumulates into the parents' grads.
  std::function<void(Node&)> backward;
  const char* op = "leaf";

  void ensure_grad() {
    if (grad.size() != value.size()) grad.assign(value.size(), T(0));
  }
};

template <class T>
class BasicTensor {
 public:
  using NodePtr = std::shared_ptr<Node<T>>;

  BasicTensor() = default;
  explicit BasicTensor(NodePtr node) : node_(std::move(node)) {}

  static BasicTensor from_vector(Shape shape, std::vector<T> values, bool requires_grad = false) {
    if (shape_numel(shape) != values.size()) {
      throw ShapeError("tensor data length " + std::to_string(values.size()) +
                       " does not match shape " + shape_str(shape));
    }
    auto n = std::make_shared<Node<T>>();
    n->shape = std::move(shape);
    n->value = std::move(values);
    n->requires_grad = requires_grad;
    return BasicTensor(std::move(n));
  }
  static BasicTensor full(Shape shape, T v, bool requires_grad = false) {
    const std::size_t n = shape_numel(shape);
    return from_vector(std::move(shape), std::vector<T>(n, v), requires_grad);
  }
  static BasicTensor zeros(Shape shape, bool requires_grad = false) {
    return full(std::move(shape), T(0), requires_grad);
  }
  static BasicTensor scalar(T v, bool requires_grad = false) { return full({}, v, requires_grad); }

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  int ndim() const { return static_cast<int>(node_->shape.size()); }
  int dim(int axis) const { return node_->shape[normalize_axis(axis)]; }
  std::size_t numel() const { return node_->value.size(); }
  int normalize_axis(int axis) const {
    const int nd = ndim();
    if (axis < 0) axis += nd;
    if (axis < 0 || axis >= nd) throw ShapeError("axis out of range for shape " + shape_str(shape()));
    return axis;
  }

  const std::vector<T>& data() const { return node_->value; }
  std::vector<T>& mutable_data() const { return node_->value; }
  T item() const {
    if (numel() != 1) throw ShapeError("item() on tensor of shape " + shape_str(shape()));
    return node_->value[0];
  }

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool on) const { node_->requires_grad = on; }
  // Gradient buffer; zeros when nothing has been accumulated.
  const std::vector<T>& grad() const {
    node_->ensure_grad();
    return node_->grad;
  }
  std::vector<T>& mutable_grad() const {
    node_->ensure_grad();
    return node_->grad;
  }
  void zero_grad() const { std::fill(node_->grad.begin(), node_->grad.end(), T(0)); }

  // A new leaf sharing no graph history.
  BasicTensor detach() const { return from_vector(shape(), data(), false); }

  template <class U>
  BasicTensor<U> cast(bool requires_grad = false) const {
    std::vector<U> out(numel());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<U>(data()[i]);
    return BasicTensor<U>::from_vector(shape(), std::move(out), requires_grad);
  }

  const NodePtr& node() const { return node_; }

 private:
  NodePtr node_;
};

using Tensor = BasicTensor<float>;

namespace detail {

// Builds the result node; the graph edge is only kept when gradients can flow.
template <class T>
BasicTensor<T> make_result(Shape shape, std::vector<T> value,
                           std::vector<std::shared_ptr<Node<T>>> parents,
                           std::function<void(Node<T>&)> backward, const char* op) {
  auto n = std::make_shared<Node<T>>();
  n->shape = std::move(shape);
  n->value = std::move(value);
  n->op = op;
  bool needs = false;
  if (grad_enabled) {
    for (const auto& p : parents) needs = needs || p->requires_grad;
  }
  if (needs) {
    n->requires_grad = true;
    n->parents = std::move(parents);
    n->backward = std::move(backward);
  }
  return BasicTensor<T>(std::move(n));
}

template <class T>
using RowMatrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class T>
using MapMatrix = Eigen::Map<RowMatrix<T>>;
template <class T>
using ConstMapMatrix = Eigen::Map<const RowMatrix<T>>;

// out[m, n] = x[m, k] w[k, n]. Each output row depends only on its own input
// row and is accumulated in increasing k, so a row's value does not depend on
// its position or on the other rows (duplicates and padding are exact).
// Zero inputs are skipped, which makes one-hot operands cheap.
template <class T>
void rowwise_gemm(const T* __restrict x, const T* __restrict w, T* __restrict out, int m, int k, int n) {
  for (int i = 0; i < m; ++i) {
    T* o = out + static_cast<std::size_t>(i) * n;
    std::fill(o, o + n, T(0));
    const T* xi = x + static_cast<std::size_t>(i) * k;
    for (int kk = 0; kk < k; ++kk) {
      const T a = xi[kk];
      if (a == T(0)) continue;
      const T* wk = w + static_cast<std::size_t>(kk) * n;
      for (int j = 0; j < n; ++j) o[j] += a * wk[j];
    }
  }
}

inline Shape broadcast_shape(const Shape& a, const Shape& b) {
  const std::size_t nd = std::max(a.size(), b.size());
  Shape out(nd);
  for (std::size_t i = 0; i < nd; ++i) {
    const int da = i < nd - a.size() ? 1 : a[i - (nd - a.size())];
    const int db = i < nd - b.size() ? 1 : b[i - (nd - b.size())];
    if (da != db && da != 1 && db != 1) {
      throw ShapeError("cannot broadcast " + shape_str(a) + " with " + shape_str(b));
    }
    out[i] = da == 1 ? db : da;
  }
  return out;
}

// Strides of `in` laid over `out`, zero along broadcast dimensions.
inline std::vector<std::size_t> broadcast_strides(const Shape& in, const Shape& out) {
  std::vector<std::size_t> strides(out.size(), 0);
  std::size_t s = 1;
  for (int i = static_cast<int>(in.size()) - 1; i >= 0; --i) {
    const int o = i + static_cast<int>(out.size() - in.size());
    strides[o] = in[i] == 1 ? 0 : s;
    s *= static_cast<std::size_t>(in[i]);
  }
  return strides;
}

// Calls f(out_index, a_index, b_index) for every output element.
template <class F>
void for_each_broadcast(const Shape& out, const std::vector<std::size_t>& sa,
                        const std::vector<std::size_t>& sb, F&& f) {
  const int nd = static_cast<int>(out.size());
  if (nd == 0) {
    f(std::size_t{0}, std::size_t{0}, std::size_t{0});
    return;
  }
  const std::size_t total = shape_numel(out);
  if (total == 0) return;
  const std::size_t inner = static_cast<std::size_t>(out[nd - 1]);
  const std::size_t ia_step = sa[nd - 1], ib_step = sb[nd - 1];
  std::vector<int> idx(nd, 0);
  std::size_t ia = 0, ib = 0;
  for (std::size_t o = 0; o < total; o += inner) {
    for (std::size_t k = 0; k < inner; ++k) f(o + k, ia + k * ia_step, ib + k * ib_step);
    // advance the odometer over the outer dimensions
    for (int d = nd - 2; d >= 0; --d) {
      ++idx[d];
      ia += sa[d];
      ib += sb[d];
      if (idx[d] < out[d]) break;
      ia -= sa[d] * static_cast<std::size_t>(out[d]);
      ib -= sb[d] * static_cast<std::size_t>(out[d]);
      idx[d] = 0;
    }
  }
}

// Splits `shape` around `axis` into outer x len x inner.
inline void split_axis(const Shape& shape, int axis, std::size_t& outer, std::size_t& len,
                       std::size_t& inner) {
  outer = 1;
  inner = 1;
  for (int i = 0; i < axis; ++i) outer *= static_cast<std::size_t>(shape[i]);
  len = static_cast<std::size_t>(shape[axis]);
  for (std::size_t i = axis + 1; i < shape.size(); ++i) inner *= static_cast<std::size_t>(shape[i]);
}

// Sums of more than this many elements accumulate in double.
inline constexpr std::size_t kWideSumThreshold = 4096;

template <class T, class Get>
T reduce_sum(std::size_t n, Get&& get) {
  if (std::is_same_v<T, float> && n > kWideSumThreshold) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += static_cast<double>(get(i));
    return static_cast<T>(acc);
  }
  T acc = T(0);
  for (std::size_t i = 0; i < n; ++i) acc += get(i);
  return acc;
}

template <class T, class Fwd, class Bwd>
BasicTensor<T> binary_op(const BasicTensor<T>& a, const BasicTensor<T>& b, Fwd fwd, Bwd bwd,
                         const char* name) {
  const Shape out_shape = broadcast_shape(a.shape(), b.shape());
  const auto sa = broadcast_strides(a.shape(), out_shape);
  const auto sb = broadcast_strides(b.shape(), out_shape);
  std::vector<T> out(shape_numel(out_shape));
  const T* av = a.data().data();
  const T* bv = b.data().data();
  for_each_broadcast(out_shape, sa, sb,
                     [&](std::size_t o, std::size_t i, std::size_t j) { out[o] = fwd(av[i], bv[j]); });
  return make_result<T>(
      out_shape, std::move(out), {a.node(), b.node()},
      [out_shape, sa, sb, bwd](Node<T>& self) {
        auto& pa = *self.parents[0];
        auto& pb = *self.parents[1];
        if (pa.requires_grad) pa.ensure_grad();
        if (pb.requires_grad) pb.ensure_grad();
        const T* g = self.grad.data();
        for_each_broadcast(out_shape, sa, sb, [&](std::size_t o, std::size_t i, std::size_t j) {
          T da, db;
          bwd(pa.value[i], pb.value[j], g[o], da, db);
          if (pa.requires_grad) pa.grad[i] += da;
          if (pb.requires_grad) pb.grad[j] += db;
        });
      },
      name);
}

template <class T, class Fwd, class Bwd>
BasicTensor<T> unary_op(const BasicTensor<T>& x, Fwd fwd, Bwd bwd, const char* name) {
  std::vector<T> out(x.numel());
  const T* xv = x.data().data();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(xv[i]);
  return make_result<T>(
      x.shape(), std::move(out), {x.node()},
      [bwd](Node<T>& self) {
        auto& p = *self.parents[0];
        p.ensure_grad();
        for (std::size_t i = 0; i < p.value.size(); ++i) {
          p.grad[i] += bwd(p.value[i], self.value[i]) * self.grad[i];
        }
      },
      name);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Elementwise

template <class T>
BasicTensor<T> add(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  return detail::binary_op(
      a, b, [](T x, T y) { return x + y; },
      [](T, T, T g, T& da, T& db) {
        da = g;
        db = g;
      },
      "add");
}

template <class T>
BasicTensor<T> sub(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  return detail::binary_op(
      a, b, [](T x, T y) { return x - y; },
      [](T, T, T g, T& da, T& db) {
        da = g;
        db = -g;
      },
      "sub");
}

template <class T>
BasicTensor<T> mul(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  return detail::binary_op(
      a, b, [](T x, T y) { return x * y; },
      [](T x, T y, T g, T& da, T& db) {
        da = g * y;
        db = g * x;
      },
      "mul");
}

template <class T>
BasicTensor<T> scale(const BasicTensor<T>& x, T s) {
  return detail::unary_op(
      x, [s](T v) { return v * s; }, [s](T, T) { return s; }, "scale");
}

template <class T>
BasicTensor<T> relu(const BasicTensor<T>& x) {
  return detail::unary_op(
      x, [](T v) { return v > T(0) ? v : T(0); }, [](T v, T) { return v > T(0) ? T(1) : T(0); },
      "relu");
}

template <class T>
BasicTensor<T> leaky_relu(const BasicTensor<T>& x, T slope) {
  return detail::unary_op(
      x, [slope](T v) { return v > T(0) ? v : slope * v; },
      [slope](T v, T) { return v > T(0) ? T(1) : slope; }, "leaky_relu");
}

template <class T>
BasicTensor<T> abs(const BasicTensor<T>& x) {
  return detail::unary_op(
      x, [](T v) { return std::abs(v); },
      [](T v, T) { return v > T(0) ? T(1) : (v < T(0) ? T(-1) : T(0)); }, "abs");
}

template <class T>
BasicTensor<T> square(const BasicTensor<T>& x) {
  return detail::unary_op(
      x, [](T v) { return v * v; }, [](T v, T) { return T(2) * v; }, "square");
}

// ---------------------------------------------------------------------------
// Shape manipulation

template <class T>
BasicTensor<T> reshape(const BasicTensor<T>& x, Shape shape) {
  int infer = -1;
  std::size_t known = 1;
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (shape[i] == -1) {
      if (infer >= 0) throw ShapeError("reshape: more than one inferred dimension");
      infer = static_cast<int>(i);
    } else {
      known *= static_cast<std::size_t>(shape[i]);
    }
  }
  if (infer >= 0 && known > 0) shape[infer] = static_cast<int>(x.numel() / known);
  if (shape_numel(shape) != x.numel()) {
    throw ShapeError("reshape: cannot view " + shape_str(x.shape()) + " as " + shape_str(shape));
  }
  return detail::make_result<T>(
      shape, x.data(), {x.node()},
      [](Node<T>& self) {
        auto& p = *self.parents[0];
        p.ensure_grad();
        for (std::size_t i = 0; i < p.grad.size(); ++i) p.grad[i] += self.grad[i];
      },
      "reshape");
}

template <class T>
BasicTensor<T> unsqueeze(const BasicTensor<T>& x, int axis) {
  Shape s = x.shape();
  if (axis < 0) axis += static_cast<int>(s.size()) + 1;
  if (axis < 0 || axis > static_cast<int>(s.size())) throw ShapeError("unsqueeze: axis out of range");
  s.insert(s.begin() + axis, 1);
  return reshape(x, s);
}

template <class T>
BasicTensor<T> concat(const std::vector<BasicTensor<T>>& parts, int axis) {
  if (parts.empty()) throw ShapeError("concat: no inputs");
  const int ax = parts[0].normalize_axis(axis);
  Shape out_shape = parts[0].shape();
  out_shape[ax] = 0;
  for (const auto& p : parts) {
    if (p.ndim() != static_cast<int>(out_shape.size())) throw ShapeError("concat: rank mismatch");
    for (int d = 0; d < p.ndim(); ++d) {
      if (d != ax && p.shape()[d] != parts[0].shape()[d]) {
        throw ShapeError("concat: shape mismatch " + shape_str(p.shape()) + " vs " +
                         shape_str(parts[0].shape()));
      }
    }
    out_shape[ax] += p.shape()[ax];
  }
  std::size_t outer, len, inner;
  detail::split_axis(out_shape, ax, outer, len, inner);
  std::vector<T> out(shape_numel(out_shape));
  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  for (const auto& p : parts) {
    offsets.push_back(off);
    const std::size_t plen = static_cast<std::size_t>(p.shape()[ax]) * inner;
    for (std::size_t o = 0; o < outer; ++o) {
      std::copy_n(p.data().data() + o * plen, plen, out.data() + o * len * inner + off);
    }
    off += plen;
  }
  std::vector<std::shared_ptr<Node<T>>> nodes;
  for (const auto& p : parts) nodes.push_back(p.node());
  return detail::make_result<T>(
      out_shape, std::move(out), nodes,
      [offsets, outer, len, inner](Node<T>& self) {
        for (std::size_t k = 0; k < self.parents.size(); ++k) {
          auto& p = *self.parents[k];
          if (!p.requires_grad) continue;
          p.ensure_grad();
          const std::size_t plen = p.value.size() / outer;
          for (std::size_t o = 0; o < outer; ++o) {
            const T* g = self.grad.data() + o * len * inner + offsets[k];
            T* dst = p.grad.data() + o * plen;
            for (std::size_t i = 0; i < plen; ++i) dst[i] += g[i];
          }
        }
      },
      "concat");
}

// ---------------------------------------------------------------------------
// Linear algebra

// x[..., m, k] times w[k, n].
template <class T>
BasicTensor<T> matmul(const BasicTensor<T>& x, const BasicTensor<T>& w) {
  if (w.ndim() != 2 || x.ndim() < 1 || x.shape().back() != w.shape()[0]) {
    throw ShapeError("matmul: cannot multiply " + shape_str(x.shape()) + " by " + shape_str(w.shape()));
  }
  const int k = w.shape()[0];
  const int n = w.shape()[1];
  const int m = static_cast<int>(x.numel() / static_cast<std::size_t>(k));
  Shape out_shape = x.shape();
  out_shape.back() = n;
  std::vector<T> out(static_cast<std::size_t>(m) * n);
  detail::rowwise_gemm(x.data().data(), w.data().data(), out.data(), m, k, n);
  return detail::make_result<T>(
      out_shape, std::move(out), {x.node(), w.node()},
      [m, k, n](Node<T>& self) {
        auto& px = *self.parents[0];
        auto& pw = *self.parents[1];
        const detail::ConstMapMatrix<T> g(self.grad.data(), m, n);
        if (px.requires_grad) {
          px.ensure_grad();
          detail::MapMatrix<T>(px.grad.data(), m, k).noalias() +=
              g * detail::ConstMapMatrix<T>(pw.value.data(), k, n).transpose();
        }
        if (pw.requires_grad) {
          pw.ensure_grad();
          detail::MapMatrix<T>(pw.grad.data(), k, n).noalias() +=
              detail::ConstMapMatrix<T>(px.value.data(), m, k).transpose() * g;
        }
      },
      "matmul");
}

// Batched product a[..., m, k] times b[..., k, n] with equal leading dims.
template <class T>
BasicTensor<T> bmm(const BasicTensor<T>& a, const BasicTensor<T>& b) {
  const Shape& sa = a.shape();
  const Shape& sb = b.shape();
  if (sa.size() < 2 || sa.size() != sb.size() ||
      !std::equal(sa.begin(), sa.end() - 2, sb.begin()) || sa[sa.size() - 1] != sb[sb.size() - 2]) {
    throw ShapeError("bmm: cannot multiply " + shape_str(sa) + " by " + shape_str(sb));
  }
  const int m = sa[sa.size() - 2];
  const int k = sa.back();
  const int n = sb.back();
  const std::size_t batch = shape_numel(Shape(sa.begin(), sa.end() - 2));
  Shape out_shape = sa;
  out_shape.back() = n;
  std::vector<T> out(batch * m * n);
  for (std::size_t i = 0; i < batch; ++i) {
    detail::rowwise_gemm(a.data().data() + i * m * k, b.data().data() + i * k * n, out.data() + i * m * n,
                         m, k, n);
  }
  return detail::make_result<T>(
      out_shape, std::move(out), {a.node(), b.node()},
      [batch, m, k, n](Node<T>& self) {
        auto& pa = *self.parents[0];
        auto& pb = *self.parents[1];
        if (pa.requires_grad) pa.ensure_grad();
        if (pb.requires_grad) pb.ensure_grad();
        for (std::size_t i = 0; i < batch; ++i) {
          const detail::ConstMapMatrix<T> g(self.grad.data() + i * m * n, m, n);
          if (pa.requires_grad) {
            detail::MapMatrix<T>(pa.grad.data() + i * m * k, m, k).noalias() +=
                g * detail::ConstMapMatrix<T>(pb.value.data() + i * k * n, k, n).transpose();
          }
          if (pb.requires_grad) {
            detail::MapMatrix<T>(pb.grad.data() + i * k * n, k, n).noalias() +=
                detail::ConstMapMatrix<T>(pa.value.data() + i * m * k, m, k).transpose() * g;
          }
        }
      },
      "bmm");
}

// Rows of table[V, d] selected by indices; result shape is index_shape + [d].
template <class T>
BasicTensor<T> embedding_gather(const BasicTensor<T>& table, const std::vector<int>& indices,
                                Shape index_shape) {
  if (table.ndim() != 2) throw ShapeError("embedding_gather: table must be 2-D");
  if (shape_numel(index_shape) != indices.size()) throw ShapeError("embedding_gather: index shape mismatch");
  const int vocab = table.shape()[0];
  const int d = table.shape()[1];
  for (int idx : indices) {
    if (idx < 0 || idx >= vocab) {
      throw ShapeError("embedding_gather: index " + std::to_string(idx) + " outside vocabulary of " +
                       std::to_string(vocab));
    }
  }
  std::vector<T> out(indices.size() * d);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    std::copy_n(table.data().data() + static_cast<std::size_t>(indices[i]) * d, d, out.data() + i * d);
  }
  index_shape.push_back(d);
  return detail::make_result<T>(
      index_shape, std::move(out), {table.node()},
      [indices, d](Node<T>& self) {
        auto& p = *self.parents[0];
        p.ensure_grad();
        for (std::size_t i = 0; i < indices.size(); ++i) {
          T* dst = p.grad.data() + static_cast<std::size_t>(indices[i]) * d;
          const T* g = self.grad.data() + i * d;
          for (int c = 0; c < d; ++c) dst[c] += g[c];
        }
      },
      "embedding_gather");
}

// ---------------------------------------------------------------------------
// Reductions and normalization

template <class T>
BasicTensor<T> sum(const BasicTensor<T>& x, int axis, bool keepdim = false) {
  const int ax = x.normalize_axis(axis);
  std::size_t outer, len, inner;
  detail::split_axis(x.shape(), ax, outer, len, inner);
  std::vector<T> out(outer * inner);
  const T* xv = x.data().data();
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t i = 0; i < inner; ++i) {
      const T* base = xv + o * len * inner + i;
      out[o * inner + i] = detail::reduce_sum<T>(len, [&](std::size_t j) { return base[j * inner]; });
    }
  }
  Shape out_shape = x.shape();
  if (keepdim) {
    out_shape[ax] = 1;
  } else {
    out_shape.erase(out_shape.begin() + ax);
  }
  return detail::make_result<T>(
      out_shape, std::move(out), {x.node()},
      [outer, len, inner](Node<T>& self) {
        auto& p = *self.parents[0];
        p.ensure_grad();
        for (std::size_t o = 0; o < outer; ++o) {
          for (std::size_t j = 0; j < len; ++j) {
            T* dst = p.grad.data() + (o * len + j) * inner;
            const T* g = self.grad.data() + o * inner;
            for (std::size_t i = 0; i < inner; ++i) dst[i] += g[i];
          }
        }
      },
      "sum");
}

template <class T>
BasicTensor<T> sum_all(const BasicTensor<T>& x) {
  const T* xv = x.data().data();
  const T total = detail::reduce_sum<T>(x.numel(), [&](std::size_t i) { return xv[i]; });
  return detail::make_result<T>(
      {}, {total}, {x.node()},
      [](Node<T>& self) {
        auto& p = *self.parents[0];
        p.ensure_grad();
        for (auto& g : p.grad) g += self.grad[0];
      },
      "sum_all");
}

template <class T>
BasicTensor<T> mean_all(const BasicTensor<T>& x) {
  if (x.numel() == 0) throw ShapeError("mean_all of an empty tensor");
  return scale(sum_all(x), T(1) / static_cast<T>(x.numel()));
}

// Softmax along `axis` over entries whose mask byte is nonzero. Masked
// entries get weight zero; a row with no unmasked entry is all zeros.
template <class T>
BasicTensor<T> masked_softmax(const BasicTensor<T>& logits, const std::vector<std::uint8_t>& mask,
                              int axis) {
  if (mask.size() != logits.numel()) {
    throw ShapeError("masked_softmax: mask has " + std::to_string(mask.size()) + " entries for shape " +
                     shape_str(logits.shape()));
  }
  const int ax = logits.normalize_axis(axis);
  std::size_t outer, len, inner;
  detail::split_axis(logits.shape(), ax, outer, len, inner);
  std::vector<T> out(logits.numel(), T(0));
  const T* xv = logits.data().data();
  for (std::size_t o = 0; o < outer; ++o) {
    for (std::size_t i = 0; i < inner; ++i) {
      const std::size_t base = o * len * inner + i;
      T mx = -std::numeric_limits<T>::infinity();
      for (std::size_t j = 0; j < len; ++j) {
        const std::size_t at = base + j * inner;
        if (mask[at]) mx = std::max(mx, xv[at]);
      }
      if (mx == -std::numeric_limits<T>::infinity()) continue;
      T total = T(0);
      for (std::size_t j = 0; j < len; ++j) {
        const std::size_t at = base + j * inner;
        if (!mask[at]) continue;
        out[at] = std::exp(xv[at] - mx);
        total += out[at];
      }
      for (std::size_t j = 0; j < len; ++j) out[base + j * inner] /= total;
    }
  }
  return detail::make_result<T>(
      logits.shape(), std::move(out), {logits.node()},
      [outer, len, inner](Node<T>& self) {
        auto& p = *self.parents[0];
        p.ensure_grad();
        const T* y = self.value.data();
        const T* g = self.grad.data();
        for (std::size_t o = 0; o < outer; ++o) {
          for (std::size_t i = 0; i < inner; ++i) {
            const std::size_t base = o * len * inner + i;
            T dot = T(0);
            for (std::size_t j = 0; j < len; ++j) dot += y[base + j * inner] * g[base + j * inner];
            for (std::size_t j = 0; j < len; ++j) {
              const std::size_t at = base + j * inner;
              p.grad[at] += y[at] * (g[at] - dot);
            }
          }
        }
      },
      "masked_softmax");
}

// Inverted dropout: at train time each element is zeroed with probability p
// and survivors are scaled by 1/(1-p). Identity when not training or p == 0.
template <class T>
BasicTensor<T> dropout(const BasicTensor<T>& x, double p, bool training, Rng& rng) {
  if (!(p >= 0.0 && p < 1.0)) throw Error("dropout probability must lie in [0, 1)");
  if (!training || p == 0.0) return x;
  const T keep_scale = static_cast<T>(1.0 / (1.0 - p));
  std::vector<T> factor(x.numel());
  for (auto& f : factor) f = rng.uniform() < p ? T(0) : keep_scale;
  std::vector<T> out(x.numel());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = x.data()[i] * factor[i];
  return detail::make_result<T>(
      x.shape(), std::move(out), {x.node()},
      [factor = std::move(factor)](Node<T>& self) {
        auto& px = *self.parents[0];
        px.ensure_grad();
        for (std::size_t i = 0; i < factor.size(); ++i) px.grad[i] += self.grad[i] * factor[i];
      },
      "dropout");
}

// ---------------------------------------------------------------------------
// Backward

// Nodes reachable from a root in topological order (inputs before outputs).
template <class T>
class Tape {
 public:
  explicit Tape(const BasicTensor<T>& root) : root_(root.node()) {
    std::unordered_set<Node<T>*> seen;
    // iterative post-order DFS
    std::vector<std::pair<Node<T>*, std::size_t>> stack;
    if (root_->requires_grad) {
      stack.emplace_back(root_.get(), 0);
      seen.insert(root_.get());
    }
    while (!stack.empty()) {
      auto& [n, next] = stack.back();
      if (next < n->parents.size()) {
        Node<T>* p = n->parents[next++].get();
        if (p->requires_grad && seen.insert(p).second) stack.emplace_back(p, 0);
      } else {
        order_.push_back(n);
        stack.pop_back();
      }
    }
  }

  const std::vector<Node<T>*>& order() const { return order_; }

  // Seeds d root / d root = 1 and runs every backward closure once, from
  // the root towards the leaves. Intermediate gradients are released.
  void backward() {
    if (root_->value.size() != 1) {
      throw ShapeError("backward: loss must be a scalar, got shape " + shape_str(root_->shape));
    }
    if (order_.empty()) return;
    root_->ensure_grad();
    root_->grad[0] += T(1);
    for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
      Node<T>* n = *it;
      if (!n->backward) continue;
      n->ensure_grad();
      n->backward(*n);
      std::vector<T>().swap(n->grad);
    }
  }

 private:
  std::shared_ptr<Node<T>> root_;
  std::vector<Node<T>*> order_;
};

template <class T>
void backward(const BasicTensor<T>& loss) {
  Tape<T>(loss).backward();
}

// ---------------------------------------------------------------------------
// Gradient checking

// Max over leaf components of |analytic - central difference| /
// (|central difference| + 1e-6). f must be deterministic.
template <class T>
double finite_diff_check(const std::function<BasicTensor<T>()>& f,
                         const std::vector<BasicTensor<T>>& leaves, double eps) {
  for (const auto& leaf : leaves) {
    leaf.set_requires_grad(true);
    leaf.mutable_grad();
    leaf.zero_grad();
  }
  {
    const BasicTensor<T> loss = f();
    backward(loss);
  }
  double worst = 0.0;
  NoGradGuard no_grad;
  for (const auto& leaf : leaves) {
    const std::vector<T> analytic = leaf.grad();
    auto& values = leaf.mutable_data();
    for (std::size_t i = 0; i < values.size(); ++i) {
      const T saved = values[i];
      values[i] = saved + static_cast<T>(eps);
      const double up = static_cast<double>(f().item());
      values[i] = saved - static_cast<T>(eps);
      const double down = static_cast<double>(f().item());
      values[i] = saved;
      const double central = (up - down) / (2.0 * eps);
      const double err = std::abs(static_cast<double>(analytic[i]) - central) / (std::abs(central) + 1e-6);
      worst = std::max(worst, err);
    }
  }
  return worst;
}

template <class T>
double finite_diff_check(const std::function<BasicTensor<T>(const BasicTensor<T>&)>& f,
                         const BasicTensor<T>& x, double eps) {
  return finite_diff_check<T>(std::function<BasicTensor<T>()>([&] { return f(x); }), {x}, eps);
}

}  // namespace airi
