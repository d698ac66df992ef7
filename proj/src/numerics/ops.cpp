// Copyright 2026 The SACT-NMT Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sact/numerics/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "sact/errors.hpp"

namespace sact::ops {

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMat<double>>;
using MutMap = Eigen::Map<RowMat<double>>;

struct MatView {
  const double* data;
  std::size_t rows;
  std::size_t cols;
};

MatView view(const Tensor& t) { return {t.data().data(), t.rows(), t.cols()}; }

// out (+)= op(a) * op(b). In f32 mode the product is formed in single
// precision and widened on the way out.
void gemm(const MatView& a, bool trans_a, const MatView& b, bool trans_b, double* out,
          bool accumulate, Precision precision) {
  const auto m = static_cast<Eigen::Index>(trans_a ? a.cols : a.rows);
  const auto n = static_cast<Eigen::Index>(trans_b ? b.rows : b.cols);
  MutMap c(out, m, n);
  ConstMap am(a.data, static_cast<Eigen::Index>(a.rows), static_cast<Eigen::Index>(a.cols));
  ConstMap bm(b.data, static_cast<Eigen::Index>(b.rows), static_cast<Eigen::Index>(b.cols));
  if (precision == Precision::f32) {
    const RowMat<float> af = am.cast<float>();
    const RowMat<float> bf = bm.cast<float>();
    RowMat<float> cf(m, n);
    if (trans_a && trans_b)
      cf.noalias() = af.transpose() * bf.transpose();
    else if (trans_a)
      cf.noalias() = af.transpose() * bf;
    else if (trans_b)
      cf.noalias() = af * bf.transpose();
    else
      cf.noalias() = af * bf;
    if (accumulate)
      c += cf.cast<double>();
    else
      c = cf.cast<double>();
    return;
  }
  // Products run on Eigen-owned copies: vectorised kernels round differently
  // depending on operand alignment, and results must not depend on where a
  // buffer happens to live.
  const RowMat<double> ad = am;
  const RowMat<double> bd = bm;
  RowMat<double> cd(m, n);
  if (trans_a && trans_b)
    cd.noalias() = ad.transpose() * bd.transpose();
  else if (trans_a)
    cd.noalias() = ad.transpose() * bd;
  else if (trans_b)
    cd.noalias() = ad * bd.transpose();
  else
    cd.noalias() = ad * bd;
  if (accumulate)
    c += cd;
  else
    c = cd;
}

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (!(a.shape() == b.shape()))
    throw ShapeError(std::string(op) + ": shapes " + a.shape().str() + " and " +
                     b.shape().str() + " differ");
}

void require_rank2(const char* op, const Tensor& t) {
  if (t.rank() > 2)
    throw ShapeError(std::string(op) + ": expected a matrix, got " + t.shape().str());
}

void accumulate(std::span<double> dst, std::span<const double> src) {
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

Tape& tape_of(Var v) {
  if (!v.tape) throw InvalidInput("unbound variable");
  return *v.tape;
}

}  // namespace

Var elementwise(Unary kind, Var x, double factor) {
  Tape& tape = tape_of(x);
  const Tensor& in = x.value();
  Tensor out(in.shape());
  auto src = in.data();
  auto dst = out.data();
  switch (kind) {
    case Unary::tanh:
      for (std::size_t i = 0; i < src.size(); ++i) dst[i] = std::tanh(src[i]);
      break;
    case Unary::sigmoid:
      for (std::size_t i = 0; i < src.size(); ++i) dst[i] = 1.0 / (1.0 + std::exp(-src[i]));
      break;
    case Unary::exp:
      for (std::size_t i = 0; i < src.size(); ++i) dst[i] = std::exp(src[i]);
      break;
    case Unary::log:
      for (std::size_t i = 0; i < src.size(); ++i) {
        if (!(src[i] > 0.0))
          throw DomainError("log of non-positive value " + std::to_string(src[i]));
        dst[i] = std::log(src[i]);
      }
      break;
    case Unary::scale:
      for (std::size_t i = 0; i < src.size(); ++i) dst[i] = factor * src[i];
      break;
  }
  const std::uint32_t out_id = static_cast<std::uint32_t>(tape.size());
  return tape.push(std::move(out), {x}, [x, kind, factor, out_id](Tape& t, std::span<const double> g) {
    const auto y = t.value(Var{&t, out_id}).data();
    const auto xs = t.value(x).data();
    auto gx = t.grad(x);
    switch (kind) {
      case Unary::tanh:
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * (1.0 - y[i] * y[i]);
        break;
      case Unary::sigmoid:
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * y[i] * (1.0 - y[i]);
        break;
      case Unary::exp:
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * y[i];
        break;
      case Unary::log:
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] / xs[i];
        break;
      case Unary::scale:
        for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * factor;
        break;
    }
  });
}

Var elementwise(Binary kind, Var a, Var b) {
  Tape& tape = tape_of(a);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_same_shape("elementwise", av, bv);
  Tensor out(av.shape());
  auto x = av.data();
  auto y = bv.data();
  auto z = out.data();
  switch (kind) {
    case Binary::add:
      for (std::size_t i = 0; i < z.size(); ++i) z[i] = x[i] + y[i];
      break;
    case Binary::sub:
      for (std::size_t i = 0; i < z.size(); ++i) z[i] = x[i] - y[i];
      break;
    case Binary::mul:
      for (std::size_t i = 0; i < z.size(); ++i) z[i] = x[i] * y[i];
      break;
  }
  return tape.push(std::move(out), {a, b}, [a, b, kind](Tape& t, std::span<const double> g) {
    const bool ga = t.needs_grad(a);
    const bool gb = t.needs_grad(b);
    switch (kind) {
      case Binary::add:
        if (ga) accumulate(t.grad(a), g);
        if (gb) accumulate(t.grad(b), g);
        break;
      case Binary::sub:
        if (ga) accumulate(t.grad(a), g);
        if (gb) {
          auto d = t.grad(b);
          for (std::size_t i = 0; i < g.size(); ++i) d[i] -= g[i];
        }
        break;
      case Binary::mul: {
        const auto x = t.value(a).data();
        const auto y = t.value(b).data();
        if (ga) {
          auto d = t.grad(a);
          for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i] * y[i];
        }
        if (gb) {
          auto d = t.grad(b);
          for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i] * x[i];
        }
        break;
      }
    }
  });
}

Var add_row(Var a, Var bias) {
  Tape& tape = tape_of(a);
  const Tensor& av = a.value();
  const Tensor& bv = bias.value();
  require_rank2("add_row", av);
  const std::size_t rows = av.rows();
  const std::size_t cols = av.cols();
  if (bv.size() != cols)
    throw ShapeError("add_row: bias " + bv.shape().str() + " does not match " + av.shape().str());
  Tensor out(av.shape());
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] = av[r * cols + c] + bv[c];
  return tape.push(std::move(out), {a, bias}, [a, bias, rows, cols](Tape& t, std::span<const double> g) {
    if (t.needs_grad(a)) accumulate(t.grad(a), g);
    if (t.needs_grad(bias)) {
      auto d = t.grad(bias);
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) d[c] += g[r * cols + c];
    }
  });
}

Var matmul(Var a, Var b) {
  Tape& tape = tape_of(a);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_rank2("matmul", av);
  require_rank2("matmul", bv);
  if (av.cols() != bv.rows())
    throw ShapeError("matmul: inner dimensions differ for " + av.shape().str() + " and " +
                     bv.shape().str());
  const std::size_t m = av.rows();
  const std::size_t n = bv.cols();
  Tensor out(Shape{m, n});
  gemm(view(av), false, view(bv), false, out.data().data(), false, tape.precision());
  return tape.push(std::move(out), {a, b}, [a, b, m, n](Tape& t, std::span<const double> g) {
    const MatView gv{g.data(), m, n};
    if (t.needs_grad(a))
      gemm(gv, false, view(t.value(b)), true, t.grad(a).data(), true, t.precision());
    if (t.needs_grad(b))
      gemm(view(t.value(a)), true, gv, false, t.grad(b).data(), true, t.precision());
  });
}

Var matmul_nt(Var a, Var b) {
  Tape& tape = tape_of(a);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_rank2("matmul_nt", av);
  require_rank2("matmul_nt", bv);
  if (av.cols() != bv.cols())
    throw ShapeError("matmul_nt: inner dimensions differ for " + av.shape().str() + " and " +
                     bv.shape().str() + "^T");
  const std::size_t m = av.rows();
  const std::size_t n = bv.rows();
  Tensor out(Shape{m, n});
  gemm(view(av), false, view(bv), true, out.data().data(), false, tape.precision());
  return tape.push(std::move(out), {a, b}, [a, b, m, n](Tape& t, std::span<const double> g) {
    const MatView gv{g.data(), m, n};
    if (t.needs_grad(a))
      gemm(gv, false, view(t.value(b)), false, t.grad(a).data(), true, t.precision());
    if (t.needs_grad(b))
      gemm(gv, true, view(t.value(a)), false, t.grad(b).data(), true, t.precision());
  });
}

Var sum(Var x) {
  Tape& tape = tape_of(x);
  double s = 0.0;
  for (double v : x.value().data()) s += v;
  return tape.push(Tensor::scalar(s), {x}, [x](Tape& t, std::span<const double> g) {
    auto d = t.grad(x);
    for (auto& v : d) v += g[0];
  });
}

Var softmax_with_temperature(Var logits, Var tau) {
  Tape& tape = tape_of(logits);
  const Tensor& e = logits.value();
  const Tensor& tv = tau.value();
  require_rank2("softmax_with_temperature", e);
  const std::size_t rows = e.rows();
  const std::size_t cols = e.cols();
  if (tv.size() != rows && tv.size() != 1)
    throw ShapeError("softmax_with_temperature: " + std::to_string(tv.size()) +
                     " temperatures for " + std::to_string(rows) + " rows");
  const bool shared = tv.size() == 1;
  for (double t : tv.data()) {
    if (std::isnan(t)) throw NumericError("temperature is NaN");
    if (!(t > 0.0)) throw DomainError("temperature must be positive, got " + std::to_string(t));
  }

  Tensor out(e.shape());
  // Shifted, scaled logits are kept for the temperature adjoint.
  auto shifted = std::make_shared<std::vector<double>>(e.size());
  for (std::size_t r = 0; r < rows; ++r) {
    const double t = tv[shared ? 0 : r];
    const double* row = &e[r * cols];
    const double mx = *std::max_element(row, row + cols);
    double z = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      const double s = (row[c] - mx) / t;
      (*shifted)[r * cols + c] = s;
      const double p = std::exp(s);
      out[r * cols + c] = p;
      z += p;
    }
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] /= z;
  }
  const std::uint32_t out_id = static_cast<std::uint32_t>(tape.size());
  return tape.push(std::move(out), {logits, tau},
                   [logits, tau, rows, cols, shared, shifted, out_id](Tape& t, std::span<const double> g) {
                     const auto p = t.value(Var{&t, out_id}).data();
                     const auto taus = t.value(tau).data();
                     const bool ge = t.needs_grad(logits);
                     const bool gt = t.needs_grad(tau);
                     std::span<double> de = ge ? t.grad(logits) : std::span<double>{};
                     std::span<double> dtau = gt ? t.grad(tau) : std::span<double>{};
                     for (std::size_t r = 0; r < rows; ++r) {
                       const double tr = taus[shared ? 0 : r];
                       double dot = 0.0;
                       for (std::size_t c = 0; c < cols; ++c) dot += p[r * cols + c] * g[r * cols + c];
                       double acc_tau = 0.0;
                       for (std::size_t c = 0; c < cols; ++c) {
                         const std::size_t k = r * cols + c;
                         const double dz = p[k] * (g[k] - dot);
                         if (ge) de[k] += dz / tr;
                         if (gt && dz != 0.0) acc_tau -= dz * (*shifted)[k] / tr;
                       }
                       if (gt) dtau[shared ? 0 : r] += acc_tau;
                     }
                   });
}

Var softmax(Var logits) {
  Tape& tape = tape_of(logits);
  const Tensor& e = logits.value();
  require_rank2("softmax", e);
  const std::size_t rows = e.rows();
  const std::size_t cols = e.cols();
  Tensor out(e.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const double* row = &e[r * cols];
    const double mx = *std::max_element(row, row + cols);
    double z = 0.0;
    for (std::size_t c = 0; c < cols; ++c) {
      const double p = std::exp(row[c] - mx);
      out[r * cols + c] = p;
      z += p;
    }
    for (std::size_t c = 0; c < cols; ++c) out[r * cols + c] /= z;
  }
  const std::uint32_t out_id = static_cast<std::uint32_t>(tape.size());
  return tape.push(std::move(out), {logits}, [logits, rows, cols, out_id](Tape& t, std::span<const double> g) {
    const auto p = t.value(Var{&t, out_id}).data();
    auto de = t.grad(logits);
    for (std::size_t r = 0; r < rows; ++r) {
      double dot = 0.0;
      for (std::size_t c = 0; c < cols; ++c) dot += p[r * cols + c] * g[r * cols + c];
      for (std::size_t c = 0; c < cols; ++c) {
        const std::size_t k = r * cols + c;
        de[k] += p[k] * (g[k] - dot);
      }
    }
  });
}

Var mask_fill(Var x, std::span<const std::uint8_t> keep) {
  Tape& tape = tape_of(x);
  const Tensor& xv = x.value();
  if (keep.size() != xv.size())
    throw ShapeError("mask_fill: mask of " + std::to_string(keep.size()) + " entries for " +
                     xv.shape().str());
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = keep[i] ? xv[i] : kMaskedScore;
  std::vector<std::uint8_t> mask(keep.begin(), keep.end());
  return tape.push(std::move(out), {x}, [x, mask = std::move(mask)](Tape& t, std::span<const double> g) {
    auto d = t.grad(x);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (mask[i]) d[i] += g[i];
  });
}

Var cross_entropy(Var logits, std::span<const int> targets, std::span<const std::uint8_t> mask) {
  Tape& tape = tape_of(logits);
  const Tensor& x = logits.value();
  require_rank2("cross_entropy", x);
  const std::size_t rows = x.rows();
  const std::size_t vocab = x.cols();
  if (targets.size() != rows || mask.size() != rows)
    throw ShapeError("cross_entropy: " + std::to_string(targets.size()) + " targets and " +
                     std::to_string(mask.size()) + " mask entries for " + x.shape().str());
  std::size_t count = 0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (!mask[r]) continue;
    if (targets[r] < 0 || static_cast<std::size_t>(targets[r]) >= vocab)
      throw IndexError("cross_entropy: target id " + std::to_string(targets[r]) +
                       " outside vocabulary of " + std::to_string(vocab));
    ++count;
  }
  if (count == 0) throw InvalidInput("cross_entropy: every position is masked");

  // Row-wise probabilities are kept for the adjoint.
  auto probs = std::make_shared<std::vector<double>>(x.size(), 0.0);
  double total = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    if (!mask[r]) continue;
    const double* row = &x[r * vocab];
    const std::size_t arg = static_cast<std::size_t>(std::max_element(row, row + vocab) - row);
    const double mx = row[arg];
    double rest = 0.0;
    for (std::size_t c = 0; c < vocab; ++c) {
      const double p = std::exp(row[c] - mx);
      (*probs)[r * vocab + c] = p;
      if (c != arg) rest += p;
    }
    // log-sum-exp as mx + log1p(rest) keeps saturated rows accurate.
    const double lse = mx + std::log1p(rest);
    total += lse - row[targets[r]];
    const double z = 1.0 + rest;
    for (std::size_t c = 0; c < vocab; ++c) (*probs)[r * vocab + c] /= z;
  }
  const double loss = total / static_cast<double>(count);
  if (!std::isfinite(loss)) throw NumericError("cross_entropy: non-finite loss");

  std::vector<int> tgt(targets.begin(), targets.end());
  std::vector<std::uint8_t> msk(mask.begin(), mask.end());
  return tape.push(Tensor::scalar(loss), {logits},
                   [logits, probs, tgt = std::move(tgt), msk = std::move(msk), rows, vocab,
                    count](Tape& t, std::span<const double> g) {
                     auto d = t.grad(logits);
                     const double w = g[0] / static_cast<double>(count);
                     for (std::size_t r = 0; r < rows; ++r) {
                       if (!msk[r]) continue;
                       for (std::size_t c = 0; c < vocab; ++c)
                         d[r * vocab + c] += w * (*probs)[r * vocab + c];
                       d[r * vocab + static_cast<std::size_t>(tgt[r])] -= w;
                     }
                   });
}

Var dropout(Var x, double rate, bool training, Rng& rng) {
  if (!(rate >= 0.0 && rate < 1.0))
    throw DomainError("dropout rate must lie in [0,1), got " + std::to_string(rate));
  if (!training || rate == 0.0) return x;
  Tape& tape = tape_of(x);
  const Tensor& xv = x.value();
  const double keep_scale = 1.0 / (1.0 - rate);
  std::vector<double> mask(xv.size());
  Tensor out(xv.shape());
  for (std::size_t i = 0; i < xv.size(); ++i) {
    mask[i] = rng.uniform() >= rate ? keep_scale : 0.0;
    out[i] = xv[i] * mask[i];
  }
  return tape.push(std::move(out), {x}, [x, mask = std::move(mask)](Tape& t, std::span<const double> g) {
    auto d = t.grad(x);
    for (std::size_t i = 0; i < g.size(); ++i) d[i] += g[i] * mask[i];
  });
}

Var gather_rows(Var table, std::span<const int> ids) {
  Tape& tape = tape_of(table);
  const Tensor& tv = table.value();
  require_rank2("gather_rows", tv);
  const std::size_t vocab = tv.rows();
  const std::size_t dim = tv.cols();
  if (ids.empty()) throw InvalidInput("gather_rows: no ids");
  Tensor out(Shape{ids.size(), dim});
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] < 0 || static_cast<std::size_t>(ids[r]) >= vocab)
      throw IndexError("id " + std::to_string(ids[r]) + " outside table of " +
                       std::to_string(vocab) + " rows");
    std::copy_n(&tv[static_cast<std::size_t>(ids[r]) * dim], dim, &out[r * dim]);
  }
  std::vector<int> rows(ids.begin(), ids.end());
  return tape.push(std::move(out), {table}, [table, rows = std::move(rows), dim](Tape& t, std::span<const double> g) {
    auto d = t.grad(table);
    for (std::size_t r = 0; r < rows.size(); ++r) {
      double* dst = &d[static_cast<std::size_t>(rows[r]) * dim];
      for (std::size_t c = 0; c < dim; ++c) dst[c] += g[r * dim + c];
    }
  });
}

Var concat_cols(std::span<const Var> parts) {
  if (parts.empty()) throw InvalidInput("concat_cols: nothing to concatenate");
  Tape& tape = tape_of(parts[0]);
  const std::size_t rows = parts[0].value().rows();
  std::vector<std::size_t> widths;
  std::size_t total = 0;
  for (const Var& p : parts) {
    require_rank2("concat_cols", p.value());
    if (p.value().rows() != rows)
      throw ShapeError("concat_cols: row counts differ (" + p.value().shape().str() + ")");
    widths.push_back(p.value().cols());
    total += widths.back();
  }
  Tensor out(Shape{rows, total});
  std::size_t offset = 0;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const Tensor& pv = parts[k].value();
    for (std::size_t r = 0; r < rows; ++r)
      std::copy_n(&pv[r * widths[k]], widths[k], &out[r * total + offset]);
    offset += widths[k];
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return tape.push(std::move(out), parts,
                   [inputs, widths = std::move(widths), rows, total](Tape& t, std::span<const double> g) {
                     std::size_t off = 0;
                     for (std::size_t k = 0; k < inputs.size(); ++k) {
                       if (t.needs_grad(inputs[k])) {
                         auto d = t.grad(inputs[k]);
                         for (std::size_t r = 0; r < rows; ++r)
                           for (std::size_t c = 0; c < widths[k]; ++c)
                             d[r * widths[k] + c] += g[r * total + off + c];
                       }
                       off += widths[k];
                     }
                   });
}

Var slice_cols(Var x, std::size_t start, std::size_t width) {
  Tape& tape = tape_of(x);
  const Tensor& xv = x.value();
  require_rank2("slice_cols", xv);
  const std::size_t rows = xv.rows();
  const std::size_t cols = xv.cols();
  if (width == 0 || start + width > cols)
    throw ShapeError("slice_cols: columns [" + std::to_string(start) + ", " +
                     std::to_string(start + width) + ") outside " + xv.shape().str());
  Tensor out(Shape{rows, width});
  for (std::size_t r = 0; r < rows; ++r) std::copy_n(&xv[r * cols + start], width, &out[r * width]);
  return tape.push(std::move(out), {x}, [x, rows, cols, start, width](Tape& t, std::span<const double> g) {
    auto d = t.grad(x);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < width; ++c) d[r * cols + start + c] += g[r * width + c];
  });
}

Var concat_rows(std::span<const Var> parts) {
  if (parts.empty()) throw InvalidInput("concat_rows: nothing to concatenate");
  Tape& tape = tape_of(parts[0]);
  const std::size_t cols = parts[0].value().cols();
  std::size_t rows = 0;
  for (const Var& p : parts) {
    require_rank2("concat_rows", p.value());
    if (p.value().cols() != cols)
      throw ShapeError("concat_rows: column counts differ (" + p.value().shape().str() + ")");
    rows += p.value().rows();
  }
  Tensor out(Shape{rows, cols});
  std::size_t offset = 0;
  for (const Var& p : parts) {
    const auto src = p.value().data();
    std::copy(src.begin(), src.end(), &out[offset]);
    offset += src.size();
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return tape.push(std::move(out), parts, [inputs](Tape& t, std::span<const double> g) {
    std::size_t off = 0;
    for (const Var& in : inputs) {
      const std::size_t n = t.value(in).size();
      if (t.needs_grad(in)) accumulate(t.grad(in), g.subspan(off, n));
      off += n;
    }
  });
}

Var stack_steps(std::span<const Var> steps) {
  if (steps.empty()) throw InvalidInput("stack_steps: no steps");
  Tape& tape = tape_of(steps[0]);
  const Tensor& first = steps[0].value();
  require_rank2("stack_steps", first);
  const std::size_t batch = first.rows();
  const std::size_t dim = first.cols();
  const std::size_t n = steps.size();
  for (const Var& s : steps)
    if (s.value().rank() > 2 || s.value().rows() != batch || s.value().cols() != dim)
      throw ShapeError("stack_steps: step shapes differ (" + s.value().shape().str() + ")");
  Tensor out(Shape{batch, n, dim});
  for (std::size_t i = 0; i < n; ++i) {
    const Tensor& sv = steps[i].value();
    for (std::size_t b = 0; b < batch; ++b) std::copy_n(&sv[b * dim], dim, &out[(b * n + i) * dim]);
  }
  std::vector<Var> inputs(steps.begin(), steps.end());
  return tape.push(std::move(out), steps, [inputs, batch, n, dim](Tape& t, std::span<const double> g) {
    for (std::size_t i = 0; i < n; ++i) {
      if (!t.needs_grad(inputs[i])) continue;
      auto d = t.grad(inputs[i]);
      for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t c = 0; c < dim; ++c) d[b * dim + c] += g[(b * n + i) * dim + c];
    }
  });
}

Var select_rows(std::span<const std::uint8_t> take_a, Var a, Var b) {
  Tape& tape = tape_of(a);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  require_same_shape("select_rows", av, bv);
  require_rank2("select_rows", av);
  const std::size_t rows = av.rows();
  const std::size_t cols = av.cols();
  if (take_a.size() != rows)
    throw ShapeError("select_rows: " + std::to_string(take_a.size()) + " flags for " +
                     std::to_string(rows) + " rows");
  Tensor out(av.shape());
  for (std::size_t r = 0; r < rows; ++r)
    std::copy_n(take_a[r] ? &av[r * cols] : &bv[r * cols], cols, &out[r * cols]);
  std::vector<std::uint8_t> flags(take_a.begin(), take_a.end());
  return tape.push(std::move(out), {a, b}, [a, b, flags = std::move(flags), cols](Tape& t, std::span<const double> g) {
    const bool ga = t.needs_grad(a);
    const bool gb = t.needs_grad(b);
    for (std::size_t r = 0; r < flags.size(); ++r) {
      const Var& src = flags[r] ? a : b;
      if (!(flags[r] ? ga : gb)) continue;
      auto d = t.grad(src);
      for (std::size_t c = 0; c < cols; ++c) d[r * cols + c] += g[r * cols + c];
    }
  });
}

Var batched_dot(Var states, Var query) {
  Tape& tape = tape_of(states);
  const Tensor& h = states.value();
  const Tensor& q = query.value();
  if (h.rank() != 3)
    throw ShapeError("batched_dot: states must be [B x n x d], got " + h.shape().str());
  const std::size_t batch = h.shape()[0];
  const std::size_t n = h.shape()[1];
  const std::size_t dim = h.shape()[2];
  if (q.rows() != batch || q.cols() != dim)
    throw ShapeError("batched_dot: query " + q.shape().str() + " does not match states " +
                     h.shape().str());
  Tensor out(Shape{batch, n});
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t i = 0; i < n; ++i) {
      const double* hi = &h[(b * n + i) * dim];
      const double* qb = &q[b * dim];
      double s = 0.0;
      for (std::size_t k = 0; k < dim; ++k) s += hi[k] * qb[k];
      out[b * n + i] = s;
    }
  return tape.push(std::move(out), {states, query}, [states, query, batch, n, dim](Tape& t, std::span<const double> g) {
    const auto hv = t.value(states).data();
    const auto qv = t.value(query).data();
    if (t.needs_grad(states)) {
      auto d = t.grad(states);
      for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t i = 0; i < n; ++i) {
          const double gi = g[b * n + i];
          for (std::size_t k = 0; k < dim; ++k) d[(b * n + i) * dim + k] += gi * qv[b * dim + k];
        }
    }
    if (t.needs_grad(query)) {
      auto d = t.grad(query);
      for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t i = 0; i < n; ++i) {
          const double gi = g[b * n + i];
          for (std::size_t k = 0; k < dim; ++k) d[b * dim + k] += gi * hv[(b * n + i) * dim + k];
        }
    }
  });
}

Var batched_weighted_sum(Var states, Var weights) {
  Tape& tape = tape_of(states);
  const Tensor& h = states.value();
  const Tensor& w = weights.value();
  if (h.rank() != 3)
    throw ShapeError("batched_weighted_sum: states must be [B x n x d], got " + h.shape().str());
  const std::size_t batch = h.shape()[0];
  const std::size_t n = h.shape()[1];
  const std::size_t dim = h.shape()[2];
  if (w.rows() != batch || w.cols() != n)
    throw ShapeError("batched_weighted_sum: weights " + w.shape().str() + " do not match states " +
                     h.shape().str());
  Tensor out(Shape{batch, dim});
  for (std::size_t b = 0; b < batch; ++b)
    for (std::size_t i = 0; i < n; ++i) {
      const double wi = w[b * n + i];
      const double* hi = &h[(b * n + i) * dim];
      for (std::size_t k = 0; k < dim; ++k) out[b * dim + k] += wi * hi[k];
    }
  return tape.push(std::move(out), {states, weights}, [states, weights, batch, n, dim](Tape& t, std::span<const double> g) {
    const auto hv = t.value(states).data();
    const auto wv = t.value(weights).data();
    if (t.needs_grad(states)) {
      auto d = t.grad(states);
      for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t i = 0; i < n; ++i) {
          const double wi = wv[b * n + i];
          for (std::size_t k = 0; k < dim; ++k) d[(b * n + i) * dim + k] += wi * g[b * dim + k];
        }
    }
    if (t.needs_grad(weights)) {
      auto d = t.grad(weights);
      for (std::size_t b = 0; b < batch; ++b)
        for (std::size_t i = 0; i < n; ++i) {
          double s = 0.0;
          for (std::size_t k = 0; k < dim; ++k) s += g[b * dim + k] * hv[(b * n + i) * dim + k];
          d[b * n + i] += s;
        }
    }
  });
}

}  // namespace sact::ops
