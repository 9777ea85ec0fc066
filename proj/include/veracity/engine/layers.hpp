#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "veracity/engine/tensor.hpp"
#include "veracity/rng.hpp"

namespace veracity::engine {

enum class Activation { none, relu, tanh, sigmoid, softmax };

enum class Mode { train, eval };

inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

inline void apply_activation(Activation act, double* y, std::size_t n) {
  switch (act) {
    case Activation::none:
      return;
    case Activation::relu:
      for (std::size_t i = 0; i < n; ++i) y[i] = y[i] > 0 ? y[i] : 0.0;
      return;
    case Activation::tanh:
      for (std::size_t i = 0; i < n; ++i) y[i] = std::tanh(y[i]);
      return;
    case Activation::sigmoid:
      for (std::size_t i = 0; i < n; ++i) y[i] = sigmoid(y[i]);
      return;
    case Activation::softmax: {
      double mx = y[0];
      for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, y[i]);
      double sum = 0;
      for (std::size_t i = 0; i < n; ++i) {
        y[i] = std::exp(y[i] - mx);
        sum += y[i];
      }
      for (std::size_t i = 0; i < n; ++i) y[i] /= sum;
      return;
    }
  }
}

// dz = dy ∘ act'(z), reconstructed from the post-activation outputs y.
// softmax uses the full Jacobian: dz = (diag(y) - y yᵀ) dy.
inline void activation_backward(Activation act, const double* y, const double* dy,
                                std::size_t n, double* dz) {
  switch (act) {
    case Activation::none:
      for (std::size_t i = 0; i < n; ++i) dz[i] = dy[i];
      return;
    case Activation::relu:
      for (std::size_t i = 0; i < n; ++i) dz[i] = y[i] > 0 ? dy[i] : 0.0;
      return;
    case Activation::tanh:
      for (std::size_t i = 0; i < n; ++i) dz[i] = dy[i] * (1.0 - y[i] * y[i]);
      return;
    case Activation::sigmoid:
      for (std::size_t i = 0; i < n; ++i) dz[i] = dy[i] * y[i] * (1.0 - y[i]);
      return;
    case Activation::softmax: {
      double dot = 0;
      for (std::size_t i = 0; i < n; ++i) dot += dy[i] * y[i];
      for (std::size_t i = 0; i < n; ++i) dz[i] = y[i] * (dy[i] - dot);
      return;
    }
  }
}

// y = act(x W + b) for one row. W is (in x out) row-major, so the inner loop
// streams W rows.
inline void dense_forward_row(const double* x, std::size_t in, const double* w,
                              const double* b, std::size_t out, Activation act,
                              double* y) {
  for (std::size_t j = 0; j < out; ++j) y[j] = b ? b[j] : 0.0;
  for (std::size_t i = 0; i < in; ++i) {
    const double xi = x[i];
    if (xi == 0.0) continue;
    const double* wr = w + i * out;
    for (std::size_t j = 0; j < out; ++j) y[j] += xi * wr[j];
  }
  apply_activation(act, y, out);
}

// Given pre-activation gradient dz: accumulate dW += xᵀ dz and db += dz,
// and produce dx = dz Wᵀ when requested.
inline void dense_backward_row(const double* x, std::size_t in, const double* w,
                               std::size_t out, const double* dz, double* dw_acc,
                               double* db_acc, double* dx) {
  if (db_acc)
    for (std::size_t j = 0; j < out; ++j) db_acc[j] += dz[j];
  if (dw_acc) {
    for (std::size_t i = 0; i < in; ++i) {
      const double xi = x[i];
      if (xi == 0.0) continue;
      double* dwr = dw_acc + i * out;
      for (std::size_t j = 0; j < out; ++j) dwr[j] += xi * dz[j];
    }
  }
  if (dx) {
    for (std::size_t i = 0; i < in; ++i) {
      const double* wr = w + i * out;
      double acc = 0;
      for (std::size_t j = 0; j < out; ++j) acc += dz[j] * wr[j];
      dx[i] = acc;
    }
  }
}

// Batched dense op on a (B x in) or (in) tensor.
inline Tensor dense_forward(const Tensor& x, const Tensor& w, const Tensor& b,
                            Activation act) {
  const std::size_t in = w.rows(), out = w.cols();
  if (b.size() != out) throw std::invalid_argument("dense: bias size mismatch");
  const bool batched = x.shape.size() == 2;
  const std::size_t rows = batched ? x.rows() : 1;
  if ((batched ? x.cols() : x.size()) != in)
    throw std::invalid_argument("dense: input width " +
                                std::to_string(batched ? x.cols() : x.size()) +
                                " does not match weight rows " + std::to_string(in));
  Tensor y(batched ? std::vector<std::size_t>{rows, out}
                   : std::vector<std::size_t>{out});
  for (std::size_t r = 0; r < rows; ++r)
    dense_forward_row(x.data() + r * in, in, w.data(), b.data(), out, act,
                      y.data() + r * out);
  return y;
}

// ---------------------------------------------------------------------------
// LSTM. Gate order in the packed 4h dimension is (input, forget, candidate,
// output). Padded timesteps are skipped entirely; a zero-length sequence
// yields the zero initial hidden state.

struct LstmDims {
  std::size_t input = 0;
  std::size_t hidden = 0;
};

struct LstmCache {
  std::size_t steps = 0;
  std::vector<const double*> inputs;  // borrowed row pointers, one per step
  std::vector<double> gates;          // steps x 4h, post-activation
  std::vector<double> cells;          // steps x h
  std::vector<double> hidden;         // steps x h
};

inline void lstm_forward(const std::vector<const double*>& inputs,
                         const double* wx, const double* wh, const double* b,
                         const LstmDims& dims, double* h_out, LstmCache* cache) {
  const std::size_t h = dims.hidden, d = dims.input, g4 = 4 * h;
  const std::size_t steps = inputs.size();
  if (cache) {
    cache->steps = steps;
    cache->inputs = inputs;
    cache->gates.assign(steps * g4, 0.0);
    cache->cells.assign(steps * h, 0.0);
    cache->hidden.assign(steps * h, 0.0);
  }
  std::vector<double> pre(g4);
  std::vector<double> c(h, 0.0), hs(h, 0.0);
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t j = 0; j < g4; ++j) pre[j] = b[j];
    const double* x = inputs[t];
    for (std::size_t i = 0; i < d; ++i) {
      const double xi = x[i];
      if (xi == 0.0) continue;
      const double* wr = wx + i * g4;
      for (std::size_t j = 0; j < g4; ++j) pre[j] += xi * wr[j];
    }
    for (std::size_t i = 0; i < h; ++i) {
      const double hi = hs[i];
      if (hi == 0.0) continue;
      const double* wr = wh + i * g4;
      for (std::size_t j = 0; j < g4; ++j) pre[j] += hi * wr[j];
    }
    double* gates = cache ? cache->gates.data() + t * g4 : pre.data();
    for (std::size_t j = 0; j < h; ++j) {
      const double gi = sigmoid(pre[j]);
      const double gf = sigmoid(pre[h + j]);
      const double gg = std::tanh(pre[2 * h + j]);
      const double go = sigmoid(pre[3 * h + j]);
      gates[j] = gi;
      gates[h + j] = gf;
      gates[2 * h + j] = gg;
      gates[3 * h + j] = go;
      c[j] = gf * c[j] + gi * gg;
      hs[j] = go * std::tanh(c[j]);
    }
    if (cache) {
      std::copy(c.begin(), c.end(), cache->cells.begin() + t * h);
      std::copy(hs.begin(), hs.end(), cache->hidden.begin() + t * h);
    }
  }
  std::copy(hs.begin(), hs.end(), h_out);
}

// Backpropagation through time. Accumulates into dwx/dwh/db; when dx_acc is
// non-null it must point at a steps x input buffer that receives input
// gradients (used for trainable embeddings).
inline void lstm_backward(const LstmCache& cache, const double* wx,
                          const double* wh, const LstmDims& dims,
                          const double* dh_final, double* dwx_acc,
                          double* dwh_acc, double* db_acc, double* dx_acc) {
  const std::size_t h = dims.hidden, d = dims.input, g4 = 4 * h;
  const std::size_t steps = cache.steps;
  if (steps == 0) return;
  std::vector<double> dh(dh_final, dh_final + h);
  std::vector<double> dc(h, 0.0);
  std::vector<double> dpre(g4);
  for (std::size_t t = steps; t-- > 0;) {
    const double* gates = cache.gates.data() + t * g4;
    const double* c = cache.cells.data() + t * h;
    const double* c_prev = t > 0 ? cache.cells.data() + (t - 1) * h : nullptr;
    const double* h_prev = t > 0 ? cache.hidden.data() + (t - 1) * h : nullptr;
    for (std::size_t j = 0; j < h; ++j) {
      const double gi = gates[j], gf = gates[h + j], gg = gates[2 * h + j],
                   go = gates[3 * h + j];
      const double tc = std::tanh(c[j]);
      const double dcj = dc[j] + dh[j] * go * (1.0 - tc * tc);
      const double cp = c_prev ? c_prev[j] : 0.0;
      dpre[j] = dcj * gg * gi * (1.0 - gi);                   // input gate
      dpre[h + j] = dcj * cp * gf * (1.0 - gf);               // forget gate
      dpre[2 * h + j] = dcj * gi * (1.0 - gg * gg);           // candidate
      dpre[3 * h + j] = dh[j] * tc * go * (1.0 - go);         // output gate
      dc[j] = dcj * gf;
    }
    const double* x = cache.inputs[t];
    for (std::size_t i = 0; i < d; ++i) {
      const double xi = x[i];
      if (xi != 0.0) {
        double* dwr = dwx_acc + i * g4;
        for (std::size_t j = 0; j < g4; ++j) dwr[j] += xi * dpre[j];
      }
    }
    if (h_prev) {
      for (std::size_t i = 0; i < h; ++i) {
        const double hi = h_prev[i];
        if (hi == 0.0) continue;
        double* dwr = dwh_acc + i * g4;
        for (std::size_t j = 0; j < g4; ++j) dwr[j] += hi * dpre[j];
      }
    }
    for (std::size_t j = 0; j < g4; ++j) db_acc[j] += dpre[j];
    if (dx_acc) {
      double* dx = dx_acc + t * d;
      for (std::size_t i = 0; i < d; ++i) {
        const double* wr = wx + i * g4;
        double acc = 0;
        for (std::size_t j = 0; j < g4; ++j) acc += dpre[j] * wr[j];
        dx[i] = acc;
      }
    }
    // dh for the previous step
    if (t > 0) {
      std::fill(dh.begin(), dh.end(), 0.0);
      for (std::size_t i = 0; i < h; ++i) {
        const double* wr = wh + i * g4;
        double acc = 0;
        for (std::size_t j = 0; j < g4; ++j) acc += dpre[j] * wr[j];
        dh[i] = acc;
      }
    }
  }
}

// ---------------------------------------------------------------------------
// Inverted dropout: surviving entries are scaled by 1/(1-rate) so the
// expected activation is unchanged; eval mode is the identity.

inline void dropout_forward(const double* x, std::size_t n, double rate,
                            Mode mode, Rng& rng, double* y, double* mask_out) {
  if (rate < 0.0 || rate >= 1.0)
    throw std::invalid_argument("dropout rate must be in [0, 1)");
  if (mode == Mode::eval || rate == 0.0) {
    for (std::size_t i = 0; i < n; ++i) y[i] = x[i];
    if (mask_out)
      for (std::size_t i = 0; i < n; ++i) mask_out[i] = 1.0;
    return;
  }
  const double scale = 1.0 / (1.0 - rate);
  for (std::size_t i = 0; i < n; ++i) {
    const double m = rng.next_unit() < rate ? 0.0 : scale;
    y[i] = x[i] * m;
    if (mask_out) mask_out[i] = m;
  }
}

inline void dropout_backward(const double* dy, const double* mask, std::size_t n,
                             double* dx) {
  for (std::size_t i = 0; i < n; ++i) dx[i] = dy[i] * mask[i];
}

inline Tensor dropout(const Tensor& x, double rate, Mode mode, Rng& rng) {
  Tensor y(x.shape);
  dropout_forward(x.data(), x.size(), rate, mode, rng, y.data(), nullptr);
  return y;
}

// ---------------------------------------------------------------------------

// Juxtapose along the last dimension. Inputs must agree on all but the last
// dimension.
inline Tensor concat(const std::vector<Tensor>& xs) {
  if (xs.empty()) throw std::invalid_argument("concat of nothing");
  const std::size_t rows = xs[0].shape.size() == 2 ? xs[0].rows() : 1;
  std::size_t total = 0;
  for (const auto& x : xs) {
    const std::size_t r = x.shape.size() == 2 ? x.rows() : 1;
    if (r != rows) throw std::invalid_argument("concat: leading dimensions differ");
    total += x.shape.size() == 2 ? x.cols() : x.size();
  }
  Tensor y(rows == 1 && xs[0].shape.size() == 1
               ? std::vector<std::size_t>{total}
               : std::vector<std::size_t>{rows, total});
  for (std::size_t r = 0; r < rows; ++r) {
    std::size_t off = 0;
    for (const auto& x : xs) {
      const std::size_t w = x.shape.size() == 2 ? x.cols() : x.size();
      const double* src = x.data() + r * w;
      std::copy(src, src + w, y.data() + r * total + off);
      off += w;
    }
  }
  return y;
}

// Add a one-element tensor to every entry of x.
inline Tensor add_broadcast(const Tensor& x, const Tensor& scalar) {
  if (scalar.size() != 1)
    throw std::invalid_argument("add_broadcast expects a 1-element scalar tensor");
  Tensor y = x;
  const double s = scalar.v[0];
  for (auto& e : y.v) e += s;
  return y;
}

// ---------------------------------------------------------------------------

// Uniform Glorot bounds from fan-in/fan-out.
inline void glorot_init(Tensor& t, std::size_t fan_in, std::size_t fan_out,
                        Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (auto& e : t.v) e = rng.uniform(-limit, limit);
}

}  // namespace veracity::engine
