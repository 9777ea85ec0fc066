#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "veracity/corpus.hpp"
#include "veracity/engine/adam.hpp"
#include "veracity/engine/layers.hpp"
#include "veracity/models/config.hpp"
#include "veracity/text.hpp"

namespace veracity::models {

struct RegressionHyper {
  int iters = 800;
  double lr = 0.1;
  // total multiplicative decay across the run: step t uses
  // lr * lr_decay^(t/iters); adam orbits at roughly the current step size,
  // so the final value bounds the convergence error
  double lr_decay = 0.01;
  double l2 = 1e-4;  // on weights only, never on biases/thresholds
};

namespace detail {

inline double scheduled_lr(const RegressionHyper& h, int t) {
  if (h.iters <= 1 || h.lr_decay == 1.0) return h.lr;
  return h.lr * std::pow(h.lr_decay,
                         static_cast<double>(t - 1) / static_cast<double>(h.iters - 1));
}

}  // namespace detail

// Fitted baseline. Layout by kind:
//   linreg:         w (d), bias; prediction rounds and clamps to a class
//   logreg-ovr:     per-class w (d) and bias; prediction by max probability
//   ordinal-logreg: shared w (d) plus ordered thresholds; cumulative logits
struct RegressionModel {
  ModelKind kind = ModelKind::linreg;
  int n_classes = 2;
  std::size_t dim = 0;
  std::vector<double> w;     // linreg/ordinal: d; ovr: n_classes x d
  std::vector<double> bias;  // linreg: 1; ovr: n_classes; ordinal: unused
  std::vector<double> thresholds;  // ordinal only, strictly increasing

  int predict(const double* x) const {
    switch (kind) {
      case ModelKind::linreg: {
        double y = bias[0];
        for (std::size_t i = 0; i < dim; ++i) y += w[i] * x[i];
        auto cls = std::llround(y);
        return static_cast<int>(std::clamp<long long>(cls, 0, n_classes - 1));
      }
      case ModelKind::logreg_ovr: {
        int best = 0;
        double best_p = -1;
        for (int c = 0; c < n_classes; ++c) {
          const double p = class_prob(c, x);
          if (p > best_p) {  // ties resolve to the lower class index
            best_p = p;
            best = c;
          }
        }
        return best;
      }
      case ModelKind::ordinal_logreg: {
        int best = 0;
        double best_p = -1;
        for (int c = 0; c < n_classes; ++c) {
          const double p = ordinal_prob(c, x);
          if (p > best_p) {
            best_p = p;
            best = c;
          }
        }
        return best;
      }
      default:
        throw std::logic_error("predict on a non-regression model");
    }
  }

  // P(class c) under the one-vs-rest fit, an independent sigmoid per class.
  double class_prob(int c, const double* x) const {
    double z = bias[static_cast<std::size_t>(c)];
    const double* wc = w.data() + static_cast<std::size_t>(c) * dim;
    for (std::size_t i = 0; i < dim; ++i) z += wc[i] * x[i];
    return engine::sigmoid(z);
  }

  double cumulative(int j, const double* x) const {  // P(y <= j)
    if (j < 0) return 0.0;
    if (j >= n_classes - 1) return 1.0;
    double s = 0;
    for (std::size_t i = 0; i < dim; ++i) s += w[i] * x[i];
    return engine::sigmoid(thresholds[static_cast<std::size_t>(j)] - s);
  }

  double ordinal_prob(int c, const double* x) const {
    return cumulative(c, x) - cumulative(c - 1, x);
  }
};

namespace detail {

inline void check_not_degenerate(const std::vector<double>& x, std::size_t n,
                                 std::size_t d) {
  for (std::size_t j = 0; j < d; ++j) {
    const double first = x[j];
    for (std::size_t i = 1; i < n; ++i)
      if (x[i * d + j] != first) return;
  }
  throw std::invalid_argument(
      "degenerate feature matrix: every column has zero variance");
}

// Solve A b = y for symmetric positive definite A via Cholesky, adding a
// small jitter to the diagonal if the factorization stalls.
inline std::vector<double> solve_spd(std::vector<double> a, std::vector<double> y,
                                     std::size_t n) {
  double jitter = 0.0;
  for (int attempt = 0; attempt < 8; ++attempt) {
    std::vector<double> l = a;
    if (jitter > 0)
      for (std::size_t i = 0; i < n; ++i) l[i * n + i] += jitter;
    bool ok = true;
    for (std::size_t i = 0; i < n && ok; ++i) {
      for (std::size_t j = 0; j <= i; ++j) {
        double sum = l[i * n + j];
        for (std::size_t k = 0; k < j; ++k) sum -= l[i * n + k] * l[j * n + k];
        if (i == j) {
          if (sum <= 0) {
            ok = false;
            break;
          }
          l[i * n + i] = std::sqrt(sum);
        } else {
          l[i * n + j] = sum / l[j * n + j];
        }
      }
    }
    if (ok) {
      std::vector<double> z(n), b(n);
      for (std::size_t i = 0; i < n; ++i) {
        double sum = y[i];
        for (std::size_t k = 0; k < i; ++k) sum -= l[i * n + k] * z[k];
        z[i] = sum / l[i * n + i];
      }
      for (std::size_t ii = n; ii-- > 0;) {
        double sum = z[ii];
        for (std::size_t k = ii + 1; k < n; ++k) sum -= l[k * n + ii] * b[k];
        b[ii] = sum / l[ii * n + ii];
      }
      return b;
    }
    double max_diag = 0;
    for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, a[i * n + i]);
    jitter = jitter == 0 ? std::max(1e-12, 1e-12 * max_diag) : jitter * 100;
  }
  throw std::runtime_error("least-squares normal equations are singular");
}

}  // namespace detail

inline RegressionModel fit_linreg(const std::vector<double>& x,
                                  const std::vector<int>& y, std::size_t n,
                                  std::size_t d, int n_classes) {
  // normal equations on [X, 1]
  const std::size_t m = d + 1;
  std::vector<double> ata(m * m, 0.0), aty(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* xi = x.data() + i * d;
    for (std::size_t a = 0; a < m; ++a) {
      const double va = a < d ? xi[a] : 1.0;
      aty[a] += va * static_cast<double>(y[i]);
      for (std::size_t b = a; b < m; ++b) {
        const double vb = b < d ? xi[b] : 1.0;
        ata[a * m + b] += va * vb;
      }
    }
  }
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < a; ++b) ata[a * m + b] = ata[b * m + a];
  auto beta = detail::solve_spd(std::move(ata), std::move(aty), m);
  RegressionModel model;
  model.kind = ModelKind::linreg;
  model.n_classes = n_classes;
  model.dim = d;
  model.w.assign(beta.begin(), beta.begin() + static_cast<std::ptrdiff_t>(d));
  model.bias = {beta[d]};
  return model;
}

inline RegressionModel fit_logreg_ovr(const std::vector<double>& x,
                                      const std::vector<int>& y, std::size_t n,
                                      std::size_t d, int n_classes,
                                      const RegressionHyper& hyper) {
  RegressionModel model;
  model.kind = ModelKind::logreg_ovr;
  model.n_classes = n_classes;
  model.dim = d;
  model.w.assign(static_cast<std::size_t>(n_classes) * d, 0.0);
  model.bias.assign(static_cast<std::size_t>(n_classes), 0.0);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (int c = 0; c < n_classes; ++c) {
    double* wc = model.w.data() + static_cast<std::size_t>(c) * d;
    double& bc = model.bias[static_cast<std::size_t>(c)];
    std::vector<double> mw(d + 1, 0.0), vw(d + 1, 0.0), gw(d + 1, 0.0);
    engine::AdamConfig acfg;
    for (int it = 1; it <= hyper.iters; ++it) {
      acfg.lr = detail::scheduled_lr(hyper, it);
      std::fill(gw.begin(), gw.end(), 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        const double* xi = x.data() + i * d;
        double z = bc;
        for (std::size_t k = 0; k < d; ++k) z += wc[k] * xi[k];
        const double err = engine::sigmoid(z) - (y[i] == c ? 1.0 : 0.0);
        for (std::size_t k = 0; k < d; ++k) gw[k] += err * xi[k];
        gw[d] += err;
      }
      for (std::size_t k = 0; k < d; ++k) gw[k] = gw[k] * inv_n + hyper.l2 * wc[k];
      gw[d] *= inv_n;
      std::vector<double> params(d + 1);
      std::copy(wc, wc + d, params.begin());
      params[d] = bc;
      engine::adam_step(params.data(), gw.data(), mw.data(), vw.data(), d + 1,
                        it, acfg);
      std::copy(params.begin(), params.begin() + static_cast<std::ptrdiff_t>(d), wc);
      bc = params[d];
    }
  }
  return model;
}

inline RegressionModel fit_ordinal(const std::vector<double>& x,
                                   const std::vector<int>& y, std::size_t n,
                                   std::size_t d, int n_classes,
                                   const RegressionHyper& hyper) {
  if (n_classes < 2) throw std::invalid_argument("ordinal fit needs >= 2 classes");
  const int nt = n_classes - 1;  // thresholds
  // thresholds start at the logits of the cumulative class frequencies; the
  // gaps are kept positive through an exponential parameterization
  std::vector<double> cum(static_cast<std::size_t>(nt), 0.0);
  {
    std::vector<double> freq(static_cast<std::size_t>(n_classes), 0.0);
    for (int yi : y) freq[static_cast<std::size_t>(yi)] += 1.0;
    double acc = 0;
    for (int j = 0; j < nt; ++j) {
      acc += freq[static_cast<std::size_t>(j)];
      double p = std::clamp(acc / static_cast<double>(n), 1e-3, 1.0 - 1e-3);
      cum[static_cast<std::size_t>(j)] = std::log(p / (1.0 - p));
    }
    for (int j = 1; j < nt; ++j)
      cum[static_cast<std::size_t>(j)] =
          std::max(cum[static_cast<std::size_t>(j)],
                   cum[static_cast<std::size_t>(j - 1)] + 1e-3);
  }
  // parameters: beta (d), t0, rho (nt - 1)
  std::vector<double> params(d + static_cast<std::size_t>(nt), 0.0);
  double* beta = params.data();
  double* t0 = params.data() + d;
  double* rho = params.data() + d + 1;
  *t0 = cum[0];
  for (int j = 1; j < nt; ++j)
    rho[j - 1] = std::log(cum[static_cast<std::size_t>(j)] -
                          cum[static_cast<std::size_t>(j - 1)]);

  std::vector<double> grad(params.size()), m(params.size(), 0.0),
      v(params.size(), 0.0), theta(static_cast<std::size_t>(nt));
  engine::AdamConfig acfg;
  const double inv_n = 1.0 / static_cast<double>(n);
  for (int it = 1; it <= hyper.iters; ++it) {
    acfg.lr = detail::scheduled_lr(hyper, it);
    theta[0] = *t0;
    for (int j = 1; j < nt; ++j)
      theta[static_cast<std::size_t>(j)] =
          theta[static_cast<std::size_t>(j - 1)] + std::exp(rho[j - 1]);
    std::fill(grad.begin(), grad.end(), 0.0);
    std::vector<double> dtheta(static_cast<std::size_t>(nt));
    for (std::size_t i = 0; i < n; ++i) {
      const double* xi = x.data() + i * d;
      double s = 0;
      for (std::size_t k = 0; k < d; ++k) s += beta[k] * xi[k];
      const int yi = y[i];
      const double f_hi = yi <= nt - 1
                              ? engine::sigmoid(theta[static_cast<std::size_t>(yi)] - s)
                              : 1.0;
      const double f_lo =
          yi >= 1 ? engine::sigmoid(theta[static_cast<std::size_t>(yi - 1)] - s) : 0.0;
      const double p = std::max(f_hi - f_lo, 1e-12);
      const double dp_hi = yi <= nt - 1 ? f_hi * (1.0 - f_hi) : 0.0;
      const double dp_lo = yi >= 1 ? f_lo * (1.0 - f_lo) : 0.0;
      std::fill(dtheta.begin(), dtheta.end(), 0.0);
      if (yi <= nt - 1) dtheta[static_cast<std::size_t>(yi)] -= dp_hi / p;
      if (yi >= 1) dtheta[static_cast<std::size_t>(yi - 1)] += dp_lo / p;
      const double ds = (dp_hi - dp_lo) / p;
      for (std::size_t k = 0; k < d; ++k) grad[k] += ds * xi[k];
      for (int j = 0; j < nt; ++j) grad[d] += dtheta[static_cast<std::size_t>(j)];
      for (int g = 1; g < nt; ++g) {
        double acc = 0;
        for (int j = g; j < nt; ++j) acc += dtheta[static_cast<std::size_t>(j)];
        grad[d + static_cast<std::size_t>(g)] += acc * std::exp(rho[g - 1]);
      }
    }
    for (std::size_t k = 0; k < d; ++k)
      grad[k] = grad[k] * inv_n + hyper.l2 * beta[k];
    for (std::size_t k = d; k < params.size(); ++k) grad[k] *= inv_n;
    engine::adam_step(params.data(), grad.data(), m.data(), v.data(),
                      params.size(), it, acfg);
  }
  RegressionModel model;
  model.kind = ModelKind::ordinal_logreg;
  model.n_classes = n_classes;
  model.dim = d;
  model.w.assign(beta, beta + d);
  model.thresholds.resize(static_cast<std::size_t>(nt));
  model.thresholds[0] = *t0;
  for (int j = 1; j < nt; ++j)
    model.thresholds[static_cast<std::size_t>(j)] =
        model.thresholds[static_cast<std::size_t>(j - 1)] + std::exp(rho[j - 1]);
  return model;
}

// X is n rows of d features, row-major; y holds class indices.
inline RegressionModel fit_regression(ModelKind kind, const std::vector<double>& x,
                                      const std::vector<int>& y, std::size_t d,
                                      int n_classes,
                                      const RegressionHyper& hyper = {}) {
  if (d == 0 || y.empty() || x.size() != y.size() * d)
    throw std::invalid_argument("feature matrix and labels disagree");
  const std::size_t n = y.size();
  detail::check_not_degenerate(x, n, d);
  switch (kind) {
    case ModelKind::linreg: return fit_linreg(x, y, n, d, n_classes);
    case ModelKind::logreg_ovr: return fit_logreg_ovr(x, y, n, d, n_classes, hyper);
    case ModelKind::ordinal_logreg: return fit_ordinal(x, y, n, d, n_classes, hyper);
    default:
      throw std::invalid_argument("fit_regression requires a regression kind");
  }
}

// ---------------------------------------------------------------------------
// Feature extraction for the baselines: mean in-vocabulary embedding of the
// statement, optionally the same for the justification, then the five
// standardized history counts.

struct RegressionFeatureSpec {
  bool use_justification = false;
  std::array<double, corpus::kNumCountFields> count_mean{};
  std::array<double, corpus::kNumCountFields> count_std{1, 1, 1, 1, 1};

  std::size_t dim(const text::EmbeddingTable& table) const {
    return table.dim() * (use_justification ? 2 : 1) + corpus::kNumCountFields;
  }
};

inline RegressionFeatureSpec make_feature_spec(
    const std::vector<corpus::Record>& train, bool use_justification) {
  RegressionFeatureSpec spec;
  spec.use_justification = use_justification;
  for (int c = 0; c < corpus::kNumCountFields; ++c) {
    double sum = 0, sq = 0;
    for (const auto& r : train) {
      const double v = r.counts[c].value_or(0.0);
      sum += v;
      sq += v * v;
    }
    const double n = static_cast<double>(train.size());
    const double mean = n > 0 ? sum / n : 0.0;
    const double var = n > 0 ? std::max(0.0, sq / n - mean * mean) : 0.0;
    spec.count_mean[c] = mean;
    spec.count_std[c] = var > 0 ? std::sqrt(var) : 1.0;
  }
  return spec;
}

namespace detail {

inline void mean_embedding(const std::string& text_body,
                           const text::EmbeddingTable& table, double* out) {
  const auto tokens = text::tokenize(text_body);
  std::size_t used = 0;
  std::fill(out, out + table.dim(), 0.0);
  for (const auto& tok : tokens) {
    if (auto idx = table.lookup(tok)) {
      const double* row = table.row(*idx);
      for (std::size_t k = 0; k < table.dim(); ++k) out[k] += row[k];
      ++used;
    }
  }
  if (used > 0)
    for (std::size_t k = 0; k < table.dim(); ++k)
      out[k] /= static_cast<double>(used);
}

}  // namespace detail

inline std::vector<double> regression_features(
    const std::vector<corpus::Record>& records, const text::EmbeddingTable& table,
    const RegressionFeatureSpec& spec) {
  const std::size_t d = spec.dim(table);
  std::vector<double> x(records.size() * d, 0.0);
  for (std::size_t i = 0; i < records.size(); ++i) {
    double* xi = x.data() + i * d;
    detail::mean_embedding(records[i].statement, table, xi);
    std::size_t off = table.dim();
    if (spec.use_justification) {
      if (!records[i].justification)
        throw std::invalid_argument("record " + records[i].id +
                                    " lacks a justification for these features");
      detail::mean_embedding(*records[i].justification, table, xi + off);
      off += table.dim();
    }
    for (int c = 0; c < corpus::kNumCountFields; ++c)
      xi[off + static_cast<std::size_t>(c)] =
          (records[i].counts[c].value_or(spec.count_mean[c]) - spec.count_mean[c]) /
          spec.count_std[c];
  }
  return x;
}

}  // namespace veracity::models
