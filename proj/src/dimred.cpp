// Copyright 2026 The Neurotalk Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "neurotalk/dimred.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "neurotalk/checkpoint.hpp"

namespace neurotalk::dimred {

// ---- symmetric eigensolver -----------------------------------------------------

namespace {

// Householder reduction to tridiagonal form, accumulating the transform in z.
void tred2(std::vector<double>& z, size_t n, std::vector<double>& d, std::vector<double>& e) {
  for (size_t i = n - 1; i > 0; --i) {
    size_t l = i - 1;
    double h = 0.0, scale = 0.0;
    if (l > 0) {
      for (size_t k = 0; k <= l; ++k) scale += std::fabs(z[i * n + k]);
      if (scale == 0.0) {
        e[i] = z[i * n + l];
      } else {
        for (size_t k = 0; k <= l; ++k) {
          z[i * n + k] /= scale;
          h += z[i * n + k] * z[i * n + k];
        }
        double f = z[i * n + l];
        double g = f >= 0.0 ? -std::sqrt(h) : std::sqrt(h);
        e[i] = scale * g;
        h -= f * g;
        z[i * n + l] = f - g;
        f = 0.0;
        for (size_t j = 0; j <= l; ++j) {
          z[j * n + i] = z[i * n + j] / h;
          g = 0.0;
          for (size_t k = 0; k <= j; ++k) g += z[j * n + k] * z[i * n + k];
          for (size_t k = j + 1; k <= l; ++k) g += z[k * n + j] * z[i * n + k];
          e[j] = g / h;
          f += e[j] * z[i * n + j];
        }
        const double hh = f / (h + h);
        for (size_t j = 0; j <= l; ++j) {
          f = z[i * n + j];
          e[j] = g = e[j] - hh * f;
          for (size_t k = 0; k <= j; ++k) z[j * n + k] -= f * e[k] + g * z[i * n + k];
        }
      }
    } else {
      e[i] = z[i * n + l];
    }
    d[i] = h;
  }
  d[0] = 0.0;
  e[0] = 0.0;
  for (size_t i = 0; i < n; ++i) {
    if (d[i] != 0.0) {
      for (size_t j = 0; j < i; ++j) {
        double g = 0.0;
        for (size_t k = 0; k < i; ++k) g += z[i * n + k] * z[k * n + j];
        for (size_t k = 0; k < i; ++k) z[k * n + j] -= g * z[k * n + i];
      }
    }
    d[i] = z[i * n + i];
    z[i * n + i] = 1.0;
    for (size_t j = 0; j < i; ++j) z[j * n + i] = z[i * n + j] = 0.0;
  }
}

// Implicit-shift QL on the tridiagonal system, updating eigenvectors in z.
void tqli(std::vector<double>& d, std::vector<double>& e, size_t n, std::vector<double>& z) {
  auto pythag = [](double a, double b) { return std::hypot(a, b); };
  for (size_t i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;
  for (size_t l = 0; l < n; ++l) {
    int iter = 0;
    size_t m;
    do {
      for (m = l; m + 1 < n; ++m) {
        const double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
        if (std::fabs(e[m]) <= 1e-300 || std::fabs(e[m]) <= 2.3e-16 * dd) break;
      }
      if (m != l) {
        if (++iter == 50) throw NumericError("eig_symmetric: QL failed to converge");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = pythag(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + (g >= 0.0 ? std::fabs(r) : -std::fabs(r)));
        double s = 1.0, c = 1.0, p = 0.0;
        for (size_t i = m; i-- > l;) {
          double f = s * e[i];
          const double b = c * e[i];
          r = pythag(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          for (size_t k = 0; k < n; ++k) {
            f = z[k * n + i + 1];
            z[k * n + i + 1] = s * z[k * n + i] + c * f;
            z[k * n + i] = c * z[k * n + i] - s * f;
          }
        }
        if (r == 0.0 && m - l > 1) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
}

// Deterministic sign: the largest-magnitude component of each eigenvector is
// made positive so repeated fits are byte-identical.
void fix_signs(std::vector<double>& vectors, size_t n) {
  for (size_t j = 0; j < n; ++j) {
    size_t arg = 0;
    double best = 0.0;
    for (size_t i = 0; i < n; ++i) {
      const double a = std::fabs(vectors[i * n + j]);
      if (a > best) {
        best = a;
        arg = i;
      }
    }
    if (vectors[arg * n + j] < 0.0)
      for (size_t i = 0; i < n; ++i) vectors[i * n + j] = -vectors[i * n + j];
  }
}

}  // namespace

void eig_symmetric(const std::vector<double>& a, size_t n, std::vector<double>& eigenvalues,
                   std::vector<double>& vectors) {
  if (a.size() != n * n) throw ShapeError("eig_symmetric: matrix size mismatch");
  if (n == 0) throw ShapeError("eig_symmetric: empty matrix");
  vectors = a;
  eigenvalues.assign(n, 0.0);
  if (n == 1) {
    eigenvalues[0] = a[0];
    vectors[0] = 1.0;
    return;
  }
  std::vector<double> e(n, 0.0);
  tred2(vectors, n, eigenvalues, e);
  tqli(eigenvalues, e, n, vectors);
  // sort ascending, carrying columns
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](size_t x, size_t y) { return eigenvalues[x] < eigenvalues[y]; });
  std::vector<double> dv(n), vv(n * n);
  for (size_t j = 0; j < n; ++j) {
    dv[j] = eigenvalues[order[j]];
    for (size_t i = 0; i < n; ++i) vv[i * n + j] = vectors[i * n + order[j]];
  }
  eigenvalues = std::move(dv);
  vectors = std::move(vv);
  fix_signs(vectors, n);
}

// ---- PCA -----------------------------------------------------------------------

PcaModel fit_pca(const Tensor& x) {
  const size_t n = x.rows(), d = x.cols();
  if (n < 2) throw ConfigError("fit_pca: need at least two samples");
  PcaModel m;
  m.mean.assign(d, 0.0);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < d; ++j) m.mean[j] += x.at(i, j);
  for (double& v : m.mean) v /= static_cast<double>(n);

  std::vector<double> cov(d * d, 0.0);
  for (size_t i = 0; i < n; ++i)
    for (size_t a = 0; a < d; ++a) {
      const double da = x.at(i, a) - m.mean[a];
      for (size_t b = a; b < d; ++b) cov[a * d + b] += da * (x.at(i, b) - m.mean[b]);
    }
  for (size_t a = 0; a < d; ++a)
    for (size_t b = a; b < d; ++b) {
      cov[a * d + b] /= static_cast<double>(n - 1);
      cov[b * d + a] = cov[a * d + b];
    }

  std::vector<double> evals, evecs;
  eig_symmetric(cov, d, evals, evecs);

  m.eigenvalues.resize(d);
  m.axes.resize(d * d);
  for (size_t k = 0; k < d; ++k) {
    const size_t src = d - 1 - k;  // descending
    m.eigenvalues[k] = std::max(evals[src], 0.0);
    for (size_t i = 0; i < d; ++i) m.axes[k * d + i] = evecs[i * d + src];
  }
  const double total = std::accumulate(m.eigenvalues.begin(), m.eigenvalues.end(), 0.0);
  m.explained.resize(d);
  double run = 0.0;
  for (size_t k = 0; k < d; ++k) {
    run += m.eigenvalues[k];
    m.explained[k] = total > 0.0 ? run / total : 1.0;
  }
  if (total > 0.0) m.explained[d - 1] = 1.0;
  return m;
}

std::vector<double> pca_project(const PcaModel& m, std::span<const double> v) {
  const size_t d = m.mean.size();
  if (v.size() != d) throw ShapeError("pca_project: dimension mismatch");
  std::vector<double> out(d, 0.0);
  for (size_t k = 0; k < d; ++k) {
    double acc = 0.0;
    for (size_t i = 0; i < d; ++i) acc += (v[i] - m.mean[i]) * m.axes[k * d + i];
    out[k] = acc;
  }
  return out;
}

// ---- KPCA ----------------------------------------------------------------------

namespace {
double poly_kernel(std::span<const double> a, std::span<const double> b, double gamma,
                   double coef0, double degree) {
  double dot = 0.0;
  for (size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
  return std::pow(gamma * dot + coef0, degree);
}
}  // namespace

KpcaModel fit_kpca(const Tensor& x, size_t out_dim, double degree, double gamma, double coef0) {
  const size_t n = x.rows(), d = x.cols();
  if (out_dim < 1) throw ConfigError("fit_kpca: out_dim must be at least 1");
  if (n < 2) throw ConfigError("fit_kpca: need at least two samples");
  KpcaModel m;
  m.training = x;
  m.degree = degree;
  m.gamma = gamma > 0.0 ? gamma : 1.0 / static_cast<double>(d);
  m.coef0 = coef0;

  std::vector<double> k(n * n);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i; j < n; ++j) {
      const double v = poly_kernel({x.data.data() + i * d, d}, {x.data.data() + j * d, d}, m.gamma,
                                   m.coef0, m.degree);
      k[i * n + j] = v;
      k[j * n + i] = v;
    }

  m.row_means.assign(n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = 0; j < n; ++j) m.row_means[i] += k[i * n + j];
    m.row_means[i] /= static_cast<double>(n);
  }
  m.grand_mean = std::accumulate(m.row_means.begin(), m.row_means.end(), 0.0) /
                 static_cast<double>(n);
  std::vector<double> kc(n * n);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = 0; j < n; ++j)
      kc[i * n + j] = k[i * n + j] - m.row_means[i] - m.row_means[j] + m.grand_mean;

  std::vector<double> evals, evecs;
  eig_symmetric(kc, n, evals, evecs);

  size_t usable = 0;
  for (double v : evals)
    if (v > 1e-12) ++usable;
  if (out_dim > usable) {
    m.reduced = true;
    out_dim = std::max<size_t>(usable, 1);
  }
  m.out_dim = out_dim;
  m.eigenvalues.resize(out_dim);
  m.alphas.assign(out_dim * n, 0.0);
  for (size_t c = 0; c < out_dim; ++c) {
    const size_t src = n - 1 - c;
    const double lambda = std::max(evals[src], 1e-300);
    m.eigenvalues[c] = evals[src];
    const double scale = 1.0 / std::sqrt(lambda);
    for (size_t i = 0; i < n; ++i) m.alphas[c * n + i] = evecs[i * n + src] * scale;
  }
  return m;
}

std::vector<double> kpca_project(const KpcaModel& m, std::span<const double> v) {
  const size_t n = m.training.rows(), d = m.training.cols();
  if (v.size() != d)
    throw ShapeError("kpca_project: input dim " + std::to_string(v.size()) +
                     " does not match training dim " + std::to_string(d));
  std::vector<double> kx(n);
  double kx_mean = 0.0;
  for (size_t i = 0; i < n; ++i) {
    kx[i] = poly_kernel(v, {m.training.data.data() + i * d, d}, m.gamma, m.coef0, m.degree);
    kx_mean += kx[i];
  }
  kx_mean /= static_cast<double>(n);
  for (size_t i = 0; i < n; ++i) kx[i] = kx[i] - m.row_means[i] - kx_mean + m.grand_mean;
  std::vector<double> out(m.out_dim, 0.0);
  for (size_t c = 0; c < m.out_dim; ++c) {
    double acc = 0.0;
    for (size_t i = 0; i < n; ++i) acc += m.alphas[c * n + i] * kx[i];
    out[c] = acc;
  }
  return out;
}

Tensor kpca_project_all(const KpcaModel& m, const Tensor& x) {
  Tensor out = Tensor::zeros({x.rows(), m.out_dim});
  for (size_t i = 0; i < x.rows(); ++i) {
    auto row = kpca_project(m, {x.data.data() + i * x.cols(), x.cols()});
    std::copy(row.begin(), row.end(), out.data.begin() + static_cast<long>(i * m.out_dim));
  }
  return out;
}

std::optional<size_t> dimension_policy(int set_id) {
  switch (set_id) {
    case 1: return 30;
    case 2: return 50;
    case 3: return std::nullopt;  // explained variance never levels off; keep
    default: throw ConfigError("dimension_policy: unknown feature set " + std::to_string(set_id));
  }
}

Tensor subsample_rows(const Tensor& x, size_t max_rows, uint64_t seed) {
  if (x.rows() <= max_rows) return x;
  std::vector<size_t> idx(x.rows());
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  rng.shuffle(idx);
  idx.resize(max_rows);
  std::sort(idx.begin(), idx.end());
  Tensor out = Tensor::zeros({max_rows, x.cols()});
  for (size_t i = 0; i < max_rows; ++i)
    std::copy_n(x.data.data() + idx[i] * x.cols(), x.cols(),
                out.data.data() + i * x.cols());
  return out;
}

void save_kpca(const KpcaModel& m, const std::string& path) {
  std::map<std::string, Tensor> entries;
  entries.emplace("kpca/training", m.training);
  entries.emplace("kpca/eigenvalues", Tensor({m.eigenvalues.size()}, m.eigenvalues));
  entries.emplace("kpca/alphas", Tensor({m.out_dim, m.training.rows()}, m.alphas));
  entries.emplace("kpca/row_means", Tensor({m.row_means.size()}, m.row_means));
  entries.emplace("kpca/meta",
                  Tensor({6}, {m.degree, m.gamma, m.coef0, m.grand_mean,
                               static_cast<double>(m.out_dim), m.reduced ? 1.0 : 0.0}));
  nn::write_tensor_container(entries, path);
}

KpcaModel load_kpca(const std::string& path) {
  auto entries = nn::read_tensor_container(path);
  KpcaModel m;
  m.training = entries.at("kpca/training");
  m.eigenvalues = entries.at("kpca/eigenvalues").data;
  m.alphas = entries.at("kpca/alphas").data;
  m.row_means = entries.at("kpca/row_means").data;
  const auto& meta = entries.at("kpca/meta").data;
  m.degree = meta[0];
  m.gamma = meta[1];
  m.coef0 = meta[2];
  m.grand_mean = meta[3];
  m.out_dim = static_cast<size_t>(meta[4]);
  m.reduced = meta[5] != 0.0;
  return m;
}

}  // namespace neurotalk::dimred
