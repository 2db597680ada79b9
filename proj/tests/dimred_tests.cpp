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

#include <doctest.h>

#include <cmath>
#include <cstdio>

#include "neurotalk/dimred.hpp"
#include "test_support.hpp"

using namespace neurotalk;
using namespace neurotalk::dimred;
using nt_test::random_tensor;

TEST_CASE("eig_symmetric matches a hand 3x3 eigendecomposition") {
  // A = diag(1,2,3) conjugated by a known rotation; eigenvalues survive.
  // Use a plain symmetric matrix with analytically known spectrum:
  // [[2,1,0],[1,2,1],[0,1,2]] has eigenvalues 2-sqrt(2), 2, 2+sqrt(2).
  std::vector<double> a = {2, 1, 0, 1, 2, 1, 0, 1, 2};
  std::vector<double> evals, evecs;
  eig_symmetric(a, 3, evals, evecs);
  CHECK(evals[0] == doctest::Approx(2.0 - std::sqrt(2.0)).epsilon(1e-10));
  CHECK(evals[1] == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(evals[2] == doctest::Approx(2.0 + std::sqrt(2.0)).epsilon(1e-10));
  // residual ||A v - lambda v||
  for (size_t j = 0; j < 3; ++j)
    for (size_t i = 0; i < 3; ++i) {
      double av = 0.0;
      for (size_t k = 0; k < 3; ++k) av += a[i * 3 + k] * evecs[k * 3 + j];
      CHECK(std::fabs(av - evals[j] * evecs[i * 3 + j]) < 1e-10);
    }
}

TEST_CASE("eigenvectors are orthonormal on a random symmetric matrix") {
  Rng rng(4);
  const size_t n = 20;
  std::vector<double> a(n * n);
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i; j < n; ++j) a[i * n + j] = a[j * n + i] = rng.uniform(-1.0, 1.0);
  std::vector<double> evals, evecs;
  eig_symmetric(a, n, evals, evecs);
  for (size_t p = 0; p < n; ++p)
    for (size_t q = p; q < n; ++q) {
      double dot = 0.0;
      for (size_t i = 0; i < n; ++i) dot += evecs[i * n + p] * evecs[i * n + q];
      CHECK(std::fabs(dot - (p == q ? 1.0 : 0.0)) < 1e-8);
    }
  for (size_t j = 1; j < n; ++j) CHECK(evals[j] >= evals[j - 1] - 1e-12);
}

TEST_CASE("pca explained variance: isotropic gaussian, line, and 1-d cases") {
  Rng rng(8);
  // isotropic 2-D sample: components split roughly evenly
  nn::Tensor iso = nn::Tensor::zeros({400, 2});
  for (double& v : iso.data) v = rng.normal();
  PcaModel m = fit_pca(iso);
  CHECK(std::fabs(m.explained[0] - 0.5) < 0.1);
  CHECK(m.explained[1] == doctest::Approx(1.0).epsilon(1e-9));

  // collinear data: first component explains everything
  nn::Tensor line = nn::Tensor::zeros({50, 3});
  for (size_t i = 0; i < 50; ++i) {
    const double t = rng.uniform(-2.0, 2.0);
    line.at(i, 0) = t;
    line.at(i, 1) = 2.0 * t;
    line.at(i, 2) = -t;
  }
  PcaModel ml = fit_pca(line);
  CHECK(ml.explained[0] == doctest::Approx(1.0).epsilon(1e-8));

  nn::Tensor one = random_tensor({10, 1}, rng);
  PcaModel m1 = fit_pca(one);
  REQUIRE(m1.explained.size() == 1);
  CHECK(m1.explained[0] == doctest::Approx(1.0));

  CHECK_THROWS_AS(fit_pca(random_tensor({1, 4}, rng)), ConfigError);
}

TEST_CASE("explained-variance curve is monotone and ends at one") {
  Rng rng(15);
  nn::Tensor x = random_tensor({60, 7}, rng);
  PcaModel m = fit_pca(x);
  for (size_t k = 1; k < m.explained.size(); ++k) CHECK(m.explained[k] >= m.explained[k - 1]);
  CHECK(std::fabs(m.explained.back() - 1.0) <= 1e-9);
}

TEST_CASE("linear-kernel kpca matches pca scores up to sign") {
  Rng rng(12);
  nn::Tensor x = random_tensor({50, 5}, rng);
  PcaModel pca = fit_pca(x);
  KpcaModel kpca = fit_kpca(x, 5, /*degree=*/1.0, /*gamma=*/1.0, /*coef0=*/0.0);

  for (size_t i = 0; i < 50; ++i) {
    auto ks = kpca_project(kpca, {x.data.data() + i * 5, 5});
    auto ps = pca_project(pca, {x.data.data() + i * 5, 5});
    for (size_t c = 0; c < 5; ++c) {
      const double direct = std::fabs(ks[c] - ps[c]);
      const double flipped = std::fabs(ks[c] + ps[c]);
      CHECK(std::min(direct, flipped) < 1e-8);
    }
  }
}

TEST_CASE("kpca on duplicated rows projects duplicates identically") {
  Rng rng(33);
  nn::Tensor x = random_tensor({12, 4}, rng);
  nn::Tensor doubled = nn::Tensor::zeros({24, 4});
  std::copy(x.data.begin(), x.data.end(), doubled.data.begin());
  std::copy(x.data.begin(), x.data.end(), doubled.data.begin() + 48);
  KpcaModel m = fit_kpca(doubled, 3);
  for (size_t i = 0; i < 12; ++i) {
    auto a = kpca_project(m, {doubled.data.data() + i * 4, 4});
    auto b = kpca_project(m, {doubled.data.data() + (i + 12) * 4, 4});
    for (size_t c = 0; c < 3; ++c) CHECK(a[c] == doctest::Approx(b[c]).epsilon(1e-10));
  }
}

TEST_CASE("kpca eigenvalues on a 3-row toy match a hand eigendecomposition") {
  // rows of x chosen so the centered linear kernel is tiny and checkable
  nn::Tensor x({3, 2}, {1.0, 0.0, 0.0, 1.0, -1.0, -1.0});
  KpcaModel m = fit_kpca(x, 2, 1.0, 1.0, 0.0);
  // K = X X^T = [[1,0,-1],[0,1,-1],[-1,-1,2]]; centered K has eigenvalues
  // {0, 2/1... } compute via the centered Gram of mean-removed rows:
  // means = (0,0) so K is already centered. Characteristic roots of K:
  // trace 4, det 0; eigenvalues 0, 1, 3.
  REQUIRE(m.eigenvalues.size() == 2);
  CHECK(m.eigenvalues[0] == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(m.eigenvalues[1] == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("projecting a training row reproduces its training projection") {
  Rng rng(44);
  nn::Tensor x = random_tensor({20, 6}, rng);
  KpcaModel m = fit_kpca(x, 4);
  for (size_t i = 0; i < 20; ++i) {
    auto p = kpca_project(m, {x.data.data() + i * 6, 6});
    // training projection of row i = sqrt(lambda_c) * eigvec_c[i] = lambda_c * alpha_c[i]
    for (size_t c = 0; c < 4; ++c) {
      const double expect = m.eigenvalues[c] * m.alphas[c * 20 + i];
      CHECK(std::fabs(p[c] - expect) < 1e-10);
    }
  }
}

TEST_CASE("kpca training projections are centered and uncorrelated") {
  Rng rng(55);
  nn::Tensor x = random_tensor({40, 5}, rng);
  KpcaModel m = fit_kpca(x, 4);
  nn::Tensor proj = kpca_project_all(m, x);
  double trace = 0.0;
  std::vector<double> mean(4, 0.0);
  for (size_t i = 0; i < 40; ++i)
    for (size_t c = 0; c < 4; ++c) mean[c] += proj.at(i, c);
  for (double& v : mean) v /= 40.0;
  for (double v : mean) CHECK(std::fabs(v) < 1e-8);
  std::vector<double> cov(16, 0.0);
  for (size_t i = 0; i < 40; ++i)
    for (size_t a = 0; a < 4; ++a)
      for (size_t b = 0; b < 4; ++b)
        cov[a * 4 + b] += (proj.at(i, a) - mean[a]) * (proj.at(i, b) - mean[b]);
  for (size_t a = 0; a < 4; ++a) trace += cov[a * 4 + a];
  for (size_t a = 0; a < 4; ++a)
    for (size_t b = 0; b < 4; ++b)
      if (a != b) CHECK(std::fabs(cov[a * 4 + b]) < 1e-8 * trace);
}

TEST_CASE("zero input vector with coef0=1 projects to finite values") {
  Rng rng(66);
  nn::Tensor x = random_tensor({10, 3}, rng);
  KpcaModel m = fit_kpca(x, 2);
  std::vector<double> zero(3, 0.0);
  auto p = kpca_project(m, zero);
  for (double v : p) CHECK(std::isfinite(v));
}

TEST_CASE("requesting too many components shrinks out_dim with a flag") {
  // rank-deficient data: 5 duplicated rows
  nn::Tensor x = nn::Tensor::zeros({6, 2});
  for (size_t i = 0; i < 6; ++i) {
    x.at(i, 0) = static_cast<double>(i % 2);
    x.at(i, 1) = static_cast<double>(i % 2);
  }
  KpcaModel m = fit_kpca(x, 5, 1.0, 1.0, 0.0);
  CHECK(m.reduced);
  CHECK(m.out_dim < 5);
  CHECK_THROWS_AS(kpca_project(m, std::vector<double>{1.0, 2.0, 3.0}), ShapeError);
}

TEST_CASE("dimension policy by feature set") {
  CHECK(dimension_policy(1) == 30);
  CHECK(dimension_policy(2) == 50);
  CHECK_FALSE(dimension_policy(3).has_value());
  CHECK_THROWS_AS(dimension_policy(9), ConfigError);
}

TEST_CASE("seeded subsampling is deterministic and bounded") {
  Rng rng(77);
  nn::Tensor x = random_tensor({100, 3}, rng);
  nn::Tensor a = subsample_rows(x, 40, 9);
  nn::Tensor b = subsample_rows(x, 40, 9);
  CHECK(a.rows() == 40);
  CHECK(a.data == b.data);
  nn::Tensor c = subsample_rows(x, 200, 9);
  CHECK(c.rows() == 100);
}

TEST_CASE("kpca persistence round-trip in the checkpoint container") {
  Rng rng(88);
  nn::Tensor x = random_tensor({15, 4}, rng);
  KpcaModel m = fit_kpca(x, 3);
  save_kpca(m, "kpca_test.ntck");
  KpcaModel l = load_kpca("kpca_test.ntck");
  std::remove("kpca_test.ntck");
  std::vector<double> probe(4, 0.25);
  auto a = kpca_project(m, probe);
  auto b = kpca_project(l, probe);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-14));
}
