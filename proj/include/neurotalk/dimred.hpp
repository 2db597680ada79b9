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

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "neurotalk/tensor.hpp"

namespace neurotalk::dimred {

using nn::Tensor;

/// Dense symmetric eigensolver (Householder tridiagonalization + implicit QL).
/// Returns eigenvalues ascending; eigenvector j lives in column j of vectors.
void eig_symmetric(const std::vector<double>& a, size_t n, std::vector<double>& eigenvalues,
                   std::vector<double>& vectors);

struct PcaModel {
  std::vector<double> mean;         // d
  std::vector<double> eigenvalues;  // descending
  std::vector<double> axes;         // k-th axis in row k (k x d)
  std::vector<double> explained;    // cumulative explained-variance curve
};

/// Covariance eigendecomposition; needs at least two samples.
PcaModel fit_pca(const Tensor& x);

/// Score of one vector under a fitted PCA (centered projection).
std::vector<double> pca_project(const PcaModel& m, std::span<const double> v);

struct KpcaModel {
  Tensor training;                  // n x d reference vectors
  double degree = 3.0;
  double gamma = 0.0;               // 0 means 1/d at fit time
  double coef0 = 1.0;
  std::vector<double> eigenvalues;  // retained, descending
  std::vector<double> alphas;       // out_dim x n, scaled by 1/sqrt(lambda)
  std::vector<double> row_means;    // of the uncentered training kernel
  double grand_mean = 0.0;
  size_t out_dim = 0;
  bool reduced = false;             // out_dim was cut to the usable eigencount
};

/// Polynomial-kernel KPCA: K_ij = (gamma x_i.x_j + coef0)^degree,
/// double-centered, symmetric eigendecomposition, eigenvectors scaled by
/// 1/sqrt(lambda). Asking for more components than there are eigenvalues
/// above 1e-12 shrinks out_dim and sets the reduced flag.
KpcaModel fit_kpca(const Tensor& x, size_t out_dim, double degree = 3.0, double gamma = 0.0,
                   double coef0 = 1.0);

std::vector<double> kpca_project(const KpcaModel& m, std::span<const double> v);

/// Projects every row of x.
Tensor kpca_project_all(const KpcaModel& m, const Tensor& x);

/// Per-set reduction targets; nullopt keeps the original dimension.
std::optional<size_t> dimension_policy(int set_id);

/// Seeded row subsample used to bound kernel-matrix size on large fits.
Tensor subsample_rows(const Tensor& x, size_t max_rows, uint64_t seed);

void save_kpca(const KpcaModel& m, const std::string& path);
KpcaModel load_kpca(const std::string& path);

}  // namespace neurotalk::dimred
