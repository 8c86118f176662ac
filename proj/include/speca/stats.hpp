#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "speca/tensor.hpp"

namespace speca {

enum class NormKind { L1, L2, Linf };

/// Exact C(i,j) for 0 <= j <= i <= 12; larger orders throw "order overflow".
std::int64_t binomial(int i, int j);

double norm(const Tensor& v, NormKind kind);

/// Sample Pearson correlation; throws "zero variance" on constant input.
double pearson_r(const std::vector<double>& xs, const std::vector<double>& ys);

/// Mean-centered projection onto the top-2 principal directions, components
/// ordered by descending explained variance. Sign convention: each
/// component's largest-magnitude loading is positive. Uses the covariance
/// (d x d) or Gram (n x n) eigenproblem, whichever is smaller.
std::vector<std::pair<double, double>> pca_2d(const std::vector<Tensor>& points);

/// Jacobi eigendecomposition of a symmetric matrix (row-major n x n).
/// Returns eigenvalues in descending order with matching eigenvectors
/// (each eigenvector is a row of the second output).
std::pair<std::vector<double>, std::vector<std::vector<double>>>
symmetric_eigen(const std::vector<double>& a, std::size_t n);

}  // namespace speca
