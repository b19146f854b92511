#pragma once

#include <Eigen/Core>
#include <Eigen/SVD>
#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ssm/block_layout.hpp"
#include "ssm/dictionary.hpp"

namespace ssm {

/// Row-block-sparse coefficient matrix with its support made explicit.
/// Rows of blocks outside `support` are exact zeros, never tiny floats.
struct CoefficientMatrix {
  Eigen::MatrixXd data;  // N_total x n
  BlockLayout layout;
  std::vector<int> support;  // ascending class indices with a nonzero block

  int num_queries() const { return static_cast<int>(data.cols()); }
};

namespace detail {

inline void check_rows(const Eigen::MatrixXd& X, const BlockLayout& layout,
                       const char* who) {
  if (X.rows() != layout.total()) {
    throw std::invalid_argument(std::string(who) + ": matrix has " +
                                std::to_string(X.rows()) +
                                " rows but layout totals " +
                                std::to_string(layout.total()));
  }
}

}  // namespace detail

/// The map into classification space: entry k is the Frobenius norm of row
/// block k. For a single column this is the l2 norm of each sub-vector.
inline Eigen::VectorXd class_energy_map(const Eigen::MatrixXd& X,
                                        const BlockLayout& layout) {
  detail::check_rows(X, layout, "class_energy_map");
  Eigen::VectorXd gamma(layout.num_classes());
  for (int k = 0; k < layout.num_classes(); ++k) {
    gamma[k] = X.middleRows(layout.offset(k), layout.size(k)).norm();
  }
  return gamma;
}

/// Number of blocks with energy strictly above `tol`. The default tol of 0
/// suits exactly-sparse inputs; use ~1e-10 for computed solutions.
inline int block_l0(const Eigen::MatrixXd& X, const BlockLayout& layout,
                    double tol = 0.0) {
  if (tol < 0.0) {
    throw std::invalid_argument("block_l0: negative tolerance");
  }
  const Eigen::VectorXd gamma = class_energy_map(X, layout);
  return static_cast<int>((gamma.array() > tol).count());
}

/// Sum of block Frobenius norms, the l1 norm in classification space.
inline double block_l1(const Eigen::MatrixXd& X, const BlockLayout& layout) {
  return class_energy_map(X, layout).sum();
}

/// Stacks the rows of X into one long vector (vec of X transposed). Block
/// sparsity over the derived layout N' = {n*n_1, ..., n*n_C} equals block
/// sparsity of X over N.
inline std::pair<Eigen::VectorXd, BlockLayout> row_block_vectorize(
    const Eigen::MatrixXd& X, const BlockLayout& layout) {
  detail::check_rows(X, layout, "row_block_vectorize");
  const int n = static_cast<int>(X.cols());
  if (n == 0) {
    throw std::invalid_argument("row_block_vectorize: matrix has no columns");
  }
  Eigen::VectorXd v(X.size());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    v.segment(i * n, n) = X.row(i).transpose();
  }
  std::vector<int> scaled(layout.sizes());
  for (int& s : scaled) s *= n;
  return {std::move(v), BlockLayout(std::move(scaled))};
}

namespace detail {

inline std::uint64_t binomial_capped(int n, int k, std::uint64_t cap) {
  std::uint64_t result = 1;
  for (int i = 1; i <= k; ++i) {
    result = result * static_cast<std::uint64_t>(n - k + i) /
             static_cast<std::uint64_t>(i);
    if (result > cap) return cap + 1;
  }
  return result;
}

/// Visits all size-m index subsets of {0,...,c-1} in lexicographic order.
template <typename Visitor>
void for_each_support(int c, int m, Visitor&& visit) {
  std::vector<int> idx(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) idx[static_cast<std::size_t>(i)] = i;
  while (true) {
    visit(idx);
    int i = m - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == c - m + i) --i;
    if (i < 0) break;
    ++idx[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < m; ++j) {
      idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
}

inline Eigen::MatrixXd gather_blocks(const TrainingDictionary& dict,
                                     const std::vector<int>& support) {
  int cols = 0;
  for (int k : support) cols += dict.layout.size(k);
  Eigen::MatrixXd sub(dict.data.rows(), cols);
  int at = 0;
  for (int k : support) {
    sub.middleCols(at, dict.layout.size(k)) = block_slice(dict, k);
    at += dict.layout.size(k);
  }
  return sub;
}

}  // namespace detail

/// Exhaustive block-RIP constant at block sparsity M: the worst two-sided
/// isometry defect max(1 - sigma_min^2, sigma_max^2 - 1) over all size-M
/// block supports, each evaluated exactly by SVD. Exponential in M, so it is
/// guarded by `max_supports` and intended as a desk-scale verification tool.
inline double estimate_block_rip_constant(const TrainingDictionary& dict,
                                          int block_sparsity,
                                          std::uint64_t max_supports = 10000) {
  if (!dict.normalized) {
    throw std::invalid_argument(
        "estimate_block_rip_constant: dictionary must be column-normalized");
  }
  const int c = dict.num_classes();
  if (block_sparsity < 1 || block_sparsity > c) {
    throw std::invalid_argument(
        "estimate_block_rip_constant: block sparsity must be in [1, C]");
  }
  if (detail::binomial_capped(c, block_sparsity, max_supports) > max_supports) {
    throw std::runtime_error(
        "estimate_block_rip_constant: C choose M exceeds the support cap of " +
        std::to_string(max_supports));
  }
  double delta = 0.0;
  detail::for_each_support(c, block_sparsity, [&](const std::vector<int>& sup) {
    const Eigen::MatrixXd sub = detail::gather_blocks(dict, sup);
    const Eigen::VectorXd sigma = Eigen::JacobiSVD<Eigen::MatrixXd>(sub).singularValues();
    const double smax = sigma.size() > 0 ? sigma(0) : 0.0;
    double smin = 0.0;
    // Columns beyond the row count are annihilated, so sigma_min is 0 there.
    if (sub.cols() <= sub.rows() && sigma.size() > 0) {
      smin = sigma(sigma.size() - 1);
    }
    delta = std::max({delta, 1.0 - smin * smin, smax * smax - 1.0});
  });
  return delta;
}

}  // namespace ssm
