#pragma once

#include <Eigen/Core>
#include <Eigen/IterativeLinearSolvers>
#include <Eigen/QR>
#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ssm/blocksparse.hpp"
#include "ssm/dictionary.hpp"

namespace ssm {

enum class LsqMethod {
  auto_select,  // direct up to 2000 support columns, CG above
  direct,       // column-pivoted orthogonal factorization, minimum-norm
  conjugate_gradient,
};

struct SolverOptions {
  int sparsity_level = 4;   // M0
  double residual_tol = -1.0;  // < 0: defaults to 1e-9 * ||Q||_F
  int max_support = 0;         // 0: the 2*M0 stopping trigger
  LsqMethod lsq_method = LsqMethod::auto_select;
  double cg_tol = 1e-10;
  int cg_max_iter = 500;
};

/// Result of the greedy decomposition. `support` lists blocks in selection
/// order; `coefficients.support` holds the same classes sorted ascending.
struct Decomposition {
  CoefficientMatrix coefficients;
  std::vector<int> support;
  double residual_norm = 0.0;
  int iterations = 0;
  std::vector<double> per_iteration_residuals;
  int cg_fallbacks = 0;
  std::vector<std::string> warnings;
};

namespace detail {

inline int support_columns(const BlockLayout& layout,
                           const std::vector<int>& support) {
  int cols = 0;
  for (int k : support) cols += layout.size(k);
  return cols;
}

}  // namespace detail

/// Least squares restricted to the blocks in `support` (ascending order
/// assumed), solved for every query column independently.
///
/// Returns the stacked coefficients over the selected blocks and the residual
/// matrix Q - S_I * X. The direct path is a complete orthogonal decomposition
/// (column-pivoted), which yields the minimum-norm solution under rank
/// deficiency; the CG path solves the Jacobi-preconditioned normal equations
/// and falls back to the direct solve per query if it fails to converge.
inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> least_squares_on_support(
    const Eigen::MatrixXd& queries, const TrainingDictionary& dict,
    const std::vector<int>& support, const SolverOptions& opts = {},
    int* cg_fallbacks = nullptr) {
  if (support.empty()) {
    throw std::invalid_argument("least_squares_on_support: empty support");
  }
  for (int k : support) {
    if (k < 0 || k >= dict.num_classes()) {
      throw std::out_of_range("least_squares_on_support: class index " +
                              std::to_string(k) + " out of range");
    }
  }
  if (queries.rows() != dict.data.rows()) {
    throw std::invalid_argument(
        "least_squares_on_support: query row dim " +
        std::to_string(queries.rows()) + " != dictionary row dim " +
        std::to_string(dict.data.rows()));
  }

  const Eigen::MatrixXd sub = detail::gather_blocks(dict, support);
  const Eigen::Index m = sub.cols();

  LsqMethod method = opts.lsq_method;
  if (method == LsqMethod::auto_select) {
    method = m <= 2000 ? LsqMethod::direct : LsqMethod::conjugate_gradient;
  }

  Eigen::MatrixXd coeffs(m, queries.cols());
  if (method == LsqMethod::direct) {
    coeffs = sub.completeOrthogonalDecomposition().solve(queries);
  } else {
    const Eigen::MatrixXd gram = sub.transpose() * sub;
    const Eigen::MatrixXd rhs = sub.transpose() * queries;
    Eigen::ConjugateGradient<Eigen::MatrixXd, Eigen::Lower | Eigen::Upper>
        cg(gram);
    cg.setTolerance(opts.cg_tol);
    cg.setMaxIterations(opts.cg_max_iter);
    std::optional<Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>> cod;
    for (Eigen::Index j = 0; j < queries.cols(); ++j) {
      coeffs.col(j) = cg.solve(rhs.col(j));
      if (cg.info() != Eigen::Success) {
        if (!cod) cod.emplace(sub);
        coeffs.col(j) = cod->solve(queries.col(j));
        if (cg_fallbacks) ++*cg_fallbacks;
      }
    }
  }
  Eigen::MatrixXd residual = queries - sub * coeffs;
  return {std::move(coeffs), std::move(residual)};
}

namespace detail {

/// Scatters stacked support coefficients into a full N x n matrix whose rows
/// outside the support are exact zeros.
inline CoefficientMatrix scatter_coefficients(const Eigen::MatrixXd& stacked,
                                              const BlockLayout& layout,
                                              const std::vector<int>& support,
                                              Eigen::Index n) {
  CoefficientMatrix out;
  out.layout = layout;
  out.data = Eigen::MatrixXd::Zero(layout.total(), n);
  int at = 0;
  for (int k : support) {
    out.data.middleRows(layout.offset(k), layout.size(k)) =
        stacked.middleRows(at, layout.size(k));
    at += layout.size(k);
  }
  for (int k : support) {
    if (!out.data.middleRows(layout.offset(k), layout.size(k)).isZero(0.0)) {
      out.support.push_back(k);
    }
  }
  return out;
}

/// ROMP's regularization rule: among contiguous windows of the
/// descending-sorted candidates in which the largest energy is at most twice
/// the smallest, pick the window with maximal total squared energy. Sorting
/// makes maximal comparable subsets contiguous, so the O(|J|^2) window scan
/// is exhaustive.
inline std::pair<std::size_t, std::size_t> max_energy_comparable_window(
    const std::vector<double>& gamma_sorted) {
  std::size_t best_begin = 0, best_end = 1;
  double best_energy = gamma_sorted[0] * gamma_sorted[0];
  for (std::size_t begin = 0; begin < gamma_sorted.size(); ++begin) {
    double energy = 0.0;
    for (std::size_t end = begin; end < gamma_sorted.size(); ++end) {
      if (gamma_sorted[begin] > 2.0 * gamma_sorted[end]) break;
      energy += gamma_sorted[end] * gamma_sorted[end];
      if (energy > best_energy) {
        best_energy = energy;
        best_begin = begin;
        best_end = end + 1;
      }
    }
  }
  return {best_begin, best_end};
}

}  // namespace detail

/// Sparse subspace decomposition by block-regularized orthogonal matching
/// pursuit.
///
/// Each iteration correlates the dictionary with the residual (U = S^T R),
/// maps to class energies gamma, keeps the M0 largest (or all nonzero,
/// whichever set is smaller), selects the maximal-energy comparable window of
/// that candidate list, merges it into the support, re-solves least squares
/// per query over all selected blocks, and updates the residual. Stops when
/// ||R||_F falls to the tolerance or the support reaches 2*M0 blocks.
inline Decomposition ssd_romp(const Eigen::MatrixXd& queries,
                              const TrainingDictionary& dict,
                              const SolverOptions& opts = {}) {
  if (!dict.normalized) {
    throw std::invalid_argument(
        "ssd_romp: dictionary columns must be normalized");
  }
  if (queries.rows() != dict.data.rows()) {
    throw std::invalid_argument("ssd_romp: query row dim " +
                                std::to_string(queries.rows()) +
                                " != dictionary row dim " +
                                std::to_string(dict.data.rows()));
  }
  if (queries.cols() < 1) {
    throw std::invalid_argument("ssd_romp: need at least one query");
  }
  if (opts.sparsity_level < 1) {
    throw std::invalid_argument("ssd_romp: sparsity level must be >= 1");
  }

  const int num_classes = dict.num_classes();
  const double query_norm = queries.norm();
  const double tol =
      opts.residual_tol >= 0.0 ? opts.residual_tol : 1e-9 * query_norm;
  const int max_support =
      opts.max_support > 0 ? opts.max_support : 2 * opts.sparsity_level;

  Decomposition result;
  result.coefficients.layout = dict.layout;
  result.coefficients.data =
      Eigen::MatrixXd::Zero(dict.total_columns(), queries.cols());
  result.residual_norm = query_norm;
  if (query_norm <= tol) return result;

  std::vector<char> selected(static_cast<std::size_t>(num_classes), 0);
  std::vector<int> support_sorted;
  Eigen::MatrixXd stacked;  // coefficients over support_sorted
  Eigen::MatrixXd residual = queries;

  while (true) {
    const Eigen::MatrixXd correlation = dict.data.transpose() * residual;
    const Eigen::VectorXd gamma = class_energy_map(correlation, dict.layout);

    // Candidates: the M0 biggest of gamma or all of its nonzero entries,
    // whichever set is smaller. Blocks already selected are orthogonal to the
    // residual up to roundoff and are excluded outright.
    std::vector<int> candidates;
    candidates.reserve(static_cast<std::size_t>(num_classes));
    for (int k = 0; k < num_classes; ++k) {
      if (!selected[static_cast<std::size_t>(k)] && gamma[k] > 0.0) {
        candidates.push_back(k);
      }
    }
    if (candidates.empty()) {
      result.warnings.push_back(
          "ssd_romp: no selectable block; residual cannot be reduced further");
      break;
    }
    std::sort(candidates.begin(), candidates.end(), [&](int a, int b) {
      if (gamma[a] != gamma[b]) return gamma[a] > gamma[b];
      return a < b;  // deterministic tie-break: lower class index first
    });
    if (candidates.size() > static_cast<std::size_t>(opts.sparsity_level)) {
      candidates.resize(static_cast<std::size_t>(opts.sparsity_level));
    }

    std::vector<double> gamma_sorted(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      gamma_sorted[i] = gamma[candidates[i]];
    }
    const auto [begin, end] = detail::max_energy_comparable_window(gamma_sorted);
    for (std::size_t i = begin; i < end; ++i) {
      result.support.push_back(candidates[i]);
      selected[static_cast<std::size_t>(candidates[i])] = 1;
    }
    support_sorted = result.support;
    std::sort(support_sorted.begin(), support_sorted.end());

    auto [new_stacked, new_residual] = least_squares_on_support(
        queries, dict, support_sorted, opts, &result.cg_fallbacks);
    stacked = std::move(new_stacked);
    residual = std::move(new_residual);
    result.residual_norm = residual.norm();
    result.per_iteration_residuals.push_back(result.residual_norm);
    ++result.iterations;

    if (result.residual_norm <= tol ||
        static_cast<int>(result.support.size()) >= max_support) {
      break;
    }
  }
  if (!support_sorted.empty()) {
    result.coefficients = detail::scatter_coefficients(
        stacked, dict.layout, support_sorted, queries.cols());
  }
  if (result.cg_fallbacks > 0) {
    result.warnings.push_back(
        "ssd_romp: conjugate gradient failed to converge on " +
        std::to_string(result.cg_fallbacks) +
        " solve(s); fell back to the direct method");
  }
  return result;
}

struct BruteForceResult {
  std::vector<int> support;  // ascending
  CoefficientMatrix coefficients;
};

/// Exact block-l0 oracle: enumerates supports by growing cardinality (and
/// lexicographically within one cardinality) and returns the first whose
/// least-squares residual is at most eps. Exponential time; refuses to start
/// if the enumeration would exceed `max_supports`.
inline std::optional<BruteForceResult> brute_force_block_l0(
    const Eigen::MatrixXd& queries, const TrainingDictionary& dict,
    int max_block_sparsity, double eps, std::uint64_t max_supports = 200000) {
  const int num_classes = dict.num_classes();
  if (max_block_sparsity < 1 || max_block_sparsity > num_classes) {
    throw std::invalid_argument(
        "brute_force_block_l0: sparsity bound must be in [1, C]");
  }
  std::uint64_t total = 0;
  for (int m = 1; m <= max_block_sparsity; ++m) {
    total += detail::binomial_capped(num_classes, m, max_supports);
    if (total > max_supports) {
      throw std::runtime_error(
          "brute_force_block_l0: enumeration would exceed the cap of " +
          std::to_string(max_supports) + " supports");
    }
  }

  SolverOptions direct;
  direct.lsq_method = LsqMethod::direct;
  for (int m = 1; m <= max_block_sparsity; ++m) {
    std::optional<BruteForceResult> found;
    detail::for_each_support(num_classes, m, [&](const std::vector<int>& sup) {
      if (found) return;
      auto [stacked, residual] =
          least_squares_on_support(queries, dict, sup, direct);
      if (residual.norm() <= eps) {
        found = BruteForceResult{
            sup, detail::scatter_coefficients(stacked, dict.layout, sup,
                                              queries.cols())};
      }
    });
    if (found) return found;
  }
  return std::nullopt;
}

}  // namespace ssm
