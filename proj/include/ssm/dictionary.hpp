#pragma once

#include <Eigen/Core>
#include <stdexcept>
#include <string>
#include <vector>

#include "ssm/block_layout.hpp"

namespace ssm {

// Columns with l2 norm below this are rejected as zero rather than silently
// dropped; dropping would shift the block layout and break label indexing.
inline constexpr double kZeroColumnTol = 1e-12;

/// Concatenated training matrix S = [S_1, ..., S_C] together with its block
/// layout. Immutable by convention once built; all block operations work on
/// column ranges so slicing never copies.
struct TrainingDictionary {
  Eigen::MatrixXd data;  // d x N_total, columns are training samples
  BlockLayout layout;
  bool normalized = false;

  int feature_dim() const { return static_cast<int>(data.rows()); }
  int num_classes() const { return layout.num_classes(); }
  int total_columns() const { return layout.total(); }
};

/// Concatenates per-class training matrices in class order.
inline TrainingDictionary build_dictionary(
    const std::vector<Eigen::MatrixXd>& class_datasets) {
  if (class_datasets.empty()) {
    throw std::invalid_argument("build_dictionary: no class datasets given");
  }
  const Eigen::Index d = class_datasets.front().rows();
  std::vector<int> sizes;
  sizes.reserve(class_datasets.size());
  Eigen::Index total = 0;
  for (std::size_t k = 0; k < class_datasets.size(); ++k) {
    const auto& mat = class_datasets[k];
    if (mat.cols() == 0) {
      throw std::invalid_argument("build_dictionary: class " +
                                  std::to_string(k) + " has no samples");
    }
    if (mat.rows() != d) {
      throw std::invalid_argument(
          "build_dictionary: class " + std::to_string(k) + " has row dim " +
          std::to_string(mat.rows()) + ", expected " + std::to_string(d));
    }
    sizes.push_back(static_cast<int>(mat.cols()));
    total += mat.cols();
  }

  TrainingDictionary dict;
  dict.data.resize(d, total);
  Eigen::Index col = 0;
  for (const auto& mat : class_datasets) {
    dict.data.middleCols(col, mat.cols()) = mat;
    col += mat.cols();
  }
  dict.layout = BlockLayout(std::move(sizes));
  dict.normalized = false;
  return dict;
}

/// Scales every column to unit l2 norm. Idempotent; the span of each block
/// is unchanged.
inline TrainingDictionary normalize_columns(TrainingDictionary dict) {
  for (int k = 0; k < dict.num_classes(); ++k) {
    const int off = dict.layout.offset(k);
    for (int j = 0; j < dict.layout.size(k); ++j) {
      const double norm = dict.data.col(off + j).norm();
      if (norm < kZeroColumnTol) {
        throw std::invalid_argument(
            "normalize_columns: zero column in class " + std::to_string(k) +
            ", column " + std::to_string(j) + " (global column " +
            std::to_string(off + j) + ")");
      }
      dict.data.col(off + j) /= norm;
    }
  }
  dict.normalized = true;
  return dict;
}

/// View of class k's d x n_k training block. No copy.
inline Eigen::Block<const Eigen::MatrixXd> block_slice(
    const TrainingDictionary& dict, int k) {
  return dict.data.middleCols(dict.layout.offset(k), dict.layout.size(k));
}

}  // namespace ssm
