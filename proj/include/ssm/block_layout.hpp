#pragma once

#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace ssm {

/// Partition of dictionary columns (equivalently, coefficient rows) into
/// class blocks. Class k owns the half-open column range
/// [offset(k), offset(k) + size(k)).
class BlockLayout {
 public:
  BlockLayout() = default;

  explicit BlockLayout(std::vector<int> sizes) : sizes_(std::move(sizes)) {
    if (sizes_.empty()) {
      throw std::invalid_argument("BlockLayout: sizes must be non-empty");
    }
    offsets_.reserve(sizes_.size() + 1);
    offsets_.push_back(0);
    for (std::size_t k = 0; k < sizes_.size(); ++k) {
      if (sizes_[k] < 1) {
        throw std::invalid_argument("BlockLayout: block " + std::to_string(k) +
                                    " has non-positive size " +
                                    std::to_string(sizes_[k]));
      }
      offsets_.push_back(offsets_.back() + sizes_[k]);
    }
  }

  /// The flat layout {1,...,1}: every column is its own block, so block
  /// sparsity degenerates to plain entrywise sparsity.
  static BlockLayout flat(int n_total) {
    return BlockLayout(std::vector<int>(static_cast<std::size_t>(n_total), 1));
  }

  int num_classes() const { return static_cast<int>(sizes_.size()); }
  int total() const { return offsets_.back(); }

  int size(int k) const {
    check_index(k);
    return sizes_[static_cast<std::size_t>(k)];
  }

  int offset(int k) const {
    check_index(k);
    return offsets_[static_cast<std::size_t>(k)];
  }

  const std::vector<int>& sizes() const { return sizes_; }

  bool operator==(const BlockLayout& other) const {
    return sizes_ == other.sizes_;
  }

 private:
  void check_index(int k) const {
    if (k < 0 || k >= num_classes()) {
      throw std::out_of_range("BlockLayout: class index " + std::to_string(k) +
                              " outside [0, " + std::to_string(num_classes()) +
                              ")");
    }
  }

  std::vector<int> sizes_;
  std::vector<int> offsets_{0};
};

}  // namespace ssm
