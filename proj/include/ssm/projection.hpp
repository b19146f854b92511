#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "ssm/rng.hpp"

namespace ssm {

enum class ProjectionKind { gaussian, downsample, identity };

inline const char* to_string(ProjectionKind kind) {
  switch (kind) {
    case ProjectionKind::gaussian: return "gaussian";
    case ProjectionKind::downsample: return "downsample";
    case ProjectionKind::identity: return "identity";
  }
  return "?";
}

/// Data-independent dimensionality reduction applied identically to the
/// dictionary and the queries. Gaussian entries are i.i.d. N(0, 1/d_hat) so
/// projected squared norms are unbiased; the matrix regenerates bit-exactly
/// from (dims, seed). The identity and downsample kinds are kept as row
/// selections and only materialized on demand.
struct ProjectionMatrix {
  ProjectionKind kind = ProjectionKind::identity;
  int input_dim = 0;   // d
  int output_dim = 0;  // d_hat
  std::uint64_t seed = 0;
  Eigen::MatrixXd data;            // gaussian only: d_hat x d
  std::vector<int> selected_rows;  // downsample only

  /// Explicit d_hat x d matrix for any kind.
  Eigen::MatrixXd dense() const {
    if (kind == ProjectionKind::gaussian) return data;
    Eigen::MatrixXd full = Eigen::MatrixXd::Zero(output_dim, input_dim);
    if (kind == ProjectionKind::identity) {
      full.setIdentity();
    } else {
      for (int i = 0; i < output_dim; ++i) full(i, selected_rows[i]) = 1.0;
    }
    return full;
  }
};

/// Builds the projection. Gaussian entries are drawn row-major with a single
/// SplitMix64/Box-Muller stream; downsampling keeps coordinate
/// floor(i*d/d_hat) for output row i (every (d/d_hat)-th coordinate when the
/// ratio is integral); identity requires d_hat == d.
inline ProjectionMatrix make_projection(int d, int d_hat, std::uint64_t seed,
                                        ProjectionKind kind) {
  if (d_hat < 1 || d_hat > d) {
    throw std::invalid_argument("make_projection: need 1 <= d_hat <= d, got " +
                                std::to_string(d_hat) + " of " +
                                std::to_string(d));
  }
  ProjectionMatrix proj;
  proj.kind = kind;
  proj.input_dim = d;
  proj.output_dim = d_hat;
  proj.seed = seed;
  switch (kind) {
    case ProjectionKind::gaussian: {
      Rng rng(seed);
      const double scale = 1.0 / std::sqrt(static_cast<double>(d_hat));
      proj.data.resize(d_hat, d);
      for (int i = 0; i < d_hat; ++i) {
        for (int j = 0; j < d; ++j) {
          proj.data(i, j) = scale * rng.normal();
        }
      }
      break;
    }
    case ProjectionKind::downsample: {
      proj.selected_rows.resize(static_cast<std::size_t>(d_hat));
      for (int i = 0; i < d_hat; ++i) {
        proj.selected_rows[static_cast<std::size_t>(i)] = static_cast<int>(
            (static_cast<std::int64_t>(i) * d) / d_hat);
      }
      break;
    }
    case ProjectionKind::identity: {
      if (d_hat != d) {
        throw std::invalid_argument(
            "make_projection: identity requires d_hat == d");
      }
      break;
    }
  }
  return proj;
}

/// Applies the projection: the matrix product P * X.
inline Eigen::MatrixXd project(const ProjectionMatrix& proj,
                               const Eigen::MatrixXd& X) {
  if (X.rows() != proj.input_dim) {
    throw std::invalid_argument("project: input has " +
                                std::to_string(X.rows()) + " rows, expected " +
                                std::to_string(proj.input_dim));
  }
  switch (proj.kind) {
    case ProjectionKind::gaussian:
      return proj.data * X;
    case ProjectionKind::identity:
      return X;
    case ProjectionKind::downsample: {
      Eigen::MatrixXd out(proj.output_dim, X.cols());
      for (int i = 0; i < proj.output_dim; ++i) {
        out.row(i) = X.row(proj.selected_rows[static_cast<std::size_t>(i)]);
      }
      return out;
    }
  }
  throw std::logic_error("project: unreachable");
}

/// Advisory lower bound ceil(c * m * ln(d/m)) on the reduced dimension for
/// recovering m-sparse vectors, clamped to [1, d]. The oversampling constant
/// defaults to 2.
inline int min_projection_dim(int m, int d, double c = 2.0) {
  if (m < 1 || m >= d) {
    throw std::invalid_argument("min_projection_dim: need 1 <= m < d");
  }
  if (c <= 0.0) {
    throw std::invalid_argument("min_projection_dim: need c > 0");
  }
  const double bound =
      std::ceil(c * static_cast<double>(m) *
                std::log(static_cast<double>(d) / static_cast<double>(m)));
  const auto clamped = std::max(1.0, std::min(bound, static_cast<double>(d)));
  return static_cast<int>(clamped);
}

}  // namespace ssm
