#pragma once

// Random instance generators and scalar reference implementations shared by
// the unit tests and the acceptance suite. The oracles deliberately avoid the
// library's code paths (no Eigen products, no KD-tree).

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <vector>

#include "fpt/geometry.hpp"
#include "fpt/rng.hpp"
#include "fpt/scene_types.hpp"
#include "fpt/embedding_matrix.hpp"

namespace fpt::testing {

inline Mat3 random_rotation(Rng& rng) {
  // Unit quaternion from four normals.
  double q[4];
  double n = 0.0;
  do {
    n = 0.0;
    for (double& x : q) {
      x = rng.normal();
      n += x * x;
    }
  } while (n < 1e-12);
  n = std::sqrt(n);
  const double w = q[0] / n, x = q[1] / n, y = q[2] / n, z = q[3] / n;
  Mat3 r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
      2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
      2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return r;
}

inline RigidTransform random_transform(Rng& rng, double max_translation = 10.0) {
  const Vec3 t(rng.uniform(-max_translation, max_translation),
               rng.uniform(-max_translation, max_translation),
               rng.uniform(-max_translation, max_translation));
  return RigidTransform(random_rotation(rng), t);
}

inline PointCloud random_cloud(Rng& rng, std::size_t n, Eigen::Index attrs, double extent = 10.0,
                               double timestamp = 0.0) {
  CoordMatrix c(static_cast<Eigen::Index>(n), 3);
  AttrMatrix a(static_cast<Eigen::Index>(n), attrs);
  for (Eigen::Index i = 0; i < c.size(); ++i) c.data()[i] = rng.uniform(-extent, extent);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.uniform();
  return PointCloud(std::move(c), std::move(a), timestamp);
}

inline RowMatrixXd random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  RowMatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

inline RowMatrixXd random_unit_rows(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  RowMatrixXd m = random_matrix(rng, rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    double s = 0.0;
    for (Eigen::Index c = 0; c < cols; ++c) s += m(i, c) * m(i, c);
    s = std::sqrt(s);
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) /= s;
  }
  return m;
}

/// R p + t with explicit left-to-right sums.
inline Vec3 apply_scalar(const RigidTransform& t, const Vec3& p) {
  const Mat3& r = t.rotation();
  Vec3 out;
  for (int i = 0; i < 3; ++i)
    out[i] = ((r(i, 0) * p[0] + r(i, 1) * p[1]) + r(i, 2) * p[2]) + t.translation()[i];
  return out;
}

/// -(1/M) sum_i log softmax_i(<q_i, k_.> / tau), double loops.
inline double info_nce_oracle(const RowMatrixXd& q, const RowMatrixXd& k, double tau) {
  const Eigen::Index m = q.rows();
  double total = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    std::vector<double> logits(static_cast<std::size_t>(m));
    double mx = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < m; ++j) {
      double dot = 0.0;
      for (Eigen::Index c = 0; c < q.cols(); ++c) dot += q(i, c) * k(j, c);
      logits[j] = dot / tau;
      mx = std::max(mx, logits[j]);
    }
    double sum = 0.0;
    for (double l : logits) sum += std::exp(l - mx);
    total += (mx + std::log(sum)) - logits[i];
  }
  return total / static_cast<double>(m);
}

inline double d2s_oracle(const RowMatrixXd& a, const RowMatrixXd& b) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    double dot = 0.0;
    for (Eigen::Index c = 0; c < a.cols(); ++c) dot += a(i, c) * b(i, c);
    total += 1.0 - dot;
  }
  return total / static_cast<double>(a.rows());
}

/// Temporal voting by exhaustive search. Uses the same squared-distance
/// expression and accumulation order as the library, so results must agree
/// bit-for-bit.
struct VoteOracleFrame {
  const PointCloud& cloud;
  const ScoreMatrix& scores;
  const RigidTransform& pose;
};

inline ScoreMatrix vote_oracle(const VoteOracleFrame& prev, const VoteOracleFrame& curr,
                               const VoteOracleFrame& next, double sigma,
                               std::vector<int>* counts = nullptr) {
  auto unify = [](const VoteOracleFrame& f) {
    std::vector<Vec3> pts;
    for (std::size_t i = 0; i < f.cloud.size(); ++i)
      pts.push_back(f.pose.is_identity() ? f.cloud.point(i) : apply_scalar(f.pose, f.cloud.point(i)));
    return pts;
  };
  const auto pp = unify(prev), cp = unify(curr), np = unify(next);
  ScoreMatrix out = curr.scores;
  if (counts) counts->assign(cp.size(), 1);
  for (std::size_t i = 0; i < cp.size(); ++i) {
    int n = 1;
    auto add = [&](const std::vector<Vec3>& pts, const ScoreMatrix& s) {
      std::size_t best = 0;
      double best_d2 = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < pts.size(); ++j) {
        const double dx = cp[i].x() - pts[j].x();
        const double dy = cp[i].y() - pts[j].y();
        const double dz = cp[i].z() - pts[j].z();
        const double d2 = (dx * dx + dy * dy) + dz * dz;
        if (d2 < best_d2) {
          best_d2 = d2;
          best = j;
        }
      }
      if (!pts.empty() && std::sqrt(best_d2) < sigma) {
        for (Eigen::Index c = 0; c < out.cols(); ++c)
          out(static_cast<Eigen::Index>(i), c) += s(static_cast<Eigen::Index>(best), c);
        ++n;
      }
    };
    add(pp, prev.scores);
    add(np, next.scores);
    if (n > 1)
      for (Eigen::Index c = 0; c < out.cols(); ++c)
        out(static_cast<Eigen::Index>(i), c) /= static_cast<double>(n);
    if (counts) (*counts)[i] = n;
  }
  return out;
}

/// Random probability rows (normalized uniforms).
inline ScoreMatrix random_simplex_rows(Rng& rng, std::size_t n, std::size_t c) {
  ScoreMatrix s(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(c));
  for (Eigen::Index i = 0; i < s.rows(); ++i) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < s.cols(); ++j) sum += (s(i, j) = rng.uniform() + 1e-3);
    for (Eigen::Index j = 0; j < s.cols(); ++j) s(i, j) /= sum;
  }
  return s;
}

}  // namespace fpt::testing
