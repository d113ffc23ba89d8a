#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>

#include "czsd/rng.hpp"

namespace czsd {

struct TopologyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NonSymmetricError : TopologyError {
  using TopologyError::TopologyError;
};
struct NegativeWeightError : TopologyError {
  using TopologyError::TopologyError;
};
struct DisconnectedError : TopologyError {
  using TopologyError::TopologyError;
};
struct ConnectivityFailure : TopologyError {
  using TopologyError::TopologyError;
};
struct LambdaOutOfRange : TopologyError {
  using TopologyError::TopologyError;
};

/// Communication graph with cached Laplacian spectrum. Immutable after
/// construction; safe to share across threads.
struct Topology {
  int n = 0;
  Eigen::MatrixXd adjacency;
  Eigen::MatrixXd laplacian;
  Eigen::VectorXd eigenvalues;   // ascending, eigenvalues[0] ~ 0
  Eigen::MatrixXd eigenvectors;  // columns match eigenvalues
  double spectral_radius = 0.0;  // rho(L) = lambda_n
  double fiedler = 0.0;          // rho_2(L) = lambda_2
  bool connected = false;
  int resamples = 0;  // geometric generator only

  // Consensus projector E = I - 11^T/n.
  Eigen::MatrixXd projector() const {
    return Eigen::MatrixXd::Identity(n, n) -
           Eigen::MatrixXd::Constant(n, n, 1.0 / n);
  }
};

inline Topology build_topology(const Eigen::MatrixXd& adjacency,
                               double tol = 1e-10) {
  if (adjacency.rows() != adjacency.cols())
    throw TopologyError("adjacency matrix must be square");
  const int n = static_cast<int>(adjacency.rows());
  const double scale = std::max(1.0, adjacency.cwiseAbs().maxCoeff());
  if ((adjacency - adjacency.transpose()).cwiseAbs().maxCoeff() > tol * scale)
    throw NonSymmetricError("adjacency matrix is not symmetric");
  if (adjacency.minCoeff() < 0.0)
    throw NegativeWeightError("adjacency weights must be nonnegative");
  if (adjacency.diagonal().cwiseAbs().maxCoeff() > tol * scale)
    throw TopologyError("adjacency diagonal must be zero");

  Topology t;
  t.n = n;
  t.adjacency = 0.5 * (adjacency + adjacency.transpose());
  t.adjacency.diagonal().setZero();
  t.laplacian = Eigen::MatrixXd(t.adjacency.rowwise().sum().asDiagonal()) -
                t.adjacency;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t.laplacian);
  t.eigenvalues = es.eigenvalues();
  t.eigenvectors = es.eigenvectors();
  t.spectral_radius = t.eigenvalues(n - 1);
  t.fiedler = n > 1 ? t.eigenvalues(1) : 0.0;
  t.connected = n == 1 || t.fiedler > 1e-8 * std::max(1.0, t.spectral_radius);
  return t;
}

/// Random geometric graph on the unit 2-sphere: unit-weight edge when the
/// angle between two points is at most the threshold. Resamples (up to
/// max_resamples) until connected; deterministic given seed.
inline Topology random_geometric_sphere(int n, double threshold_deg,
                                        std::uint64_t seed,
                                        int max_resamples = 100) {
  if (n < 2) throw TopologyError("geometric generator needs n >= 2");
  if (!(threshold_deg > 0.0 && threshold_deg <= 180.0))
    throw TopologyError("angular threshold must lie in (0, 180] degrees");
  const double cos_thresh = std::cos(threshold_deg * M_PI / 180.0);

  auto rng = substream(seed, 0x5e0);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int attempt = 0; attempt < max_resamples; ++attempt) {
    Eigen::MatrixXd pts(3, n);
    for (int i = 0; i < n; ++i) {
      Eigen::Vector3d v;
      do {
        v << gauss(rng), gauss(rng), gauss(rng);
      } while (v.norm() == 0.0);
      pts.col(i) = v.normalized();
    }
    Eigen::MatrixXd adj = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (pts.col(i).dot(pts.col(j)) >= cos_thresh) adj(i, j) = adj(j, i) = 1.0;
    Topology t = build_topology(adj);
    if (t.connected) {
      t.resamples = attempt;
      return t;
    }
  }
  throw ConnectivityFailure(
      "no connected geometric graph after " + std::to_string(max_resamples) +
      " resamples (threshold too small for n)");
}

/// F_M from the Laplacian eigendecomposition: nonzero eigenvalues inverted,
/// the zero eigenvalue replaced by 1/lambda_extra with lambda_extra in
/// [lambda_2, lambda_n]. Satisfies F_M L = L F_M = E.
inline Eigen::MatrixXd build_fm(const Topology& t, double lambda_extra) {
  if (!t.connected) throw DisconnectedError("F_M requires a connected graph");
  if (lambda_extra < t.fiedler * (1 - 1e-12) ||
      lambda_extra > t.spectral_radius * (1 + 1e-12))
    throw LambdaOutOfRange("lambda_extra must lie in [lambda_2, lambda_n]");
  Eigen::VectorXd inv(t.n);
  inv(0) = 1.0 / lambda_extra;
  for (int i = 1; i < t.n; ++i) inv(i) = 1.0 / t.eigenvalues(i);
  return t.eigenvectors * inv.asDiagonal() * t.eigenvectors.transpose();
}

inline Eigen::MatrixXd build_fm(const Topology& t) {
  return build_fm(t, t.fiedler);
}

// Plain-text edge list, `i j weight` per line, 0-based.
inline Eigen::MatrixXd read_edge_list(std::istream& in, int n) {
  Eigen::MatrixXd adj = Eigen::MatrixXd::Zero(n, n);
  int i, j;
  double w;
  while (in >> i >> j >> w) {
    if (i < 0 || j < 0 || i >= n || j >= n)
      throw TopologyError("edge list index out of range");
    adj(i, j) = w;
    adj(j, i) = w;
  }
  return adj;
}

inline void write_edge_list(std::ostream& out, const Topology& t) {
  for (int i = 0; i < t.n; ++i)
    for (int j = i + 1; j < t.n; ++j)
      if (t.adjacency(i, j) != 0.0)
        out << i << ' ' << j << ' ' << t.adjacency(i, j) << '\n';
}

}  // namespace czsd
