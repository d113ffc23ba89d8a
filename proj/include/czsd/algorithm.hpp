#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iostream>
#include <random>
#include <stdexcept>
#include <vector>

#include "czsd/compressor.hpp"
#include "czsd/problems.hpp"
#include "czsd/rng.hpp"
#include "czsd/schedule.hpp"
#include "czsd/topology.hpp"
#include "czsd/zo_gradient.hpp"

namespace czsd {

struct DimensionMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NonFiniteState : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class AlgorithmKind { czsd, zsdpd, czsd_identity };
enum class BitConvention { broadcast, per_edge };

/// Full synchronized-round state. Agent vectors are stored as columns of
/// p x n matrices; column i is agent i. Exclusively owned between steps.
struct RunState {
  const Topology* topo = nullptr;
  const ProblemInstance* prob = nullptr;
  CompressorSpec comp;
  Schedule sched;
  BitConvention bit_convention = BitConvention::broadcast;

  Eigen::MatrixXd X, V, Y, Z, Q;  // p x n
  long k = 0;
  std::uint64_t bits = 0;

  std::vector<std::mt19937_64> xi_rng, zeta_rng, comp_rng;
  std::uint64_t seed = 0;
  std::uint64_t edge_sends = 0;  // sum of neighborhood sizes, per-edge mode

  int n() const { return topo->n; }
  int p() const { return prob->p; }
};

inline RunState init(const Topology& topo, const ProblemInstance& prob,
                     const CompressorSpec& comp, const Schedule& sched,
                     const Eigen::MatrixXd& x0, std::uint64_t seed,
                     BitConvention bit_convention = BitConvention::broadcast) {
  if (!topo.connected)
    throw DisconnectedError("algorithm requires a connected topology");
  if (x0.rows() != prob.p || x0.cols() != topo.n || prob.n != topo.n)
    throw DimensionMismatch("x0 must be p x n and match topology/problem");
  if (sched.omega() * comp.r(prob.p) > 1.0)
    std::cerr << "[czsd] warning: omega * r > 1 leaves the analyzed regime\n";

  RunState st;
  st.topo = &topo;
  st.prob = &prob;
  st.comp = comp;
  st.sched = sched;
  st.bit_convention = bit_convention;
  st.seed = seed;
  st.X = x0;
  st.V = Eigen::MatrixXd::Zero(prob.p, topo.n);
  st.Y = st.V;
  st.Z = st.V;
  st.Q.resize(prob.p, topo.n);
  for (int i = 0; i < topo.n; ++i) {
    st.xi_rng.push_back(substream(seed, 0xd1, i));
    st.zeta_rng.push_back(substream(seed, 0xd2, i));
    st.comp_rng.push_back(substream(seed, 0xc0, i));
  }
  for (int i = 0; i < topo.n; ++i)
    st.Q.col(i) = compress(comp, x0.col(i), st.comp_rng[i]);
  std::uint64_t sends = 0;
  for (int i = 0; i < topo.n; ++i)
    for (int j = 0; j < topo.n; ++j)
      if (i != j && topo.adjacency(i, j) != 0.0) ++sends;
  st.edge_sends = sends;
  return st;
}

namespace detail {

inline void check_finite(const RunState& st) {
  const double cap = 1e12;
  if (!st.X.allFinite() || !st.V.allFinite() ||
      st.X.cwiseAbs().maxCoeff() > cap || st.V.cwiseAbs().maxCoeff() > cap)
    throw NonFiniteState("state diverged at iteration " + std::to_string(st.k));
}

// Stochastic ZO gradients for all agents at the current iterates.
inline Eigen::MatrixXd zo_gradients(RunState& st) {
  const int n = st.n(), p = st.p();
  const double mu = st.sched.mu(st.k);
  Eigen::MatrixXd G(p, n);
  for (int i = 0; i < n; ++i) {
    const XiDraw xi = st.prob->draw_xi(i, st.xi_rng[i]);
    const Eigen::VectorXd zeta = sample_sphere(p, st.zeta_rng[i]);
    auto f = [&](const Eigen::VectorXd& x) { return st.prob->eval(i, x, xi); };
    G.col(i) = zo_gradient(f, st.X.col(i), mu, zeta);
  }
  return G;
}

inline std::uint64_t round_bits(const RunState& st, std::int64_t per_vector) {
  const std::uint64_t sends = st.bit_convention == BitConvention::broadcast
                                  ? std::uint64_t(st.n())
                                  : st.edge_sends;
  return sends * std::uint64_t(per_vector);
}

}  // namespace detail

/// One synchronized round of the compressed algorithm. Primal/dual updates
/// read z and v at their pre-update values; only y and z absorb the omega
/// relaxation within the same round.
inline void czsd_step(RunState& st) {
  const long k = st.k;
  const double alpha = st.sched.alpha(k);
  const double beta = st.sched.beta(k);
  const double gamma = st.sched.gamma(k);
  const double omega = st.sched.omega();
  const Eigen::MatrixXd& L = st.topo->laplacian;

  // neighbors' compressed messages, aggregated: col i = sum_j L_ij q_j
  const Eigen::MatrixXd LQ = st.Q * L;
  const Eigen::MatrixXd G = detail::zo_gradients(st);

  const Eigen::MatrixXd mix = st.Z + LQ;  // z_k + sum_j L_ij q_j,k
  const Eigen::MatrixXd Xn = st.X - alpha * beta * mix - alpha * (gamma * st.V + G);
  const Eigen::MatrixXd Vn = st.V + alpha * gamma * mix;
  st.Y += omega * st.Q;
  st.Z += omega * LQ;
  st.X = Xn;
  st.V = Vn;
  for (int i = 0; i < st.n(); ++i)
    st.Q.col(i) = compress(st.comp, st.X.col(i) - st.Y.col(i), st.comp_rng[i]);

  st.bits += detail::round_bits(st, st.comp.bits_per_vector(st.p()));
  ++st.k;
  detail::check_finite(st);
}

/// Exact-communication baseline: neighbors exchange full-precision iterates.
inline void zsdpd_step(RunState& st) {
  const long k = st.k;
  const double alpha = st.sched.alpha(k);
  const double beta = st.sched.beta(k);
  const double gamma = st.sched.gamma(k);
  const Eigen::MatrixXd& L = st.topo->laplacian;

  const Eigen::MatrixXd LX = st.X * L;
  const Eigen::MatrixXd G = detail::zo_gradients(st);
  const Eigen::MatrixXd Xn = st.X - alpha * (beta * LX + gamma * st.V + G);
  st.V += alpha * gamma * LX;
  st.X = Xn;

  st.bits += detail::round_bits(st, 64LL * st.p());
  ++st.k;
  detail::check_finite(st);
}

inline void step(RunState& st, AlgorithmKind algo) {
  if (algo == AlgorithmKind::zsdpd)
    zsdpd_step(st);
  else
    czsd_step(st);
}

}  // namespace czsd
