#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <stdexcept>

#include "czsd/rng.hpp"

namespace czsd {

struct UnsupportedKind : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ProblemKind { logistic_nonconvex, pl_quadratic, deterministic_quadratic };

/// One data draw xi for an agent. Quadratic problems are deterministic and
/// leave it empty.
struct XiDraw {
  Eigen::MatrixXd features;  // m x p
  Eigen::VectorXd labels;    // m, entries in {-1, +1}
};

inline double softplus(double z) {
  // log(1 + e^z), overflow-safe
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

inline double sigmoid(double z) {
  return z > 0.0 ? 1.0 / (1.0 + std::exp(-z)) : std::exp(z) / (1.0 + std::exp(z));
}

/// Benchmark objective implementing the stochastic local cost F_i(x, xi).
/// Immutable after construction; evaluation is pure given (x, xi).
struct ProblemInstance {
  ProblemKind kind = ProblemKind::pl_quadratic;
  int n = 1, p = 1;

  // logistic
  int m = 200;
  double theta = 1e-3, tau = 1.0;
  Eigen::VectorXd hidden_param;  // label-generating parameter

  // quadratics: f_i(x) = 1/2 (x - c_i)' D_i (x - c_i), D_i diagonal
  Eigen::MatrixXd centers;   // p x n
  Eigen::MatrixXd scalings;  // p x n, diagonal of D_i

  double f_star = 0.0;
  bool f_star_exact = false;
  double ell = 1.0;    // smoothness constant (exact for quadratics)
  double pl_nu = 1.0;  // PL constant
  bool constants_exact = true;
  bool deterministic() const { return kind != ProblemKind::logistic_nonconvex; }

  XiDraw draw_xi(int agent, std::mt19937_64& rng) const {
    XiDraw xi;
    if (kind != ProblemKind::logistic_nonconvex) return xi;
    (void)agent;
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    xi.features.resize(m, p);
    xi.labels.resize(m);
    for (int j = 0; j < m; ++j) {
      for (int l = 0; l < p; ++l) xi.features(j, l) = gauss(rng);
      const double p1 = sigmoid(hidden_param.dot(xi.features.row(j)));
      xi.labels(j) = unif(rng) < p1 ? 1.0 : -1.0;
    }
    return xi;
  }

  double eval(int agent, const Eigen::VectorXd& x, const XiDraw& xi) const {
    switch (kind) {
      case ProblemKind::logistic_nonconvex: {
        const Eigen::VectorXd margins =
            xi.labels.cwiseProduct(xi.features * x);
        double data = 0.0;
        for (int j = 0; j < m; ++j) data += softplus(-margins(j));
        data *= double(n) / m;
        double reg = 0.0;
        for (int l = 0; l < p; ++l) {
          const double u2 = x(l) * x(l);
          reg += theta * tau * u2 / (1.0 + tau * u2);
        }
        return data + reg;
      }
      case ProblemKind::pl_quadratic:
      case ProblemKind::deterministic_quadratic: {
        const Eigen::VectorXd d = x - centers.col(agent);
        return 0.5 * d.cwiseProduct(scalings.col(agent)).dot(d);
      }
    }
    return 0.0;
  }

  Eigen::VectorXd gradient(int agent, const Eigen::VectorXd& x,
                           const XiDraw& xi) const {
    switch (kind) {
      case ProblemKind::logistic_nonconvex: {
        const Eigen::VectorXd margins =
            xi.labels.cwiseProduct(xi.features * x);
        Eigen::VectorXd w(m);
        for (int j = 0; j < m; ++j)
          w(j) = -xi.labels(j) * sigmoid(-margins(j));
        Eigen::VectorXd g = (double(n) / m) * (xi.features.transpose() * w);
        for (int l = 0; l < p; ++l) {
          const double denom = 1.0 + tau * x(l) * x(l);
          g(l) += 2.0 * theta * tau * x(l) / (denom * denom);
        }
        return g;
      }
      case ProblemKind::pl_quadratic:
      case ProblemKind::deterministic_quadratic:
        return scalings.col(agent).cwiseProduct(x - centers.col(agent));
    }
    throw UnsupportedKind("gradient: unknown problem kind");
  }

  // Exact mean cost f(x) = (1/n) sum f_i(x); quadratics only.
  double mean_cost(const Eigen::VectorXd& x) const {
    if (kind == ProblemKind::logistic_nonconvex)
      throw UnsupportedKind("mean_cost is exact only for quadratic kinds");
    double s = 0.0;
    XiDraw empty;
    for (int i = 0; i < n; ++i) s += eval(i, x, empty);
    return s / n;
  }

  Eigen::VectorXd mean_gradient(const Eigen::VectorXd& x) const {
    if (kind == ProblemKind::logistic_nonconvex)
      throw UnsupportedKind("mean_gradient is exact only for quadratic kinds");
    Eigen::VectorXd g = Eigen::VectorXd::Zero(p);
    XiDraw empty;
    for (int i = 0; i < n; ++i) g += gradient(i, x, empty);
    return g / n;
  }
};

inline ProblemInstance make_logistic(int n, int p, int m = 200,
                                     double theta = 1e-3, double tau = 1.0,
                                     std::uint64_t seed = 0) {
  ProblemInstance inst;
  inst.kind = ProblemKind::logistic_nonconvex;
  inst.n = n;
  inst.p = p;
  inst.m = m;
  inst.theta = theta;
  inst.tau = tau;
  auto rng = substream(seed, 0x1ab);
  std::normal_distribution<double> gauss(0.0, 1.0);
  inst.hidden_param.resize(p);
  for (int l = 0; l < p; ++l) inst.hidden_param(l) = gauss(rng);
  inst.f_star_exact = false;
  inst.constants_exact = false;
  return inst;
}

enum class Heterogeneity { zero, scaled };

/// Quadratic family satisfying the PL inequality by construction. The
/// zero-heterogeneity variant shares one center across agents (sigma1 =
/// sigma2 = 0); the scaled variant draws agent-specific centers and positive
/// diagonal scalings, with exact f* from the stationarity condition.
inline ProblemInstance pl_quadratic_make(int n, int p,
                                         Heterogeneity het = Heterogeneity::zero,
                                         std::uint64_t seed = 0) {
  ProblemInstance inst;
  inst.kind = ProblemKind::pl_quadratic;
  inst.n = n;
  inst.p = p;
  inst.centers.resize(p, n);
  inst.scalings.resize(p, n);
  if (het == Heterogeneity::zero) {
    inst.centers.setZero();
    inst.scalings.setOnes();
    inst.f_star = 0.0;
    inst.f_star_exact = true;
    inst.ell = 1.0;
    inst.pl_nu = 1.0;
  } else {
    auto rng = substream(seed, 0x9d);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.5, 1.5);
    for (int i = 0; i < n; ++i)
      for (int l = 0; l < p; ++l) {
        inst.centers(l, i) = gauss(rng);
        inst.scalings(l, i) = unif(rng);
      }
    // f is a diagonal quadratic; minimizer solves (sum D_i) x = sum D_i c_i
    const Eigen::VectorXd dsum = inst.scalings.rowwise().sum();
    const Eigen::VectorXd dc =
        inst.scalings.cwiseProduct(inst.centers).rowwise().sum();
    const Eigen::VectorXd xstar = dc.cwiseQuotient(dsum);
    double fs = 0.0;
    for (int i = 0; i < n; ++i) {
      const Eigen::VectorXd d = xstar - inst.centers.col(i);
      fs += 0.5 * d.cwiseProduct(inst.scalings.col(i)).dot(d);
    }
    inst.f_star = fs / n;
    inst.f_star_exact = true;
    inst.ell = inst.scalings.maxCoeff();
    inst.pl_nu = dsum.minCoeff() / n;
  }
  return inst;
}

inline ProblemInstance deterministic_quadratic_make(int n, int p) {
  ProblemInstance inst = pl_quadratic_make(n, p, Heterogeneity::zero);
  inst.kind = ProblemKind::deterministic_quadratic;
  return inst;
}

}  // namespace czsd
