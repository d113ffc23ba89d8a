#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <stdexcept>

namespace czsd {

struct NonFiniteEvaluation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr double kMuFloor = 1e-12;

/// Uniform direction on the unit sphere in R^p.
inline Eigen::VectorXd sample_sphere(int p, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::VectorXd v(p);
  do {
    for (int l = 0; l < p; ++l) v(l) = gauss(rng);
  } while (v.norm() == 0.0);
  return v / v.norm();
}

/// Two-point gradient estimate p*(f(x+mu*zeta)-f(x))/mu * zeta.
/// The callable must have its data draw frozen so both evaluations see the
/// same sample; costs exactly two evaluations.
template <class F>
Eigen::VectorXd zo_gradient(F&& f, const Eigen::VectorXd& x, double mu,
                            const Eigen::VectorXd& zeta) {
  if (mu < kMuFloor)
    throw std::invalid_argument("zo_gradient: exploration parameter below floor");
  const int p = static_cast<int>(x.size());
  const double fp = f(Eigen::VectorXd(x + mu * zeta));
  const double f0 = f(x);
  if (!std::isfinite(fp) || !std::isfinite(f0))
    throw NonFiniteEvaluation("zo_gradient: non-finite function value");
  return (p * (fp - f0) / mu) * zeta;
}

struct MonteCarloEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  int samples = 0;
};

/// Ball perturbation: sphere direction times radius U^(1/p).
inline Eigen::VectorXd sample_ball(int p, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const Eigen::VectorXd dir = sample_sphere(p, rng);
  return std::pow(unif(rng), 1.0 / p) * dir;
}

/// Monte-Carlo estimate of the smoothed value E_{zeta in B^p}[f(x + mu zeta)].
template <class F>
MonteCarloEstimate smoothed_value(F&& f, const Eigen::VectorXd& x, double mu,
                                  int samples, std::mt19937_64& rng) {
  if (samples < 1) throw std::invalid_argument("smoothed_value: samples >= 1");
  const int p = static_cast<int>(x.size());
  double sum = 0.0, sumsq = 0.0;
  for (int s = 0; s < samples; ++s) {
    const double v = f(Eigen::VectorXd(x + mu * sample_ball(p, rng)));
    if (!std::isfinite(v))
      throw NonFiniteEvaluation("smoothed_value: non-finite function value");
    sum += v;
    sumsq += v * v;
  }
  MonteCarloEstimate est;
  est.samples = samples;
  est.mean = sum / samples;
  const double var = std::max(0.0, sumsq / samples - est.mean * est.mean);
  est.std_error = samples > 1 ? std::sqrt(var / (samples - 1)) : 0.0;
  return est;
}

struct VarianceReport {
  double empirical = 0.0;  // mean ||g^z||^2
  double bound = 0.0;      // 2p||grad F||^2 + p^2 mu^2 l^2 / 2
  double slack_bound = 0.0;
  bool pass = false;
};

/// Checks the second-moment bound of the estimator against a known smoothness
/// constant for the (frozen-draw) callable.
template <class F>
VarianceReport variance_report(F&& f, const Eigen::VectorXd& x, double mu,
                               double grad_norm_sq, double ell, int samples,
                               std::mt19937_64& rng) {
  const int p = static_cast<int>(x.size());
  double sum = 0.0;
  for (int s = 0; s < samples; ++s)
    sum += zo_gradient(f, x, mu, sample_sphere(p, rng)).squaredNorm();
  VarianceReport rep;
  rep.empirical = sum / samples;
  rep.bound = 2.0 * p * grad_norm_sq + 0.5 * p * p * mu * mu * ell * ell;
  rep.slack_bound = rep.bound * (1.0 + 3.0 / std::sqrt(double(samples)));
  rep.pass = rep.empirical <= rep.slack_bound;
  return rep;
}

}  // namespace czsd
