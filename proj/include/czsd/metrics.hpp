#pragma once

#include <Eigen/Dense>
#include <limits>
#include <stdexcept>

#include "czsd/algorithm.hpp"
#include "czsd/problems.hpp"
#include "czsd/rng.hpp"
#include "czsd/topology.hpp"

namespace czsd {

struct RequiresAnalyticGradient : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline Eigen::VectorXd mean_column(const Eigen::MatrixXd& X) {
  return X.rowwise().mean();
}

/// (1/n) sum ||x_i - xbar||^2, the normalized consensus error.
inline double consensus_error(const Eigen::MatrixXd& X) {
  const Eigen::VectorXd xbar = mean_column(X);
  return (X.colwise() - xbar).squaredNorm() / X.cols();
}

/// e1 = 1/2 sum ||x_i - xbar||^2, the Lyapunov-side form.
inline double consensus_e1(const Eigen::MatrixXd& X) {
  const Eigen::VectorXd xbar = mean_column(X);
  return 0.5 * (X.colwise() - xbar).squaredNorm();
}

/// Running minimum of grad_sq + consensus, the stationarity measure P(T).
class RunningMin {
 public:
  void update(double value) {
    if (value < best_) best_ = value;
    seen_ = true;
  }
  double value() const {
    if (!seen_) throw std::runtime_error("P(T) undefined on an empty stream");
    return best_;
  }
  bool empty() const { return !seen_; }

 private:
  double best_ = std::numeric_limits<double>::infinity();
  bool seen_ = false;
};

/// Quantities measured at the network mean iterate. For stochastic problems
/// they come from a frozen evaluation batch keyed by (seed, k), so traces
/// are reproducible; for quadratics they are exact.
struct MeanEval {
  double grad_sq = 0.0;        // E_xi ||grad F(xbar, xi)||^2 estimate
  double f_bar = 0.0;          // f(xbar) estimate
  double mean_grad_sq = 0.0;   // ||grad f(xbar)||^2 estimate
  Eigen::MatrixXd g0;          // p x n, col i = grad f_i(xbar)
};

inline MeanEval evaluate_at_mean(const ProblemInstance& prob,
                                 const Eigen::VectorXd& xbar,
                                 std::uint64_t seed, long k, int batch) {
  MeanEval ev;
  const int n = prob.n, p = prob.p;
  ev.g0.setZero(p, n);
  if (prob.deterministic()) {
    XiDraw empty;
    Eigen::VectorXd g = Eigen::VectorXd::Zero(p);
    for (int i = 0; i < n; ++i) {
      ev.g0.col(i) = prob.gradient(i, xbar, empty);
      ev.f_bar += prob.eval(i, xbar, empty);
      g += ev.g0.col(i);
    }
    ev.f_bar /= n;
    g /= n;
    ev.grad_sq = g.squaredNorm();
    ev.mean_grad_sq = ev.grad_sq;
    return ev;
  }
  auto rng = substream(seed, 0xe7a1, std::uint64_t(k));
  double grad_sq_sum = 0.0, f_sum = 0.0;
  Eigen::VectorXd gmean = Eigen::VectorXd::Zero(p);
  for (int b = 0; b < batch; ++b) {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(p);
    for (int i = 0; i < n; ++i) {
      const XiDraw xi = prob.draw_xi(i, rng);
      const Eigen::VectorXd gi = prob.gradient(i, xbar, xi);
      ev.g0.col(i) += gi;
      f_sum += prob.eval(i, xbar, xi);
      g += gi;
    }
    g /= n;
    grad_sq_sum += g.squaredNorm();
    gmean += g;
  }
  ev.g0 /= batch;
  ev.grad_sq = grad_sq_sum / batch;
  ev.f_bar = f_sum / (double(batch) * n);
  ev.mean_grad_sq = (gmean / batch).squaredNorm();
  return ev;
}

struct LyapunovComponents {
  double e1 = 0, e2 = 0, e3 = 0, e4 = 0, e5 = 0;
};

/// The five Lyapunov diagnostics in their stacked (Kronecker) forms; fm is
/// the matrix from build_fm and ev the snapshot at the current mean iterate.
/// f_star may be a surrogate for problems without a known optimum.
inline LyapunovComponents lyapunov_components(const RunState& st,
                                              const Eigen::MatrixXd& fm,
                                              const MeanEval& ev,
                                              double f_star) {
  const int n = st.n();
  const double beta = st.sched.beta(st.k);
  const double gamma = st.sched.gamma(st.k);

  LyapunovComponents e;
  e.e1 = consensus_e1(st.X);

  // s = v + g0/gamma, stacked; quadratic forms reduce to traces over the
  // p x n layout: x' (B (x) I) w = tr(X' W B) for symmetric B.
  const Eigen::MatrixXd S = st.V + ev.g0 / gamma;
  const Eigen::MatrixXd SF = S * fm;
  e.e2 = 0.5 * (beta + gamma) / gamma * (S.cwiseProduct(SF)).sum();

  const Eigen::MatrixXd E =
      Eigen::MatrixXd::Identity(n, n) - Eigen::MatrixXd::Constant(n, n, 1.0 / n);
  e.e3 = ((st.X * E).cwiseProduct(SF)).sum();

  e.e4 = n * ev.f_bar - n * f_star;
  e.e5 = (st.X - st.Y).squaredNorm();
  return e;
}

}  // namespace czsd
