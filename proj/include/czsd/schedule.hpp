#pragma once

#include <cmath>
#include <stdexcept>

#include "czsd/zo_gradient.hpp"

namespace czsd {

struct InvalidParams : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class ScheduleRegime {
  theorem1_fixed,       // constant steps tied to the horizon T
  theorem2_timevarying, // gamma grows linearly, alpha decays
  theorem3_geometric,   // constant steps, geometric exploration decay
  table1,               // the experiment's hand-tuned laws
  custom                // table1 laws with user coefficients
};

struct ScheduleParams {
  double eps1 = 1.0, eps2 = 1.0, eps3 = 0.1;
  int m = 10;
  long horizon = 1000;          // T, theorem1 only
  double kappa_mu = 1.0;
  double eps_tilde = 0.95;      // theorem3 decay
  double gamma_fixed = 1.0;     // theorem3
  double omega = 0.1;
  // custom laws: alpha0/(k+1), beta0*(k+1), gamma0*(k+1), mu_decay^k
  double alpha0 = 0.1, beta0 = 3.0, gamma0 = 0.1, mu_decay = 0.99;
};

/// Iteration-indexed parameter laws alpha(k), beta(k), gamma(k), mu(k) for
/// one of the analyzed regimes. Exploration mu is clamped at the numeric
/// floor rather than allowed to vanish.
struct Schedule {
  ScheduleRegime regime = ScheduleRegime::table1;
  ScheduleParams prm;
  int n = 1, p = 1;

  double alpha(long k) const {
    switch (regime) {
      case ScheduleRegime::theorem1_fixed:
        return std::sqrt(double(n)) / std::sqrt(double(p) * prm.horizon);
      case ScheduleRegime::theorem2_timevarying:
        return prm.eps2 / gamma(k);
      case ScheduleRegime::theorem3_geometric:
        return prm.eps2 / prm.gamma_fixed;
      case ScheduleRegime::table1:
        return 0.1 / (k + 1);
      case ScheduleRegime::custom:
        return prm.alpha0 / (k + 1);
    }
    return 0.0;
  }

  double gamma(long k) const {
    switch (regime) {
      case ScheduleRegime::theorem1_fixed:
        return prm.eps2 / alpha(k);
      case ScheduleRegime::theorem2_timevarying:
        return prm.eps3 * (k + prm.m);
      case ScheduleRegime::theorem3_geometric:
        return prm.gamma_fixed;
      case ScheduleRegime::table1:
        return 0.1 * (k + 1);
      case ScheduleRegime::custom:
        return prm.gamma0 * (k + 1);
    }
    return 0.0;
  }

  double beta(long k) const {
    switch (regime) {
      case ScheduleRegime::table1:
        return 3.0 * (k + 1);
      case ScheduleRegime::custom:
        return prm.beta0 * (k + 1);
      default:
        return prm.eps1 * gamma(k);
    }
  }

  double mu(long k) const {
    double v;
    switch (regime) {
      case ScheduleRegime::theorem1_fixed:
      case ScheduleRegime::theorem2_timevarying:
        v = prm.kappa_mu * std::sqrt(p * alpha(k)) / std::sqrt(double(n + p));
        break;
      case ScheduleRegime::theorem3_geometric:
        v = prm.kappa_mu * std::pow(prm.eps_tilde, double(k));
        break;
      case ScheduleRegime::table1:
        v = std::pow(0.99, double(k));
        break;
      case ScheduleRegime::custom:
        v = std::pow(prm.mu_decay, double(k));
        break;
      default:
        v = kMuFloor;
    }
    return std::max(v, kMuFloor);
  }

  double omega() const {
    return regime == ScheduleRegime::table1 ? 0.1 : prm.omega;
  }
};

inline Schedule make_schedule(ScheduleRegime regime, const ScheduleParams& prm,
                              int n, int p) {
  if (n < 1 || p < 1) throw InvalidParams("schedule needs n, p >= 1");
  switch (regime) {
    case ScheduleRegime::theorem1_fixed:
      if (prm.eps1 <= 0 || prm.eps2 <= 0 || prm.horizon < 1 || prm.kappa_mu <= 0)
        throw InvalidParams("theorem1: eps1, eps2, kappa_mu > 0 and T >= 1");
      break;
    case ScheduleRegime::theorem2_timevarying:
      if (prm.eps1 <= 0 || prm.eps2 <= 0 || prm.eps3 <= 0 || prm.m < 1 ||
          prm.kappa_mu <= 0)
        throw InvalidParams("theorem2: eps1, eps2, eps3, kappa_mu > 0 and m >= 1");
      break;
    case ScheduleRegime::theorem3_geometric:
      if (prm.eps1 <= 0 || prm.eps2 <= 0 || prm.gamma_fixed <= 0 ||
          prm.kappa_mu <= 0 || !(prm.eps_tilde > 0 && prm.eps_tilde < 1))
        throw InvalidParams("theorem3: positive constants and decay in (0,1)");
      break;
    case ScheduleRegime::table1:
      break;
    case ScheduleRegime::custom:
      if (prm.alpha0 <= 0 || prm.beta0 <= 0 || prm.gamma0 <= 0 ||
          !(prm.mu_decay > 0 && prm.mu_decay <= 1))
        throw InvalidParams("custom: positive coefficients, decay in (0,1]");
      break;
  }
  Schedule s;
  s.regime = regime;
  s.prm = prm;
  s.n = n;
  s.p = p;
  return s;
}

}  // namespace czsd
