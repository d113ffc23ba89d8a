#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <random>
#include <stdexcept>
#include <vector>

namespace czsd {

struct NonFiniteInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class CompressorKind { identity, dithered, topk, scaled };

/// A compression operator together with its contraction certificate:
/// E||C(x)/r - x||^2 <= (1-delta)||x||^2 at the declared (r, delta).
struct CompressorSpec {
  CompressorKind kind = CompressorKind::identity;
  int bits = 2;           // dithered: quantization levels 2^(bits-1)
  double fraction = 0.1;  // topk: kept fraction of coordinates
  double scale = 1.0;     // scaled: multiplier applied to inner output
  std::shared_ptr<CompressorSpec> inner;  // scaled only

  double r(int p) const {
    switch (kind) {
      case CompressorKind::identity: return 1.0;
      case CompressorKind::dithered: return 1.0 + p / std::pow(4.0, bits);
      case CompressorKind::topk: return 1.0;
      case CompressorKind::scaled: return scale * inner->r(p);
    }
    return 1.0;
  }

  double delta(int p) const {
    switch (kind) {
      case CompressorKind::identity: return 1.0;
      case CompressorKind::dithered: return 1.0 / (1.0 + p / std::pow(4.0, bits));
      case CompressorKind::topk: return fraction;
      case CompressorKind::scaled: return inner->delta(p);
    }
    return 1.0;
  }

  double delta0(int p) const {
    const double rr = r(p), d = delta(p);
    return 2.0 * rr * rr * (1.0 - d) + 2.0 * (1.0 - rr) * (1.0 - rr);
  }

  int kept_count(int p) const {
    return std::clamp(static_cast<int>(std::ceil(fraction * p)), 1, p);
  }

  // Exact transmitted bits for one p-vector. Floats count as 64 bits.
  std::int64_t bits_per_vector(int p) const {
    switch (kind) {
      case CompressorKind::identity: return 64LL * p;
      case CompressorKind::dithered: return static_cast<std::int64_t>(bits + 1) * p + 64;
      case CompressorKind::topk: {
        const int m = kept_count(p);
        const int idx_bits = p > 1 ? static_cast<int>(std::ceil(std::log2(p))) : 1;
        return static_cast<std::int64_t>(m) * (64 + idx_bits);
      }
      case CompressorKind::scaled: return inner->bits_per_vector(p);
    }
    return 0;
  }
};

inline CompressorSpec identity_compressor() { return {}; }

inline CompressorSpec dithered_quantizer(int bits) {
  if (bits < 1) throw std::invalid_argument("quantizer needs bits >= 1");
  CompressorSpec s;
  s.kind = CompressorKind::dithered;
  s.bits = bits;
  return s;
}

inline CompressorSpec top_k_compressor(double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw std::invalid_argument("top-k fraction must lie in (0, 1]");
  CompressorSpec s;
  s.kind = CompressorKind::topk;
  s.fraction = fraction;
  return s;
}

inline Eigen::VectorXd compress(const CompressorSpec& spec,
                                const Eigen::VectorXd& x,
                                std::mt19937_64& rng) {
  if (!x.allFinite()) throw NonFiniteInput("compress: non-finite input vector");
  const int p = static_cast<int>(x.size());
  switch (spec.kind) {
    case CompressorKind::identity:
      return x;
    case CompressorKind::dithered: {
      const double xinf = x.cwiseAbs().maxCoeff();
      if (xinf == 0.0) return Eigen::VectorXd::Zero(p);
      const double levels = std::pow(2.0, spec.bits - 1);
      std::uniform_real_distribution<double> unif(0.0, 1.0);
      Eigen::VectorXd out(p);
      for (int l = 0; l < p; ++l) {
        const double sgn = x(l) > 0.0 ? 1.0 : (x(l) < 0.0 ? -1.0 : 0.0);
        // floor(2^(k-1)|x|/||x||_inf + dither); may reach 2^(k-1) at the max
        // coordinate, which unbiasedness requires.
        const double q = std::floor(levels * std::abs(x(l)) / xinf + unif(rng));
        out(l) = (xinf / levels) * sgn * q;
      }
      return out;
    }
    case CompressorKind::topk: {
      const int m = spec.kept_count(p);
      std::vector<int> idx(p);
      std::iota(idx.begin(), idx.end(), 0);
      // ties: lowest index wins
      std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        return std::abs(x(a)) > std::abs(x(b));
      });
      Eigen::VectorXd out = Eigen::VectorXd::Zero(p);
      for (int i = 0; i < m; ++i) out(idx[i]) = x(idx[i]);
      return out;
    }
    case CompressorKind::scaled:
      return spec.scale * compress(*spec.inner, x, rng);
  }
  return x;
}

struct CertifyReport {
  double mean_ratio = 0.0;
  double max_ratio = 0.0;
  double bound = 0.0;  // (1-delta)(1 + 3/sqrt(samples))
  int samples = 0;
  bool pass = false;
};

/// Monte-Carlo check of the contraction contract on standard-normal draws.
inline CertifyReport certify(const CompressorSpec& spec, int p, int samples,
                             std::mt19937_64& rng) {
  if (samples < 1000) throw std::invalid_argument("certify needs samples >= 1000");
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double rr = spec.r(p);
  CertifyReport rep;
  rep.samples = samples;
  double sum = 0.0;
  for (int s = 0; s < samples; ++s) {
    Eigen::VectorXd x(p);
    for (int l = 0; l < p; ++l) x(l) = gauss(rng);
    const double ratio =
        (compress(spec, x, rng) / rr - x).squaredNorm() / x.squaredNorm();
    sum += ratio;
    rep.max_ratio = std::max(rep.max_ratio, ratio);
  }
  rep.mean_ratio = sum / samples;
  rep.bound = (1.0 - spec.delta(p)) * (1.0 + 3.0 / std::sqrt(double(samples)));
  rep.pass = rep.mean_ratio <= rep.bound;
  return rep;
}

}  // namespace czsd
