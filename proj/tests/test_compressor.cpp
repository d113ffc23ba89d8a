#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "czsd/compressor.hpp"

using namespace czsd;
using Eigen::VectorXd;

TEST_CASE("identity is bit-exact with trivial certificate") {
  CompressorSpec id = identity_compressor();
  std::mt19937_64 rng(1);
  VectorXd x(4);
  x << 0.5, -1.25, 3.0, 0.0;
  CHECK(compress(id, x, rng) == x);
  CHECK(id.r(4) == 1.0);
  CHECK(id.delta(4) == 1.0);
  CHECK(id.bits_per_vector(50) == 3200);
}

TEST_CASE("dithered k=2 reproduces a saturating input exactly") {
  // |x| at the max level: floor(2 + dither) = 2 for all dither in [0,1)
  CompressorSpec q = dithered_quantizer(2);
  std::mt19937_64 rng(3);
  VectorXd x(2);
  x << 1.0, -1.0;
  for (int s = 0; s < 20; ++s) CHECK((compress(q, x, rng) - x).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("dithered zero input maps to zero") {
  CompressorSpec q = dithered_quantizer(2);
  std::mt19937_64 rng(3);
  CHECK(compress(q, VectorXd::Zero(5), rng).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("dithered certificate and bit count") {
  CompressorSpec q = dithered_quantizer(2);
  CHECK(q.r(50) == doctest::Approx(4.125));
  CHECK(q.delta(50) == doctest::Approx(1.0 / 4.125));
  CHECK(q.bits_per_vector(50) == 214);
  CHECK(q.bits_per_vector(1) == 3 * 1 + 64);
  CHECK(dithered_quantizer(1).bits_per_vector(1) == 66);
  const double r = q.r(50), d = q.delta(50);
  CHECK(q.delta0(50) == doctest::Approx(2 * r * r * (1 - d) + 2 * (1 - r) * (1 - r)));
}

TEST_CASE("dithered unbiasedness and sign preservation") {
  CompressorSpec q = dithered_quantizer(2);
  std::mt19937_64 rng(17);
  VectorXd x(5);
  x << 1.0, -0.3, 0.6, 0.0, -0.9;
  const int N = 10000;
  VectorXd mean = VectorXd::Zero(5);
  for (int s = 0; s < N; ++s) {
    VectorXd c = compress(q, x, rng);
    for (int l = 0; l < 5; ++l) {
      if (x(l) > 0) CHECK(c(l) >= 0.0);
      if (x(l) < 0) CHECK(c(l) <= 0.0);
      if (x(l) == 0) CHECK(c(l) == 0.0);
    }
    mean += c;
  }
  mean /= N;
  // per-component dither std is at most the step size / sqrt(12)
  const double step = 1.0 / 2.0;
  CHECK((mean - x).cwiseAbs().maxCoeff() <= 4.0 * step / std::sqrt(double(N)));
}

TEST_CASE("top-k keeps largest magnitudes, ties to lowest index") {
  CompressorSpec t = top_k_compressor(2.0 / 3.0);
  std::mt19937_64 rng(5);
  VectorXd x(3);
  x << 3.0, 1.0, -2.0;
  VectorXd c = compress(t, x, rng);
  CHECK(c(0) == 3.0);
  CHECK(c(1) == 0.0);
  CHECK(c(2) == -2.0);
  CHECK((c - x).squaredNorm() == doctest::Approx(1.0));
  CHECK((c - x).squaredNorm() <= (1.0 - 2.0 / 3.0) * x.squaredNorm());

  VectorXd ties(4);
  ties << 1.0, -1.0, 1.0, -1.0;
  CompressorSpec half = top_k_compressor(0.5);
  VectorXd ct = compress(half, ties, rng);
  CHECK(ct(0) == 1.0);
  CHECK(ct(1) == -1.0);
  CHECK(ct(2) == 0.0);
  CHECK(ct(3) == 0.0);
}

TEST_CASE("top-k bit accounting") {
  CompressorSpec t = top_k_compressor(0.1);
  // p=50 keeps 5 entries, 6 index bits each
  CHECK(t.bits_per_vector(50) == 5 * (64 + 6));
}

TEST_CASE("non-finite input rejected") {
  std::mt19937_64 rng(1);
  VectorXd x(2);
  x << 1.0, std::nan("");
  CHECK_THROWS_AS(compress(identity_compressor(), x, rng), NonFiniteInput);
}

TEST_CASE("determinism given rng state") {
  CompressorSpec q = dithered_quantizer(2);
  VectorXd x = VectorXd::LinSpaced(20, -1.0, 1.0);
  std::mt19937_64 a(99), b(99);
  CHECK(compress(q, x, a) == compress(q, x, b));
}

TEST_CASE("certify: identity passes with zero ratio") {
  std::mt19937_64 rng(2);
  CertifyReport rep = certify(identity_compressor(), 10, 1000, rng);
  CHECK(rep.mean_ratio == 0.0);
  CHECK(rep.max_ratio == 0.0);
  CHECK(rep.pass);
}

TEST_CASE("certify: contract holds for shipped compressors across dimensions") {
  std::mt19937_64 rng(7);
  for (int p : {5, 20, 50}) {
    CHECK(certify(dithered_quantizer(2), p, 2000, rng).pass);
    CHECK(certify(top_k_compressor(0.3), p, 2000, rng).pass);
    CHECK(certify(identity_compressor(), p, 1000, rng).pass);
  }
}

TEST_CASE("certify rejects tiny sample counts") {
  std::mt19937_64 rng(7);
  CHECK_THROWS(certify(identity_compressor(), 5, 10, rng));
}
