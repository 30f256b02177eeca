#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "rofso/capacity.hpp"
#include "rofso/errors.hpp"
#include "rofso/random.hpp"

using namespace rofso;

namespace {

// Eq. written out term by term, independent of the folded coefficients.
double cnr_reference(double p, double h, const SystemParams& s) {
  const double pr = p * h;
  const double signal = 0.5 * std::pow(s.omi * s.m_p * s.r * pr, 2.0);
  const double rin_noise = s.rin * std::pow(s.r * pr, 2.0);
  const double shot = 2.0 * s.e_charge * std::pow(s.m_p, 2.0 + s.f_excess) * s.r * pr;
  const double thermal = 4.0 * s.k_boltz * s.temperature / s.r_f;
  return signal / (rin_noise + shot + thermal);
}

SystemParams random_system(Rng& rng) {
  SystemParams s;
  s.omi = 0.05 + 0.95 * rng.uniform();
  s.m_p = 1.0 + 20.0 * rng.uniform();
  s.r = 0.3 + 0.7 * rng.uniform();
  s.rin = std::pow(10.0, -7.0 + 4.0 * rng.uniform());
  s.f_excess = rng.uniform();
  s.temperature = 250.0 + 100.0 * rng.uniform();
  s.r_f = 25.0 + 75.0 * rng.uniform();
  return s;
}

}  // namespace

TEST_CASE("cnr matches the term-by-term formula") {
  const SystemParams sys;
  for (double h : {1e-10, 1e-9, 1e-8, 1.0}) {
    for (double p : {0.0, 1e-3, 0.05, 0.3}) {
      const double ref = cnr_reference(p, h, sys);
      CHECK(cnr(p, h, sys) == doctest::Approx(ref).epsilon(1e-13));
      CHECK(capacity(p, h, sys) == doctest::Approx(std::log1p(ref)).epsilon(1e-13));
    }
  }
}

TEST_CASE("zero power or zero gain gives zero") {
  Rng rng(8);
  for (int k = 0; k < 50; ++k) {
    const auto sys = random_system(rng);
    CHECK(cnr(0.0, 1e-9, sys) == 0.0);
    CHECK(cnr(0.2, 0.0, sys) == 0.0);
    CHECK(capacity(0.0, std::pow(10.0, -12.0 + 12.0 * rng.uniform()), sys) == 0.0);
  }
}

TEST_CASE("capacity is nondecreasing in power") {
  Rng rng(21);
  for (int draw = 0; draw < 50; ++draw) {
    const auto sys = random_system(rng);
    const double h = std::pow(10.0, -12.0 + 8.0 * rng.uniform());
    double prev = capacity(0.0, h, sys);
    for (int k = 1; k <= 300; ++k) {
      const double cur = capacity(0.3 * k / 300.0, h, sys);
      CHECK(cur >= prev);
      prev = cur;
    }
  }
  SUBCASE("strictly increasing on a coarse grid at the default receiver") {
    const SystemParams sys;
    double prev = capacity(0.01, 1e-9, sys);
    for (int k = 2; k <= 30; ++k) {
      const double cur = capacity(0.01 * k, 1e-9, sys);
      CHECK(cur > prev);
      prev = cur;
    }
  }
}

TEST_CASE("RIN-limited plateau") {
  const SystemParams sys;
  const CnrModel model(sys);
  const double plateau = 0.5 * std::pow(sys.omi * sys.m_p, 2.0) / sys.rin;
  CHECK(model.plateau() == doctest::Approx(plateau).epsilon(1e-14));

  // thermal and RIN terms equal at x^2 = d / b
  const double d = 4.0 * sys.k_boltz * sys.temperature / sys.r_f;
  const double crossover = std::sqrt(d / (sys.rin * sys.r * sys.r));
  const double x = 1e6 * crossover;
  CHECK(std::abs(model.cnr(x, 1.0) - plateau) <= 0.01 * plateau);
  CHECK(model.cnr(x, 1.0) < plateau);
}

TEST_CASE("rin from dB/Hz") {
  CHECK(rin_from_db(-140.0, 1e9) == doctest::Approx(1e-5).epsilon(1e-12));
  CHECK(rin_from_db(-150.0, 1e6) == doctest::Approx(1e-9).epsilon(1e-12));
}

TEST_CASE("weighted sum capacity") {
  const SystemParams sys;
  const CsiVector csi{{1e-9, 2e-9, 5e-10}};
  const PowerAllocation alloc{{0.1, 0.2, 0.3}};
  const Weights w{{0.2, 0.5, 0.9}};
  double sum = 0.0;
  for (std::size_t i = 0; i < 3; ++i) sum += w.omega[i] * capacity(alloc.p[i], csi.h[i], sys);
  CHECK(weighted_sum_capacity(alloc, csi, w, sys) == doctest::Approx(sum).epsilon(1e-15));
  CHECK(weighted_sum_capacity(alloc, csi, Weights{{0.0, 0.0, 0.0}}, sys) == 0.0);
  CHECK_THROWS_AS(weighted_sum_capacity(alloc, csi, Weights{{1.0}}, sys), std::invalid_argument);
}

TEST_CASE("system parameter validation") {
  SystemParams s;
  CHECK_NOTHROW(s.validate());
  s.omi = 1.5;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = {};
  s.f_excess = 0.0;
  CHECK_NOTHROW(s.validate());
  s.r_f = 0.0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("oracles") {
  const SystemParams sys;
  ModelCapacityOracle model(sys);
  const CsiVector csi{{1e-9, 3e-10}};
  const PowerAllocation alloc{{0.25, 0.05}};
  const auto got = model.observe_all(alloc, csi);
  REQUIRE(got.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) CHECK(got[i] == capacity(alloc.p[i], csi.h[i], sys));

  CHECK_THROWS_AS(model.observe_all(PowerAllocation{{0.1}}, csi), std::invalid_argument);

  NoisyCapacityOracle noisy(model, 0.5, Rng(4));
  double sum = 0.0;
  const int n = 20000;
  for (int k = 0; k < n; ++k) sum += noisy.observe(0, 0.25, 1e-9);
  const double clean = capacity(0.25, 1e-9, sys);
  CHECK(std::abs(sum / n - clean) <= 3.0 * 0.5 / std::sqrt(double(n)));
}

TEST_CASE("cnr evaluation counter") {
  const SystemParams sys;
  reset_cnr_evaluation_count();
  CHECK(cnr_evaluation_count() == 0);
  (void)cnr(0.1, 1e-9, sys);
  (void)capacity(0.1, 1e-9, sys);
  CHECK(cnr_evaluation_count() == 2);
  reset_cnr_evaluation_count();
  CHECK(cnr_evaluation_count() == 0);
}
