#include <doctest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "oracles.hpp"
#include "rofso/normal_math.hpp"
#include "rofso/policy.hpp"
#include "stats_helpers.hpp"

using namespace rofso;

namespace {

constexpr double kPeak = 0.3;

double integrate_density(const TruncatedGaussian& d) {
  auto f = [&](double x) { return std::exp(d.log_pdf(x)); };
  using boost::math::quadrature::gauss_kronrod;
  // split at the mode so narrow peaks are resolved
  const double m = std::clamp(d.mu(), d.lower(), d.upper());
  double total = 0.0;
  if (m > d.lower()) total += gauss_kronrod<double, 61>::integrate(f, d.lower(), m, 20, 1e-13);
  if (m < d.upper()) total += gauss_kronrod<double, 61>::integrate(f, m, d.upper(), 20, 1e-13);
  return total;
}

}  // namespace

TEST_CASE("construction checks") {
  CHECK_THROWS_AS(TruncatedGaussian(0.1, 0.0, 0.0, kPeak), std::invalid_argument);
  CHECK_THROWS_AS(TruncatedGaussian(0.1, 0.1, 0.3, 0.3), std::invalid_argument);
  CHECK_THROWS_AS(TruncatedGaussian(std::nan(""), 0.1, 0.0, kPeak), std::invalid_argument);
  const TruncatedGaussian d(0.1, 0.05, 0.0, kPeak);
  CHECK_THROWS_AS(d.log_pdf(-1e-9), std::domain_error);
  CHECK_THROWS_AS(d.grad_log_pdf(0.31), std::domain_error);
  CHECK_NOTHROW(d.log_pdf(0.0));
  CHECK_NOTHROW(d.log_pdf(kPeak));
}

TEST_CASE("density integrates to one") {
  for (const auto [mu, sigma] : {std::pair{0.15, 0.05}, std::pair{0.01, 0.2}, std::pair{0.29, 3e-4},
                                 std::pair{-0.2, 0.1}, std::pair{0.5, 0.02}, std::pair{0.15, 1.5}}) {
    const TruncatedGaussian d(mu, sigma, 0.0, kPeak);
    CHECK(std::abs(integrate_density(d) - 1.0) <= 1e-6);
  }
}

TEST_CASE("log density against an erfc reference") {
  for (const auto [mu, sigma] : {std::pair{0.15, 0.05}, std::pair{0.01, 0.2}, std::pair{0.4, 0.1}}) {
    const TruncatedGaussian d(mu, sigma, 0.0, kPeak);
    for (double x = 0.0; x <= kPeak; x += 0.0125) {
      const double ref = static_cast<double>(test::reference_truncnorm_log_pdf(x, mu, sigma, 0.0, kPeak));
      CHECK(d.log_pdf(x) == doctest::Approx(ref).epsilon(1e-12));
    }
  }
}

TEST_CASE("untruncated limit") {
  const double mu = 0.15;
  const double sigma = kPeak / 16.0;  // bounds at +-8 sigma
  const TruncatedGaussian d(mu, sigma, 0.0, kPeak);
  for (double x = 0.0; x <= kPeak; x += 0.01) {
    const double z = (x - mu) / sigma;
    const double plain = -0.5 * z * z - 0.5 * std::log(2.0 * std::numbers::pi) - std::log(sigma);
    CHECK(std::abs(d.log_pdf(x) - plain) <= 1e-9);
  }
}

TEST_CASE("tiny normalizer stays stable") {
  // alpha = 7.034 puts the whole support in a tail of mass ~1e-12
  const double sigma = 0.01;
  const double mu = -7.034 * sigma;
  const TruncatedGaussian d(mu, sigma, 0.0, kPeak);
  CHECK(d.log_normalizer() == doctest::Approx(std::log(1e-12)).epsilon(1e-3));
  CHECK_FALSE(d.degenerate());
  for (double x : {0.0, 1e-4, 1e-3, 5e-3}) {
    const double ref = static_cast<double>(test::reference_truncnorm_log_pdf(x, mu, sigma, 0.0, kPeak));
    CHECK(d.log_pdf(x) == doctest::Approx(ref).epsilon(1e-9));
    const auto g = d.grad_log_pdf(x);
    CHECK(std::isfinite(g.d_mu));
    CHECK(std::isfinite(g.d_sigma));
  }
  CHECK(std::abs(integrate_density(d) - 1.0) <= 1e-6);

  Rng rng(6);
  for (int k = 0; k < 1000; ++k) {
    const double x = d.sample(rng);
    CHECK((x >= 0.0 && x <= kPeak));
  }
}

TEST_CASE("degenerate normalizer falls back to the nearer bound") {
  const TruncatedGaussian d(-50.0, 0.01, 0.0, kPeak);
  CHECK(d.degenerate());
  Rng rng(1);
  CHECK(d.sample(rng) == 0.0);
  const TruncatedGaussian e(50.0, 0.01, 0.0, kPeak);
  CHECK(e.sample(rng) == kPeak);
}

TEST_CASE("score against finite differences") {
  const double h = 1e-6;
  for (const auto [mu, sigma] : {std::pair{0.15, 0.05}, std::pair{0.02, 0.1}, std::pair{0.28, 0.01},
                                 std::pair{0.35, 0.08}, std::pair{0.1, 0.3}}) {
    const TruncatedGaussian d(mu, sigma, 0.0, kPeak);
    for (double x : {0.01, 0.07, 0.15, 0.22, 0.29}) {
      auto ref = [&](long double m, long double s) {
        return test::reference_truncnorm_log_pdf(x, m, s, 0.0L, kPeak);
      };
      const double fd_mu = static_cast<double>((ref(mu + h, sigma) - ref(mu - h, sigma)) / (2 * h));
      const double fd_sigma =
          static_cast<double>((ref(mu, sigma + h) - ref(mu, sigma - h)) / (2 * h));
      const auto g = d.grad_log_pdf(x);
      CHECK(test::relative_error(g.d_mu, fd_mu) <= 1e-6);
      CHECK(test::relative_error(g.d_sigma, fd_sigma) <= 1e-6);
    }
  }
}

TEST_CASE("score has zero mean") {
  Rng pick(12);
  for (int trial = 0; trial < 5; ++trial) {
    const double mu = -0.05 + 0.4 * pick.uniform();
    const double sigma = 0.01 + 0.2 * pick.uniform();
    const TruncatedGaussian d(mu, sigma, 0.0, kPeak);
    Rng rng(100 + trial);
    std::vector<double> xs(100'000);
    for (auto& x : xs) x = d.sample(rng);
    std::size_t k = 0;
    const auto m = test::monte_carlo_mean(xs.size(), [&] { return d.grad_log_pdf(xs[k++]).d_mu; });
    k = 0;
    const auto s =
        test::monte_carlo_mean(xs.size(), [&] { return d.grad_log_pdf(xs[k++]).d_sigma; });
    CHECK(std::abs(m.mean) <= 3.0 * m.std_error);
    CHECK(std::abs(s.mean) <= 3.0 * s.std_error);
  }
}

TEST_CASE("sampling") {
  SUBCASE("support and KS against the analytic cdf") {
    for (const auto [mu, sigma] : {std::pair{0.15, 0.08}, std::pair{0.02, 0.05},
                                   std::pair{0.33, 0.04}, std::pair{0.1, 1.0}}) {
      const TruncatedGaussian d(mu, sigma, 0.0, kPeak);
      Rng rng(77);
      const std::size_t n = 100'000;
      std::vector<double> xs(n);
      for (auto& x : xs) {
        x = d.sample(rng);
        REQUIRE(x >= 0.0);
        REQUIRE(x <= kPeak);
      }
      const double ks = test::ks_statistic(xs, [&](double x) { return d.cdf(x); });
      CHECK(ks < 1.358 / std::sqrt(double(n)));  // 95% critical value
    }
  }

  SUBCASE("a million draws never leave the support") {
    const TruncatedGaussian d(0.29, 0.15, 0.0, kPeak);
    Rng rng(8);
    bool inside = true;
    for (int k = 0; k < 1'000'000; ++k) {
      const double x = d.sample(rng);
      inside = inside && x >= 0.0 && x <= kPeak;
    }
    CHECK(inside);
  }

  SUBCASE("narrow centred policy") {
    const auto head = PolicyHead::for_peak(kPeak);
    const TruncatedGaussian d(kPeak / 2, head.sigma_min, 0.0, kPeak);
    Rng rng(31);
    const auto est = test::monte_carlo_mean(100'000, [&] { return d.sample(rng); });
    CHECK(std::abs(est.mean - kPeak / 2) <= 3.0 * est.std_error);
    CHECK(d.mean() == doctest::Approx(kPeak / 2).epsilon(1e-12));
  }

  SUBCASE("mean formula matches Monte Carlo") {
    const TruncatedGaussian d(0.02, 0.1, 0.0, kPeak);
    Rng rng(32);
    const auto est = test::monte_carlo_mean(100'000, [&] { return d.sample(rng); });
    CHECK(std::abs(est.mean - d.mean()) <= 3.0 * est.std_error);
  }
}

TEST_CASE("head transform") {
  const auto head = PolicyHead::for_peak(kPeak);
  CHECK(head.sigma_min == doctest::Approx(3e-4));
  CHECK(head.sigma_max == doctest::Approx(0.15));

  const std::vector<double> zero{0.0, 0.0};
  const auto d = from_network_outputs(zero, kPeak, head);
  CHECK(d.mu() == doctest::Approx(kPeak / 2).epsilon(1e-15));
  CHECK(d.sigma() == doctest::Approx((head.sigma_min + head.sigma_max) / 2).epsilon(1e-15));

  const std::vector<double> big{800.0, -800.0};
  const auto sat = from_network_outputs(big, kPeak, head);
  CHECK(sat.mu() <= kPeak);
  CHECK(sat.mu() == doctest::Approx(kPeak));
  CHECK(sat.sigma() >= head.sigma_min);

  const std::vector<double> bad{std::numeric_limits<double>::infinity(), 0.0};
  CHECK_THROWS_AS(from_network_outputs(bad, kPeak, head), std::invalid_argument);
  CHECK_THROWS_AS(from_network_outputs(std::vector<double>{1.0}, kPeak, head),
                  std::invalid_argument);
  CHECK_THROWS(PolicyHead{0.2, 0.1}.validate());
}

TEST_CASE("head Jacobian against finite differences") {
  const auto head = PolicyHead::for_peak(kPeak);
  auto logistic_ref = [](long double x) { return 1.0L / (1.0L + std::exp(-x)); };
  const long double h = 1e-5L;
  Rng rng(9);
  for (int k = 0; k < 50; ++k) {
    const std::vector<double> raw{3.0 * rng.normal(), 3.0 * rng.normal()};
    const auto jac = head_jacobian(raw, kPeak, head);
    const long double fd_mu =
        kPeak * (logistic_ref(raw[0] + h) - logistic_ref(raw[0] - h)) / (2 * h);
    const long double fd_sigma = (head.sigma_max - head.sigma_min) *
                                 (logistic_ref(raw[1] + h) - logistic_ref(raw[1] - h)) / (2 * h);
    CHECK(test::relative_error(jac.dmu_draw, static_cast<double>(fd_mu)) <= 1e-8);
    CHECK(test::relative_error(jac.dsigma_draw, static_cast<double>(fd_sigma)) <= 1e-8);
  }
}
