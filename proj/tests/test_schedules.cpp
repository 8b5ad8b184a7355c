#include "doctest.h"

#include <cmath>

#include "tts/errors.hpp"
#include "tts/schedules.hpp"

namespace {

tts::StepSchedule sched(double beta0, double b, double gamma0, double a) {
  tts::StepSchedule s;
  s.beta0 = beta0;
  s.b = b;
  s.gamma0 = gamma0;
  s.a = a;
  return s;
}

// Euler-Maclaurin: sum_{k<=n} k^-p = zeta(p) + n^{1-p}/(1-p) + n^-p/2 - p n^{-p-1}/12 + ...
double power_sum_em(double p, double n) {
  return std::riemann_zeta(p) + std::pow(n, 1 - p) / (1 - p) + 0.5 * std::pow(n, -p) -
         p * std::pow(n, -p - 1) / 12.0;
}

}  // namespace

TEST_CASE("beta and gamma examples") {
  CHECK(sched(1, 1, 1, 0.6).beta(10) == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(sched(1, 0.8, 2, 0.6).gamma(1) == 2.0);
  CHECK(sched(0.5, 0.75, 1, 0.6).beta(16) == doctest::Approx(0.0625).epsilon(1e-15));
  CHECK_THROWS_AS(sched(1, 1, 1, 0.6).beta(0), tts::DomainError);
  CHECK_THROWS_AS(sched(1, 1, 1, 0.6).gamma(0), tts::DomainError);
}

TEST_CASE("partial sums, small n") {
  const auto s = sched(2, 0.8, 3, 0.6);
  const auto p1 = tts::partial_sums(s, 1);
  CHECK(p1.u == 2.0);
  CHECK(p1.s == 3.0);

  const auto p3 = tts::partial_sums(sched(1, 1, 1, 0.6), 3);
  CHECK(p3.u == doctest::Approx(11.0 / 6.0).epsilon(1e-15));
}

TEST_CASE("partial sums against the integral comparison") {
  // zeta(b) offsets the integral by |zeta(0.8)| ~ 4.4, so 0.5% needs n^{0.2} >> 200;
  // b = 0.6 at n = 1e6 is inside by an order of magnitude
  const std::size_t n = 1000000;
  const auto s = sched(1.5, 0.6, 1, 0.55);
  const double ref = s.beta0 * std::pow(double(n), 1 - s.b) / (1 - s.b);
  CHECK(std::abs(tts::partial_sums(s, n).u - ref) / ref < 0.005);
}

TEST_CASE("partial sums match Euler-Maclaurin closely") {
  for (double b : {0.55, 0.7, 0.8, 0.95}) {
    const std::size_t n = 2000000;
    const auto s = sched(1.0, b, 1.0, 0.51);
    const double sum = tts::partial_sums(s, n).u;
    CHECK(std::abs(sum - power_sum_em(b, double(n))) / sum < 1e-11);
  }
}

TEST_CASE("step ratio and monotonicity") {
  const auto s = sched(2, 0.8, 3, 0.6);
  double prev_ratio = s.beta(1) / s.gamma(1);
  tts::CompensatedSum u;
  u.add(s.beta(1));
  for (std::size_t n = 2; n < 20000; ++n) {
    const double r = s.beta(n) / s.gamma(n);
    REQUIRE(r < prev_ratio);
    prev_ratio = r;
    const double before = u.value();
    u.add(s.beta(n));
    REQUIRE(u.value() > before);
  }
  CHECK(prev_ratio < 0.3);
}

TEST_CASE("beta_n / beta_{n+1} expansion") {
  for (double b : {0.6, 0.8, 1.0}) {
    const auto s = sched(1, b, 1, 0.55);
    for (std::size_t n = 10; n < 5000; n += 7) {
      const double dn = double(n);
      const double v = s.beta(n) / s.beta(n + 1) - 1 - b / dn;
      REQUIRE(std::abs(v) <= 2 * b * b / (dn * dn));
    }
  }
}

TEST_CASE("validate_schedule") {
  CHECK(tts::validate_schedule(sched(0.01, 0.8, 1, 0.6), 1.0).passed());

  const auto r = tts::validate_schedule(sched(0.4, 1.0, 1, 0.6), 1.0);
  CHECK_FALSE(r.passed());
  const auto* item = r.find("A3(ii)");
  REQUIRE(item != nullptr);
  CHECK(item->status == tts::CheckStatus::fail);
  CHECK(item->detail.find("0.5") != std::string::npos);

  CHECK(tts::validate_schedule(sched(0.6, 1.0, 1, 0.6), 1.0).passed());

  auto avg = sched(1, 1.0, 1, 0.6);
  avg.regime = tts::Regime::averaging;
  const auto ra = tts::validate_schedule(avg, 10.0);
  REQUIRE(ra.find("A'3") != nullptr);
  CHECK_FALSE(ra.passed());
  bool found = false;
  for (const auto* f : ra.failures()) found |= f->assumption == "A'3";
  CHECK(found);

  CHECK_FALSE(tts::validate_schedule(sched(1, 0.6, 1, 0.7), 1.0).passed());
  CHECK_FALSE(tts::validate_schedule(sched(1, 0.8, 1, 0.5), 1.0).passed());
  CHECK_FALSE(tts::validate_schedule(sched(-1, 0.8, 1, 0.6), 1.0).passed());
}
