#include "tts/schedules.hpp"

#include <cmath>
#include <sstream>

#include "tts/errors.hpp"

namespace tts {

const char* to_string(Regime r) { return r == Regime::theorem1 ? "theorem1" : "averaging"; }

double StepSchedule::beta(std::size_t n) const {
  if (n == 0) throw DomainError("beta: step index starts at n = 1");
  return beta0 * std::pow(static_cast<double>(n), -b);
}

double StepSchedule::gamma(std::size_t n) const {
  if (n == 0) throw DomainError("gamma: step index starts at n = 1");
  return gamma0 * std::pow(static_cast<double>(n), -a);
}

PartialSums partial_sums(const StepSchedule& schedule, std::size_t n) {
  if (n == 0) throw DomainError("partial_sums: step index starts at n = 1");
  CompensatedSum u, s;
  for (std::size_t k = 1; k <= n; ++k) {
    u.add(schedule.beta(k));
    s.add(schedule.gamma(k));
  }
  return {u.value(), s.value()};
}

ValidationReport validate_schedule(const StepSchedule& sc, double lambda_h) {
  ValidationReport r;
  std::ostringstream os;

  os << "beta0 = " << sc.beta0 << ", gamma0 = " << sc.gamma0;
  r.add("A3(i)", "step scales beta0 > 0 and gamma0 > 0", sc.beta0 > 0 && sc.gamma0 > 0, os.str());

  os.str("");
  os << "a = " << sc.a << ", b = " << sc.b;
  r.add("A3(i)", "exponent ordering 1/2 < a < b <= 1", 0.5 < sc.a && sc.a < sc.b && sc.b <= 1.0,
        os.str());

  if (sc.critical()) {
    const double threshold = lambda_h > 0 ? 1.0 / (2.0 * lambda_h) : INFINITY;
    os.str("");
    os << "beta0 = " << sc.beta0 << ", requires beta0 > 1/(2*Lambda(H)) = " << threshold;
    r.add("A3(ii)", "b = 1 requires beta0 > 1/(2*Lambda(H))", sc.beta0 > threshold, os.str());
    r.record("beta0_threshold", threshold);
  }

  if (sc.regime == Regime::averaging) {
    os.str("");
    os << "a = " << sc.a << ", b = " << sc.b;
    r.add("A'3", "averaging regime requires 1/2 < a < b < 1",
          0.5 < sc.a && sc.a < sc.b && sc.b < 1.0, os.str());
  }
  return r;
}

}  // namespace tts
