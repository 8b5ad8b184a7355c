#pragma once

#include <cstddef>

#include "tts/validation.hpp"

namespace tts {

/// Which convergence regime a schedule is meant for.
///   theorem1:  1/2 < a < b <= 1 (plain iteration CLT)
///   averaging: 1/2 < a < b < 1  (running-average CLT)
enum class Regime { theorem1, averaging };

const char* to_string(Regime r);

/// Power-law step sizes beta_n = beta0 n^-b (slow component theta) and
/// gamma_n = gamma0 n^-a (fast component mu). Indexing starts at n = 1.
struct StepSchedule {
  double beta0 = 2.0;
  double b = 0.8;
  double gamma0 = 3.0;
  double a = 0.6;
  Regime regime = Regime::theorem1;

  double beta(std::size_t n) const;
  double gamma(std::size_t n) const;

  /// b == 1 exactly; selects the shifted covariance formula.
  bool critical() const { return b == 1.0; }

  bool operator==(const StepSchedule&) const = default;
};

/// Running Kahan-compensated sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double y = x - carry_;
    const double t = total_ + y;
    carry_ = (t - total_) - y;
    total_ = t;
  }
  double value() const { return total_; }

 private:
  double total_ = 0.0;
  double carry_ = 0.0;
};

struct PartialSums {
  double u = 0.0;  ///< sum of beta_k, k = 1..n
  double s = 0.0;  ///< sum of gamma_k, k = 1..n
};

PartialSums partial_sums(const StepSchedule& schedule, std::size_t n);

/// Checks the step-size assumptions. `lambda_h` is the spectral gap of H.
ValidationReport validate_schedule(const StepSchedule& schedule, double lambda_h);

}  // namespace tts
