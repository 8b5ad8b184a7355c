#pragma once

// Counter-based Philox4x32-10 generator. A (seed, stream) pair selects an
// independent sequence, so replication r of an experiment can be generated
// anywhere without coordinating with the others.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

#include "tts/matrix_core.hpp"
#include "tts/problem_model.hpp"

namespace tts {

using Philox4x32Block = std::array<std::uint32_t, 4>;
using Philox4x32Key = std::array<std::uint32_t, 2>;

/// Ten rounds of Philox4x32 on one counter block.
inline Philox4x32Block philox4x32_10(Philox4x32Block ctr, Philox4x32Key key) {
  constexpr std::uint32_t m0 = 0xD2511F53u, m1 = 0xCD9E8D57u;
  constexpr std::uint32_t w0 = 0x9E3779B9u, w1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(m0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(m1) * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += w0;
    key[1] += w1;
  }
  return ctr;
}

/// UniformRandomBitGenerator over 64-bit words. The key is the seed; the high
/// half of the counter is the stream id, the low half counts blocks.
class PhiloxEngine {
 public:
  using result_type = std::uint64_t;

  explicit PhiloxEngine(std::uint64_t seed = 0, std::uint64_t stream = 0)
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
        stream_(stream) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    if (pos_ == 2) refill();
    const result_type out = (static_cast<result_type>(buf_[2 * pos_ + 1]) << 32) | buf_[2 * pos_];
    ++pos_;
    return out;
  }

  std::uint64_t blocks_used() const { return block_; }

 private:
  void refill() {
    buf_ = philox4x32_10({static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
                          static_cast<std::uint32_t>(stream_),
                          static_cast<std::uint32_t>(stream_ >> 32)},
                         key_);
    ++block_;
    pos_ = 0;
  }

  Philox4x32Key key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  Philox4x32Block buf_{};
  int pos_ = 2;
};

/// Draws (V, W) = F z with F F^T = Gamma and z standard (Gaussian or uniform
/// on [-sqrt 3, sqrt 3], both unit variance).
class NoiseSampler {
 public:
  NoiseSampler(const NoiseModel& noise, Eigen::Index d)
      : factor_(psd_factor(noise.gamma)),
        distribution_(noise.distribution),
        d_(d),
        z_(noise.gamma.rows()),
        out_(noise.gamma.rows()),
        uniform_(-std::sqrt(3.0), std::sqrt(3.0)) {}

  template <typename Engine>
  void draw(Engine& eng, VectorXd& v, VectorXd& w) {
    if (distribution_ == NoiseDistribution::gaussian) {
      for (Eigen::Index i = 0; i < z_.size(); ++i) z_(i) = normal_(eng);
    } else {
      for (Eigen::Index i = 0; i < z_.size(); ++i) z_(i) = uniform_(eng);
    }
    out_.noalias() = factor_ * z_;
    v = out_.head(d_);
    w = out_.tail(out_.size() - d_);
  }

  const MatrixXd& factor() const { return factor_; }

 private:
  MatrixXd factor_;
  NoiseDistribution distribution_;
  Eigen::Index d_;
  VectorXd z_, out_;
  std::normal_distribution<double> normal_;
  std::uniform_real_distribution<double> uniform_;
};

}  // namespace tts
