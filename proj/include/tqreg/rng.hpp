#pragma once

#include <cstdint>
#include <random>

namespace tqreg {

// Random stream owned by a single chain or replication task. Streams derived
// from the same root seed with distinct indices are independent; all kernels
// draw from their chain's stream in sweep order, so a run is reproducible
// from (seed, stream index) alone.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Derived stream: mixes the root seed with a stream index (chain or
  // replication number).
  Rng(std::uint64_t root, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(root & 0xffffffffu),
                      static_cast<std::uint32_t>(root >> 32),
                      static_cast<std::uint32_t>(stream & 0xffffffffu),
                      static_cast<std::uint32_t>(stream >> 32)};
    engine_.seed(seq);
  }

  double uniform() {
    return std::uniform_real_distribution<double>(0.0, 1.0)(engine_);
  }

  double uniform(double a, double b) {
    return std::uniform_real_distribution<double>(a, b)(engine_);
  }

  double normal() {
    return std::normal_distribution<double>(0.0, 1.0)(engine_);
  }

  double normal(double mean, double sd) {
    return std::normal_distribution<double>(mean, sd)(engine_);
  }

  // Exponential with the given mean.
  double exponential(double mean) {
    return std::exponential_distribution<double>(1.0 / mean)(engine_);
  }

  double gamma(double shape, double scale) {
    return std::gamma_distribution<double>(shape, scale)(engine_);
  }

  double gamma_rate(double shape, double rate) {
    return std::gamma_distribution<double>(shape, 1.0 / rate)(engine_);
  }

  // Inverse gamma with density proportional to x^{-shape-1} exp(-scale/x).
  double inv_gamma(double shape, double scale) {
    return scale / std::gamma_distribution<double>(shape, 1.0)(engine_);
  }

  double beta(double a, double b) {
    double x = std::gamma_distribution<double>(a, 1.0)(engine_);
    double y = std::gamma_distribution<double>(b, 1.0)(engine_);
    return x / (x + y);
  }

  double chisq(double df) {
    return std::gamma_distribution<double>(0.5 * df, 2.0)(engine_);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace tqreg
