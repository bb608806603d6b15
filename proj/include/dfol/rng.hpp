#pragma once

#include <cstdint>
#include <random>

namespace dfol {

// Deterministic 64-bit seeded generator. One owner per trial; nothing global.
class Rng
{
public:
  using Engine = std::mt19937_64;

  explicit Rng(std::uint64_t seed)
    : engine_(seed)
  {
  }

  double normal() { return normal_(engine_); }

  // Uniform on [0, 1).
  double uniform() { return uniform_(engine_); }

  // Uniform integer on [0, n).
  std::uint64_t index(std::uint64_t n)
  {
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
  }

  Engine &engine() { return engine_; }

private:
  Engine                                 engine_;
  std::normal_distribution<double>       normal_{0.0, 1.0};
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

} // namespace dfol
