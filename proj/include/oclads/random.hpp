#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <utility>

namespace oclads {

// SplitMix64 finalizer; used to derive independent substream seeds.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream);

// Seeded generator with hand-written distributions. The std:: distributions
// are implementation-defined, so they are avoided to keep every stream
// bit-identical across standard libraries.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on [0, 1) with 53 bits of resolution.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller (one spare value cached).
    double normal();

    bool bernoulli(double p) { return uniform() < p; }

    // Uniform integer in [0, n); n must be positive.
    std::size_t index(std::size_t n);

    template <typename T>
    void shuffle(std::span<T> values) {
        for (std::size_t i = values.size(); i > 1; --i) {
            std::swap(values[i - 1], values[index(i)]);
        }
    }

  private:
    std::mt19937_64 engine_;
    std::optional<double> spare_normal_;
};

}  // namespace oclads
