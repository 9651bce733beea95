#pragma once

#include <cstdint>

namespace mlhub {

/// Counter-free splittable generator built on the splitmix64 step function.
///
/// All randomness in the library flows through this type so that results are
/// reproducible across platforms and thread counts: a generator derived with
/// `split(i)` depends only on the original seed and `i`, never on how much
/// output the parent has already produced.
class Rng {
  public:
    static constexpr const char* kGeneratorName = "splitmix64";

    explicit Rng(std::uint64_t seed)
        : seed_(seed),
          state_(seed) {}

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    /// Uniform integer in [0, n). n must be > 0. Unbiased via rejection.
    std::uint64_t bounded(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t r = next();
            if (r >= threshold) {
                return r % n;
            }
        }
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Child generator for stream `index`, independent of this generator's position.
    Rng split(std::uint64_t index) const { return Rng(derive_seed(seed_, index)); }

    /// Stable (seed, stream) -> seed mixing; used wherever a sub-seed must be recorded.
    static std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
        Rng mixer(seed ^ (0x9e3779b97f4a7c15ULL * (stream + 1)));
        mixer.next();
        return mixer.next();
    }

  private:
    std::uint64_t seed_;
    std::uint64_t state_;
};

}  // namespace mlhub
