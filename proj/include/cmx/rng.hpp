#pragma once

#include <cstdint>
#include <random>

namespace cmx {

/// splitmix64 finalizer, used to derive independent stream seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// mt19937_64 with draw mappings that are identical on every platform; the
/// std distributions are implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : _engine(seed) {}

    /// [0, 1)
    double uniform() { return static_cast<double>(_engine() >> 11) * 0x1.0p-53; }

    /// [lo, hi)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// [lo, hi], unbiased by rejection.
    std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi)
    {
        const std::uint64_t span = hi - lo;
        if (span == ~std::uint64_t{0})
            return _engine();
        const std::uint64_t range = span + 1;
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % range);
        std::uint64_t x;
        do {
            x = _engine();
        } while (x >= limit);
        return lo + x % range;
    }

    bool bernoulli(double p) { return uniform() < p; }

private:
    std::mt19937_64 _engine;
};

} // namespace cmx
