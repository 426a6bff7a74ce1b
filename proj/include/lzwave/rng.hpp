#ifndef LZWAVE_RNG_HPP
#define LZWAVE_RNG_HPP

#include <cmath>
#include <cstdint>

namespace lzwave {

// splitmix64 stream: reproducible across platforms, unlike the standard
// library distributions.
class SplitMix64 {
  public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0,1)
    double next_unit() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double next_uniform(double lo, double hi) {
        return lo + (hi - lo) * next_unit();
    }

    // standard normal via Box-Muller
    double next_gaussian() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = next_unit();
        } while (u1 <= 0.0);
        const double u2 = next_unit();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double phi = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(phi);
        have_spare_ = true;
        return r * std::cos(phi);
    }

  private:
    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

} // namespace lzwave

#endif
