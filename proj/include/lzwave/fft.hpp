#ifndef LZWAVE_FFT_HPP
#define LZWAVE_FFT_HPP

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace lzwave::fft {

using cd = std::complex<double>;

namespace detail {

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

struct Plan {
    std::size_t n = 0;
    std::vector<std::size_t> bitrev;
    std::vector<cd> twiddle; // exp(-2 pi i j / n), j < n/2

    explicit Plan(std::size_t n_) : n(n_), bitrev(n_), twiddle(n_ / 2) {
        const double two_pi = 6.283185307179586476925286766559;
        for (std::size_t j = 0; j < n / 2; ++j) {
            const double ang = -two_pi * static_cast<double>(j) / static_cast<double>(n);
            twiddle[j] = cd(std::cos(ang), std::sin(ang));
        }
        std::size_t lg = 0;
        while ((std::size_t(1) << lg) < n) ++lg;
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t r = 0;
            for (std::size_t b = 0; b < lg; ++b)
                if (i & (std::size_t(1) << b)) r |= std::size_t(1) << (lg - 1 - b);
            bitrev[i] = r;
        }
    }
};

inline const Plan& plan_for(std::size_t n) {
    thread_local std::unordered_map<std::size_t, Plan> cache;
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, Plan(n)).first;
    return it->second;
}

// in-place radix-2 DFT with twiddles as given (sign baked into the plan)
inline void transform(std::vector<cd>& a, bool conjugate) {
    const std::size_t n = a.size();
    if (n <= 1) return;
    if (!is_pow2(n)) throw std::invalid_argument("fft: size must be a power of two");
    const Plan& p = plan_for(n);
    for (std::size_t i = 0; i < n; ++i)
        if (i < p.bitrev[i]) std::swap(a[i], a[p.bitrev[i]]);
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t half = len >> 1;
        const std::size_t stride = n / len;
        for (std::size_t blk = 0; blk < n; blk += len) {
            for (std::size_t j = 0; j < half; ++j) {
                cd w = p.twiddle[j * stride];
                if (conjugate) w = std::conj(w);
                const cd u = a[blk + j];
                const cd v = a[blk + j + half] * w;
                a[blk + j] = u + v;
                a[blk + j + half] = u - v;
            }
        }
    }
}

} // namespace detail

// A_k = sum_j a_j exp(-2 pi i jk/n)   (unnormalized)
inline void forward_pow2(std::vector<cd>& a) { detail::transform(a, false); }

// a_j = sum_k A_k exp(+2 pi i jk/n)   (unnormalized)
inline void inverse_pow2(std::vector<cd>& a) { detail::transform(a, true); }

} // namespace lzwave::fft

#endif
