#ifndef LZWAVE_GRID_HPP
#define LZWAVE_GRID_HPP

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

#include "lzwave/fft.hpp"
#include "lzwave/rng.hpp"

namespace lzwave {

using cd = std::complex<double>;

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// Uniform periodic grid x_j = j * spacing on [0, length).
struct PeriodicGrid {
    std::size_t n = 0;
    double length = kTwoPi;

    PeriodicGrid() = default;
    PeriodicGrid(std::size_t n_, double length_ = kTwoPi) : n(n_), length(length_) {
        if (n < 8 || !fft::detail::is_pow2(n))
            throw std::invalid_argument("PeriodicGrid: n must be a power of two >= 8");
        if (!(length > 0.0))
            throw std::invalid_argument("PeriodicGrid: length must be positive");
    }

    double spacing() const { return length / static_cast<double>(n); }
    double point(std::size_t j) const { return spacing() * static_cast<double>(j); }

    // integer wavenumber of spectrum slot m, k in (-n/2, n/2]
    long wavenumber(std::size_t m) const {
        const long half = static_cast<long>(n / 2);
        const long lm = static_cast<long>(m);
        return lm <= half ? lm : lm - static_cast<long>(n);
    }

    // physical frequency xi_k = 2 pi k / length of slot m
    double frequency(std::size_t m) const {
        return kTwoPi * static_cast<double>(wavenumber(m)) / length;
    }

    double max_frequency() const { return kTwoPi * static_cast<double>(n / 2) / length; }

    bool operator==(const PeriodicGrid& o) const { return n == o.n && length == o.length; }
};

// Complex samples on a PeriodicGrid at one time instant.
struct GridFunction {
    PeriodicGrid grid;
    std::vector<cd> v;

    GridFunction() = default;
    explicit GridFunction(const PeriodicGrid& g) : grid(g), v(g.n, cd(0.0, 0.0)) {}
    GridFunction(const PeriodicGrid& g, std::vector<cd> values) : grid(g), v(std::move(values)) {
        if (v.size() != g.n) throw std::invalid_argument("GridFunction: value count != grid.n");
    }

    std::size_t size() const { return v.size(); }
    cd& operator[](std::size_t j) { return v[j]; }
    const cd& operator[](std::size_t j) const { return v[j]; }
};

using Spectrum = std::vector<cd>;

inline void check_same_grid(const GridFunction& a, const GridFunction& b) {
    if (!(a.grid == b.grid)) throw std::invalid_argument("grid mismatch");
}

inline GridFunction sample(const PeriodicGrid& g, const std::function<cd(double)>& fn) {
    GridFunction f(g);
    for (std::size_t j = 0; j < g.n; ++j) f.v[j] = fn(g.point(j));
    return f;
}

inline GridFunction sample_real(const PeriodicGrid& g, const std::function<double(double)>& fn) {
    GridFunction f(g);
    for (std::size_t j = 0; j < g.n; ++j) f.v[j] = cd(fn(g.point(j)), 0.0);
    return f;
}

// u_hat_k = (1/n) sum_j f(x_j) exp(-i xi_k x_j)
inline Spectrum fourier_forward(const GridFunction& f) {
    Spectrum s = f.v;
    fft::forward_pow2(s);
    const double inv_n = 1.0 / static_cast<double>(f.grid.n);
    for (auto& c : s) c *= inv_n;
    return s;
}

inline GridFunction fourier_inverse(const PeriodicGrid& g, const Spectrum& s) {
    if (s.size() != g.n) throw std::invalid_argument("fourier_inverse: spectrum size != grid.n");
    GridFunction f(g);
    f.v = s;
    fft::inverse_pow2(f.v);
    return f;
}

// multiply spectrum by m(xi); returns a new grid function
inline GridFunction apply_multiplier(const GridFunction& f, const std::function<double(double)>& m) {
    Spectrum s = fourier_forward(f);
    for (std::size_t k = 0; k < s.size(); ++k) s[k] *= m(f.grid.frequency(k));
    return fourier_inverse(f.grid, s);
}

// spectral d/dx with the Nyquist mode zeroed
inline GridFunction spectral_derivative(const GridFunction& f) {
    Spectrum s = fourier_forward(f);
    const std::size_t n = f.grid.n;
    for (std::size_t k = 0; k < n; ++k) s[k] *= cd(0.0, f.grid.frequency(k));
    s[n / 2] = cd(0.0, 0.0);
    return fourier_inverse(f.grid, s);
}

// sqrt(spacing * sum |f_j|^2); exact on band-limited functions
inline double l2_norm(const GridFunction& f) {
    double acc = 0.0;
    for (const auto& c : f.v) acc += std::norm(c);
    return std::sqrt(f.grid.spacing() * acc);
}

// trapezoid integral of a real grid sequence over the torus
inline double integrate(const PeriodicGrid& g, const std::vector<double>& vals) {
    double acc = 0.0;
    for (double x : vals) acc += x;
    return g.spacing() * acc;
}

// sqrt(length * sum_k (1 + xi_k^2)^s |u_hat_k|^2)
inline double sobolev_norm_fourier(const GridFunction& f, double s) {
    const Spectrum sp = fourier_forward(f);
    double acc = 0.0;
    for (std::size_t k = 0; k < sp.size(); ++k) {
        const double xi = f.grid.frequency(k);
        acc += std::pow(1.0 + xi * xi, s) * std::norm(sp[k]);
    }
    return std::sqrt(f.grid.length * acc);
}

// random function with spectrum in 1 <= |k| <= kmax plus a mean mode,
// coefficients ~ gaussian * (1+|k|)^{-decay}; identical across grid sizes
// for fixed (kmax, seed).
inline GridFunction random_band_limited(const PeriodicGrid& g, long kmax, std::uint64_t seed,
                                        double decay = 1.5) {
    if (kmax < 1 || kmax > static_cast<long>(g.n / 2) - 1)
        throw std::invalid_argument("random_band_limited: kmax out of range");
    SplitMix64 rng(seed);
    Spectrum s(g.n, cd(0.0, 0.0));
    s[0] = cd(rng.next_gaussian(), 0.0);
    for (long k = 1; k <= kmax; ++k) {
        const double w = std::pow(1.0 + static_cast<double>(k), -decay);
        const cd cp(rng.next_gaussian(), rng.next_gaussian());
        const cd cm(rng.next_gaussian(), rng.next_gaussian());
        s[static_cast<std::size_t>(k)] = w * cp;
        s[g.n - static_cast<std::size_t>(k)] = w * cm;
    }
    return fourier_inverse(g, s);
}

// pointwise helpers ------------------------------------------------------

inline GridFunction operator+(const GridFunction& a, const GridFunction& b) {
    check_same_grid(a, b);
    GridFunction r(a.grid);
    for (std::size_t j = 0; j < a.size(); ++j) r.v[j] = a.v[j] + b.v[j];
    return r;
}

inline GridFunction operator-(const GridFunction& a, const GridFunction& b) {
    check_same_grid(a, b);
    GridFunction r(a.grid);
    for (std::size_t j = 0; j < a.size(); ++j) r.v[j] = a.v[j] - b.v[j];
    return r;
}

inline GridFunction operator*(double s, const GridFunction& a) {
    GridFunction r(a.grid);
    for (std::size_t j = 0; j < a.size(); ++j) r.v[j] = s * a.v[j];
    return r;
}

inline GridFunction operator*(cd s, const GridFunction& a) {
    GridFunction r(a.grid);
    for (std::size_t j = 0; j < a.size(); ++j) r.v[j] = s * a.v[j];
    return r;
}

// product with a real field given as samples
inline GridFunction pointwise(const std::vector<double>& f, const GridFunction& g) {
    if (f.size() != g.size()) throw std::invalid_argument("pointwise: size mismatch");
    GridFunction r(g.grid);
    for (std::size_t j = 0; j < g.size(); ++j) r.v[j] = f[j] * g.v[j];
    return r;
}

inline double max_abs(const GridFunction& f) {
    double m = 0.0;
    for (const auto& c : f.v) m = std::max(m, std::abs(c));
    return m;
}

} // namespace lzwave

#endif
