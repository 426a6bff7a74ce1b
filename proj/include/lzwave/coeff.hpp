#ifndef LZWAVE_COEFF_HPP
#define LZWAVE_COEFF_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "lzwave/grid.hpp"
#include "lzwave/rng.hpp"

namespace lzwave {

// Lacunary generator for the principal coefficient:
//   a(t,x) = base + amp_t sum_{j=1}^J j 2^-j cos(2^j t + theta_j)
//                 + amp_x sum_{j=1}^J   2^-j cos(2^j x + eta_j)
// The t-weights j 2^-j give log-Zygmund-critical growth, the x-weights 2^-j
// log-Lipschitz-critical growth.
struct CoefficientSpec {
    double lambda0 = 0.5;
    double Lambda0 = 2.0;
    double base = 1.0;
    double amp_t = 0.1;
    double amp_x = 0.1;
    int J = 12;
    std::uint64_t seed = 1;
};

inline double lacunary_weight_sum_t(int J) {
    double s = 0.0;
    for (int j = 1; j <= J; ++j) s += j * std::ldexp(1.0, -j);
    return s;
}

inline double lacunary_weight_sum_x(int J) {
    double s = 0.0;
    for (int j = 1; j <= J; ++j) s += std::ldexp(1.0, -j);
    return s;
}

struct SpaceTimeCoefficient {
    CoefficientSpec spec;
    std::vector<double> theta_j; // phases, index 1..J
    std::vector<double> eta_j;
    double C0_est = 0.0; // measured log-Zygmund / log-Lipschitz constant

    double t_part(double t) const {
        double s = 0.0;
        for (int j = 1; j <= spec.J; ++j)
            s += j * std::ldexp(1.0, -j) * std::cos(std::ldexp(t, j) + theta_j[static_cast<std::size_t>(j)]);
        return spec.amp_t * s;
    }

    double x_part(double x) const {
        double s = 0.0;
        for (int j = 1; j <= spec.J; ++j)
            s += std::ldexp(1.0, -j) * std::cos(std::ldexp(x, j) + eta_j[static_cast<std::size_t>(j)]);
        return spec.amp_x * s;
    }

    double operator()(double t, double x) const { return spec.base + t_part(t) + x_part(x); }

    // closed-form d/dx a (the x-series term-wise derivative)
    double dx(double /*t*/, double x) const {
        double s = 0.0;
        for (int j = 1; j <= spec.J; ++j)
            s += std::sin(std::ldexp(x, j) + eta_j[static_cast<std::size_t>(j)]);
        return -spec.amp_x * s;
    }

    std::vector<double> sample_x(double t, const PeriodicGrid& g) const {
        std::vector<double> out(g.n);
        const double tp = spec.base + t_part(t);
        for (std::size_t j = 0; j < g.n; ++j) out[j] = tp + x_part(g.point(j));
        return out;
    }
};

// sample points (t, x) for the modulus estimators
using SampleSet = std::vector<std::pair<double, double>>;

inline SampleSet make_sample_grid(int nt, int nx, double t_hi = 1.0, double x_hi = kTwoPi) {
    if (nt < 1 || nx < 1) throw std::invalid_argument("make_sample_grid: empty sample grid");
    SampleSet s;
    s.reserve(static_cast<std::size_t>(nt) * static_cast<std::size_t>(nx));
    for (int i = 0; i < nt; ++i)
        for (int j = 0; j < nx; ++j)
            s.emplace_back(t_hi * i / std::max(1, nt - 1), x_hi * j / std::max(1, nx - 1));
    return s;
}

// dyadic step set 2^-k for k = k_lo..k_hi
inline std::vector<double> dyadic_steps(int k_lo, int k_hi) {
    std::vector<double> v;
    for (int k = k_lo; k <= k_hi; ++k) v.push_back(std::ldexp(1.0, -k));
    return v;
}

// max over samples and tau of |a(t+tau,x)+a(t-tau,x)-2a(t,x)| / (tau log(1/tau+1))
template <class F>
double estimate_log_zygmund_t(const F& a, const std::vector<double>& tau_set, const SampleSet& samples) {
    if (tau_set.empty() || samples.empty())
        throw std::invalid_argument("estimate_log_zygmund_t: empty tau or sample set");
    double best = 0.0;
    for (double tau : tau_set) {
        if (!(tau > 0.0 && tau <= 1.0)) throw std::invalid_argument("estimate_log_zygmund_t: tau outside (0,1]");
        const double denom = tau * std::log(1.0 / tau + 1.0);
        for (const auto& [t, x] : samples) {
            const double d2 = std::abs(a(t + tau, x) + a(t - tau, x) - 2.0 * a(t, x));
            best = std::max(best, d2 / denom);
        }
    }
    return best;
}

// max over samples and y of |a(t,x+y)-a(t,x)| / (y log(1/y+1))
template <class F>
double estimate_log_lipschitz_x(const F& a, const std::vector<double>& y_set, const SampleSet& samples) {
    if (y_set.empty() || samples.empty())
        throw std::invalid_argument("estimate_log_lipschitz_x: empty y or sample set");
    double best = 0.0;
    for (double y : y_set) {
        if (!(y > 0.0 && y <= 1.0)) throw std::invalid_argument("estimate_log_lipschitz_x: y outside (0,1]");
        const double denom = y * std::log(1.0 / y + 1.0);
        for (const auto& [t, x] : samples) {
            best = std::max(best, std::abs(a(t, x + y) - a(t, x)) / denom);
        }
    }
    return best;
}

// max over samples and tau of |a(t+tau,x)-a(t,x)| / (scale * tau^sigma)
template <class F>
double estimate_hoelder_t_scaled(const F& a, double sigma, const std::vector<double>& tau_set,
                                 const SampleSet& samples, double scale) {
    if (!(sigma > 0.0 && sigma < 1.0)) throw std::invalid_argument("estimate_hoelder_t: sigma outside (0,1)");
    if (tau_set.empty() || samples.empty())
        throw std::invalid_argument("estimate_hoelder_t: empty tau or sample set");
    double best = 0.0;
    for (double tau : tau_set) {
        const double denom = scale * std::pow(tau, sigma);
        for (const auto& [t, x] : samples)
            best = std::max(best, std::abs(a(t + tau, x) - a(t, x)) / denom);
    }
    return best;
}

// spec normalization: scale = Lambda0 + C0_est
inline double estimate_hoelder_t(const SpaceTimeCoefficient& a, double sigma,
                                 const std::vector<double>& tau_set, const SampleSet& samples) {
    return estimate_hoelder_t_scaled(a, sigma, tau_set, samples, a.spec.Lambda0 + a.C0_est);
}

// sup|b| + max over pairs of |b(x)-b(y)| / |x-y|^omega; pairs are sampled at
// dyadic separations down to 2^-12 so the near-diagonal quotient is seen.
inline double hoelder_norm_x(const std::function<double(double)>& b, double omega,
                             int nx = 600, double x_hi = kTwoPi) {
    if (!(omega > 0.0 && omega <= 1.0)) throw std::invalid_argument("hoelder_norm_x: omega outside (0,1]");
    double sup = 0.0, quot = 0.0;
    for (int i = 0; i < nx; ++i) {
        const double x = x_hi * i / nx;
        sup = std::max(sup, std::abs(b(x)));
        for (int k = 2; k <= 12; ++k) {
            const double y = std::ldexp(1.0, -k);
            quot = std::max(quot, std::abs(b(x + y) - b(x)) / std::pow(y, omega));
        }
    }
    return sup + quot;
}

inline SpaceTimeCoefficient make_coefficient(const CoefficientSpec& spec, bool measure_C0 = true) {
    if (!(spec.lambda0 > 0.0))
        throw std::invalid_argument("make_coefficient: lambda0 must be positive");
    if (spec.J < 0 || spec.J > 40) throw std::invalid_argument("make_coefficient: J out of range");
    if (spec.amp_t < 0.0 || spec.amp_x < 0.0)
        throw std::invalid_argument("make_coefficient: amplitudes must be nonnegative");
    const double span = spec.amp_t * lacunary_weight_sum_t(spec.J) + spec.amp_x * lacunary_weight_sum_x(spec.J);
    if (spec.base - span < spec.lambda0)
        throw std::invalid_argument("make_coefficient: ellipticity violated, base - amp span = " +
                                    std::to_string(spec.base - span) + " < lambda0 = " +
                                    std::to_string(spec.lambda0));
    if (spec.base + span > spec.Lambda0)
        throw std::invalid_argument("make_coefficient: upper bound violated, base + amp span = " +
                                    std::to_string(spec.base + span) + " > Lambda0 = " +
                                    std::to_string(spec.Lambda0));

    SpaceTimeCoefficient a;
    a.spec = spec;
    a.theta_j.assign(static_cast<std::size_t>(spec.J) + 1, 0.0);
    a.eta_j.assign(static_cast<std::size_t>(spec.J) + 1, 0.0);
    SplitMix64 rng(spec.seed);
    for (int j = 1; j <= spec.J; ++j) a.theta_j[static_cast<std::size_t>(j)] = rng.next_uniform(0.0, kTwoPi);
    for (int j = 1; j <= spec.J; ++j) a.eta_j[static_cast<std::size_t>(j)] = rng.next_uniform(0.0, kTwoPi);

    if (measure_C0 && (spec.amp_t > 0.0 || spec.amp_x > 0.0)) {
        // moduli are meaningful only down to the truncation scale 2^-J
        const auto steps = dyadic_steps(3, std::max(3, spec.J));
        const auto samples = make_sample_grid(160, 160);
        const double czt = spec.amp_t > 0.0 ? estimate_log_zygmund_t(a, steps, samples) : 0.0;
        const double clx = spec.amp_x > 0.0 ? estimate_log_lipschitz_x(a, steps, samples) : 0.0;
        a.C0_est = std::max(czt, clx);
    }
    return a;
}

// Lower-order coefficients: b0, b1 are x-Hoelder lacunary fields modulated in
// time by a bounded smooth factor; c is a bounded smooth field.
struct LowerOrderSpec {
    double omega = 0.5;
    double amp_b = 0.1;
    double c0 = 0.5;
    int J = 10;
    std::uint64_t seed = 21;
};

struct LowerOrderCoefficients {
    LowerOrderSpec spec;
    std::vector<double> ph0, ph1; // phases for b0, b1
    double hoelder_norm_b0 = 0.0;
    double hoelder_norm_b1 = 0.0;
    double sup_norm_c = 0.0;

    double lacunary(double x, const std::vector<double>& ph) const {
        double s = 0.0;
        for (int j = 1; j <= spec.J; ++j)
            s += std::pow(2.0, -spec.omega * j) * std::cos(std::ldexp(x, j) + ph[static_cast<std::size_t>(j)]);
        return s;
    }

    double b0(double t, double x) const { return spec.amp_b * (1.0 + 0.5 * std::cos(t)) * lacunary(x, ph0); }
    double b1(double t, double x) const { return spec.amp_b * (1.0 + 0.5 * std::sin(t)) * lacunary(x, ph1); }
    double c(double t, double x) const { return spec.c0 * std::cos(x) * std::cos(t); }

    std::vector<double> sample_b0(double t, const PeriodicGrid& g) const {
        std::vector<double> out(g.n);
        for (std::size_t j = 0; j < g.n; ++j) out[j] = b0(t, g.point(j));
        return out;
    }
    std::vector<double> sample_b1(double t, const PeriodicGrid& g) const {
        std::vector<double> out(g.n);
        for (std::size_t j = 0; j < g.n; ++j) out[j] = b1(t, g.point(j));
        return out;
    }
    std::vector<double> sample_c(double t, const PeriodicGrid& g) const {
        std::vector<double> out(g.n);
        for (std::size_t j = 0; j < g.n; ++j) out[j] = c(t, g.point(j));
        return out;
    }
};

inline LowerOrderCoefficients make_lower_order(const LowerOrderSpec& spec) {
    if (!(spec.omega > 0.0)) throw std::invalid_argument("make_lower_order: omega must be positive");
    LowerOrderCoefficients lo;
    lo.spec = spec;
    lo.ph0.assign(static_cast<std::size_t>(spec.J) + 1, 0.0);
    lo.ph1.assign(static_cast<std::size_t>(spec.J) + 1, 0.0);
    SplitMix64 rng(spec.seed);
    for (int j = 1; j <= spec.J; ++j) lo.ph0[static_cast<std::size_t>(j)] = rng.next_uniform(0.0, kTwoPi);
    for (int j = 1; j <= spec.J; ++j) lo.ph1[static_cast<std::size_t>(j)] = rng.next_uniform(0.0, kTwoPi);
    const double om = std::min(spec.omega, 1.0);
    lo.hoelder_norm_b0 = 1.5 * spec.amp_b * hoelder_norm_x([&](double x) { return lo.lacunary(x, lo.ph0); }, om);
    lo.hoelder_norm_b1 = 1.5 * spec.amp_b * hoelder_norm_x([&](double x) { return lo.lacunary(x, lo.ph1); }, om);
    lo.sup_norm_c = std::abs(spec.c0);
    return lo;
}

} // namespace lzwave

#endif
