#ifndef LZWAVE_SCHUR_HPP
#define LZWAVE_SCHUR_HPP

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "lzwave/commutator.hpp"

namespace lzwave {

// Loss parameters: theta in (0, min{1/2, omega/(1+log 2)}), beta > 0, and the
// horizon tied by beta T = (theta/2) log 2.
struct EnergyConfig {
    double theta = 0.25;
    double beta = 1.0;
    double omega = 0.5;

    double beta_star() const { return beta / std::log(2.0); }
    double horizon() const { return 0.5 * theta * std::log(2.0) / beta; }

    double theta_limit() const { return std::min(0.5, omega / (1.0 + std::log(2.0))); }

    void validate() const {
        if (!(theta > 0.0) || !(theta < theta_limit()))
            throw std::invalid_argument("EnergyConfig: theta outside (0, min{1/2, omega/(1+log2)}) = (0, " +
                                        std::to_string(theta_limit()) + ")");
        if (!(beta > 0.0)) throw std::invalid_argument("EnergyConfig: beta must be positive");
        const double l2 = std::log(2.0);
        // weight-exponent windows used by the kernel sums, checked at both ends
        for (double t : {0.0, horizon()}) {
            const double w1 = beta * t + 0.5 * theta * l2;
            const double w2 = (1.0 - theta) * l2 - beta * t;
            if (!(w1 > 0.0 && w1 < 1.0 && w2 > 0.0 && w2 < 1.0))
                throw std::invalid_argument("EnergyConfig: weight-exponent window violated");
        }
    }
};

// alpha_1(delta) = max_n (sum_{j<=n} e^{dj} j^{-1/2}) / (e^{dn} n^{-1/2})
// alpha_2(delta) = max_n (sum_{j>=n} e^{-dj} j^{1/2}) / (e^{-dn} n^{1/2})
// computed through overflow-free ratio recurrences.
inline std::pair<double, double> alpha_constants(double delta, int n_max) {
    if (!(delta > 0.0 && delta <= 1.0)) throw std::invalid_argument("alpha_constants: delta outside (0,1]");
    if (n_max < 1000) throw std::invalid_argument("alpha_constants: n_max must be >= 1e3");
    const double q = std::exp(-delta);

    // r_n = 1 + q sqrt(n/(n-1)) r_{n-1}, r_1 = 1
    double r = 1.0, a1 = 1.0;
    for (int n = 2; n <= n_max; ++n) {
        r = 1.0 + q * std::sqrt(static_cast<double>(n) / (n - 1.0)) * r;
        a1 = std::max(a1, r);
    }

    // s_n = 1 + q sqrt((n+1)/n) s_{n+1}; seed with the direct tail at n_top
    const int n_top = n_max + 64;
    double s = 0.0;
    for (int j = n_top;; ++j) {
        const double term = std::exp(-delta * (j - n_top)) * std::sqrt(static_cast<double>(j) / n_top);
        s += term;
        if (term < 1e-18 * s) break;
    }
    double a2 = s;
    for (int n = n_top - 1; n >= 1; --n) {
        s = 1.0 + q * std::sqrt((n + 1.0) / n) * s;
        if (n <= n_max) a2 = std::max(a2, s);
    }
    return {a1, a2};
}

enum class KernelMode { measured, bound };

// Kernel matrix over (nu, mu) for one of the four commutator families.
//   k (principal a):  e^{-(nu-mu) beta t} 2^{-(nu-mu) theta} 2^nu
//                     (nu+1)^{-1/2} (mu+1)^{-1/2} ||[phi_nu,a]Psi_mu||
//   l, h (b0, b1):    e^{-(nu-mu) beta t} 2^{-(nu-mu) theta} ||[phi_nu,b]Psi_mu||
//   m (c):            e^{-(nu-mu) beta t} 2^{-(nu-mu) theta} 2^{-mu} ||[phi_nu,c]Psi_mu||
struct SchurKernelMatrix {
    char kind = 'k';
    KernelMode mode = KernelMode::measured;
    int N = 0;
    double t = 0.0, theta = 0.0, beta = 0.0;
    double fitted_C = 0.0; // envelope constant used in bound mode
    std::vector<double> entries; // row-major N x N
    std::vector<double> row_sums, col_sums;

    double at(int nu, int mu) const {
        return entries[static_cast<std::size_t>(nu) * static_cast<std::size_t>(N) +
                       static_cast<std::size_t>(mu)];
    }
};

namespace detail {

// analytic norm shapes reproducing the commutator lemma bounds
inline double bound_shape(char kind, int nu, int mu, double omega) {
    const int mx = std::max(nu, mu);
    switch (kind) {
        case 'k': return std::ldexp(1.0, -mx) * (mx + 1);
        case 'l':
        case 'h': return std::pow(2.0, -omega * mx);
        case 'm': return 1.0;
        default: throw std::invalid_argument("bound_shape: unknown kernel kind");
    }
}

} // namespace detail

inline SchurKernelMatrix build_kernel(char kind, const CommutatorNormTable& table, double t,
                                      const EnergyConfig& cfg, KernelMode mode = KernelMode::measured) {
    if (kind != 'k' && kind != 'l' && kind != 'h' && kind != 'm')
        throw std::invalid_argument("build_kernel: kind must be one of k,l,h,m");
    if (t < 0.0 || t > cfg.horizon() * (1.0 + 1e-12))
        throw std::out_of_range("build_kernel: t outside [0, T]");
    if (table.N < 1) throw std::invalid_argument("build_kernel: empty norm table");

    SchurKernelMatrix K;
    K.kind = kind;
    K.mode = mode;
    K.N = table.N;
    K.t = t;
    K.theta = cfg.theta;
    K.beta = cfg.beta;
    const int N = table.N;

    if (mode == KernelMode::bound) {
        // envelope fit of the analytic shape to the measured norms
        double C = 0.0;
        for (int nu = 0; nu < N; ++nu)
            for (int mu = 0; mu < N; ++mu)
                C = std::max(C, table.at(nu, mu) / detail::bound_shape(kind, nu, mu, cfg.omega));
        K.fitted_C = C;
    }

    K.entries.assign(static_cast<std::size_t>(N) * static_cast<std::size_t>(N), 0.0);
    for (int nu = 0; nu < N; ++nu) {
        for (int mu = 0; mu < N; ++mu) {
            const double norm = mode == KernelMode::measured
                                    ? table.at(nu, mu)
                                    : K.fitted_C * detail::bound_shape(kind, nu, mu, cfg.omega);
            double w = std::exp(-(nu - mu) * cfg.beta * t) * std::pow(2.0, -(nu - mu) * cfg.theta);
            if (kind == 'k') w *= std::ldexp(1.0, nu) / std::sqrt((nu + 1.0) * (mu + 1.0));
            if (kind == 'm') w *= std::ldexp(1.0, -mu);
            K.entries[static_cast<std::size_t>(nu) * static_cast<std::size_t>(N) +
                      static_cast<std::size_t>(mu)] = w * norm;
        }
    }
    K.row_sums.assign(static_cast<std::size_t>(N), 0.0);
    K.col_sums.assign(static_cast<std::size_t>(N), 0.0);
    for (int nu = 0; nu < N; ++nu)
        for (int mu = 0; mu < N; ++mu) {
            K.row_sums[static_cast<std::size_t>(nu)] += std::abs(K.at(nu, mu));
            K.col_sums[static_cast<std::size_t>(mu)] += std::abs(K.at(nu, mu));
        }
    return K;
}

// sup_mu sum_nu |k| + sup_nu sum_mu |k|
inline double schur_bound(const SchurKernelMatrix& K) {
    double mr = 0.0, mc = 0.0;
    for (double v : K.row_sums) mr = std::max(mr, v);
    for (double v : K.col_sums) mc = std::max(mc, v);
    return mr + mc;
}

// restriction of the Schur quantity to the leading N0 x N0 sub-matrix
inline double schur_bound_truncated(const SchurKernelMatrix& K, int N0) {
    if (N0 < 1 || N0 > K.N) throw std::invalid_argument("schur_bound_truncated: bad extent");
    double mr = 0.0, mc = 0.0;
    for (int nu = 0; nu < N0; ++nu) {
        double r = 0.0, c = 0.0;
        for (int mu = 0; mu < N0; ++mu) {
            r += std::abs(K.at(nu, mu));
            c += std::abs(K.at(mu, nu));
        }
        mr = std::max(mr, r);
        mc = std::max(mc, c);
    }
    return mr + mc;
}

// max of z -> e^{-gamma z}(z - 2) with gamma = (omega - theta/2) log 2:
// critical point z* = 2 + 1/gamma, value e^{-(2 gamma + 1)} / gamma
inline double m_omega_theta_closed(double omega, double theta) {
    const double gamma = (omega - 0.5 * theta) * std::log(2.0);
    if (!(gamma > 0.0)) throw std::invalid_argument("m_omega_theta: gamma must be positive");
    return std::exp(-(2.0 * gamma + 1.0)) / gamma;
}

// the same maximum by golden-section search, for the identity check
inline double m_omega_theta_scan(double omega, double theta) {
    const double gamma = (omega - 0.5 * theta) * std::log(2.0);
    auto f = [&](double z) { return std::exp(-gamma * z) * (z - 2.0); };
    double lo = 2.0, hi = 2.0 + 2.0 / gamma + 50.0;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    for (int it = 0; it < 300; ++it) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = f(x1);
        }
    }
    return std::max(f1, f2);
}

} // namespace lzwave

#endif
