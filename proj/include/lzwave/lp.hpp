#ifndef LZWAVE_LP_HPP
#define LZWAVE_LP_HPP

#include <cmath>
#include <stdexcept>
#include <vector>

#include "lzwave/grid.hpp"

namespace lzwave {

// Dyadic cutoff profile. phi0 is even, smooth, decreasing on [0,inf),
// identically 1 on |xi|<=1 and 0 on |xi|>=2; the shell profile is
// phi(xi) = phi0(xi) - phi0(2 xi).
struct LPProfile {
    PeriodicGrid grid;
    int nu_max = 0;

    static double phi0(double xi) {
        const double a = std::abs(xi);
        if (a <= 1.0) return 1.0;
        if (a >= 2.0) return 0.0;
        const double g1 = std::exp(-1.0 / (2.0 - a));
        const double g2 = std::exp(-1.0 / (a - 1.0));
        return g1 / (g1 + g2);
    }

    static double phi(double xi) { return phi0(xi) - phi0(2.0 * xi); }

    // phi_nu: nu = 0 is the low-pass phi0, nu >= 1 the shell phi(2^-nu xi)
    double phi_nu(int nu, double xi) const {
        if (nu < 0) return 0.0;
        if (nu == 0) return phi0(xi);
        return phi(std::ldexp(std::abs(xi), -nu));
    }

    // psi_mu = phi_{mu-1} + phi_mu + phi_{mu+1}, phi_{-1} == 0
    double psi_mu(int mu, double xi) const {
        double s = phi_nu(mu, xi) + phi_nu(mu + 1, xi);
        if (mu >= 1) s += phi_nu(mu - 1, xi);
        return s;
    }
};

inline LPProfile build_profile(const PeriodicGrid& grid) {
    if (grid.n < 32)
        throw std::invalid_argument("build_profile: grid too small to hold 3 dyadic shells (n < 32)");
    LPProfile p;
    p.grid = grid;
    p.nu_max = static_cast<int>(std::floor(std::log2(grid.max_frequency()))) - 1;
    return p;
}

inline GridFunction dyadic_block(const GridFunction& f, int nu, const LPProfile& prof) {
    if (nu < 0 || nu > prof.nu_max) throw std::out_of_range("dyadic_block: block index out of range");
    return apply_multiplier(f, [&](double xi) { return prof.phi_nu(nu, xi); });
}

inline GridFunction psi_block(const GridFunction& f, int mu, const LPProfile& prof) {
    if (mu < 0 || mu > prof.nu_max) throw std::out_of_range("psi_block: block index out of range");
    return apply_multiplier(f, [&](double xi) { return prof.psi_mu(mu, xi); });
}

// The family { u_nu } for nu = 0..nu_max plus the norm of the spectral tail
// above the covered band (reported, not dropped).
struct DyadicBlockSet {
    LPProfile profile;
    std::vector<GridFunction> blocks;
    double truncated_tail_norm = 0.0;
};

inline DyadicBlockSet build_blocks(const GridFunction& f, const LPProfile& prof) {
    DyadicBlockSet set;
    set.profile = prof;
    Spectrum s = fourier_forward(f);
    const std::size_t n = f.grid.n;
    for (int nu = 0; nu <= prof.nu_max; ++nu) {
        Spectrum bs(n);
        for (std::size_t k = 0; k < n; ++k) bs[k] = s[k] * prof.phi_nu(nu, f.grid.frequency(k));
        set.blocks.push_back(fourier_inverse(f.grid, bs));
    }
    // tail left out by the partial sum sum_{nu<=nu_max} phi_nu = phi0(2^-nu_max xi)
    double tail = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double m = 1.0 - prof.phi0(std::ldexp(std::abs(f.grid.frequency(k)), -prof.nu_max));
        tail += std::norm(m * s[k]);
    }
    set.truncated_tail_norm = std::sqrt(f.grid.length * tail);
    return set;
}

inline GridFunction reconstruct(const DyadicBlockSet& set) {
    GridFunction acc(set.profile.grid);
    for (const auto& b : set.blocks) acc = acc + b;
    return acc;
}

// sqrt( sum_nu 2^{2 nu s} ||u_nu||^2 )
inline double sobolev_norm_dyadic(const DyadicBlockSet& set, double s) {
    double acc = 0.0;
    for (int nu = 0; nu < static_cast<int>(set.blocks.size()); ++nu) {
        const double nn = l2_norm(set.blocks[static_cast<std::size_t>(nu)]);
        acc += std::pow(2.0, 2.0 * nu * s) * nn * nn;
    }
    return std::sqrt(acc);
}

// dyadic Sobolev norm straight from a function (blocks built internally)
inline double sobolev_norm_dyadic(const GridFunction& f, double s, const LPProfile& prof) {
    Spectrum sp = fourier_forward(f);
    const std::size_t n = f.grid.n;
    double acc = 0.0;
    for (int nu = 0; nu <= prof.nu_max; ++nu) {
        double blk = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double m = prof.phi_nu(nu, f.grid.frequency(k));
            blk += std::norm(m * sp[k]);
        }
        acc += std::pow(2.0, 2.0 * nu * s) * f.grid.length * blk;
    }
    return std::sqrt(acc);
}

struct BernsteinRow {
    int nu = 0;
    double block_norm = 0.0;
    double deriv_norm = 0.0;
    double r1 = 0.0; // ||dx u_nu|| / (2^{nu+1} ||u_nu||)
    double r2 = 0.0; // ||u_nu|| 2^{nu-1} / ||dx u_nu||, nu >= 1
    bool skipped = false;
};

struct BernsteinReport {
    std::vector<BernsteinRow> rows;
    bool all_pass = true;
};

inline BernsteinReport verify_bernstein(const DyadicBlockSet& set) {
    BernsteinReport rep;
    for (int nu = 0; nu < static_cast<int>(set.blocks.size()); ++nu) {
        const auto& u = set.blocks[static_cast<std::size_t>(nu)];
        BernsteinRow row;
        row.nu = nu;
        row.block_norm = l2_norm(u);
        if (row.block_norm < 1e-13) {
            row.skipped = true;
            rep.rows.push_back(row);
            continue;
        }
        row.deriv_norm = l2_norm(spectral_derivative(u));
        row.r1 = row.deriv_norm / (std::ldexp(1.0, nu + 1) * row.block_norm);
        if (nu >= 1) row.r2 = row.block_norm * std::ldexp(1.0, nu - 1) / row.deriv_norm;
        if (row.r1 > 1.0 || row.r2 > 1.0) rep.all_pass = false;
        rep.rows.push_back(row);
    }
    return rep;
}

} // namespace lzwave

#endif
