#ifndef LZWAVE_SOLVER_HPP
#define LZWAVE_SOLVER_HPP

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lzwave/coeff.hpp"
#include "lzwave/grid.hpp"

namespace lzwave {

using ForcingFn = std::function<cd(double, double)>; // f(t, x); empty = zero forcing

struct CauchyProblem {
    SpaceTimeCoefficient a;
    LowerOrderCoefficients lower;
    GridFunction u0, u1; // u(0,.), dt u(0,.)
    ForcingFn forcing;   // nullable
    double dt = 0.0;     // 0 = use cfl * spacing / sqrt(Lambda0)
    double T = 0.1;
    double cfl = 0.25;

    const PeriodicGrid& grid() const { return u0.grid; }

    double step_size() const {
        const double lim = grid().spacing() / std::sqrt(a.spec.Lambda0);
        return dt > 0.0 ? dt : cfl * lim;
    }
};

struct SolutionTrace {
    std::vector<double> times;
    std::vector<std::pair<GridFunction, GridFunction>> states; // (u, dt u)
    std::vector<double> residual_log;                          // ||Lu - f|| at checkpoints
};

namespace detail {

// zero every mode with |k| > n/3 (2/3-rule truncation for quadratic products)
inline GridFunction dealias(const GridFunction& f) {
    const std::size_t n = f.grid.n;
    const long cut = static_cast<long>(n) / 3;
    Spectrum s = fourier_forward(f);
    for (std::size_t k = 0; k < n; ++k)
        if (std::labs(f.grid.wavenumber(k)) > cut) s[k] = cd(0.0, 0.0);
    return fourier_inverse(f.grid, s);
}

struct RhsWorkspace {
    std::vector<double> av, b0v, b1v, cv;
};

// v' = dx(P(a dx u)) - P(b0 v) - P(b1 dx u) - P(c u) + f
inline GridFunction rhs_second_order(const CauchyProblem& p, double t, const GridFunction& u,
                                     const GridFunction& v) {
    const PeriodicGrid& g = u.grid;
    const auto av = p.a.sample_x(t, g);
    const auto ux = spectral_derivative(u);
    GridFunction acc = spectral_derivative(dealias(pointwise(av, ux)));
    if (p.lower.spec.amp_b != 0.0) {
        acc = acc - dealias(pointwise(p.lower.sample_b0(t, g), v));
        acc = acc - dealias(pointwise(p.lower.sample_b1(t, g), ux));
    }
    if (p.lower.spec.c0 != 0.0) acc = acc - dealias(pointwise(p.lower.sample_c(t, g), u));
    if (p.forcing) {
        GridFunction f(g);
        for (std::size_t j = 0; j < g.n; ++j) f.v[j] = p.forcing(t, g.point(j));
        acc = acc + f;
    }
    return acc;
}

inline void rk4_step(const CauchyProblem& p, double t, double dt, GridFunction& u, GridFunction& v) {
    const GridFunction k1u = v;
    const GridFunction k1v = rhs_second_order(p, t, u, v);
    const GridFunction u2 = u + (0.5 * dt) * k1u, v2 = v + (0.5 * dt) * k1v;
    const GridFunction k2u = v2;
    const GridFunction k2v = rhs_second_order(p, t + 0.5 * dt, u2, v2);
    const GridFunction u3 = u + (0.5 * dt) * k2u, v3 = v + (0.5 * dt) * k2v;
    const GridFunction k3u = v3;
    const GridFunction k3v = rhs_second_order(p, t + 0.5 * dt, u3, v3);
    const GridFunction u4 = u + dt * k3u, v4 = v + dt * k3v;
    const GridFunction k4u = v4;
    const GridFunction k4v = rhs_second_order(p, t + dt, u4, v4);
    u = u + (dt / 6.0) * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
    v = v + (dt / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
}

// fraction of spectral energy in the top third of the wavenumber range
inline double top_third_fraction(const GridFunction& u) {
    const Spectrum s = fourier_forward(u);
    const long cut = static_cast<long>(u.grid.n) / 3;
    double top = 0.0, tot = 0.0;
    for (std::size_t k = 0; k < u.grid.n; ++k) {
        const double e = std::norm(s[k]);
        tot += e;
        if (std::labs(u.grid.wavenumber(k)) > cut) top += e;
    }
    return tot > 0.0 ? top / tot : 0.0;
}

} // namespace detail

// L u = dtt u - dx(a dx u) + b0 dt u + b1 dx u + c u with spectral dx and the
// 2/3-rule truncation on every coefficient product.
inline GridFunction apply_L(const GridFunction& u, const GridFunction& dtu, const GridFunction& dttu,
                            double t, const CauchyProblem& p) {
    check_same_grid(u, dtu);
    check_same_grid(u, dttu);
    if (!(u.grid == p.grid())) throw std::invalid_argument("apply_L: grid mismatch with problem");
    const PeriodicGrid& g = u.grid;
    const auto av = p.a.sample_x(t, g);
    const auto ux = spectral_derivative(u);
    GridFunction out = dttu - spectral_derivative(detail::dealias(pointwise(av, ux)));
    if (p.lower.spec.amp_b != 0.0) {
        out = out + detail::dealias(pointwise(p.lower.sample_b0(t, g), dtu));
        out = out + detail::dealias(pointwise(p.lower.sample_b1(t, g), ux));
    }
    if (p.lower.spec.c0 != 0.0) out = out + detail::dealias(pointwise(p.lower.sample_c(t, g), u));
    return out;
}

inline void validate_problem(const CauchyProblem& p) {
    const PeriodicGrid& g = p.grid();
    if (!(p.u1.grid == g)) throw std::invalid_argument("CauchyProblem: u0/u1 grid mismatch");
    if (!(p.cfl > 0.0 && p.cfl <= 0.5)) throw std::invalid_argument("CauchyProblem: cfl must be in (0, 0.5]");
    const double lim = 0.5 * g.spacing() / std::sqrt(p.a.spec.Lambda0);
    if (p.step_size() > lim * (1.0 + 1e-12))
        throw std::invalid_argument("CauchyProblem: dt violates the CFL bound " + std::to_string(lim));
    // initial data band-limited below Nyquist/2
    for (const GridFunction* f : {&p.u0, &p.u1}) {
        const Spectrum s = fourier_forward(*f);
        double top = 0.0, tot = 0.0;
        for (std::size_t k = 0; k < g.n; ++k) {
            tot += std::norm(s[k]);
            if (std::labs(g.wavenumber(k)) > static_cast<long>(g.n) / 4) top += std::norm(s[k]);
        }
        if (tot > 0.0 && top > 1e-24 * tot)
            throw std::invalid_argument("CauchyProblem: initial data not band-limited below Nyquist/2");
    }
}

// RK4 method of lines on (u, v = dt u); checkpoints at the requested times.
inline SolutionTrace solve(const CauchyProblem& p, const std::vector<double>& output_times) {
    validate_problem(p);
    SolutionTrace tr;
    GridFunction u = p.u0, v = p.u1;
    double t = 0.0;
    const double dt0 = p.step_size();
    for (double tq : output_times) {
        if (tq < t - 1e-14) throw std::invalid_argument("solve: output times must be nondecreasing");
        const int nst = tq > t ? static_cast<int>(std::ceil((tq - t) / dt0 - 1e-12)) : 0;
        const double dt = nst > 0 ? (tq - t) / nst : 0.0;
        for (int s = 0; s < nst; ++s) {
            detail::rk4_step(p, t, dt, u, v);
            t += dt;
        }
        t = tq;
        const double frac = detail::top_third_fraction(u);
        if (frac > 1e-6)
            throw std::runtime_error("solve: de-aliasing health check failed at t = " + std::to_string(t) +
                                     " (top-third energy fraction " + std::to_string(frac) + ")");
        tr.times.push_back(t);
        tr.states.emplace_back(u, v);
        GridFunction resid = apply_L(u, v, detail::rhs_second_order(p, t, u, v), t, p);
        if (p.forcing) {
            GridFunction f(u.grid);
            for (std::size_t j = 0; j < u.grid.n; ++j) f.v[j] = p.forcing(t, u.grid.point(j));
            resid = resid - f;
        }
        tr.residual_log.push_back(l2_norm(resid));
    }
    return tr;
}

// physical energy int |dt u|^2 + a |dx u|^2 dx, meaningful for b = c = f = 0
// and a independent of t; returns the max relative drift over the horizon.
inline double solver_energy_conservation_check(const CauchyProblem& p, int checkpoints = 17) {
    if (p.a.spec.amp_t != 0.0)
        throw std::invalid_argument("conservation check requires a time-independent coefficient");
    if (p.lower.spec.amp_b != 0.0 || p.lower.spec.c0 != 0.0 || p.forcing)
        throw std::invalid_argument("conservation check requires b = c = f = 0");
    std::vector<double> times;
    for (int i = 0; i < checkpoints; ++i) times.push_back(p.T * i / (checkpoints - 1));
    const SolutionTrace tr = solve(p, times);
    auto energy = [&](const GridFunction& u, const GridFunction& v) {
        const auto av = p.a.sample_x(0.0, u.grid);
        const auto ux = spectral_derivative(u);
        double acc = 0.0;
        for (std::size_t j = 0; j < u.grid.n; ++j)
            acc += std::norm(v.v[j]) + av[j] * std::norm(ux.v[j]);
        return u.grid.spacing() * acc;
    };
    const double e0 = energy(tr.states.front().first, tr.states.front().second);
    if (e0 == 0.0) return 0.0;
    double drift = 0.0;
    for (const auto& [u, v] : tr.states) drift = std::max(drift, std::abs(energy(u, v) - e0) / e0);
    return drift;
}

// u*(t,x) = sin(t) cos(2x): closed forms and the symbolically expanded forcing
struct ManufacturedSolution {
    static cd u(double t, double x) { return cd(std::sin(t) * std::cos(2 * x), 0.0); }
    static cd dtu(double t, double x) { return cd(std::cos(t) * std::cos(2 * x), 0.0); }

    // f = L u* with dx(a dx u*) expanded through the closed-form dx a
    static ForcingFn forcing(const SpaceTimeCoefficient& a, const LowerOrderCoefficients& lo) {
        return [a, lo](double t, double x) -> cd {
            const double st = std::sin(t), ct = std::cos(t);
            const double c2 = std::cos(2 * x), s2 = std::sin(2 * x);
            const double dttu = -st * c2;
            const double ux = -2.0 * st * s2;
            const double uxx = -4.0 * st * c2;
            const double flux = a.dx(t, x) * ux + a(t, x) * uxx;
            return cd(dttu - flux + lo.b0(t, x) * ct * c2 + lo.b1(t, x) * ux + lo.c(t, x) * st * c2, 0.0);
        };
    }
};

} // namespace lzwave

#endif
