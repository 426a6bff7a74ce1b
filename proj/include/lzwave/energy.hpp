#ifndef LZWAVE_ENERGY_HPP
#define LZWAVE_ENERGY_HPP

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "lzwave/lp.hpp"
#include "lzwave/mollify.hpp"
#include "lzwave/schur.hpp"
#include "lzwave/solver.hpp"

namespace lzwave {

namespace detail {

// corrector weight w = dt sqrt(a_eps) / (2 sqrt(a_eps)) = dt_a / (4 a_eps)
inline std::vector<double> corrector(const SmoothedCoefficientSlice& s) {
    std::vector<double> w(s.a_eps.size());
    for (std::size_t j = 0; j < w.size(); ++j) w[j] = s.dt_a[j] / (4.0 * s.a_eps[j]);
    return w;
}

} // namespace detail

// R_eps v = [ dtt_a/(4 a_eps) - (5/16)(dt_a/a_eps)^2 ] v, the closed-form
// expansion of dt(dt sqrt a/(2 sqrt a)) - (dt sqrt a/(2 sqrt a))^2.
inline GridFunction r_epsilon_apply(const SmoothedCoefficientSlice& s, const GridFunction& v) {
    if (s.a_eps.size() != v.size()) throw std::invalid_argument("r_epsilon_apply: size mismatch");
    GridFunction out(v.grid);
    for (std::size_t j = 0; j < v.size(); ++j) {
        const double a = s.a_eps[j];
        if (!(a > 0.0)) throw std::runtime_error("r_epsilon_apply: nonpositive a_eps");
        const double q = s.dt_a[j] / a;
        out.v[j] = (s.dtt_a[j] / (4.0 * a) - (5.0 / 16.0) * q * q) * v.v[j];
    }
    return out;
}

// e_{nu,eps} = int (1/sqrt a_eps)|dt u_nu + w u_nu|^2 + sqrt a_eps |dx u_nu|^2 + |u_nu|^2 dx
inline double approx_energy(const GridFunction& u_nu, const GridFunction& dtu_nu,
                            const SmoothedCoefficientSlice& s) {
    check_same_grid(u_nu, dtu_nu);
    if (s.a_eps.size() != u_nu.size())
        throw std::invalid_argument("approx_energy: slice/block grid mismatch");
    const GridFunction ux = spectral_derivative(u_nu);
    double acc = 0.0;
    for (std::size_t j = 0; j < u_nu.size(); ++j) {
        const double sq = std::sqrt(s.a_eps[j]);
        const cd V = dtu_nu.v[j] + (s.dt_a[j] / (4.0 * s.a_eps[j])) * u_nu.v[j];
        acc += std::norm(V) / sq + sq * std::norm(ux.v[j]) + std::norm(u_nu.v[j]);
    }
    return u_nu.grid.spacing() * acc;
}

// E(t) = sum_nu e^{-2 beta (nu+1) t} 2^{-2 nu theta} e_nu, ascending nu
inline double total_energy(const std::vector<double>& e_nu, double t, const EnergyConfig& cfg) {
    if (t < -1e-15 || t > cfg.horizon() * (1.0 + 1e-12))
        throw std::out_of_range("total_energy: t outside [0, T]");
    double acc = 0.0;
    for (std::size_t nu = 0; nu < e_nu.size(); ++nu)
        acc += std::exp(-2.0 * cfg.beta * (static_cast<double>(nu) + 1.0) * t) *
               std::pow(2.0, -2.0 * static_cast<double>(nu) * cfg.theta) * e_nu[nu];
    return acc;
}

// Bundles the pieces every energy evaluation needs: the coefficient, the
// kernel, the block profile, and the eps = 2^-nu coupling.
struct EnergyEvaluator {
    SpaceTimeCoefficient a;
    MollifierKernel kernel;
    LPProfile profile;
    EnergyConfig cfg;

    std::vector<double> block_energies(const GridFunction& u, const GridFunction& v, double t) const {
        std::vector<double> e;
        e.reserve(static_cast<std::size_t>(profile.nu_max) + 1);
        for (int nu = 0; nu <= profile.nu_max; ++nu) {
            const auto s = smooth_coefficient(a, t, std::ldexp(1.0, -nu), u.grid, kernel);
            e.push_back(approx_energy(dyadic_block(u, nu, profile), dyadic_block(v, nu, profile), s));
        }
        return e;
    }

    double total(const GridFunction& u, const GridFunction& v, double t) const {
        return total_energy(block_energies(u, v, t), t, cfg);
    }
};

struct SandwichReport {
    double E = 0.0;
    double drifting_norms = 0.0; // ||dt u||_{H^{-theta-beta* t}} + ||u||_{H^{1-theta-beta* t}}
    double fixed_norms = 0.0;    // the same pair at t = 0 indices
    double ratio_lower = 0.0;    // sqrt(E) / drifting_norms   (>= C'_theta)
    double ratio_upper = 0.0;    // sqrt(E) / fixed_norms      (<= C_theta at t = 0)
};

// Measured constants of the energy / Sobolev-norm sandwich, dyadic norms.
inline SandwichReport sobolev_sandwich(const GridFunction& u, const GridFunction& v, double t,
                                       const EnergyEvaluator& ev) {
    SandwichReport rep;
    rep.E = ev.total(u, v, t);
    const double st = 1.0 - ev.cfg.theta - ev.cfg.beta_star() * t;
    rep.drifting_norms = sobolev_norm_dyadic(v, st - 1.0, ev.profile) + sobolev_norm_dyadic(u, st, ev.profile);
    rep.fixed_norms = sobolev_norm_dyadic(v, -ev.cfg.theta, ev.profile) +
                      sobolev_norm_dyadic(u, 1.0 - ev.cfg.theta, ev.profile);
    rep.ratio_lower = rep.drifting_norms > 0.0 ? std::sqrt(rep.E) / rep.drifting_norms : 0.0;
    rep.ratio_upper = rep.fixed_norms > 0.0 ? std::sqrt(rep.E) / rep.fixed_norms : 0.0;
    return rep;
}

inline constexpr std::array<const char*, 14> kBudgetTermNames = {
    "source",        "r_eps",         "dtsqa_mismatch", "sqa_mismatch", "dxsqa",
    "mixed_dx_ratio", "u_dtu",        "comm_a",         "b0",           "comm_b0",
    "b1",            "comm_b1",       "c",              "comm_c"};

struct EnergyBudgetReport {
    int nu = 0;
    double t = 0.0, eps = 0.0;
    double e_nu = 0.0;
    std::array<double, 14> terms{};
    double sum = 0.0;
    double fd_derivative = 0.0;
    double rel_error = 0.0; // |sum - fd| / (1 + |fd|)
};

// Evaluates the fourteen integrals of the d/dt identity for e_{nu,eps} at one
// state (u, v = dt u) of the trajectory. The second time derivative comes
// from the discrete evolution operator, and the source is the residual of
// the exact-product operator on that state, so the identity closes by pure
// algebra (plus quadrature).
inline EnergyBudgetReport energy_derivative_budget(const CauchyProblem& p, const GridFunction& u,
                                                   const GridFunction& v, double t, int nu, double eps,
                                                   const LPProfile& prof, const MollifierKernel& kernel) {
    if (nu < 0 || nu > prof.nu_max) throw std::out_of_range("energy_derivative_budget: nu out of range");
    const PeriodicGrid& g = u.grid;
    const auto s = smooth_coefficient(p.a, t, eps, g, kernel);
    if (s.t != t || s.eps != eps) throw std::runtime_error("energy_derivative_budget: slice mismatch");

    const auto av = p.a.sample_x(t, g);
    const auto b0v = p.lower.sample_b0(t, g);
    const auto b1v = p.lower.sample_b1(t, g);
    const auto cv = p.lower.sample_c(t, g);

    // dtt u from the solver's discrete operator; f_eff from exact products
    const GridFunction dttu = detail::rhs_second_order(p, t, u, v);
    const GridFunction ux = spectral_derivative(u);
    const GridFunction f_eff =
        dttu - spectral_derivative(pointwise(av, ux)) + pointwise(b0v, v) + pointwise(b1v, ux) + pointwise(cv, u);

    const GridFunction un = dyadic_block(u, nu, prof);
    const GridFunction vn = dyadic_block(v, nu, prof);
    const GridFunction unx = spectral_derivative(un);
    const GridFunction vnx = spectral_derivative(vn);

    const std::size_t n = g.n;
    std::vector<double> w(n), sqa(n), dx_ratio(n), Rcoef(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double a = s.a_eps[j];
        w[j] = s.dt_a[j] / (4.0 * a);
        sqa[j] = std::sqrt(a);
        // dx( dt sqrt a / sqrt a ) = dx( dt_a / (2 a) )
        dx_ratio[j] = s.dtx_a[j] / (2.0 * a) - s.dt_a[j] * s.dx_a[j] / (2.0 * a * a);
        const double q = s.dt_a[j] / a;
        Rcoef[j] = s.dtt_a[j] / (4.0 * a) - (5.0 / 16.0) * q * q;
    }
    std::vector<cd> V(n);
    for (std::size_t j = 0; j < n; ++j) V[j] = vn.v[j] + w[j] * un.v[j];

    const GridFunction f_nu = dyadic_block(f_eff, nu, prof);
    const GridFunction comm_a = dyadic_block(pointwise(av, ux), nu, prof) - pointwise(av, dyadic_block(ux, nu, prof));
    const GridFunction dx_comm_a = spectral_derivative(comm_a);
    const GridFunction comm_b0 = dyadic_block(pointwise(b0v, v), nu, prof) - pointwise(b0v, vn);
    const GridFunction comm_b1 =
        dyadic_block(pointwise(b1v, ux), nu, prof) - pointwise(b1v, dyadic_block(ux, nu, prof));
    const GridFunction comm_c = dyadic_block(pointwise(cv, u), nu, prof) - pointwise(cv, un);

    EnergyBudgetReport rep;
    rep.nu = nu;
    rep.t = t;
    rep.eps = eps;
    const double h = g.spacing();
    auto integral = [&](auto&& f_at) {
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) acc += f_at(j);
        return h * acc;
    };
    auto re = [](cd a, cd b) { return (a * std::conj(b)).real(); };

    rep.terms[0] = integral([&](std::size_t j) { return 2.0 / sqa[j] * re(f_nu.v[j], V[j]); });
    rep.terms[1] = integral([&](std::size_t j) { return 2.0 / sqa[j] * re(Rcoef[j] * un.v[j], V[j]); });
    rep.terms[2] = integral([&](std::size_t j) {
        return (s.dt_a[j] / (2.0 * sqa[j])) * (1.0 - av[j] / s.a_eps[j]) * std::norm(unx.v[j]);
    });
    rep.terms[3] = integral([&](std::size_t j) {
        return 2.0 * (sqa[j] - av[j] / sqa[j]) * re(unx.v[j], vnx.v[j]);
    });
    rep.terms[4] = integral([&](std::size_t j) {
        return 2.0 * (s.dx_a[j] / (2.0 * sqa[j])) / s.a_eps[j] * av[j] * re(unx.v[j], V[j]);
    });
    rep.terms[5] = integral([&](std::size_t j) {
        return -av[j] / sqa[j] * dx_ratio[j] * re(unx.v[j], un.v[j]);
    });
    rep.terms[6] = integral([&](std::size_t j) { return 2.0 * re(un.v[j], vn.v[j]); });
    rep.terms[7] = integral([&](std::size_t j) { return 2.0 / sqa[j] * re(dx_comm_a.v[j], V[j]); });
    rep.terms[8] = integral([&](std::size_t j) { return -2.0 / sqa[j] * b0v[j] * re(vn.v[j], V[j]); });
    rep.terms[9] = integral([&](std::size_t j) { return -2.0 / sqa[j] * re(comm_b0.v[j], V[j]); });
    rep.terms[10] = integral([&](std::size_t j) { return -2.0 / sqa[j] * b1v[j] * re(unx.v[j], V[j]); });
    rep.terms[11] = integral([&](std::size_t j) { return -2.0 / sqa[j] * re(comm_b1.v[j], V[j]); });
    rep.terms[12] = integral([&](std::size_t j) { return -2.0 / sqa[j] * cv[j] * re(un.v[j], V[j]); });
    rep.terms[13] = integral([&](std::size_t j) { return -2.0 / sqa[j] * re(comm_c.v[j], V[j]); });

    for (double term : rep.terms) rep.sum += term;
    rep.e_nu = approx_energy(un, vn, s);
    return rep;
}

// eps = 2^-nu rates claimed by the closing estimate for the non-commutator
// budget terms, keyed by term index
inline double budget_term_rate(int term_idx, int nu, double eps) {
    const double lg = std::log(1.0 / eps + 1.0);
    switch (term_idx) {
        case 1: return lg / eps * std::ldexp(1.0, -nu);
        case 2: return lg;
        case 3: return (eps * std::ldexp(1.0, nu) + 1.0) * lg;
        case 4: return lg;
        case 5: return lg / eps * std::ldexp(1.0, -nu);
        case 6: return std::ldexp(1.0, -nu) / std::sqrt(eps);
        case 8:
        case 10:
        case 12: return 1.0 + std::ldexp(1.0, -nu) / std::sqrt(eps);
        default: throw std::invalid_argument("budget_term_rate: term has no per-shell rate");
    }
}

inline constexpr std::array<int, 9> kRatedBudgetTerms = {1, 2, 3, 4, 5, 6, 8, 10, 12};

struct TermRateCheck {
    int term_idx = 0;
    double max_ratio = 0.0;
    double median_ratio = 0.0;
    double slope = 0.0; // log2 regression of the state-averaged ratio vs nu
    std::vector<double> ratios;
    bool pass = false;
};

// Shell-uniformity check of one term family over budgets grouped by state:
// the measured constant must stay O(1) and must not grow systematically
// beyond the claimed rate. Cancellation transients make the per-shell values
// wobble, so the gate is an absolute envelope plus a growth-slope cap.
inline TermRateCheck check_term_rate(int term_idx, const std::vector<std::vector<EnergyBudgetReport>>& by_state,
                                     double envelope = 1.0) {
    // the slope gate applies where the rate carries genuine shell structure;
    // the flat-rate lower-order families are gated by the envelope alone
    const bool shell_structured = term_idx <= 6;
    const double slope_cap = shell_structured ? 0.5 : 1e300;
    TermRateCheck chk;
    chk.term_idx = term_idx;
    const std::size_t nshell = by_state.front().size();
    for (std::size_t i = 0; i < nshell; ++i) {
        double acc = 0.0;
        for (const auto& reps : by_state) {
            const auto& r = reps[i];
            acc += std::abs(r.terms[static_cast<std::size_t>(term_idx)]) /
                   (budget_term_rate(term_idx, r.nu, r.eps) * std::max(r.e_nu, 1e-300));
        }
        chk.ratios.push_back(acc / static_cast<double>(by_state.size()));
    }
    std::vector<double> sorted = chk.ratios;
    std::sort(sorted.begin(), sorted.end());
    chk.median_ratio = sorted[sorted.size() / 2];
    for (double q : chk.ratios) chk.max_ratio = std::max(chk.max_ratio, q);
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const std::size_t m = chk.ratios.size();
    for (std::size_t i = 0; i < m; ++i) {
        const double x = by_state.front()[i].nu;
        const double y = std::log2(std::max(chk.ratios[i], 1e-300));
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    chk.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    chk.pass = chk.max_ratio <= envelope && chk.slope <= slope_cap;
    return chk;
}

// Richardson-extrapolated centered difference of t -> e_{nu,eps}(t) along the
// trajectory through (u, v) at time t; the independent oracle for the budget.
inline double fd_energy_derivative(const CauchyProblem& p, const GridFunction& u, const GridFunction& v,
                                   double t, int nu, double eps, const LPProfile& prof,
                                   const MollifierKernel& kernel, double delta = 1e-4) {
    auto e_at = [&](double tq) {
        GridFunction uu = u, vv = v;
        double tt = t;
        const double span = tq - tt;
        const int nst = std::max(1, static_cast<int>(std::ceil(std::abs(span) / (delta / 4.0))));
        const double dt = span / nst;
        for (int st = 0; st < nst; ++st) {
            detail::rk4_step(p, tt, dt, uu, vv);
            tt += dt;
        }
        const auto s = smooth_coefficient(p.a, tq, eps, u.grid, kernel);
        return approx_energy(dyadic_block(uu, nu, prof), dyadic_block(vv, nu, prof), s);
    };
    const double d1 = (e_at(t + delta) - e_at(t - delta)) / (2.0 * delta);
    const double d2 = (e_at(t + delta / 2.0) - e_at(t - delta / 2.0)) / delta;
    return (4.0 * d2 - d1) / 3.0;
}

} // namespace lzwave

#endif
