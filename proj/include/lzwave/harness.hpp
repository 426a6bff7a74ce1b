#ifndef LZWAVE_HARNESS_HPP
#define LZWAVE_HARNESS_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "lzwave/energy.hpp"
#include "lzwave/reports.hpp"

namespace lzwave {

using json = nlohmann::json;

struct ExperimentConfig {
    CoefficientSpec coeff;
    LowerOrderSpec lower;
    std::size_t n = 512;
    double length = kTwoPi;
    double theta = 0.25;
    long data_kmin = 4; // scale-local family: the estimate tracks shells, not the lowest modes
    long data_kmax = 48;
    double data_decay = 1.0;
    std::uint64_t data_seed = 1001;
    int seeds = 5;
    int checkpoints = 65;
    bool beta_auto = true;
    double beta_fixed = 8.0;
    int threads = 0;
    int table_N = 9;
    std::size_t commutator_n = 1024; // grid for dense norms: decay fits and tables
    std::size_t dense_cap = 1024;
    std::vector<std::size_t> n_sweep = {256, 512, 1024};
    double cfl = 0.25;
    std::string out_dir = "reports";

    // lacunary depth honestly resolvable on an n-point grid: 2^J <= n/4
    int clamped_J(std::size_t grid_n) const {
        const int jmax = static_cast<int>(std::log2(static_cast<double>(grid_n))) - 2;
        return std::min(coeff.J, jmax);
    }

    double theta_limit() const { return std::min(0.5, lower.omega / (1.0 + std::log(2.0))); }

    void validate() const {
        if (!(theta > 0.0 && theta < theta_limit()))
            throw std::invalid_argument("config: theta = " + std::to_string(theta) +
                                        " outside Theorem range (0, " + std::to_string(theta_limit()) + ")");
        if (n < 32) throw std::invalid_argument("config: n too small");
        (void)PeriodicGrid(n, length);
        (void)make_coefficient(coeff, false); // surfaces ellipticity violations at parse
        if (checkpoints < 3) throw std::invalid_argument("config: need at least 3 checkpoints");
        if (seeds < 1) throw std::invalid_argument("config: need at least one seed");
    }

    // the torus proxy is physically faithful while T < length / (2 sqrt(Lambda0))
    bool window_binds(double T) const { return T >= length / (2.0 * std::sqrt(coeff.Lambda0)); }
};

inline ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig c;
    if (j.contains("coeff")) {
        const auto& q = j.at("coeff");
        c.coeff.lambda0 = q.value("lambda0", c.coeff.lambda0);
        c.coeff.Lambda0 = q.value("Lambda0", c.coeff.Lambda0);
        c.coeff.base = q.value("base", c.coeff.base);
        c.coeff.amp_t = q.value("amp_t", c.coeff.amp_t);
        c.coeff.amp_x = q.value("amp_x", c.coeff.amp_x);
        c.coeff.J = q.value("J", c.coeff.J);
        c.coeff.seed = q.value("seed", c.coeff.seed);
    }
    if (j.contains("lower")) {
        const auto& q = j.at("lower");
        c.lower.omega = q.value("omega", c.lower.omega);
        c.lower.amp_b = q.value("amp_b", c.lower.amp_b);
        c.lower.c0 = q.value("c0", c.lower.c0);
        c.lower.J = q.value("J", c.lower.J);
        c.lower.seed = q.value("seed", c.lower.seed);
    }
    if (j.contains("grid")) {
        c.n = j.at("grid").value("n", c.n);
        c.length = j.at("grid").value("length", c.length);
    }
    if (j.contains("energy")) c.theta = j.at("energy").value("theta", c.theta);
    if (j.contains("solver")) c.cfl = j.at("solver").value("cfl", c.cfl);
    if (j.contains("harness")) {
        const auto& q = j.at("harness");
        c.data_kmin = q.value("data_kmin", c.data_kmin);
        c.data_kmax = q.value("data_kmax", c.data_kmax);
        c.data_decay = q.value("data_decay", c.data_decay);
        c.data_seed = q.value("data_seed", c.data_seed);
        c.seeds = q.value("seeds", c.seeds);
        c.checkpoints = q.value("checkpoints", c.checkpoints);
        c.threads = q.value("threads", c.threads);
        c.table_N = q.value("table_N", c.table_N);
        c.commutator_n = q.value("commutator_n", c.commutator_n);
        c.dense_cap = q.value("dense_cap", c.dense_cap);
        c.out_dir = q.value("out", c.out_dir);
        if (q.contains("beta")) {
            if (q.at("beta").is_string()) {
                c.beta_auto = q.at("beta").get<std::string>() == "auto";
            } else {
                c.beta_auto = false;
                c.beta_fixed = q.at("beta").get<double>();
            }
        }
        if (q.contains("n_sweep")) c.n_sweep = q.at("n_sweep").get<std::vector<std::size_t>>();
    }
    c.validate();
    return c;
}

namespace detail {

inline std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> v;
    v.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) v.push_back(lo + (hi - lo) * i / (n - 1));
    return v;
}

inline double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

} // namespace detail

// One solved instance of the theorem setting with every measured quantity the
// estimate needs.
struct TheoremRun {
    std::size_t n = 0;
    std::uint64_t seed = 0;
    bool forced = false;
    double beta = 0.0;
    double T = 0.0;
    double lhs = 0.0;         // sup_t drifting-index norm sum
    double rhs_data = 0.0;    // data norms at t = 0
    double rhs_forcing = 0.0; // int ||Lu||_{H^{-theta-beta* t}} dt
    double C_measured = 0.0;
    double gronwall_margin = 0.0;     // min_t [ E(0)^{1/2} + (C''/2) int ||Lu|| - E(t)^{1/2} ]
    double fixed_index_growth = 0.0;  // max_t fixed-index norm / value at 0
    std::vector<double> times;
    std::vector<double> loss_ratio;   // fixed-index / drifting-index per checkpoint
    std::vector<double> energy;       // E(t)
};

struct BetaSelection {
    double beta = 0.0;
    double T = 0.0;
    bool ok = false;
    double worst_violation = 0.0; // max over checkpoints of dE/dt - tol (1+E), accepted candidate
    double C_dprime = 0.0;        // measured source constant from a forced probe
    std::vector<double> tried;
    json diagnostics;
};

class Harness {
  public:
    explicit Harness(const ExperimentConfig& cfg) : cfg_(cfg) { cfg_.validate(); }

    const ExperimentConfig& config() const { return cfg_; }

    // problem factory: rough coefficient clamped to the grid, seeded data
    CauchyProblem make_problem(std::size_t n, std::uint64_t data_seed, bool forced,
                               double amp_scale = 1.0) const {
        PeriodicGrid g(n, cfg_.length);
        CauchyProblem p;
        CoefficientSpec cs = cfg_.coeff;
        cs.amp_t *= amp_scale;
        cs.amp_x *= amp_scale;
        cs.J = cfg_.clamped_J(n);
        p.a = make_coefficient(cs);
        LowerOrderSpec ls = cfg_.lower;
        ls.J = std::min(ls.J, cfg_.clamped_J(n));
        p.lower = make_lower_order(ls);
        p.cfl = cfg_.cfl;
        if (forced) {
            p.u0 = sample(g, [](double x) { return ManufacturedSolution::u(0.0, x); });
            p.u1 = sample(g, [](double x) { return ManufacturedSolution::dtu(0.0, x); });
            p.forcing = ManufacturedSolution::forcing(p.a, p.lower);
        } else {
            const long kmax = std::min<long>(cfg_.data_kmax, static_cast<long>(n) / 4 - 1);
            p.u0 = random_band_limited(g, kmax, data_seed, cfg_.data_decay);
            p.u1 = random_band_limited(g, kmax, data_seed + 7919, cfg_.data_decay);
            for (GridFunction* f : {&p.u0, &p.u1}) {
                Spectrum sp = fourier_forward(*f);
                for (std::size_t k = 0; k < g.n; ++k)
                    if (std::labs(g.wavenumber(k)) < cfg_.data_kmin) sp[k] = cd(0.0, 0.0);
                *f = fourier_inverse(g, sp);
            }
            // energy-balanced family: both components carry the same weight in
            // the data norm pair, so norm exchange under the evolution cannot
            // masquerade as growth
            const double nu0 = sobolev_norm_fourier(p.u0, 1.0 - cfg_.theta);
            const double nv0 = sobolev_norm_fourier(p.u1, -cfg_.theta);
            if (nv0 > 0.0) p.u1 = (nu0 / nv0) * p.u1;
        }
        return p;
    }

    EnergyEvaluator make_evaluator(const CauchyProblem& p, double beta) const {
        EnergyEvaluator ev;
        ev.a = p.a;
        ev.kernel = build_mollifier();
        ev.profile = build_profile(p.grid());
        ev.cfg = EnergyConfig{cfg_.theta, beta, cfg_.lower.omega};
        ev.cfg.validate();
        return ev;
    }

    // dyadic norm sum ||v||_{H^{s-1}} + ||u||_{H^s} at the drifting index
    static double norm_pair(const GridFunction& u, const GridFunction& v, double s, const LPProfile& prof) {
        return sobolev_norm_dyadic(v, s - 1.0, prof) + sobolev_norm_dyadic(u, s, prof);
    }

    // weighted source term sum_nu w_nu(t) T01_nu, the quantity the Gronwall
    // constant C'' normalizes
    static double weighted_source(const CauchyProblem& p, const EnergyEvaluator& ev, const GridFunction& u,
                                  const GridFunction& v, double t) {
        const PeriodicGrid& g = u.grid;
        GridFunction f(g);
        if (p.forcing)
            for (std::size_t j = 0; j < g.n; ++j) f.v[j] = p.forcing(t, g.point(j));
        double acc = 0.0;
        for (int nu = 0; nu <= ev.profile.nu_max; ++nu) {
            const auto s = smooth_coefficient(ev.a, t, std::ldexp(1.0, -nu), g, ev.kernel);
            const auto un = dyadic_block(u, nu, ev.profile);
            const auto vn = dyadic_block(v, nu, ev.profile);
            const auto fn = dyadic_block(f, nu, ev.profile);
            double term = 0.0;
            for (std::size_t j = 0; j < g.n; ++j) {
                const double sq = std::sqrt(s.a_eps[j]);
                const cd V = vn.v[j] + s.dt_a[j] / (4.0 * s.a_eps[j]) * un.v[j];
                term += 2.0 / sq * (fn.v[j] * std::conj(V)).real();
            }
            acc += g.spacing() * term * std::exp(-2.0 * ev.cfg.beta * (nu + 1) * t) *
                   std::pow(2.0, -2.0 * nu * ev.cfg.theta);
        }
        return acc;
    }

    // smallest beta in a doubling sweep such that, along an unforced probe,
    // dE/dt <= tol (1 + E) at every checkpoint; T recomputed per candidate.
    BetaSelection select_beta(std::size_t n_for_run, std::ostream* log = nullptr) const {
        BetaSelection sel;
        const std::size_t n_probe = std::max<std::size_t>(128, n_for_run / 2);
        CauchyProblem probe = make_problem(n_probe, cfg_.data_seed, false);
        const double tol = 1e-3;
        for (double beta = 1.0; beta <= 1024.0; beta *= 2.0) {
            sel.tried.push_back(beta);
            EnergyEvaluator ev = make_evaluator(probe, beta);
            const double T = ev.cfg.horizon();
            const int nc = 129;
            const auto times = detail::linspace(0.0, T, nc);
            CauchyProblem pr = probe;
            pr.T = T;
            pr.dt = std::min(pr.step_size(), T / 512.0);
            const SolutionTrace tr = solve(pr, times);
            std::vector<double> E(times.size());
            for (std::size_t i = 0; i < times.size(); ++i)
                E[i] = ev.total(tr.states[i].first, tr.states[i].second, times[i]);
            double worst = -1e300;
            for (std::size_t i = 1; i + 1 < times.size(); ++i) {
                const double dE = (E[i + 1] - E[i - 1]) / (times[i + 1] - times[i - 1]);
                worst = std::max(worst, dE - tol * (1.0 + E[i]));
            }
            if (log) *log << "select_beta: beta=" << beta << " worst=" << fmt17(worst) << "\n";
            if (worst <= 0.0) {
                sel.beta = beta;
                sel.T = T;
                sel.ok = true;
                sel.worst_violation = worst;
                break;
            }
            sel.diagnostics["beta_" + std::to_string(beta)] = worst;
        }
        if (!sel.ok) return sel;

        // measured source constant from a forced probe at the accepted beta
        CauchyProblem fp = make_problem(n_probe, cfg_.data_seed, true);
        EnergyEvaluator ev = make_evaluator(fp, sel.beta);
        const auto times = detail::linspace(0.0, sel.T, 33);
        CauchyProblem fr = fp;
        fr.T = sel.T;
        fr.dt = std::min(fr.step_size(), sel.T / 256.0);
        const SolutionTrace tr = solve(fr, times);
        double cpp = 0.0;
        for (std::size_t i = 0; i < times.size(); ++i) {
            const auto& [u, v] = tr.states[i];
            const double E = ev.total(u, v, times[i]);
            GridFunction f(u.grid);
            for (std::size_t j = 0; j < u.grid.n; ++j) f.v[j] = fp.forcing(times[i], u.grid.point(j));
            const double flu = sobolev_norm_dyadic(f, -cfg_.theta - ev.cfg.beta_star() * times[i], ev.profile);
            const double S = std::abs(weighted_source(fp, ev, u, v, times[i]));
            if (E > 0.0 && flu > 0.0) cpp = std::max(cpp, S / (std::sqrt(E) * flu));
        }
        sel.C_dprime = cpp;
        return sel;
    }

    TheoremRun run_instance(std::size_t n, std::uint64_t seed, bool forced, double beta,
                            double C_dprime, double amp_scale = 1.0) const {
        CauchyProblem p = make_problem(n, seed, forced, amp_scale);
        EnergyEvaluator ev = make_evaluator(p, beta);
        const double T = ev.cfg.horizon();
        const auto prof = ev.profile;

        if (!forced) {
            // normalize data so the right side's data part is exactly 1
            const double r0 = norm_pair(p.u0, p.u1, 1.0 - cfg_.theta, prof);
            p.u0 = (1.0 / r0) * p.u0;
            p.u1 = (1.0 / r0) * p.u1;
        }

        p.T = T;
        p.dt = std::min(p.step_size(), T / (4.0 * cfg_.checkpoints));
        const auto times = detail::linspace(0.0, T, cfg_.checkpoints);
        const SolutionTrace tr = solve(p, times);

        TheoremRun run;
        run.n = n;
        run.seed = seed;
        run.forced = forced;
        run.beta = beta;
        run.T = T;
        run.times = times;

        std::vector<double> flu(times.size(), 0.0);
        // the no-loss anchor uses the exact Fourier-side pair: the dyadic
        // weights wobble by shell-equivalence factors under harmonic rotation
        auto fourier_pair = [&](const GridFunction& uu, const GridFunction& vv) {
            return sobolev_norm_fourier(vv, -cfg_.theta) + sobolev_norm_fourier(uu, 1.0 - cfg_.theta);
        };
        const double fixed0 = fourier_pair(tr.states[0].first, tr.states[0].second);
        for (std::size_t i = 0; i < times.size(); ++i) {
            const auto& [u, v] = tr.states[i];
            const double idx = 1.0 - cfg_.theta - ev.cfg.beta_star() * times[i];
            const double drifting = norm_pair(u, v, idx, prof);
            const double fixed = norm_pair(u, v, 1.0 - cfg_.theta, prof);
            run.lhs = std::max(run.lhs, drifting);
            run.loss_ratio.push_back(drifting > 0.0 ? fixed / drifting : 0.0);
            run.energy.push_back(ev.total(u, v, times[i]));
            if (fixed0 > 0.0)
                run.fixed_index_growth = std::max(run.fixed_index_growth, fourier_pair(u, v) / fixed0);
            if (p.forcing) {
                GridFunction f(u.grid);
                for (std::size_t j = 0; j < u.grid.n; ++j) f.v[j] = p.forcing(times[i], u.grid.point(j));
                flu[i] = sobolev_norm_dyadic(f, idx - 1.0, prof);
            }
        }
        run.rhs_data = norm_pair(tr.states[0].first, tr.states[0].second, 1.0 - cfg_.theta, prof);
        // trapezoid in time of the forcing norm
        for (std::size_t i = 0; i + 1 < times.size(); ++i)
            run.rhs_forcing += 0.5 * (flu[i] + flu[i + 1]) * (times[i + 1] - times[i]);
        run.C_measured = run.lhs / (run.rhs_data + run.rhs_forcing);

        // Gronwall form: E(t)^{1/2} <= E(0)^{1/2} + (C''/2) int_0^t ||Lu|| ds
        double margin = 1e300;
        double acc = 0.0;
        for (std::size_t i = 0; i < times.size(); ++i) {
            if (i > 0) acc += 0.5 * (flu[i - 1] + flu[i]) * (times[i] - times[i - 1]);
            margin = std::min(margin, std::sqrt(run.energy[0]) + 0.5 * C_dprime * acc -
                                          std::sqrt(run.energy[i]));
        }
        run.gronwall_margin = margin;
        return run;
    }

  private:
    ExperimentConfig cfg_;
};

} // namespace lzwave

#endif
