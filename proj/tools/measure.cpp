// scratch measurement harness used while calibrating test constants
#include <cstdio>
#include <string>

#include "lzwave/coeff.hpp"
#include "lzwave/commutator.hpp"
#include "lzwave/lp.hpp"

using namespace lzwave;

int main(int argc, char** argv) {
    const std::string what = argc > 1 ? argv[1] : "decay";

    if (what == "decay") {
        PeriodicGrid g(1024);
        auto prof = build_profile(g);
        CoefficientSpec cs;
        cs.J = 8;
        auto a = make_coefficient(cs);
        auto ax = a.sample_x(0.31, g);
        const double C0x = estimate_log_lipschitz_x(a, dyadic_steps(3, 8), make_sample_grid(1, 800));
        std::printf("C0x=%.6f\n", C0x);
        auto rep = verify_comm_decay(ax, "log-lipschitz", 4, 8, g, prof, C0x);
        for (const auto& r : rep.rows) std::printf("nu=%d norm=%.6e ratio=%.4f\n", r.nu, r.norm, r.ratio);
        std::printf("max/median=%.4f\n", rep.max_over_median);

        for (std::uint64_t seed : {2ull, 5ull, 9ull, 12ull, 21ull, 33ull}) {
            LowerOrderSpec ls;
            ls.J = 8;
            ls.seed = seed;
            auto lo = make_lower_order(ls);
            auto b = lo.sample_b0(0.31, g);
            auto rb = verify_comm_decay(b, "hoelder", 3, 8, g, prof);
            std::printf("seed=%llu norms:", static_cast<unsigned long long>(seed));
            for (const auto& r : rb.rows) std::printf(" %.5e", r.norm);
            std::printf("\n");
            for (int lo_nu : {4, 5, 6}) {
                double sx = 0, sy = 0, sxx = 0, sxy = 0;
                int m = 0;
                for (const auto& r : rb.rows)
                    if (r.nu >= lo_nu) {
                        sx += r.nu;
                        sy += std::log2(r.norm);
                        sxx += r.nu * r.nu;
                        sxy += r.nu * std::log2(r.norm);
                        ++m;
                    }
                const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
                std::printf("  fit %d..8 exponent=%.4f\n", lo_nu, -slope);
            }
        }
    } else if (what == "gap") {
        PeriodicGrid g(1024);
        auto prof = build_profile(g);
        CoefficientSpec cs;
        cs.J = 8;
        auto a = make_coefficient(cs);
        auto ax = a.sample_x(0.31, g);
        for (auto [nu, mu] : {std::pair{4, 4}, std::pair{6, 6}, std::pair{8, 8}, std::pair{5, 7}}) {
            auto dense = operator_norm(nu, mu, ax, g, prof, 1024);
            auto probe = operator_norm(nu, mu, ax, g, prof, 512); // force probe mode
            std::printf("nu=%d mu=%d dense=%.8e (it %d) probe=%.8e gap=%.4f%%\n", nu, mu, dense.value,
                        dense.iterations, probe.value, 100.0 * (dense.value - probe.value) / dense.value);
        }
    } else if (what == "gapzero") {
        PeriodicGrid g(512);
        auto prof = build_profile(g);
        auto cosx = std::vector<double>(g.n);
        for (std::size_t j = 0; j < g.n; ++j) cosx[j] = std::cos(g.point(j));
        for (auto [nu, mu] : {std::pair{6, 3}, std::pair{3, 6}, std::pair{7, 2}}) {
            auto r = operator_norm(nu, mu, cosx, g, prof, 1024);
            std::printf("nu=%d mu=%d norm=%.3e\n", nu, mu, r.value);
        }
    } else if (what == "smooth") {
        PeriodicGrid g(1024);
        auto prof = build_profile(g);
        auto cosx = std::vector<double>(g.n);
        for (std::size_t j = 0; j < g.n; ++j) cosx[j] = std::cos(g.point(j));
        auto rep = verify_comm_decay(cosx, "hoelder", 4, 8, g, prof);
        std::printf("cos x fitted exponent=%.4f\n", rep.fitted_exponent);
        for (const auto& r : rep.rows) std::printf("nu=%d norm=%.6e\n", r.nu, r.norm);
    }
    return 0;
}
