#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "lzwave/lp.hpp"

using namespace lzwave;

TEST_CASE("profile shape and partition of unity") {
    PeriodicGrid g(512);
    auto prof = build_profile(g);
    CHECK(prof.nu_max == 7); // xi_max = 256 -> floor(log2) - 1

    CHECK(LPProfile::phi0(0.5) == 1.0);
    CHECK(LPProfile::phi0(-0.3) == 1.0);
    CHECK(LPProfile::phi0(3.0) == 0.0);
    CHECK(LPProfile::phi0(1.5) > 0.0);
    CHECK(LPProfile::phi0(1.5) < 1.0);

    // decreasing on [0, inf)
    double prev = 1.0;
    for (double xi = 0.0; xi <= 2.5; xi += 0.005) {
        const double v = LPProfile::phi0(xi);
        CHECK(v <= prev + 1e-15);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        prev = v;
    }

    // telescoping partition of unity at an arbitrary frequency
    double s = 0.0;
    for (int nu = 0; nu <= 20; ++nu) s += prof.phi_nu(nu, 7.3);
    CHECK(s == Catch::Approx(1.0).margin(1e-12));

    // ... and on every covered grid frequency
    double worst = 0.0;
    for (std::size_t k = 0; k < g.n; ++k) {
        const double xi = std::abs(g.frequency(k));
        if (xi > std::ldexp(1.0, prof.nu_max)) continue;
        double acc = 0.0;
        for (int nu = 0; nu <= prof.nu_max; ++nu) acc += prof.phi_nu(nu, xi);
        worst = std::max(worst, std::abs(acc - 1.0));
    }
    CHECK(worst <= 1e-12);

    CHECK_THROWS_AS(build_profile(PeriodicGrid(16)), std::invalid_argument);
}

TEST_CASE("dyadic blocks: localization, reconstruction, edge cases") {
    PeriodicGrid g(512);
    auto prof = build_profile(g);

    // pure mode at xi = 2^nu is reproduced exactly by block nu
    const int nu = 5;
    const double xi = std::ldexp(1.0, nu);
    auto mode = sample(g, [&](double x) { return std::exp(cd(0.0, xi * x)); });
    auto blk = dyadic_block(mode, nu, prof);
    double worst = 0.0;
    for (std::size_t j = 0; j < g.n; ++j) worst = std::max(worst, std::abs(blk.v[j] - mode.v[j]));
    CHECK(worst < 1e-12);

    // constants live in block 0 only
    auto ones = sample_real(g, [](double) { return 1.0; });
    CHECK(max_abs(dyadic_block(ones, 0, prof) - ones) < 1e-13);
    for (int v = 2; v <= prof.nu_max; ++v) CHECK(max_abs(dyadic_block(ones, v, prof)) < 1e-14);

    // random band-limited input: blocks reconstruct it
    auto f = random_band_limited(g, (1 << prof.nu_max) - 1, 5);
    auto set = build_blocks(f, prof);
    CHECK(set.truncated_tail_norm < 1e-12);
    auto rec = reconstruct(set);
    CHECK(max_abs(rec - f) / max_abs(f) < 1e-12);

    // spectral localization of each block
    for (int v = 1; v <= prof.nu_max; ++v) {
        auto sp = fourier_forward(set.blocks[static_cast<std::size_t>(v)]);
        for (std::size_t k = 0; k < g.n; ++k) {
            const double fx = std::abs(g.frequency(k));
            if (fx < std::ldexp(1.0, v - 1) || fx > std::ldexp(1.0, v + 1))
                CHECK(std::abs(sp[k]) <= 1e-14);
        }
    }

    CHECK_THROWS_AS(dyadic_block(f, prof.nu_max + 1, prof), std::out_of_range);
    CHECK_THROWS_AS(dyadic_block(f, -1, prof), std::out_of_range);
}

TEST_CASE("psi blocks behave like enlarged cutoffs") {
    PeriodicGrid g(512);
    auto prof = build_profile(g);
    auto f = random_band_limited(g, 120, 17);

    // Psi_mu is the identity on block mu
    for (int mu : {0, 3, 6}) {
        auto u_mu = dyadic_block(f, mu, prof);
        auto pb = psi_block(u_mu, mu, prof);
        CHECK(max_abs(pb - u_mu) <= 1e-12 * std::max(1.0, max_abs(u_mu)));
    }

    // psi_0 = phi_0 + phi_1 keeps constants
    auto ones = sample_real(g, [](double) { return 1.0; });
    CHECK(max_abs(psi_block(ones, 0, prof) - ones) < 1e-13);

    // disjoint supports: phi_nu psi_mu == 0 for |nu - mu| >= 3
    for (auto [nu, mu] : {std::pair{6, 3}, std::pair{2, 5}, std::pair{7, 1}}) {
        auto z = dyadic_block(psi_block(f, mu, prof), nu, prof);
        CHECK(max_abs(z) <= 1e-14 * std::max(1.0, max_abs(f)));
    }
}

TEST_CASE("dyadic Sobolev norm: single modes and equivalence band") {
    PeriodicGrid g(512);
    auto prof = build_profile(g);

    // single mode exactly at 2^nu
    const int nu = 4;
    const double xi = std::ldexp(1.0, nu);
    auto mode = sample(g, [&](double x) { return std::exp(cd(0.0, xi * x)); });
    auto set = build_blocks(mode, prof);
    for (double s : {-0.5, 0.25, 1.0})
        CHECK(sobolev_norm_dyadic(set, s) ==
              Catch::Approx(std::pow(2.0, nu * s) * l2_norm(mode)).epsilon(1e-12));

    // s = 0: within [1/sqrt3, sqrt3] of the L2 norm (multiplier sum in [1/2,1])
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        auto f = random_band_limited(g, 120, seed);
        const double r = sobolev_norm_dyadic(f, 0.0, prof) / l2_norm(f);
        CHECK(r >= 1.0 / std::sqrt(3.0));
        CHECK(r <= std::sqrt(3.0));
    }
}

TEST_CASE("norm equivalence band measured by single-frequency scan") {
    PeriodicGrid g(512);
    auto prof = build_profile(g);
    for (double s : {-0.5, -0.25, 0.0, 0.5, 1.0}) {
        // independent oracle: scan the multiplier ratio over a fine xi grid
        double lo = 1e300, hi = 0.0;
        for (double xi = 0.0; xi <= 256.0; xi += 0.01) {
            double acc = 0.0;
            for (int nu = 0; nu <= prof.nu_max + 2; ++nu)
                acc += std::pow(2.0, 2.0 * nu * s) * prof.phi_nu(nu, xi) * prof.phi_nu(nu, xi);
            const double r = acc / std::pow(1.0 + xi * xi, s);
            lo = std::min(lo, r);
            hi = std::max(hi, r);
        }
        const double Cs = std::max(std::sqrt(hi), 1.0 / std::sqrt(lo));
        // every random input must satisfy the scanned band
        for (std::uint64_t seed = 100; seed < 200; ++seed) {
            auto f = random_band_limited(g, 250, seed);
            const double ratio = sobolev_norm_dyadic(f, s, prof) / sobolev_norm_fourier(f, s);
            CHECK(ratio <= Cs * (1 + 1e-9));
            CHECK(ratio >= 1.0 / Cs * (1 - 1e-9));
        }
    }
}

TEST_CASE("Bernstein inequalities on shells") {
    PeriodicGrid g(512);
    auto prof = build_profile(g);

    // pure mode at xi = 2^nu: both ratios are exactly 1/2
    const int nu = 5;
    auto mode = sample(g, [&](double x) { return std::exp(cd(0.0, std::ldexp(1.0, nu) * x)); });
    auto rep = verify_bernstein(build_blocks(mode, prof));
    CHECK(rep.rows[static_cast<std::size_t>(nu)].r1 == Catch::Approx(0.5).epsilon(1e-12));
    CHECK(rep.rows[static_cast<std::size_t>(nu)].r2 == Catch::Approx(0.5).epsilon(1e-12));

    // mode close to the top of shell nu: r1 approaches 1 from below
    const double xi_hi = std::ldexp(1.0, nu + 1) - 2.0;
    auto hi = sample(g, [&](double x) { return std::exp(cd(0.0, xi_hi * x)); });
    auto rep_hi = verify_bernstein(build_blocks(hi, prof));
    CHECK_FALSE(rep_hi.rows[static_cast<std::size_t>(nu)].skipped);
    CHECK(rep_hi.rows[static_cast<std::size_t>(nu)].r1 > 0.9);
    CHECK(rep_hi.rows[static_cast<std::size_t>(nu)].r1 <= 1.0);

    // 200 random inputs: every ratio at most 1
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        auto f = random_band_limited(g, 250, 1000 + seed);
        auto r = verify_bernstein(build_blocks(f, prof));
        CHECK(r.all_pass);
    }
}

TEST_CASE("almost orthogonality of distant blocks") {
    PeriodicGrid g(256);
    auto prof = build_profile(g);
    auto f = random_band_limited(g, 60, 3);
    for (auto [nu, mu] : {std::pair{4, 2}, std::pair{1, 3}, std::pair{5, 0}}) {
        auto z = dyadic_block(dyadic_block(f, mu, prof), nu, prof);
        CHECK(max_abs(z) <= 1e-14 * std::max(1.0, max_abs(f)));
    }
}
