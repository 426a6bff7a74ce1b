#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>

#include "lzwave/grid.hpp"

using namespace lzwave;

TEST_CASE("grid construction validates shape") {
    CHECK_NOTHROW(PeriodicGrid(8));
    CHECK_THROWS_AS(PeriodicGrid(7), std::invalid_argument);
    CHECK_THROWS_AS(PeriodicGrid(48), std::invalid_argument);
    CHECK_THROWS_AS(PeriodicGrid(4), std::invalid_argument);
    PeriodicGrid g(64, kTwoPi);
    CHECK(g.spacing() == Catch::Approx(kTwoPi / 64));
    CHECK(g.wavenumber(0) == 0);
    CHECK(g.wavenumber(32) == 32);   // Nyquist is +n/2
    CHECK(g.wavenumber(33) == -31);
    CHECK(g.wavenumber(63) == -1);
}

TEST_CASE("fourier_forward of constants and pure modes") {
    PeriodicGrid g(64);
    auto ones = sample_real(g, [](double) { return 1.0; });
    auto s = fourier_forward(ones);
    CHECK(std::abs(s[0] - cd(1.0, 0.0)) < 1e-14);
    for (std::size_t k = 1; k < g.n; ++k) CHECK(std::abs(s[k]) < 1e-14);

    const double xi3 = g.frequency(3);
    auto mode = sample(g, [&](double x) { return std::exp(cd(0.0, xi3 * x)); });
    auto sm = fourier_forward(mode);
    CHECK(std::abs(sm[3] - cd(1.0, 0.0)) < 1e-13);
    for (std::size_t k = 0; k < g.n; ++k)
        if (k != 3) CHECK(std::abs(sm[k]) < 1e-13);
}

TEST_CASE("fourier round trip on random data") {
    PeriodicGrid g(256);
    auto f = random_band_limited(g, 100, 42);
    auto back = fourier_inverse(g, fourier_forward(f));
    double worst = 0.0;
    for (std::size_t j = 0; j < g.n; ++j) worst = std::max(worst, std::abs(back.v[j] - f.v[j]));
    CHECK(worst / max_abs(f) < 1e-12);
}

TEST_CASE("spectral derivative on closed forms") {
    PeriodicGrid g(128);
    auto f = sample_real(g, [](double x) { return std::sin(x); });
    auto d = spectral_derivative(f);
    double worst = 0.0;
    for (std::size_t j = 0; j < g.n; ++j)
        worst = std::max(worst, std::abs(d.v[j] - cd(std::cos(g.point(j)), 0.0)));
    CHECK(worst < 1e-12);

    auto c = sample_real(g, [](double) { return 3.5; });
    CHECK(max_abs(spectral_derivative(c)) < 1e-13);

    const double xi5 = g.frequency(5);
    auto m = sample(g, [&](double x) { return std::exp(cd(0.0, xi5 * x)); });
    auto dm = spectral_derivative(m);
    CHECK(l2_norm(dm) == Catch::Approx(xi5 * l2_norm(m)).epsilon(1e-12));
}

TEST_CASE("l2 norm matches closed forms on the 2pi torus") {
    PeriodicGrid g(128, kTwoPi);
    const double xi4 = g.frequency(4);
    auto mode = sample(g, [&](double x) { return std::exp(cd(0.0, xi4 * x)); });
    CHECK(l2_norm(mode) == Catch::Approx(std::sqrt(kTwoPi)).epsilon(1e-12));

    auto zero = GridFunction(g);
    CHECK(l2_norm(zero) == 0.0);

    auto s = sample_real(g, [](double x) { return std::sin(x); });
    CHECK(l2_norm(s) == Catch::Approx(std::sqrt(kTwoPi / 2)).epsilon(1e-12));
}

TEST_CASE("sobolev_norm_fourier basics") {
    PeriodicGrid g(128);
    auto f = random_band_limited(g, 40, 7);
    CHECK(sobolev_norm_fourier(f, 0.0) == Catch::Approx(l2_norm(f)).epsilon(1e-12));

    const double xi8 = g.frequency(8);
    auto mode = sample(g, [&](double x) { return std::exp(cd(0.0, xi8 * x)); });
    for (double s : {-0.7, 0.5, 1.3})
        CHECK(sobolev_norm_fourier(mode, s) ==
              Catch::Approx(std::pow(1.0 + xi8 * xi8, s / 2) * std::sqrt(kTwoPi)).epsilon(1e-12));

    // two modes: Parseval orthogonality
    const double xi3 = g.frequency(3);
    auto two = sample(g, [&](double x) { return std::exp(cd(0.0, xi3 * x)) + std::exp(cd(0.0, xi8 * x)); });
    const double n3 = sobolev_norm_fourier(sample(g, [&](double x) { return std::exp(cd(0.0, xi3 * x)); }), 0.75);
    const double n8 = sobolev_norm_fourier(mode, 0.75);
    CHECK(sobolev_norm_fourier(two, 0.75) == Catch::Approx(std::sqrt(n3 * n3 + n8 * n8)).epsilon(1e-12));
}

TEST_CASE("Parseval identity on random data") {
    PeriodicGrid g(512);
    auto f = random_band_limited(g, 200, 9);
    auto s = fourier_forward(f);
    double spec = 0.0;
    for (const auto& c : s) spec += std::norm(c);
    const double l2 = l2_norm(f);
    CHECK(g.length * spec == Catch::Approx(l2 * l2).epsilon(1e-10));
}

TEST_CASE("sobolev norm monotone in s") {
    PeriodicGrid g(256);
    auto f = random_band_limited(g, 100, 11);
    double prev = sobolev_norm_fourier(f, -1.0);
    for (double s : {-0.5, 0.0, 0.5, 1.0, 2.0}) {
        const double cur = sobolev_norm_fourier(f, s);
        CHECK(cur >= prev * (1.0 - 1e-12));
        prev = cur;
    }
}

TEST_CASE("physical-space finite differences agree with spectral derivative") {
    PeriodicGrid g(128);
    auto f = sample_real(g, [](double x) { return std::exp(std::sin(x)); });
    auto d = spectral_derivative(f);
    const double h = g.spacing();
    double worst = 0.0;
    for (std::size_t j = 0; j < g.n; ++j) {
        const auto fm2 = f.v[(j + g.n - 2) % g.n], fm1 = f.v[(j + g.n - 1) % g.n];
        const auto fp1 = f.v[(j + 1) % g.n], fp2 = f.v[(j + 2) % g.n];
        const cd fd4 = (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h);
        worst = std::max(worst, std::abs(fd4 - d.v[j]));
    }
    CHECK(worst < 50.0 * h * h * h * h);
}
