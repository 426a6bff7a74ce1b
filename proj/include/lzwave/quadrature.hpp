#ifndef LZWAVE_QUADRATURE_HPP
#define LZWAVE_QUADRATURE_HPP

#include <cmath>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace lzwave {

// Gauss-Legendre nodes/weights on [-1,1], Newton iteration on P_n.
struct GaussLegendre {
    std::vector<double> x, w;

    explicit GaussLegendre(int n) {
        if (n < 1) throw std::invalid_argument("GaussLegendre: need n >= 1");
        x.resize(static_cast<std::size_t>(n));
        w.resize(static_cast<std::size_t>(n));
        const double pi = 3.14159265358979323846264338328;
        for (int i = 0; i < (n + 1) / 2; ++i) {
            double z = std::cos(pi * (i + 0.75) / (n + 0.5));
            double pp = 0.0;
            for (int it = 0; it < 64; ++it) {
                double p0 = 1.0, p1 = 0.0;
                for (int j = 0; j < n; ++j) {
                    const double p2 = p1;
                    p1 = p0;
                    p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
                }
                pp = n * (z * p0 - p1) / (z * z - 1.0);
                const double dz = p0 / pp;
                z -= dz;
                if (std::abs(dz) < 1e-15) break;
            }
            x[static_cast<std::size_t>(i)] = -z;
            x[static_cast<std::size_t>(n - 1 - i)] = z;
            const double wi = 2.0 / ((1.0 - z * z) * pp * pp);
            w[static_cast<std::size_t>(i)] = wi;
            w[static_cast<std::size_t>(n - 1 - i)] = wi;
        }
    }
};

inline const GaussLegendre& gauss_legendre(int n) {
    thread_local std::unordered_map<int, GaussLegendre> cache;
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, GaussLegendre(n)).first;
    return it->second;
}

} // namespace lzwave

#endif
