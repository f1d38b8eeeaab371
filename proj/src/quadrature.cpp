#include "rabiq/quadrature.hpp"

#include "rabiq/errors.hpp"

#include <cmath>
#include <numbers>

namespace rabiq {

QuadratureRule gauss_legendre(std::size_t n, double a, double b) {
    if (n == 0) {
        throw InvalidArgument("Gauss-Legendre rule needs at least one node");
    }
    QuadratureRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);

    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const std::size_t m = (n + 1) / 2;
    const auto nd = static_cast<double>(n);

    for (std::size_t i = 0; i < m; ++i) {
        // Newton iteration on P_n from the Tricomi initial guess.
        double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (nd + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p1 = 1.0;
            double p2 = 0.0;
            for (std::size_t j = 1; j <= n; ++j) {
                const double p3 = p2;
                p2 = p1;
                const auto jd = static_cast<double>(j);
                p1 = ((2.0 * jd - 1.0) * z * p2 - (jd - 1.0) * p3) / jd;
            }
            dp = nd * (z * p1 - p2) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) <= 1e-16) {
                break;
            }
        }
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);
        rule.nodes[i] = mid - half * z;
        rule.nodes[n - 1 - i] = mid + half * z;
        rule.weights[i] = half * w;
        rule.weights[n - 1 - i] = half * w;
    }
    if (n % 2 == 1) {
        rule.nodes[n / 2] = mid;
    }
    return rule;
}

}  // namespace rabiq
