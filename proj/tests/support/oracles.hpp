#pragma once

// Independent numerical oracles used to verify closed-form library results.

#include <cmath>
#include <utility>

namespace testoracle {

// Moments of the middle variable of the two-step Gaussian chain
//   u | y0   ~ N(sqrt(g_prev) y0, 1 - g_prev)
//   y | u    ~ N(sqrt(alpha) u,  1 - alpha)
// conditioned on both ends, computed by trapezoid quadrature over u. The grid
// spans every component mean with wide margins so the mass is covered no
// matter where the posterior sits.
struct QuadratureMoments {
    double mean;
    double var;
};

inline QuadratureMoments posterior_by_quadrature(double y0, double y, double alpha,
                                                 double g_prev, int n = 160001) {
    const double m1 = std::sqrt(g_prev) * y0;
    const double s1 = std::sqrt(1.0 - g_prev);
    const double m2 = y / std::sqrt(alpha);
    const double s2 = std::sqrt(1.0 - alpha) / std::sqrt(alpha);
    const double lo = std::min(m1 - 12.0 * s1, m2 - 12.0 * (s2 + 1e-6));
    const double hi = std::max(m1 + 12.0 * s1, m2 + 12.0 * (s2 + 1e-6));
    const double du = (hi - lo) / (n - 1);

    double z = 0.0, zm = 0.0, zm2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double u = lo + du * i;
        const double r1 = (u - m1) / s1;
        const double r2 = (y - std::sqrt(alpha) * u) / std::sqrt(1.0 - alpha);
        double w = std::exp(-0.5 * (r1 * r1 + r2 * r2));
        if (i == 0 || i == n - 1) w *= 0.5;
        z += w;
        zm += w * u;
        zm2 += w * u * u;
    }
    const double mean = zm / z;
    return {mean, zm2 / z - mean * mean};
}

}  // namespace testoracle
