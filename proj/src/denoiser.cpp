#include "voxdiff/denoiser.hpp"

#include <cmath>

namespace voxdiff {

const char* to_string(PlaneKind plane) {
    switch (plane) {
        case PlaneKind::in_plane: return "in-plane";
        case PlaneKind::through_plane: return "through-plane";
        default: return "any";
    }
}

Slice2D analytic_predict(double m, double s, const Slice2D& y_t, double gamma) {
    require(gamma > 0.0 && gamma < 1.0, ErrorCategory::invalid_argument,
            "analytic_predict needs gamma strictly inside (0, 1)");
    require(s >= 0.0, ErrorCategory::invalid_argument, "prior stddev must be nonnegative");
    const double s2 = s * s;
    const double sqrt_g = std::sqrt(gamma);
    const double sqrt_1mg = std::sqrt(1.0 - gamma);
    const double den = gamma * s2 + (1.0 - gamma);
    Slice2D eps = y_t;
    for (double& v : eps.data) {
        const double post_mean = (sqrt_g * s2 * v + (1.0 - gamma) * m) / den;
        v = (v - sqrt_g * post_mean) / sqrt_1mg;
    }
    return eps;
}

AnalyticGaussianDenoiser::AnalyticGaussianDenoiser(double mean, double stddev)
    : mean_(mean), stddev_(stddev) {
    require(stddev >= 0.0, ErrorCategory::invalid_argument, "prior stddev must be nonnegative");
}

Slice2D AnalyticGaussianDenoiser::predict(const Slice2D& x_cond, const Slice2D& y_t,
                                          double gamma) const {
    require(x_cond.w == y_t.w && x_cond.h == y_t.h, ErrorCategory::shape_mismatch,
            "condition and noisy slice dims differ");
    return analytic_predict(mean_, stddev_, y_t, gamma);
}

}  // namespace voxdiff
