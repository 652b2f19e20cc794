#pragma once

#include "voxdiff/volume.hpp"

namespace voxdiff {

// Which slice orientation a model was trained for. Axial slices are in-plane;
// coronal and sagittal share one through-plane model. `any` marks
// plane-agnostic predictors such as the analytic oracle.
enum class PlaneKind { in_plane, through_plane, any };

const char* to_string(PlaneKind plane);

// Noise predictor: given the conditioning image and a noisy image at level
// gamma, return the estimate of the standard-normal noise that produced it.
class DenoiserInterface {
public:
    virtual ~DenoiserInterface() = default;
    virtual Slice2D predict(const Slice2D& x_cond, const Slice2D& y_t, double gamma) const = 0;
    virtual PlaneKind plane() const = 0;
};

// Closed-form Bayes noise estimate under a scalar prior y0 ~ N(m, s^2) per
// voxel: the posterior mean E[y0 | y_t] is exact, and the implied noise
// estimate is read off the forward relation. The conditioning image is
// ignored. This predictor is exactly linear in y_t, which makes sampler
// behaviour analytically checkable.
Slice2D analytic_predict(double m, double s, const Slice2D& y_t, double gamma);

class AnalyticGaussianDenoiser : public DenoiserInterface {
public:
    AnalyticGaussianDenoiser(double mean, double stddev);

    Slice2D predict(const Slice2D& x_cond, const Slice2D& y_t, double gamma) const override;
    PlaneKind plane() const override { return PlaneKind::any; }

    double mean() const noexcept { return mean_; }
    double stddev() const noexcept { return stddev_; }

private:
    double mean_;
    double stddev_;
};

}  // namespace voxdiff
