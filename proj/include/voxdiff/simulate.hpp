#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "voxdiff/volume.hpp"

namespace voxdiff {

// Image-domain stand-in for the scan geometry gap between the two detector
// configurations: pixel pitch ratios become per-axis Gaussian blur, detector
// charge sharing becomes a 3x3 in-plane crosstalk kernel, and photon
// statistics become Poisson noise through a log-attenuation counts map
// c = photons * exp(-attenuation * v).
struct DegradeConfig {
    std::array<double, 3> sigma{2.0 / 3.0, 2.0 / 3.0, 6.0 / 17.0};
    std::array<double, 9> crosstalk{0.01, 0.04, 0.01, 0.04, 0.80, 0.04, 0.01, 0.04, 0.01};
    double photons = 1e4;
    double attenuation = 2.0;
    bool noise_enabled = true;

    void validate() const;
};

// Blur width from the pixel pitch ratio between the simulated systems:
// sigma_axis = k * (pitch_lr / pitch_hr - 1) voxels. The defaults encode the
// 0.75x in-plane and 0.85x through-plane pitch reduction with k = 2.
DegradeConfig degrade_from_pitch(double in_plane_ratio = 1.0 / 0.75,
                                 double through_plane_ratio = 1.0 / 0.85, double k = 2.0);

const std::array<double, 9>& identity_crosstalk();

// Square-wave bar groups, one per frequency, stacked side by side. Bars
// alternate along `orientation`; on-bars read background + amplitude.
// When `rois` is empty a layout is computed: each group's region, inset from
// the group boundary and trimmed to a whole number of periods.
struct BarPhantomSpec {
    std::vector<double> frequencies;
    Dim orientation = Dim::x;
    double amplitude = 1.0;
    double background = -0.5;
    std::vector<Roi> rois;

    void validate(const std::array<int, 3>& dims) const;
};

struct BarRoi {
    double frequency = 0.0;
    Roi roi;
};

struct BarPhantom {
    Volume volume;
    Dim orientation = Dim::x;
    std::vector<BarRoi> rois;
};

BarPhantom gen_bar_phantom(const BarPhantomSpec& spec, int nx, int ny, int nz);

// The ROI layout gen_bar_phantom attaches to its output, computed from the
// spec and dims alone so measurement code can reconstruct it without the
// phantom volume at hand.
std::vector<BarRoi> bar_phantom_layout(const BarPhantomSpec& spec, int nx, int ny, int nz);

// Smooth random ellipsoid blobs plus a few sharp-edged spherical inserts,
// rescaled to fill [-1, 1]. A stand-in for reconstructed head scans as
// training material: smooth gradients with occasional hard boundaries.
struct AnatomyParams {
    int blobs = 12;
    int inserts = 3;
    double blob_min_radius = 5.0;
    double blob_max_radius = 18.0;
    double insert_min_radius = 2.0;
    double insert_max_radius = 5.0;

    void validate() const;
};

Volume gen_anatomy_like(int nx, int ny, int nz, const RngStream& rng,
                        const AnatomyParams& params = {});

// Periodic separable Gaussian blur whose transfer function equals
// exp(-2 pi^2 sigma^2 f^2) exactly at every DFT frequency: the 1D kernels are
// inverse DFTs of that modulation, so frequency-domain claims about the
// degradation hold to roundoff rather than to a sampling approximation.
// sigma = 0 along an axis is an exact no-op.
Volume gaussian_blur_periodic(const Volume& vol, const std::array<double, 3>& sigma);

// 3x3 periodic convolution applied to every axial slice. The identity kernel
// is an exact no-op.
Volume crosstalk_2d(const Volume& vol, const std::array<double, 9>& kernel);

// blur -> crosstalk -> Poisson resampling of the counts map. The noise draw
// sequence comes from rng.child(stream_tag::noise), so generation and
// degradation may share one per-volume stream.
Volume degrade(const Volume& hr, const DegradeConfig& cfg, const RngStream& rng);

struct DatasetPair {
    int index = 0;
    std::string hr_path;
    std::string lr_path;
    std::uint32_t hr_crc32 = 0;
    std::uint32_t lr_crc32 = 0;
};

// Generates n paired volumes under out_dir (hr_NNN.f32 / lr_NNN.f32 plus
// sidecars) and writes manifest.json describing the set. Pair i is produced
// from RngStream(seed).child(volume).child(i), so regeneration with one seed
// is byte-identical and volumes are independent of each other.
std::vector<DatasetPair> make_dataset(int n_volumes, int nx, int ny, int nz,
                                      const DegradeConfig& cfg, std::uint64_t seed,
                                      const std::string& out_dir,
                                      const AnatomyParams& params = {});

}  // namespace voxdiff
