#pragma once

#include <string>
#include <vector>

#include "voxdiff/denoiser.hpp"
#include "voxdiff/simulate.hpp"
#include "voxdiff/volume.hpp"

namespace voxdiff {

struct MtfPoint {
    double frequency = 0.0;   // cycles/voxel
    double modulation = 0.0;  // contrast relative to the reference phantom
};

struct MtfCurve {
    std::string method;
    PlaneKind plane = PlaneKind::in_plane;
    std::vector<MtfPoint> points;

    void validate() const;
};

// Fundamental Fourier amplitude of the ROI's line profile: voxels are averaged
// across the transverse directions, then the DFT bin nearest `frequency` is
// read off. Insensitive to constant offsets (DC sits in bin 0).
double fundamental_amplitude(const Volume& vol, const Roi& roi, double frequency, Dim axis);

// Amplitude of vol over the amplitude of the un-degraded reference in the same
// ROI. Reading only the fundamental bin makes square-wave harmonics and the
// square-vs-sine contrast factor cancel in the ratio.
double measure_modulation(const Volume& vol, const Volume& reference, const Roi& roi,
                          double frequency, Dim axis);

// One modulation per manifest entry, sorted by frequency.
MtfCurve mtf_curve(const Volume& vol, const Volume& reference, const std::vector<BarRoi>& rois,
                   Dim orientation, const std::string& method, PlaneKind plane);

struct FidelityMetrics {
    double rmse = 0.0;
    double psnr = 0.0;  // over the [-1, 1] range (span 2); +inf when rmse is 0
};

FidelityMetrics fidelity_metrics(const Volume& a, const Volume& b);

// Writes one CSV per curve plus a merged table (header
// `frequency,<method1>,<method2>,...`) under out_dir. All curves must share
// one frequency grid and have distinct method labels. Returns the written
// paths, merged table last.
std::vector<std::string> compare_report(const std::vector<MtfCurve>& curves,
                                        const std::string& out_dir);

}  // namespace voxdiff
