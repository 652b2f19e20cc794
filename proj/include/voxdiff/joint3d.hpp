#pragma once

#include <array>
#include <string>
#include <vector>

#include "voxdiff/diffusion.hpp"

namespace voxdiff {

enum class SampleMode { xyz_all, xyz_last, two_d_only };

// lambdas are the merge weights for the axial, coronal and sagittal results,
// in that order. axis_order repeats cyclically over the reverse steps.
struct JointConfig {
    SampleMode mode = SampleMode::xyz_all;
    std::array<double, 3> lambdas = {1.0, 1.0, 1.0};
    std::vector<Axis> axis_order = {Axis::axial, Axis::coronal, Axis::sagittal};
    Axis two_d_axis = Axis::axial;

    void validate() const;
};

// Work accounting: one denoiser call per slice per reverse step, plus the
// ordered record of which axis each sweep ran along.
struct SamplerStats {
    std::uint64_t denoiser_calls = 0;
    std::uint64_t slice_sweeps = 0;
    std::vector<Axis> axes;
};

// Reusable denoiser bundle: the axial plane uses the in-plane model, coronal
// and sagittal share the through-plane model. A plane-agnostic denoiser may
// be used everywhere.
struct DenoiserSet {
    const DenoiserInterface* in_plane = nullptr;
    const DenoiserInterface* through_plane = nullptr;

    const DenoiserInterface& for_axis(Axis axis) const;
};

// Sampler mode names as user interfaces accept them: xyz-all, xyz-last,
// 2d-axial, 2d-coronal and 2d-sagittal, case-insensitive, with an optional
// ddpm- prefix. canonical is the lower-case unprefixed spelling.
struct ModeName {
    SampleMode mode;
    Axis axis;
    std::string canonical;
};

ModeName parse_mode_name(std::string name);

Volume merge_weighted(const Volume& v_axial, const Volume& v_coronal, const Volume& v_sagittal,
                      const std::array<double, 3>& lambdas);

// One reverse step applied slice-wise along an axis. The noise volume is a
// standard-normal field shared by every slice, keyed by voxel so that the
// same field serves any slicing axis.
Volume reverse_step_axis(const DiffusionProcess& process, const Volume& vol_t, Axis axis,
                         const DenoiserInterface& denoiser, const Volume& x_vol, int t,
                         const Volume& noise, SamplerStats* stats = nullptr);

Volume sample_xyz_all(const DiffusionProcess& process, const Volume& x_vol,
                      const DenoiserSet& denoisers, const RngStream& rng, const JointConfig& cfg,
                      SamplerStats* stats = nullptr);

Volume sample_xyz_last(const DiffusionProcess& process, const Volume& x_vol,
                       const DenoiserSet& denoisers, const RngStream& rng, const JointConfig& cfg,
                       SamplerStats* stats = nullptr);

Volume sample_2d_only(const DiffusionProcess& process, const Volume& x_vol, Axis axis,
                      const DenoiserInterface& denoiser, const RngStream& rng,
                      SamplerStats* stats = nullptr);

// Dispatch on cfg.mode.
Volume sample_joint(const DiffusionProcess& process, const Volume& x_vol,
                    const DenoiserSet& denoisers, const RngStream& rng, const JointConfig& cfg,
                    SamplerStats* stats = nullptr);

}  // namespace voxdiff
