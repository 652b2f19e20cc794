#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "voxdiff/conv_denoiser.hpp"
#include "voxdiff/io.hpp"
#include "voxdiff/schedule.hpp"

namespace voxdiff {

// Everything needed to run a trained denoiser: the rebuilt network, the
// schedule it was trained against, and the intensity window its training
// volumes were normalized from.
struct Checkpoint {
    ConvDenoiser net;
    ScheduleSpec schedule;
    std::array<double, 2> window{-1.0, 1.0};
};

// Single-file binary format: "VDCP" magic, a format version and header length
// (both little-endian uint32), a JSON header (layer spec, plane, schedule,
// window, parameter count and checksum, provenance), then the parameters as
// little-endian float64 in layer order. Returns the parameter checksum.
std::uint32_t write_checkpoint(const ConvDenoiser& net, const ScheduleSpec& schedule,
                               const std::array<double, 2>& window, const std::string& path,
                               const Provenance& prov = {});
Checkpoint read_checkpoint(const std::string& path);

}  // namespace voxdiff
