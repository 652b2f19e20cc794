#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "voxdiff/schedule.hpp"
#include "voxdiff/volume.hpp"

namespace voxdiff {

struct FileRef {
    std::string path;
    std::uint32_t crc32 = 0;
};

struct CheckpointRef {
    std::string role;
    std::string path;
    std::uint32_t params_crc32 = 0;
};

// Record of one CLI run: the command, its seed, the fully resolved parameter
// set, and the identity (path + checksum) of every file consumed or produced.
// That is enough to reproduce the run bit-exactly. elapsed_seconds is
// informational and the one field to ignore when comparing manifests of
// repeated runs.
struct RunManifest {
    std::string command;
    std::string mode;
    bool has_seed = false;
    std::uint64_t seed = 0;
    int threads = 1;
    nlohmann::json parameters = nlohmann::json::object();
    bool has_schedule = false;
    ScheduleSpec schedule;
    bool has_joint = false;
    std::array<double, 3> lambdas{1.0, 1.0, 1.0};
    std::vector<Axis> axis_order;
    std::vector<CheckpointRef> checkpoints;
    std::vector<FileRef> inputs;
    std::vector<FileRef> outputs;
    bool has_work = false;
    std::uint64_t denoiser_calls = 0;
    std::uint64_t slice_sweeps = 0;
    double elapsed_seconds = 0.0;
};

nlohmann::json manifest_to_json(const RunManifest& m);
void write_run_manifest(const RunManifest& m, const std::string& path);

}  // namespace voxdiff
