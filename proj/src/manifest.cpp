#include "voxdiff/manifest.hpp"

#include "voxdiff/io.hpp"

namespace voxdiff {

using nlohmann::json;

json manifest_to_json(const RunManifest& m) {
    require(!m.command.empty(), ErrorCategory::invalid_argument,
            "run manifest needs a command name");
    json out;
    out["format"] = "voxdiff-run-manifest";
    out["version"] = 1;
    out["command"] = m.command;
    if (!m.mode.empty()) out["mode"] = m.mode;
    if (m.has_seed) out["seed"] = m.seed;
    out["threads"] = m.threads;
    out["parameters"] = m.parameters;
    if (m.has_schedule)
        out["schedule"] = {{"kind", m.schedule.kind},
                           {"T", m.schedule.T},
                           {"beta_start", m.schedule.beta_start},
                           {"beta_end", m.schedule.beta_end}};
    if (m.has_joint) {
        out["lambdas"] = m.lambdas;
        json order = json::array();
        for (Axis a : m.axis_order) order.push_back(to_string(a));
        out["axis_order"] = order;
    }
    if (!m.checkpoints.empty()) {
        json list = json::array();
        for (const CheckpointRef& c : m.checkpoints)
            list.push_back({{"role", c.role}, {"path", c.path}, {"params_crc32", c.params_crc32}});
        out["checkpoints"] = list;
    }
    const auto file_list = [](const std::vector<FileRef>& refs) {
        json list = json::array();
        for (const FileRef& f : refs) list.push_back({{"path", f.path}, {"crc32", f.crc32}});
        return list;
    };
    out["inputs"] = file_list(m.inputs);
    out["outputs"] = file_list(m.outputs);
    if (m.has_work)
        out["work"] = {{"denoiser_calls", m.denoiser_calls}, {"slice_sweeps", m.slice_sweeps}};
    out["timing"] = {{"elapsed_seconds", m.elapsed_seconds}, {"informational", true}};
    return out;
}

void write_run_manifest(const RunManifest& m, const std::string& path) {
    write_file_atomic(path, manifest_to_json(m).dump(2) + "\n");
}

}  // namespace voxdiff
