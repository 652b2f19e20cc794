#include "voxdiff/checkpoint.hpp"

#include <cmath>
#include <cstring>

#include <json.hpp>

static_assert(__BYTE_ORDER__ == __ORDER_LITTLE_ENDIAN__,
              "checkpoint payloads are little-endian; byte swapping is not implemented");

namespace voxdiff {

namespace {

using nlohmann::json;

constexpr char kMagic[4] = {'V', 'D', 'C', 'P'};
constexpr std::uint32_t kVersion = 1;

std::string plane_name(PlaneKind plane) {
    switch (plane) {
        case PlaneKind::in_plane: return "in-plane";
        case PlaneKind::through_plane: return "through-plane";
        default: return "any";
    }
}

PlaneKind plane_from_name(const std::string& name) {
    if (name == "in-plane") return PlaneKind::in_plane;
    if (name == "through-plane") return PlaneKind::through_plane;
    if (name == "any") return PlaneKind::any;
    raise(ErrorCategory::io, "unknown plane kind '" + name + "' in checkpoint header");
}

void append_u32(std::string& buf, std::uint32_t v) {
    char raw[4];
    std::memcpy(raw, &v, 4);
    buf.append(raw, 4);
}

std::uint32_t take_u32(const std::string& buf, std::size_t off) {
    std::uint32_t v;
    std::memcpy(&v, buf.data() + off, 4);
    return v;
}

}  // namespace

std::uint32_t write_checkpoint(const ConvDenoiser& net, const ScheduleSpec& schedule,
                               const std::array<double, 2>& window, const std::string& path,
                               const Provenance& prov) {
    require(window[0] < window[1], ErrorCategory::invalid_argument,
            "normalization window must have lo < hi");
    build_schedule(schedule);
    for (double p : net.params())
        require(std::isfinite(p), ErrorCategory::numeric,
                "refusing to write checkpoint with non-finite parameters");

    const std::vector<double>& params = net.params();
    const std::size_t n_bytes = params.size() * sizeof(double);
    const std::uint32_t checksum = crc32(params.data(), n_bytes);

    json header;
    header["format"] = "voxdiff-checkpoint";
    header["version"] = kVersion;
    header["net"] = {{"depth", net.spec().depth},
                     {"hidden", net.spec().hidden},
                     {"kernel", net.spec().kernel},
                     {"plane", plane_name(net.plane())}};
    header["schedule"] = {{"kind", schedule.kind},
                          {"T", schedule.T},
                          {"beta_start", schedule.beta_start},
                          {"beta_end", schedule.beta_end}};
    header["window"] = window;
    header["param_count"] = params.size();
    header["params_crc32"] = checksum;
    header["creator"] = prov.creator;
    if (prov.has_seed) header["seed"] = prov.seed;
    const std::string head = header.dump();

    std::string blob;
    blob.reserve(12 + head.size() + n_bytes);
    blob.append(kMagic, 4);
    append_u32(blob, kVersion);
    append_u32(blob, static_cast<std::uint32_t>(head.size()));
    blob += head;
    blob.append(reinterpret_cast<const char*>(params.data()), n_bytes);
    write_file_atomic(path, blob);
    return checksum;
}

Checkpoint read_checkpoint(const std::string& path) {
    const std::string blob = read_file(path);
    require(blob.size() >= 12 && std::memcmp(blob.data(), kMagic, 4) == 0, ErrorCategory::io,
            path + ": not a checkpoint file");
    const std::uint32_t version = take_u32(blob, 4);
    require(version == kVersion, ErrorCategory::io,
            path + ": unsupported checkpoint version " + std::to_string(version));
    const std::size_t head_len = take_u32(blob, 8);
    require(blob.size() >= 12 + head_len, ErrorCategory::io, path + ": truncated header");

    ConvSpec spec;
    PlaneKind plane = PlaneKind::any;
    ScheduleSpec sched;
    std::array<double, 2> window{};
    std::size_t count = 0;
    std::uint32_t want_crc = 0;
    try {
        const json header = json::parse(blob.substr(12, head_len));
        require(header.at("format") == "voxdiff-checkpoint", ErrorCategory::io,
                path + ": not a checkpoint file");
        const json& net = header.at("net");
        spec.depth = net.at("depth").get<int>();
        spec.hidden = net.at("hidden").get<int>();
        spec.kernel = net.at("kernel").get<int>();
        plane = plane_from_name(net.at("plane").get<std::string>());
        const json& s = header.at("schedule");
        sched.kind = s.at("kind").get<std::string>();
        sched.T = s.at("T").get<int>();
        sched.beta_start = s.at("beta_start").get<double>();
        sched.beta_end = s.at("beta_end").get<double>();
        window = header.at("window").get<std::array<double, 2>>();
        count = header.at("param_count").get<std::size_t>();
        want_crc = header.at("params_crc32").get<std::uint32_t>();
    } catch (const json::exception& e) {
        raise(ErrorCategory::io, path + ": malformed checkpoint header: " + e.what());
    }
    require(window[0] < window[1], ErrorCategory::io,
            path + ": normalization window must have lo < hi");

    const std::size_t n_bytes = blob.size() - 12 - head_len;
    require(n_bytes == count * sizeof(double), ErrorCategory::io,
            path + ": parameter payload is " + std::to_string(n_bytes) + " bytes, expected " +
                std::to_string(count * sizeof(double)));
    require(crc32(blob.data() + 12 + head_len, n_bytes) == want_crc, ErrorCategory::io,
            path + ": parameter checksum mismatch");

    try {
        Checkpoint ckpt{ConvDenoiser(spec, plane), sched, window};
        build_schedule(ckpt.schedule);
        require(ckpt.net.param_count() == count, ErrorCategory::io,
                path + ": parameter count does not match the layer spec");
        std::memcpy(ckpt.net.params().data(), blob.data() + 12 + head_len, n_bytes);
        for (double p : ckpt.net.params())
            require(std::isfinite(p), ErrorCategory::io, path + ": non-finite parameter");
        return ckpt;
    } catch (const Error& e) {
        if (e.category() == ErrorCategory::config)
            raise(ErrorCategory::io, path + ": invalid checkpoint contents: " + e.what());
        throw;
    }
}

}  // namespace voxdiff
