#include "voxdiff/io.hpp"

#include <array>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <vector>

#include <json.hpp>

static_assert(__BYTE_ORDER__ == __ORDER_LITTLE_ENDIAN__,
              "volume payloads are little-endian; byte swapping is not implemented");

namespace voxdiff {

namespace fs = std::filesystem;
using nlohmann::json;

std::uint32_t crc32(const void* data, std::size_t len, std::uint32_t seed) {
    static const auto table = [] {
        std::array<std::uint32_t, 256> t{};
        for (std::uint32_t i = 0; i < 256; ++i) {
            std::uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1u) ? 0xEDB88320u ^ (c >> 1) : c >> 1;
            t[i] = c;
        }
        return t;
    }();
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint32_t crc = ~seed;
    while (len--) crc = table[(crc ^ *p++) & 0xFFu] ^ (crc >> 8);
    return ~crc;
}

std::string sidecar_path(const std::string& payload_path) { return payload_path + ".json"; }

namespace {

std::string temp_name(const std::string& path) { return path + ".tmp"; }

void rename_into_place(const std::string& tmp, const std::string& path) {
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(temp_name(path));
        raise(ErrorCategory::io, "rename failed for " + path + ": " + ec.message());
    }
}

void write_bytes_atomic(const std::string& path, const void* data, std::size_t len) {
    const std::string tmp = temp_name(path);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) raise(ErrorCategory::io, "cannot open " + tmp + " for writing");
        out.write(static_cast<const char*>(data), static_cast<std::streamsize>(len));
        if (!out) {
            out.close();
            fs::remove(tmp);
            raise(ErrorCategory::io, "write failed for " + tmp);
        }
    }
    rename_into_place(tmp, path);
}

}  // namespace

void write_file_atomic(const std::string& path, const std::string& content) {
    write_bytes_atomic(path, content.data(), content.size());
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorCategory::missing_input, "cannot open " + path);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) raise(ErrorCategory::io, "read failed for " + path);
    return content;
}

std::uint32_t write_volume(const Volume& vol, const std::string& path, const Provenance& prov) {
    vol.validate("write_volume");
    std::vector<float> payload(vol.size());
    for (std::size_t i = 0; i < payload.size(); ++i) payload[i] = static_cast<float>(vol.data[i]);
    const std::size_t n_bytes = payload.size() * sizeof(float);
    const std::uint32_t checksum = crc32(payload.data(), n_bytes);

    write_bytes_atomic(path, payload.data(), n_bytes);

    json header;
    header["format"] = "voxdiff-volume";
    header["version"] = 1;
    header["dims"] = {vol.nx, vol.ny, vol.nz};
    header["spacing"] = vol.spacing;
    header["window"] = vol.window;
    header["dtype"] = "float32-le";
    header["order"] = "x-fastest";
    header["payload_bytes"] = n_bytes;
    header["payload_crc32"] = checksum;
    header["creator"] = prov.creator;
    if (prov.has_seed) header["seed"] = prov.seed;
    write_file_atomic(sidecar_path(path), header.dump(2) + "\n");
    return checksum;
}

Volume read_volume(const std::string& path) {
    json header;
    try {
        header = json::parse(read_file(sidecar_path(path)));
    } catch (const json::exception& e) {
        raise(ErrorCategory::io, "malformed volume header " + sidecar_path(path) + ": " + e.what());
    }

    Volume vol;
    try {
        require(header.at("format") == "voxdiff-volume", ErrorCategory::io,
                path + ": not a volume file");
        require(header.at("dtype") == "float32-le" && header.at("order") == "x-fastest",
                ErrorCategory::io, path + ": unsupported payload encoding");
        const auto dims = header.at("dims").get<std::array<int, 3>>();
        vol.nx = dims[0];
        vol.ny = dims[1];
        vol.nz = dims[2];
        vol.spacing = header.at("spacing").get<std::array<double, 3>>();
        vol.window = header.at("window").get<std::array<double, 2>>();
    } catch (const json::exception& e) {
        raise(ErrorCategory::io, "malformed volume header " + sidecar_path(path) + ": " + e.what());
    }
    require(vol.nx > 0 && vol.ny > 0 && vol.nz > 0, ErrorCategory::io,
            path + ": non-positive dims in header");

    const std::string raw = read_file(path);
    const std::size_t expect =
        static_cast<std::size_t>(vol.nx) * static_cast<std::size_t>(vol.ny) *
        static_cast<std::size_t>(vol.nz) * sizeof(float);
    require(header.value("payload_bytes", expect) == expect, ErrorCategory::io,
            path + ": header payload_bytes disagrees with dims");
    require(raw.size() == expect, ErrorCategory::io,
            path + ": payload is " + std::to_string(raw.size()) + " bytes, expected " +
                std::to_string(expect));

    const std::uint32_t checksum = crc32(raw.data(), raw.size());
    if (header.contains("payload_crc32"))
        require(header["payload_crc32"].get<std::uint32_t>() == checksum, ErrorCategory::io,
                path + ": payload checksum mismatch");

    vol.data.resize(expect / sizeof(float));
    std::vector<float> payload(vol.data.size());
    std::memcpy(payload.data(), raw.data(), expect);
    for (std::size_t i = 0; i < payload.size(); ++i) vol.data[i] = payload[i];
    vol.validate("read_volume");
    return vol;
}

}  // namespace voxdiff
