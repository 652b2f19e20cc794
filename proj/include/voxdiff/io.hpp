#pragma once

#include <cstdint>
#include <string>

#include "voxdiff/volume.hpp"

namespace voxdiff {

// CRC-32 (IEEE polynomial, reflected) of a byte buffer. Chainable: feed the
// previous result back in as `seed` to continue a running checksum.
std::uint32_t crc32(const void* data, std::size_t len, std::uint32_t seed = 0);

// Origin information recorded in file headers so a run can be traced back to
// the command and seed that produced it.
struct Provenance {
    std::string creator = "voxdiff";
    bool has_seed = false;
    std::uint64_t seed = 0;
};

// Volume files are a raw little-endian float32 payload in x-fastest order at
// <path>, plus a JSON sidecar at <path>.json carrying dims, spacing, window,
// the payload checksum and provenance. The payload lands on disk before the
// sidecar, and both are written to a temp name and renamed into place, so a
// readable sidecar implies a complete payload.
//
// Returns the payload checksum.
std::uint32_t write_volume(const Volume& vol, const std::string& path,
                           const Provenance& prov = {});
Volume read_volume(const std::string& path);

std::string sidecar_path(const std::string& payload_path);

// Writes content to path via a temp file in the same directory and an atomic
// rename, so failed writes never leave a partial file behind.
void write_file_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace voxdiff
