// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "nbtoa/nprs_signal.hpp"

namespace nbtoa {

/// Metadata stored next to a capture as `<file>.json`.
struct IqMetadata {
    double sampling_rate_hz = 0.0;
    std::size_t length = 0;
    std::uint64_t seed = 0;
    int cell_id_shift = 0;
    std::string kind;  ///< "reference" or "received"
};

/// Writes interleaved little-endian float32 I/Q plus the JSON sidecar.
void write_iq(const std::filesystem::path& path, const SampleBuffer& buf, const IqMetadata& meta);

/// Reads a capture written by write_iq. The sidecar is required; its length must match the
/// sample count in the binary file or IoError is thrown.
SampleBuffer read_iq(const std::filesystem::path& path, IqMetadata* meta = nullptr);

std::filesystem::path sidecar_path(const std::filesystem::path& path);

}  // namespace nbtoa
