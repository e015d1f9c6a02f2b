// SPDX-License-Identifier: Apache-2.0
#include "nbtoa/common.hpp"

namespace nbtoa {

std::uint64_t split_seed(std::uint64_t master, std::uint64_t index)
{
    auto mix = [](std::uint64_t z) {
        z += 0x9E3779B97F4A7C15ULL;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    };
    return mix(mix(master) ^ (index * 0xD1B54A32D192ED03ULL + 1));
}

}  // namespace nbtoa
