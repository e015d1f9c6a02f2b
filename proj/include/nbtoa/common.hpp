// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace nbtoa {

using cplx = std::complex<double>;

/// Raised when an argument violates an operation's precondition.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Raised for invalid or unsupported configuration (numerology, profiles, experiment files).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a persisted artifact does not match its recorded checksum.
class IntegrityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Derives an independent 64-bit seed from (master, index) with two rounds of SplitMix64.
/// Used for every per-trial and per-stream seed in the project.
std::uint64_t split_seed(std::uint64_t master, std::uint64_t index);

inline constexpr double kReferenceRateHz = 1.92e6;

}  // namespace nbtoa
