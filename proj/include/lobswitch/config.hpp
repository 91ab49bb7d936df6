#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

#include "lobswitch/solver.hpp"

namespace lobswitch {

/// A configuration file or value that cannot be parsed.
struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// An input file that does not exist or cannot be opened.
struct MissingFileError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Complete run description. Defaults reproduce the Binomial desk setup:
/// 104181-node grid over ten decision times, Delta = 5, liquidation at
/// two ticks beyond the quotes, start at (5, 5, 0, 16, 15).
struct RunConfig {
    Problem problem{};
    BookState x0{5.0, 5.0, 16, 15, ArrivalFlag::None};
    double inv0 = 0.0;
    unsigned threads = 0;  ///< 0 means default_threads(); not part of the hash

    /// Applies `key = value` lines (`#` starts a comment). Unknown keys and
    /// malformed values throw ConfigError naming the line.
    void apply_text(std::string_view text, std::string_view origin = "<text>");
    /// Applies one setting.
    void set(std::string_view key, std::string_view value);
    /// Reads and applies a file. Throws MissingFileError if it cannot be opened.
    void apply_file(const std::string& path);

    /// Sorted `key = value` lines covering every setting that affects results.
    std::string canonical() const;
    std::uint64_t hash() const;

    void validate() const;
};

/// FNV-1a, 64 bit.
std::uint64_t fnv1a64(std::string_view data);

std::string hex64(std::uint64_t v);

}  // namespace lobswitch
