#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "lobswitch/config.hpp"
#include "lobswitch/solver.hpp"

namespace lobswitch {

/// What to do at one epoch.
struct Action {
    bool wait = false;
    SwitchDecision u{};
    HiddenFlags h{};
};

/// A solved table together with the configuration that produced it.
struct Policy {
    RunConfig config;
    ValueTable table;

    /// Decision at time index k, node `node`, for the given epoch. Interior
    /// epochs may wait; arrival and terminal epochs always trade.
    Action decide(int k, EpochKind kind, std::size_t node) const;
};

Policy extract_policy(const ValueTable& table, const RunConfig& config);

inline constexpr std::uint32_t kPolicyVersion = 1;

/// CSV layout: `#` header lines (version, grid, params hash, then every
/// config line prefixed by `# config `), a column line
///   k,qa,qb,inv,pa,pb,v0,va,vb,wait,u0a,u0b,ha,hb,uaa,uab,uba,ubb
/// and one row per (k, node) in k-major, node-index order. `uaa,uab` is the
/// decision at an ask arrival, `uba,ubb` at a bid arrival.
void write_policy_csv(std::ostream& out, const Policy& policy);

/// Binary layout, all little-endian:
///   char[8] "LOBSWPOL", u32 version, u64 params hash,
///   u32 config length, config bytes (canonical text),
///   u32 layer count (K+1), u64 nodes per layer,
///   then per (k, node) in the CSV order:
///   f64 v0, f64 va, f64 vb, u8 wait, f64 u0a, f64 u0b, u8 ha, u8 hb,
///   f64 uaa, f64 uab, f64 uba, f64 ubb.
void write_policy_binary(std::ostream& out, const Policy& policy);

/// Readers verify the header, the hash and the record count. Throw
/// std::runtime_error on malformed input.
Policy read_policy_csv(std::istream& in);
Policy read_policy_binary(std::istream& in);

/// Picks the format from the first bytes; throws MissingFileError if the
/// file cannot be opened.
Policy read_policy_file(const std::string& path);

}  // namespace lobswitch
