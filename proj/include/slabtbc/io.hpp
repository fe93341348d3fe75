#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"
#include "slabtbc/stepper.hpp"

namespace slabtbc::io {

std::uint64_t fnv1a64(const void* data, size_t n);
std::uint64_t fnv1a64(const std::string& s);
std::string hex64(std::uint64_t v);

// Stable hash of a canonically dumped JSON document.
std::string config_hash(const nlohmann::json& j);

// Shortest round-trip decimal representation.
std::string format_double(double v);

std::string medium_hash(const stepper::SlabMedium& m);

void write_energy_csv(const std::string& path, const std::vector<stepper::EnergyEntry>& rows,
                      const std::string& config_hash);

// Field snapshot: length-prefixed JSON header followed by the six staggered
// arrays as little-endian doubles (ex, ey, ez, hx, hy, hz).  The header's
// "timestamp" field is excluded from hashing.
void write_snapshot(const std::string& path, const stepper::FieldState& st,
                    const stepper::SlabMedium& med, const std::string& config_hash);

struct Snapshot {
    nlohmann::json header;
    std::vector<double> ex, ey, ez, hx, hy, hz;
};
Snapshot read_snapshot(const std::string& path);

void write_text(const std::string& path, const std::string& text);

}  // namespace slabtbc::io
