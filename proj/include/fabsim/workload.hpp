#pragma once

// Open-loop client flood: proposals submitted one after another at a fixed gap.

#include "fabsim/model.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace fabsim {

struct WorkloadConfig
{
    enum class KeyScheme
    {
        distinct,
        fixed,
    };
    enum class OpKind
    {
        create,
        update,
    };

    std::uint32_t tx_count = 1000;
    TimeMs gap_ms = 85;
    KeyScheme key_scheme = KeyScheme::distinct;
    std::string fixed_key = "k";
    OpKind op_kind = OpKind::create;
    /// Uniform +-jitter_ms on every gap (mean preserved); 0 disables randomness.
    TimeMs jitter_ms = 0;

    void validate() const;
    friend bool operator==(const WorkloadConfig&, const WorkloadConfig&) = default;
};

/// Proposal i (1-based) at i * gap_ms, keyed `asset<i>` or the fixed key.
/// The generator is only drawn from when jitter is enabled.
std::vector<Proposal> generate_flood(const WorkloadConfig& config, const std::string& client_id, std::mt19937_64& rng);

/// Same, drawing any jitter from a generator seeded with 0.
std::vector<Proposal> generate_flood(const WorkloadConfig& config, const std::string& client_id);

/// The long-run variant: `base` scaled to 30000 transactions.
WorkloadConfig long_flood(WorkloadConfig base);

}  // namespace fabsim
