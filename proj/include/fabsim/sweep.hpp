#pragma once

#include "fabsim/config.hpp"
#include "fabsim/metrics.hpp"
#include "fabsim/simulation.hpp"

#include <cstddef>
#include <vector>

namespace fabsim {

struct SweepRun
{
    RunConfig config;
    RunRecord record;
    OffsetSeries offsets;
    bool halted = false;
};

struct SweepResult
{
    std::vector<SweepRun> runs;  // ordered by (delay, repetition)
    std::vector<SummaryColumn> columns;
    bool any_halt = false;
};

/// Runs repetitions x delays simulations. Run ordinal k = delay_index * reps + rep
/// uses seed base.seed + k and net.delay_ms = delays[delay_index]. Runs spread
/// over `threads` workers (0 = hardware concurrency); results do not depend on it.
SweepResult run_sweep(const RunConfig& base, const std::vector<TimeMs>& delays, std::size_t repetitions,
                      std::size_t threads = 0, const std::vector<std::uint64_t>& rows = kTableRows);

}  // namespace fabsim
