#pragma once

// One end-to-end run: client flood -> endorsement -> ordering -> delivery
// sessions -> validation and commit on every peer, on a single event engine.

#include "fabsim/config.hpp"
#include "fabsim/engine.hpp"
#include "fabsim/ledger.hpp"
#include "fabsim/metrics.hpp"
#include "fabsim/net.hpp"
#include "fabsim/phases.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace fabsim {

struct PeerOutcome
{
    PeerSpec spec;
    Ledger ledger;
    std::vector<ValidationReport> reports;
    SessionState session_state = SessionState::handshaking;
    HaltReason halt_reason = HaltReason::none;
    std::optional<TimeMs> halt_time;
    std::size_t peak_backlog = 0;
    std::uint64_t dropped_dispatches = 0;
};

struct RunResult
{
    CommitLog log;
    std::vector<PeerOutcome> peers;  // topology order
    std::uint64_t blocks_cut = 0;
    /// Ids of transactions the client handed to the ordering service, in order.
    std::vector<std::string> submitted;
    std::vector<ClientRejection> rejections;
    bool halted = false;
    TimeMs final_time = 0;
    std::uint64_t events = 0;

    const PeerOutcome& peer(const std::string& peer_id) const;
};

struct RunOptions
{
    /// One line per processed event: `<time> <seq> <kind> <node> <arg>`.
    std::ostream* trace = nullptr;
    /// Stops the engine at this virtual time instead of running to quiescence.
    std::optional<TimeMs> until;
};

/// Throws ConfigError for an invalid configuration.
RunResult simulate(const RunConfig& config, const RunOptions& options = {});

/// Packages a run for CSV output.
RunRecord to_run_record(std::uint64_t run_id, const RunConfig& config, const RunResult& result);

}  // namespace fabsim
