#pragma once

// Simulated network between sites and the orderer-to-peer block stream.
//
// Each committing peer receives blocks over its own delivery session. A
// session holds a byte credit window: a block is sent as segments, each of
// which occupies credit until the peer's acknowledgement for it gets back.
// Non-final segments are acknowledged on receipt; the final segment is
// acknowledged when the peer commits the block. With segment_bytes equal to
// the block size this is plain stop-and-wait per window slot. Once the window
// is full, new blocks queue in a bounded backlog at the orderer.

#include "fabsim/model.hpp"

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fabsim {

struct LinkSpec
{
    std::string from;
    std::string to;
    TimeMs one_way_delay_ms = 0;
    friend bool operator==(const LinkSpec&, const LinkSpec&) = default;
};

struct HeartbeatConfig
{
    TimeMs interval_ms = 1000;
    TimeMs timeout_ms = 7100;

    void validate() const;
    friend bool operator==(const HeartbeatConfig&, const HeartbeatConfig&) = default;
};

struct NetConfig
{
    /// One-way delay between nodes at different sites.
    TimeMs base_delay_ms = 11;
    /// One-way delay between nodes sharing a site.
    TimeMs intra_site_delay_ms = 0;
    /// Extra one-way delay on every link with exactly one endpoint at delayed_site.
    std::string delayed_site = "Sorbonne";
    TimeMs injected_delay_ms = 0;
    /// Explicit per-direction overrides, applied last.
    std::vector<LinkSpec> links;

    std::uint32_t window_bytes = 161000;
    std::uint32_t segment_bytes = 1000;
    std::uint32_t backlog_limit_blocks = 500;
    std::uint32_t handshake_rtts = 1;
    HeartbeatConfig heartbeat;

    void validate() const;
    friend bool operator==(const NetConfig&, const NetConfig&) = default;
};

/// Resolves one-way delays between named nodes.
class LinkTable
{
public:
    LinkTable(const NetConfig& config, std::map<std::string, std::string> node_sites);

    /// Throws std::out_of_range for an unknown node.
    TimeMs delay(const std::string& from, const std::string& to) const;
    TimeMs round_trip(const std::string& a, const std::string& b) const { return delay(a, b) + delay(b, a); }

private:
    NetConfig config_;
    std::map<std::string, std::string> sites_;
    std::map<std::pair<std::string, std::string>, TimeMs> overrides_;
};

enum class SessionState : std::uint8_t
{
    handshaking,
    streaming,
    disconnected,
};

enum class HaltReason : std::uint8_t
{
    none,
    heartbeat_timeout,
    backlog_overflow,
};

const char* to_string(SessionState state) noexcept;
const char* to_string(HaltReason reason) noexcept;

/// One segment put on the wire.
struct Transmission
{
    std::uint64_t block_index = 0;
    std::uint32_t bytes = 0;
    bool final_segment = false;
    TimeMs depart = 0;
    TimeMs arrive = 0;
    friend bool operator==(const Transmission&, const Transmission&) = default;
};

struct SessionParams
{
    std::uint32_t window_bytes = 161000;
    std::uint32_t segment_bytes = 1000;
    std::uint32_t backlog_limit_blocks = 500;
    TimeMs forward_delay_ms = 0;  // orderer -> peer
    TimeMs reverse_delay_ms = 0;  // peer -> orderer
};

/// Orderer-side state of the block stream to one committing peer. Pure state
/// machine: every call returns the segments that depart, the caller schedules
/// their arrivals.
class DeliverySession
{
public:
    DeliverySession(std::string orderer_id, std::string peer_id, SessionParams params);

    /// Session setup takes handshake_rtts round trips; returns when streaming may start.
    TimeMs open_session(TimeMs now, std::uint32_t handshake_rtts);

    /// Ends the handshake and releases whatever queued up meanwhile.
    std::vector<Transmission> start_streaming(TimeMs now);

    /// Offers a freshly cut block. Empty result with a growing backlog when out
    /// of credit; a backlog beyond the limit disconnects the session. On a
    /// disconnected session this is a recorded no-op.
    std::vector<Transmission> dispatch_block(std::uint64_t block_index, std::uint32_t size_bytes, TimeMs now);

    /// Transport acknowledgement for a non-final segment.
    std::vector<Transmission> on_segment_ack(std::uint64_t block_index, std::uint32_t bytes, TimeMs now);

    /// The peer's block acknowledgement, returning the final segment's credit.
    /// A second ack for one block is a SimulationError.
    std::vector<Transmission> on_ack(std::uint64_t block_index, TimeMs now);

    void disconnect(HaltReason reason, TimeMs now);

    const std::string& orderer_id() const noexcept { return orderer_id_; }
    const std::string& peer_id() const noexcept { return peer_id_; }
    const SessionParams& params() const noexcept { return params_; }
    SessionState state() const noexcept { return state_; }
    HaltReason halt_reason() const noexcept { return halt_reason_; }
    std::optional<TimeMs> halt_time() const noexcept { return halt_time_; }
    TimeMs handshake_done_time() const noexcept { return handshake_done_; }
    std::uint32_t outstanding_bytes() const noexcept { return outstanding_; }
    std::size_t backlog_size() const noexcept { return backlog_.size(); }
    std::size_t peak_backlog() const noexcept { return peak_backlog_; }
    std::uint64_t dropped_dispatches() const noexcept { return dropped_; }

    /// Blocks whose every segment is on the wire but whose final ack is outstanding.
    std::size_t whole_blocks_in_flight() const;

    /// Sum over in-flight blocks of sent-but-unacked bytes.
    std::uint64_t unacked_bytes() const;

private:
    struct Queued
    {
        std::uint64_t index;
        std::uint32_t size;
        std::uint32_t sent = 0;
    };
    struct InFlight
    {
        std::uint32_t size = 0;
        std::uint32_t sent = 0;
        std::uint32_t credited = 0;
        std::uint32_t final_bytes = 0;
        bool complete = false;
        bool acked = false;
    };

    std::vector<Transmission> pump(TimeMs now);
    void credit(std::uint64_t block_index, std::uint32_t bytes);

    std::string orderer_id_;
    std::string peer_id_;
    SessionParams params_;
    SessionState state_ = SessionState::handshaking;
    HaltReason halt_reason_ = HaltReason::none;
    std::optional<TimeMs> halt_time_;
    TimeMs handshake_done_ = 0;
    std::uint32_t outstanding_ = 0;
    std::deque<Queued> backlog_;
    std::map<std::uint64_t, InFlight> in_flight_;
    std::size_t peak_backlog_ = 0;
    std::uint64_t dropped_ = 0;
};

/// Time at which a session streaming since `stream_start` is declared
/// disconnected, or nullopt when the round trip fits the timeout. The first
/// probe leaves one interval after stream start and waits up to timeout_ms.
std::optional<TimeMs> heartbeat_check(const HeartbeatConfig& config, TimeMs forward_delay_ms, TimeMs reverse_delay_ms,
                                      TimeMs stream_start);

/// Independent replay of the delivery model for a constant symmetric delay,
/// zero commit cost and blocks cut every `block_interval_ms` starting at
/// `first_cut_ms`. Computed directly from departure-time recurrences, not via
/// the event engine.
struct OracleParams
{
    TimeMs block_interval_ms = 850;
    std::optional<TimeMs> first_cut_ms;  // defaults to block_interval_ms
    TimeMs delay_ms = 0;
    TimeMs reference_delay_ms = 0;
    std::uint32_t window_bytes = 46000;
    std::uint32_t block_bytes = 46000;
    std::uint32_t segment_bytes = 46000;
    std::uint32_t handshake_rtts = 1;
};

/// Commit (= arrival) time of blocks 1..n at a peer `delay_ms` away.
std::vector<TimeMs> oracle_commit_times(const OracleParams& params, TimeMs delay_ms, std::size_t n);

/// offset(k) = target commit - reference commit for k = 1..n.
std::vector<TimeMs> offset_oracle(const OracleParams& params, std::size_t n);

/// Closed form for a one-block window without handshake and a zero-delay reference:
/// d + max(0, (n-1)(2d - P)).
TimeMs stop_and_wait_offset(TimeMs block_interval_ms, TimeMs delay_ms, std::uint64_t n);

/// Saturated growth per block, max(0, 2d / W_eff - P), with W_eff = window / block size.
double steady_growth_per_block(TimeMs block_interval_ms, TimeMs delay_ms, double window_blocks);

}  // namespace fabsim
