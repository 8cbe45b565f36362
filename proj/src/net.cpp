#include "fabsim/net.hpp"

#include <algorithm>
#include <stdexcept>

namespace fabsim {

void HeartbeatConfig::validate() const
{
    if (interval_ms <= 0 || timeout_ms <= 0)
        throw std::invalid_argument("heartbeat interval and timeout must be positive");
    if (timeout_ms <= interval_ms)
        throw std::invalid_argument("heartbeat timeout must exceed the interval");
}

void NetConfig::validate() const
{
    if (base_delay_ms < 0 || intra_site_delay_ms < 0 || injected_delay_ms < 0)
        throw std::invalid_argument("link delays must be non-negative");
    for (const auto& l : links)
        if (l.one_way_delay_ms < 0 || l.from.empty() || l.to.empty())
            throw std::invalid_argument("link " + l.from + "->" + l.to + " is malformed");
    if (window_bytes == 0 || segment_bytes == 0 || backlog_limit_blocks == 0)
        throw std::invalid_argument("window, segment and backlog limit must be positive");
    if (segment_bytes > window_bytes)
        throw std::invalid_argument("segment_bytes may not exceed window_bytes");
    heartbeat.validate();
}

LinkTable::LinkTable(const NetConfig& config, std::map<std::string, std::string> node_sites)
    : config_(config), sites_(std::move(node_sites))
{
    for (const auto& l : config_.links)
        overrides_[{l.from, l.to}] = l.one_way_delay_ms;
}

TimeMs LinkTable::delay(const std::string& from, const std::string& to) const
{
    if (auto it = overrides_.find({from, to}); it != overrides_.end())
        return it->second;
    const auto& a = sites_.at(from);
    const auto& b = sites_.at(to);
    if (a == b)
        return config_.intra_site_delay_ms;
    TimeMs d = config_.base_delay_ms;
    if ((a == config_.delayed_site) != (b == config_.delayed_site))
        d += config_.injected_delay_ms;
    return d;
}

const char* to_string(SessionState state) noexcept
{
    switch (state)
    {
    case SessionState::handshaking: return "handshaking";
    case SessionState::streaming: return "streaming";
    case SessionState::disconnected: return "disconnected";
    }
    return "?";
}

const char* to_string(HaltReason reason) noexcept
{
    switch (reason)
    {
    case HaltReason::none: return "none";
    case HaltReason::heartbeat_timeout: return "heartbeat_timeout";
    case HaltReason::backlog_overflow: return "backlog_overflow";
    }
    return "?";
}

DeliverySession::DeliverySession(std::string orderer_id, std::string peer_id, SessionParams params)
    : orderer_id_(std::move(orderer_id)), peer_id_(std::move(peer_id)), params_(params)
{
    if (params_.window_bytes == 0 || params_.segment_bytes == 0 || params_.backlog_limit_blocks == 0)
        throw std::invalid_argument("session window, segment and backlog limit must be positive");
    if (params_.segment_bytes > params_.window_bytes)
        throw std::invalid_argument("segment larger than window would never be sent");
}

TimeMs DeliverySession::open_session(TimeMs now, std::uint32_t handshake_rtts)
{
    if (state_ != SessionState::handshaking)
        throw SimulationError("session to " + peer_id_ + " opened twice");
    handshake_done_ = now + static_cast<TimeMs>(handshake_rtts) * (params_.forward_delay_ms + params_.reverse_delay_ms);
    return handshake_done_;
}

std::vector<Transmission> DeliverySession::start_streaming(TimeMs now)
{
    if (state_ != SessionState::handshaking)
        return {};
    state_ = SessionState::streaming;
    return pump(now);
}

std::vector<Transmission> DeliverySession::dispatch_block(std::uint64_t block_index, std::uint32_t size_bytes, TimeMs now)
{
    if (state_ == SessionState::disconnected)
    {
        ++dropped_;
        return {};
    }
    if (size_bytes == 0)
        throw std::invalid_argument("block size must be positive");
    backlog_.push_back(Queued{block_index, size_bytes});
    auto out = pump(now);
    peak_backlog_ = std::max(peak_backlog_, backlog_.size());
    if (backlog_.size() > params_.backlog_limit_blocks)
        disconnect(HaltReason::backlog_overflow, now);
    return out;
}

std::vector<Transmission> DeliverySession::on_segment_ack(std::uint64_t block_index, std::uint32_t bytes, TimeMs now)
{
    if (state_ == SessionState::disconnected)
        return {};
    credit(block_index, bytes);
    return pump(now);
}

std::vector<Transmission> DeliverySession::on_ack(std::uint64_t block_index, TimeMs now)
{
    if (state_ == SessionState::disconnected)
        return {};
    auto it = in_flight_.find(block_index);
    if (it == in_flight_.end() || it->second.acked)
        throw SimulationError("duplicate or unexpected ack for block " + std::to_string(block_index) + " from " +
                              peer_id_);
    if (!it->second.complete)
        throw SimulationError("ack for partially sent block " + std::to_string(block_index));
    it->second.acked = true;
    credit(block_index, it->second.final_bytes);
    return pump(now);
}

void DeliverySession::credit(std::uint64_t block_index, std::uint32_t bytes)
{
    auto it = in_flight_.find(block_index);
    if (it == in_flight_.end())
        throw SimulationError("credit for block " + std::to_string(block_index) + " that is not in flight");
    auto& f = it->second;
    if (f.credited + bytes > f.sent || bytes > outstanding_)
        throw SimulationError("credit exceeds bytes sent for block " + std::to_string(block_index));
    f.credited += bytes;
    outstanding_ -= bytes;
    // The block ack always carries the last credit, so entries leave once acked.
    if (f.acked && f.credited == f.size)
        in_flight_.erase(it);
}

void DeliverySession::disconnect(HaltReason reason, TimeMs now)
{
    if (state_ == SessionState::disconnected)
        return;
    state_ = SessionState::disconnected;
    halt_reason_ = reason;
    halt_time_ = now;
    backlog_.clear();
}

std::vector<Transmission> DeliverySession::pump(TimeMs now)
{
    std::vector<Transmission> out;
    if (state_ != SessionState::streaming)
        return out;
    while (!backlog_.empty())
    {
        auto& head = backlog_.front();
        std::uint32_t seg = std::min(params_.segment_bytes, head.size - head.sent);
        if (outstanding_ + seg > params_.window_bytes)
            break;
        outstanding_ += seg;
        head.sent += seg;
        auto& f = in_flight_[head.index];
        f.size = head.size;
        f.sent += seg;
        bool final = head.sent == head.size;
        out.push_back(Transmission{head.index, seg, final, now, now + params_.forward_delay_ms});
        if (final)
        {
            f.complete = true;
            f.final_bytes = seg;
            backlog_.pop_front();
        }
    }
    return out;
}

std::size_t DeliverySession::whole_blocks_in_flight() const
{
    return static_cast<std::size_t>(
        std::count_if(in_flight_.begin(), in_flight_.end(), [](const auto& kv) { return kv.second.complete && !kv.second.acked; }));
}

std::uint64_t DeliverySession::unacked_bytes() const
{
    std::uint64_t sum = 0;
    for (const auto& [index, f] : in_flight_)
        sum += f.sent - f.credited;
    return sum;
}

std::optional<TimeMs> heartbeat_check(const HeartbeatConfig& config, TimeMs forward_delay_ms, TimeMs reverse_delay_ms,
                                      TimeMs stream_start)
{
    if (forward_delay_ms + reverse_delay_ms <= config.timeout_ms)
        return std::nullopt;
    return stream_start + config.interval_ms + config.timeout_ms;
}

std::vector<TimeMs> oracle_commit_times(const OracleParams& p, TimeMs delay_ms, std::size_t n)
{
    if (p.segment_bytes == 0 || p.block_bytes == 0 || p.segment_bytes > p.window_bytes)
        throw std::invalid_argument("oracle needs 0 < segment <= window and a positive block size");
    const TimeMs first = p.first_cut_ms.value_or(p.block_interval_ms);
    const TimeMs ready = static_cast<TimeMs>(p.handshake_rtts) * 2 * delay_ms;
    const TimeMs hold = 2 * delay_ms;  // every segment's credit returns one round trip after departure

    std::vector<TimeMs> departures;
    std::vector<std::uint32_t> sizes;
    std::vector<TimeMs> commits;
    commits.reserve(n);
    std::size_t oldest = 0;  // first segment still holding credit
    std::uint64_t held = 0;
    TimeMs last = 0;
    for (std::size_t b = 0; b < n; ++b)
    {
        const TimeMs cut = first + static_cast<TimeMs>(b) * p.block_interval_ms;
        for (std::uint32_t sent = 0; sent < p.block_bytes;)
        {
            const std::uint32_t seg = std::min(p.segment_bytes, p.block_bytes - sent);
            TimeMs t = std::max({cut, ready, last});
            while (held + seg > p.window_bytes)
            {
                t = std::max(t, departures[oldest] + hold);
                held -= sizes[oldest];
                ++oldest;
            }
            // Credit that returned by t frees the window too.
            while (oldest < departures.size() && departures[oldest] + hold <= t)
            {
                held -= sizes[oldest];
                ++oldest;
            }
            departures.push_back(t);
            sizes.push_back(seg);
            held += seg;
            last = t;
            sent += seg;
        }
        commits.push_back(last + delay_ms);
    }
    return commits;
}

std::vector<TimeMs> offset_oracle(const OracleParams& params, std::size_t n)
{
    auto target = oracle_commit_times(params, params.delay_ms, n);
    auto reference = oracle_commit_times(params, params.reference_delay_ms, n);
    std::vector<TimeMs> out(n);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = target[i] - reference[i];
    return out;
}

TimeMs stop_and_wait_offset(TimeMs block_interval_ms, TimeMs delay_ms, std::uint64_t n)
{
    if (n < 1)
        throw std::invalid_argument("block indices start at 1");
    return delay_ms + std::max<TimeMs>(0, static_cast<TimeMs>(n - 1) * (2 * delay_ms - block_interval_ms));
}

double steady_growth_per_block(TimeMs block_interval_ms, TimeMs delay_ms, double window_blocks)
{
    if (window_blocks <= 0)
        throw std::invalid_argument("window must be positive");
    return std::max(0.0, 2.0 * static_cast<double>(delay_ms) / window_blocks - static_cast<double>(block_interval_ms));
}

}  // namespace fabsim
