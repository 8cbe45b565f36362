#pragma once

// Deterministic discrete-event scheduler on an integer-millisecond virtual clock.

#include "fabsim/model.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <vector>

namespace fabsim {

using EventId = std::uint64_t;

/// What an event is about, for trace dumps. `kind` must point at static storage.
struct EventTag
{
    const char* kind = "";
    std::uint32_t subject = 0;
    std::uint64_t arg = 0;
};

struct TraceRecord
{
    TimeMs time;
    EventId seq;
    EventTag tag;
};

class Engine
{
public:
    using Action = std::function<void()>;

    explicit Engine(std::uint64_t seed = 0, TimeMs start = 0);

    /// Enqueues `action` at `time`; events at equal time run in scheduling order.
    /// Throws SimulationError when `time` lies before the current clock.
    EventId schedule(TimeMs time, EventTag tag, Action action);
    EventId schedule_after(TimeMs delay, EventTag tag, Action action) { return schedule(now_ + delay, tag, std::move(action)); }

    /// Processes events in (time, seq) order until the queue drains or the next
    /// event lies after `until`. Returns the clock.
    TimeMs run(std::optional<TimeMs> until = std::nullopt);

    TimeMs now() const noexcept { return now_; }
    bool idle() const noexcept { return heap_.empty(); }
    std::size_t pending() const noexcept { return heap_.size(); }
    std::uint64_t processed() const noexcept { return processed_; }

    std::mt19937_64& rng() noexcept { return rng_; }

    void set_trace(std::function<void(const TraceRecord&)> sink) { trace_ = std::move(sink); }

private:
    struct Entry
    {
        TimeMs time;
        EventId seq;
        EventTag tag;
        Action action;
    };
    struct Later
    {
        bool operator()(const Entry& a, const Entry& b) const noexcept
        {
            return a.time != b.time ? a.time > b.time : a.seq > b.seq;
        }
    };

    std::vector<Entry> heap_;
    TimeMs now_;
    EventId next_seq_ = 0;
    std::uint64_t processed_ = 0;
    std::mt19937_64 rng_;
    std::function<void(const TraceRecord&)> trace_;
};

}  // namespace fabsim
