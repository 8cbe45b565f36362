#include "fabsim/engine.hpp"

#include <algorithm>

namespace fabsim {

Engine::Engine(std::uint64_t seed, TimeMs start) : now_(start), rng_(seed) {}

EventId Engine::schedule(TimeMs time, EventTag tag, Action action)
{
    if (time < now_)
        throw SimulationError("event '" + std::string(tag.kind) + "' scheduled at " + std::to_string(time) +
                              " before clock " + std::to_string(now_));
    auto seq = next_seq_++;
    heap_.push_back(Entry{time, seq, tag, std::move(action)});
    std::push_heap(heap_.begin(), heap_.end(), Later{});
    return seq;
}

TimeMs Engine::run(std::optional<TimeMs> until)
{
    while (!heap_.empty())
    {
        if (until && heap_.front().time > *until)
            break;
        std::pop_heap(heap_.begin(), heap_.end(), Later{});
        Entry e = std::move(heap_.back());
        heap_.pop_back();
        now_ = e.time;
        ++processed_;
        if (trace_)
            trace_(TraceRecord{e.time, e.seq, e.tag});
        e.action();
    }
    return now_;
}

}  // namespace fabsim
