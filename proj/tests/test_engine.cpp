#include "fabsim/engine.hpp"

#include <gtest/gtest.h>

#include <sstream>

namespace fabsim {
namespace {

TEST(Engine, RunsInTimeOrder)
{
    Engine e;
    std::vector<int> seen;
    e.schedule(30, {"c"}, [&] { seen.push_back(3); });
    e.schedule(10, {"a"}, [&] { seen.push_back(1); });
    e.schedule(20, {"b"}, [&] { seen.push_back(2); });
    EXPECT_EQ(e.run(), 30);
    EXPECT_EQ(seen, (std::vector<int>{1, 2, 3}));
    EXPECT_EQ(e.processed(), 3u);
    EXPECT_TRUE(e.idle());
}

TEST(Engine, EqualTimesRunInSchedulingOrder)
{
    Engine e;
    std::string order;
    for (char c : std::string("abcdef"))
        e.schedule(5, {"x"}, [&order, c] { order += c; });
    // Events scheduled from inside an action at the current time run after the rest.
    e.schedule(5, {"y"}, [&] { e.schedule(5, {"z"}, [&] { order += 'z'; }); });
    e.run();
    EXPECT_EQ(order, "abcdefz");
}

TEST(Engine, SchedulingInThePastThrows)
{
    Engine e;
    e.schedule(100, {"a"}, [] {});
    e.run();
    EXPECT_THROW(e.schedule(99, {"late"}, [] {}), SimulationError);
    EXPECT_NO_THROW(e.schedule(100, {"now"}, [] {}));
    EXPECT_NO_THROW(e.schedule_after(0, {"now"}, [] {}));
}

TEST(Engine, EmptyQueueReturnsStartTime)
{
    Engine e(1, 42);
    EXPECT_EQ(e.run(), 42);
    EXPECT_EQ(e.processed(), 0u);
}

std::string traced(bool split)
{
    Engine e(9);
    std::ostringstream out;
    e.set_trace([&](const TraceRecord& r) { out << r.time << ' ' << r.seq << ' ' << r.tag.kind << ' ' << r.tag.arg << '\n'; });
    // A self-rescheduling chain with random gaps drawn from the engine's generator.
    std::function<void(std::uint64_t)> step = [&](std::uint64_t n) {
        if (n == 50)
            return;
        auto gap = static_cast<TimeMs>(e.rng()() % 40);
        e.schedule_after(gap, {"step", 0, n + 1}, [&step, n] { step(n + 1); });
    };
    e.schedule(0, {"step", 0, 0}, [&] { step(0); });
    if (split)
    {
        e.run(300);
        e.run(301);
        e.run(600);
    }
    e.run();
    return out.str();
}

TEST(Engine, RunUntilResumesToSameTrace)
{
    EXPECT_EQ(traced(false), traced(true));
    EXPECT_FALSE(traced(false).empty());
}

TEST(Engine, RunUntilLeavesLaterEvents)
{
    Engine e;
    int fired = 0;
    e.schedule(10, {"a"}, [&] { ++fired; });
    e.schedule(20, {"b"}, [&] { ++fired; });
    EXPECT_EQ(e.run(15), 10);
    EXPECT_EQ(fired, 1);
    EXPECT_EQ(e.pending(), 1u);
    e.run(20);
    EXPECT_EQ(fired, 2);
}

}  // namespace
}  // namespace fabsim
