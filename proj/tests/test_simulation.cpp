#include "fabsim/simulation.hpp"
#include "fabsim/sweep.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <sstream>

namespace fabsim {
namespace {

RunConfig small(TimeMs delay, std::uint32_t tx = 200)
{
    auto c = default_topology();
    c.net.injected_delay_ms = delay;
    c.workload.tx_count = tx;
    return c;
}

TEST(Simulation, BaselineCommitsEverythingEverywhere)
{
    auto r = simulate(small(0));
    EXPECT_EQ(r.blocks_cut, 20u);
    EXPECT_EQ(r.submitted.size(), 200u);
    EXPECT_TRUE(r.rejections.empty());
    EXPECT_FALSE(r.halted);
    for (const auto& p : r.peers)
    {
        EXPECT_EQ(p.ledger.height(), 20u) << p.spec.peer_id;
        EXPECT_EQ(p.ledger.state().size(), 200u);
        for (const auto& rep : p.reports)
            EXPECT_EQ(rep.valid_count(), 10u);
    }
    auto s = testing::check_safety(r);
    EXPECT_TRUE(s.ok) << s.detail;
    // tx10 leaves the client at 850 and waits one Poland round trip (2 x 11 ms) for
    // its endorsement; orderer and reference peer share a site, so the commit lands on the cut.
    EXPECT_EQ(r.log.commit_time("peer0.heidelberg", 1), 850 + 22);
}

TEST(Simulation, SafetyHoldsUnderDelayAndConflicts)
{
    for (TimeMs d : {0, 1000, 2500, 3580})
        for (auto scheme : {WorkloadConfig::KeyScheme::distinct, WorkloadConfig::KeyScheme::fixed})
        {
            auto c = small(d, 120);
            c.workload.key_scheme = scheme;
            c.workload.op_kind = WorkloadConfig::OpKind::update;
            c.workload.jitter_ms = 30;
            auto r = simulate(c);
            auto s = testing::check_safety(r);
            EXPECT_TRUE(s.ok) << "d=" << d << ": " << s.detail;
        }
}

TEST(Simulation, ValidityFlagsDoNotDependOnDelay)
{
    auto c = small(0, 100);
    c.workload.key_scheme = WorkloadConfig::KeyScheme::fixed;
    c.workload.op_kind = WorkloadConfig::OpKind::update;
    auto base = simulate(c);
    for (TimeMs d : {1000, 3500})
    {
        c.net.injected_delay_ms = d;
        auto r = simulate(c);
        ASSERT_EQ(r.peers.size(), base.peers.size());
        for (std::size_t i = 0; i < r.peers.size(); ++i)
        {
            ASSERT_EQ(r.peers[i].ledger.height(), base.peers[i].ledger.height());
            for (std::size_t h = 0; h < r.peers[i].ledger.height(); ++h)
                EXPECT_EQ(r.peers[i].ledger.blocks()[h].validity, base.peers[i].ledger.blocks()[h].validity);
        }
    }
}

TEST(Simulation, DeterministicTrace)
{
    auto c = small(2000, 100);
    c.workload.jitter_ms = 20;
    std::ostringstream a, b;
    simulate(c, {&a, std::nullopt});
    simulate(c, {&b, std::nullopt});
    EXPECT_EQ(a.str(), b.str());
    EXPECT_FALSE(a.str().empty());
    c.seed = 2;
    std::ostringstream other;
    simulate(c, {&other, std::nullopt});
    EXPECT_NE(a.str(), other.str());
}

TEST(Simulation, HeartbeatHaltsDelayedSiteOnly)
{
    auto r = simulate(small(3580));
    EXPECT_TRUE(r.halted);
    for (const auto& p : r.peers)
    {
        if (p.spec.site_label == "Sorbonne")
        {
            EXPECT_EQ(p.halt_reason, HaltReason::heartbeat_timeout);
            EXPECT_LT(p.ledger.height(), 10u);
        }
        else
        {
            EXPECT_EQ(p.halt_reason, HaltReason::none);
            EXPECT_EQ(p.ledger.height(), r.blocks_cut);
        }
    }
    EXPECT_TRUE(r.log.halted("peer0.sorbonne"));
}

TEST(Simulation, PartialBatchFlushedByTimeout)
{
    auto c = small(0, 25);
    auto r = simulate(c);
    EXPECT_EQ(r.blocks_cut, 3u);
    EXPECT_EQ(r.peer("peer1.poland").ledger.blocks().back().transactions.size(), 5u);
    // Block 3 opens when tx21 (submitted at 21*85) reaches the orderer after its
    // endorsement round trip, and is flushed one timeout later.
    EXPECT_EQ(r.peer("peer1.poland").ledger.blocks().back().cut_time, 21 * 85 + 22 + 1000);
}

TEST(Simulation, RejectsInvalidConfig)
{
    auto c = small(0);
    c.endorsement_policy = R"(AND("Heidelberg" peer, "Atlantis" peer))";
    EXPECT_THROW(simulate(c), ConfigError);
}

TEST(Simulation, UntilStopsEarly)
{
    RunOptions o;
    o.until = 2000;
    auto r = simulate(small(0), o);
    EXPECT_LE(r.final_time, 2000);
    EXPECT_EQ(r.blocks_cut, 2u);
}

TEST(Sweep, ThreadCountDoesNotChangeResults)
{
    auto base = small(0, 100);
    auto one = run_sweep(base, {0, 2000}, 3, 1);
    auto many = run_sweep(base, {0, 2000}, 3, 4);
    ASSERT_EQ(one.runs.size(), 6u);
    EXPECT_EQ(one.columns, many.columns);
    for (std::size_t i = 0; i < one.runs.size(); ++i)
    {
        EXPECT_EQ(one.runs[i].config.seed, base.seed + i);
        EXPECT_EQ(one.runs[i].offsets.offsets, many.runs[i].offsets.offsets);
    }
    EXPECT_EQ(one.runs[4].config.net.injected_delay_ms, 2000);
}

}  // namespace
}  // namespace fabsim
