#include "fabsim/phases.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <map>
#include <queue>

namespace fabsim {
namespace {

const PeerSites kSites{{"peer0.heidelberg", "Heidelberg"}, {"peer0.poland", "Poland"},
                       {"peer0.sorbonne", "Sorbonne"}};
const Policy kPolicy = parse_policy(R"(AND ("Heidelberg" peer, "Poland" peer))");

Proposal create(const std::string& id, const std::string& key, const std::string& value = "v")
{
    return Proposal{id, "client0", CreateOp{key, value}, 0};
}

Proposal update(const std::string& id, const std::string& key, const std::string& value = "v")
{
    return Proposal{id, "client0", UpdateOp{key, value}, 0};
}

Transaction endorsed(const WorldState& state, const Proposal& p)
{
    std::vector<Endorsement> es{execute_proposal(state, p, "peer0.heidelberg"),
                                execute_proposal(state, p, "peer0.poland")};
    return std::get<Transaction>(assemble_transaction(p, es, kPolicy, kSites, 0));
}

Block block_of(std::uint64_t index, Digest prev, std::vector<Transaction> txs)
{
    Block b;
    b.index = index;
    b.prev_hash = prev;
    b.transactions = std::move(txs);
    b.hash = block_digest(index, prev, transaction_ids(b));
    return b;
}

TEST(Execute, CreateWritesWithoutReading)
{
    WorldState s;
    auto e = execute_proposal(s, create("tx1", "asset1", "5"), "peer0.heidelberg");
    EXPECT_TRUE(e.read_set.entries.empty());
    ASSERT_EQ(e.write_set.entries.size(), 1u);
    EXPECT_EQ(e.write_set.entries[0], (WriteEntry{"asset1", "5"}));
    EXPECT_TRUE(e.signature_valid);
    EXPECT_EQ(e.endorser_id, "peer0.heidelberg");
}

TEST(Execute, UpdateReadsCommittedVersion)
{
    // Three blocks of history; k last written by block 3, transaction 1.
    Ledger l;
    Digest prev = kGenesisDigest;
    for (std::uint64_t b = 1; b <= 3; ++b)
    {
        std::vector<Transaction> txs{endorsed(l.state(), create("a" + std::to_string(b), "other" + std::to_string(b)))};
        if (b == 3)
            txs.push_back(endorsed(l.state(), create("k3", "k", "x")));
        auto blk = block_of(b, prev, std::move(txs));
        prev = blk.hash;
        validate_and_commit(l, blk, kPolicy, kSites, 0);
    }
    ASSERT_EQ(l.state().version_of("k"), (Version{3, 1}));
    auto e = execute_proposal(l.state(), update("u", "k", "y"), "peer0.poland");
    ASSERT_EQ(e.read_set.entries.size(), 1u);
    EXPECT_EQ(e.read_set.entries[0], (ReadEntry{"k", {3, 1}}));
    EXPECT_EQ(e.write_set.entries[0], (WriteEntry{"k", "y"}));
}

TEST(Execute, QueryOfAbsentKeyReadsZeroVersion)
{
    WorldState s;
    auto e = execute_proposal(s, Proposal{"q", "c", QueryOp{"nope"}, 0}, "peer0.poland");
    ASSERT_EQ(e.read_set.entries.size(), 1u);
    EXPECT_TRUE(e.read_set.entries[0].version.is_absent());
    EXPECT_TRUE(e.write_set.entries.empty());
}

TEST(Assemble, AcceptsWhenPolicyHolds)
{
    WorldState s;
    auto p = create("tx1", "k");
    auto r = assemble_transaction(p, {execute_proposal(s, p, "peer0.heidelberg"), execute_proposal(s, p, "peer0.poland")},
                                  kPolicy, kSites, 77);
    ASSERT_TRUE(std::holds_alternative<Transaction>(r));
    const auto& tx = std::get<Transaction>(r);
    EXPECT_EQ(tx.id, "tx1");
    EXPECT_EQ(tx.created_time, 77);
    EXPECT_EQ(tx.endorsements.size(), 2u);
}

TEST(Assemble, RejectsMissingOrBadlySignedEndorsements)
{
    WorldState s;
    auto p = create("tx1", "k");
    auto h = execute_proposal(s, p, "peer0.heidelberg");
    auto q = execute_proposal(s, p, "peer0.poland");
    EXPECT_TRUE(std::holds_alternative<ClientRejection>(assemble_transaction(p, {h}, kPolicy, kSites, 0)));
    q.signature_valid = false;
    auto r = assemble_transaction(p, {h, q}, kPolicy, kSites, 0);
    ASSERT_TRUE(std::holds_alternative<ClientRejection>(r));
    EXPECT_EQ(std::get<ClientRejection>(r).proposal_id, "tx1");
    // An endorsement from a different proposal is a caller bug.
    auto other = execute_proposal(s, create("tx2", "k"), "peer0.poland");
    EXPECT_THROW(assemble_transaction(p, {h, other}, kPolicy, kSites, 0), std::invalid_argument);
}

Transaction bare(int i)
{
    return Transaction{"tx" + std::to_string(i), {}, {}, {}, 0};
}

TEST(Orderer, CutsOnMessageCount)
{
    OrderingService o(BatchConfig{});
    for (int i = 1; i <= 9; ++i)
    {
        auto r = o.order_receive(bare(i), i * 85);
        EXPECT_FALSE(r.block);
        EXPECT_EQ(r.arm_timer.has_value(), i == 1);
    }
    auto r = o.order_receive(bare(10), 850);
    ASSERT_TRUE(r.block);
    EXPECT_EQ(r.block->index, 1u);
    EXPECT_EQ(r.block->transactions.size(), 10u);
    EXPECT_EQ(r.block->cut_time, 850);
    EXPECT_EQ(r.block->size_bytes, 46000u);
    EXPECT_EQ(r.block->prev_hash, kGenesisDigest);
    EXPECT_EQ(o.pending(), 0u);
}

TEST(Orderer, TimeoutFlushesPartialBatchAndIgnoresStaleTimers)
{
    OrderingService o(BatchConfig{});
    std::optional<std::uint64_t> gen;
    for (int i = 1; i <= 3; ++i)
        if (auto r = o.order_receive(bare(i), 0); r.arm_timer)
            gen = r.arm_timer;
    ASSERT_TRUE(gen);
    auto b = o.order_timeout(*gen, 1000);
    ASSERT_TRUE(b);
    EXPECT_EQ(b->transactions.size(), 3u);
    EXPECT_FALSE(o.order_timeout(*gen, 2000));  // nothing pending
    EXPECT_EQ(o.blocks_cut(), 1u);
}

TEST(Orderer, BlocksChainTheirHashes)
{
    OrderingService o(BatchConfig{2, 1000, 100});
    std::vector<Block> blocks;
    for (int i = 1; i <= 6; ++i)
        if (auto r = o.order_receive(bare(i), i); r.block)
            blocks.push_back(*r.block);
    ASSERT_EQ(blocks.size(), 3u);
    for (std::size_t i = 1; i < blocks.size(); ++i)
        EXPECT_EQ(blocks[i].prev_hash, blocks[i - 1].hash);
}

TEST(Orderer, SteadyFloodNeverReachesTimeout)
{
    // Replays submissions plus timer firings in time order; the timer armed by
    // each batch's first transaction is always stale when it fires.
    OrderingService o(BatchConfig{});
    std::priority_queue<std::pair<TimeMs, std::uint64_t>, std::vector<std::pair<TimeMs, std::uint64_t>>,
                        std::greater<>>
        timers;
    std::vector<TimeMs> cuts;
    for (int i = 1; i <= 1000; ++i)
    {
        TimeMs t = i * 85;
        while (!timers.empty() && timers.top().first <= t)
        {
            EXPECT_FALSE(o.order_timeout(timers.top().second, timers.top().first));
            timers.pop();
        }
        auto r = o.order_receive(bare(i), t);
        if (r.arm_timer)
            timers.push({t + 1000, *r.arm_timer});
        if (r.block)
            cuts.push_back(r.block->cut_time);
    }
    while (!timers.empty())
    {
        EXPECT_FALSE(o.order_timeout(timers.top().second, timers.top().first));
        timers.pop();
    }
    ASSERT_EQ(cuts.size(), 100u);
    for (std::size_t i = 0; i < cuts.size(); ++i)
        EXPECT_EQ(cuts[i], static_cast<TimeMs>(850 * (i + 1)));
}

TEST(Validate, SecondUpdateOfSameVersionIsRejected)
{
    Ledger l;
    auto genesis = block_of(1, kGenesisDigest, {endorsed(l.state(), create("c", "k", "0"))});
    validate_and_commit(l, genesis, kPolicy, kSites, 0);
    auto t1 = endorsed(l.state(), update("u1", "k", "1"));
    auto t2 = endorsed(l.state(), update("u2", "k", "2"));
    auto rep = validate_and_commit(l, block_of(2, genesis.hash, {t1, t2}), kPolicy, kSites, 5);
    EXPECT_EQ(rep.outcomes, (std::vector<TxOutcome>{TxOutcome::valid, TxOutcome::invalid_mvcc}));
    EXPECT_EQ(l.state().get("k")->value, "1");
    EXPECT_EQ(l.state().version_of("k"), (Version{2, 0}));
    EXPECT_EQ(l.blocks().back().validity, (std::vector<bool>{true, false}));
    EXPECT_EQ(l.blocks().back().transactions.size(), 2u);  // invalid ones stay in the block
    EXPECT_EQ(rep.commit_time, 5);
}

TEST(Validate, PolicyFailureLeavesStateUntouched)
{
    Ledger l;
    auto tx = endorsed(l.state(), create("c", "k"));
    tx.endorsements.pop_back();
    auto rep = validate_and_commit(l, block_of(1, kGenesisDigest, {tx}), kPolicy, kSites, 0);
    EXPECT_EQ(rep.outcomes, (std::vector<TxOutcome>{TxOutcome::invalid_policy}));
    EXPECT_EQ(l.state().size(), 0u);
    EXPECT_EQ(l.height(), 1u);
}

TEST(Validate, DistinctCreatesAreAllValid)
{
    Ledger l;
    std::vector<Transaction> txs;
    for (int i = 0; i < 10; ++i)
        txs.push_back(endorsed(l.state(), create("tx" + std::to_string(i), "asset" + std::to_string(i))));
    auto rep = validate_and_commit(l, block_of(1, kGenesisDigest, txs), kPolicy, kSites, 0);
    EXPECT_EQ(rep.valid_count(), 10u);
    EXPECT_EQ(l.state().version_of("asset7"), (Version{1, 7}));
}

TEST(Validate, OutOfOrderBlockThrows)
{
    Ledger l;
    EXPECT_THROW(validate_and_commit(l, block_of(2, kGenesisDigest, {}), kPolicy, kSites, 0), SimulationError);
}

TEST(Validate, MatchesSequentialReplayOnRandomWorkloads)
{
    for (std::uint64_t seed = 1; seed <= 100; ++seed)
    {
        auto w = testing::random_workload(seed);
        auto expected = testing::replay_mvcc(w.blocks, w.policy_ok);
        Ledger l;
        for (std::size_t b = 0; b < w.blocks.size(); ++b)
        {
            validate_and_commit(l, w.blocks[b], kPolicy, kSites, 0);
            EXPECT_EQ(l.blocks().back().validity, expected[b]) << "seed " << seed << " block " << b + 1;
        }
    }
}

}  // namespace
}  // namespace fabsim
