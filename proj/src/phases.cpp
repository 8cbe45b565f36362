#include "fabsim/phases.hpp"

#include <algorithm>
#include <stdexcept>

namespace fabsim {

void BatchConfig::validate() const
{
    if (max_message_count == 0 || batch_timeout_ms <= 0 || block_size_bytes == 0)
        throw std::invalid_argument("batch config fields must be positive");
}

const char* to_string(TxOutcome outcome) noexcept
{
    switch (outcome)
    {
    case TxOutcome::valid: return "valid";
    case TxOutcome::invalid_policy: return "invalid_policy";
    case TxOutcome::invalid_mvcc: return "invalid_mvcc";
    }
    return "?";
}

std::size_t ValidationReport::valid_count() const noexcept
{
    return static_cast<std::size_t>(std::count(outcomes.begin(), outcomes.end(), TxOutcome::valid));
}

Endorsement execute_proposal(const WorldState& state, const Proposal& proposal, const std::string& endorser_id)
{
    Endorsement e;
    e.proposal_id = proposal.id;
    e.endorser_id = endorser_id;
    e.signature_valid = true;
    std::visit(
        [&](const auto& op) {
            using T = std::decay_t<decltype(op)>;
            if constexpr (std::is_same_v<T, CreateOp>)
            {
                e.write_set.put(op.key, op.value);
            }
            else if constexpr (std::is_same_v<T, UpdateOp>)
            {
                e.read_set.add(op.key, state.version_of(op.key));
                e.write_set.put(op.key, op.value);
            }
            else
            {
                e.read_set.add(op.key, state.version_of(op.key));
            }
        },
        proposal.op);
    return e;
}

AssemblyResult assemble_transaction(const Proposal& proposal, const std::vector<Endorsement>& endorsements,
                                    const Policy& policy, const PeerSites& peer_sites, TimeMs now)
{
    for (const auto& e : endorsements)
        if (e.proposal_id != proposal.id)
            throw std::invalid_argument("endorsement for " + e.proposal_id + " offered to proposal " + proposal.id);

    if (!evaluate(policy, endorsements, peer_sites))
        return ClientRejection{proposal.id, "endorsements do not satisfy " + print_policy(policy)};

    auto first_valid = std::find_if(endorsements.begin(), endorsements.end(),
                                    [](const Endorsement& e) { return e.signature_valid; });
    Transaction tx;
    tx.id = proposal.id;
    tx.read_set = first_valid->read_set;
    tx.write_set = first_valid->write_set;
    tx.endorsements = endorsements;
    tx.created_time = now;
    return tx;
}

OrderingService::OrderingService(BatchConfig config) : config_(config)
{
    config_.validate();
}

OrderingService::Receipt OrderingService::order_receive(Transaction tx, TimeMs now)
{
    Receipt r;
    pending_.push_back(std::move(tx));
    if (pending_.size() == 1)
        r.arm_timer = ++generation_;
    if (pending_.size() >= config_.max_message_count)
        r.block = cut(now);
    return r;
}

std::optional<Block> OrderingService::order_timeout(std::uint64_t generation, TimeMs now)
{
    if (generation != generation_ || pending_.empty())
        return std::nullopt;
    return cut(now);
}

Block OrderingService::cut(TimeMs now)
{
    Block b;
    b.index = next_index_++;
    b.prev_hash = prev_hash_;
    b.transactions = std::move(pending_);
    pending_.clear();
    b.hash = block_digest(b.index, b.prev_hash, transaction_ids(b));
    b.cut_time = now;
    b.size_bytes = config_.block_size_bytes;
    prev_hash_ = b.hash;
    ++generation_;  // invalidates the timer armed for this batch
    return b;
}

ValidationReport validate_and_commit(Ledger& ledger, Block block, const Policy& policy, const PeerSites& peer_sites,
                                     TimeMs now)
{
    if (block.index != ledger.height() + 1)
        throw SimulationError("out-of-order block " + std::to_string(block.index) + " at height " +
                              std::to_string(ledger.height()));

    ValidationReport report;
    report.block_index = block.index;
    report.commit_time = now;
    block.validity.assign(block.transactions.size(), false);

    auto& state = ledger.mutable_state();
    for (std::size_t i = 0; i < block.transactions.size(); ++i)
    {
        const auto& tx = block.transactions[i];
        if (!evaluate(policy, tx.endorsements, peer_sites))
        {
            report.outcomes.push_back(TxOutcome::invalid_policy);
            continue;
        }
        bool fresh = std::all_of(tx.read_set.entries.begin(), tx.read_set.entries.end(),
                                 [&](const ReadEntry& r) { return state.version_of(r.key) == r.version; });
        if (!fresh)
        {
            report.outcomes.push_back(TxOutcome::invalid_mvcc);
            continue;
        }
        Version written{block.index, static_cast<std::uint32_t>(i)};
        for (const auto& w : tx.write_set.entries)
            state.put(w.key, w.value, written);
        block.validity[i] = true;
        report.outcomes.push_back(TxOutcome::valid);
    }
    ledger.append(std::move(block));
    return report;
}

}  // namespace fabsim
