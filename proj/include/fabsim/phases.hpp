#pragma once

// The three pipeline stages: speculative execution on endorsers, block cutting
// at the ordering service, and validate-then-commit on every committing peer.

#include "fabsim/ledger.hpp"
#include "fabsim/model.hpp"
#include "fabsim/policy.hpp"

#include <deque>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace fabsim {

struct BatchConfig
{
    std::uint32_t max_message_count = 10;
    TimeMs batch_timeout_ms = 1000;
    std::uint32_t block_size_bytes = 46000;

    /// Throws std::invalid_argument when a field is zero.
    void validate() const;
    friend bool operator==(const BatchConfig&, const BatchConfig&) = default;
};

enum class TxOutcome : std::uint8_t
{
    valid,
    invalid_policy,
    invalid_mvcc,
};

const char* to_string(TxOutcome outcome) noexcept;

struct ValidationReport
{
    std::uint64_t block_index = 0;
    std::vector<TxOutcome> outcomes;
    TimeMs commit_time = 0;

    std::size_t valid_count() const noexcept;
    std::size_t invalid_count() const noexcept { return outcomes.size() - valid_count(); }
};

/// Runs the fixed key-value chaincode against an endorser's committed state.
/// The state is only read; the result is a signed read/write set.
Endorsement execute_proposal(const WorldState& state, const Proposal& proposal, const std::string& endorser_id);

struct ClientRejection
{
    std::string proposal_id;
    std::string reason;
};

using AssemblyResult = std::variant<Transaction, ClientRejection>;

/// Packages endorsements into a transaction once they satisfy the policy.
AssemblyResult assemble_transaction(const Proposal& proposal, const std::vector<Endorsement>& endorsements,
                                    const Policy& policy, const PeerSites& peer_sites, TimeMs now);

/// Single logical ordering service for one channel.
class OrderingService
{
public:
    explicit OrderingService(BatchConfig config);

    struct Receipt
    {
        std::optional<Block> block;
        /// Set when this transaction opened a new batch; the caller fires
        /// order_timeout(generation) batch_timeout_ms later.
        std::optional<std::uint64_t> arm_timer;
    };

    Receipt order_receive(Transaction tx, TimeMs now);

    /// Flushes the pending batch if `generation` still names it. Stale timers
    /// (the batch was already cut on count) and empty batches yield nothing.
    std::optional<Block> order_timeout(std::uint64_t generation, TimeMs now);

    std::size_t pending() const noexcept { return pending_.size(); }
    std::uint64_t blocks_cut() const noexcept { return next_index_ - 1; }
    const BatchConfig& config() const noexcept { return config_; }

private:
    Block cut(TimeMs now);

    BatchConfig config_;
    std::vector<Transaction> pending_;
    std::uint64_t next_index_ = 1;
    Digest prev_hash_ = kGenesisDigest;
    std::uint64_t generation_ = 0;
};

/// Validates `block` transaction by transaction (policy, then read-set
/// versions against the current world state), applies the writes of valid
/// transactions at version (block.index, tx_index) and appends the block with
/// its validity flags. Throws SimulationError if the block is not the next height.
ValidationReport validate_and_commit(Ledger& ledger, Block block, const Policy& policy, const PeerSites& peer_sites,
                                     TimeMs now);

}  // namespace fabsim
