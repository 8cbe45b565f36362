#pragma once

// Domain types shared by every stage of the execute-order-validate pipeline.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace fabsim {

/// Virtual time in integer milliseconds.
using TimeMs = std::int64_t;

using Digest = std::uint64_t;
using Bytes = std::vector<std::uint8_t>;

/// Raised when the simulation reaches a state its protocol rules out
/// (out-of-order delivery, duplicate acks, scheduling in the past).
class SimulationError : public std::logic_error
{
public:
    using std::logic_error::logic_error;
};

class DecodeError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Key version as (block height, position within block). (0,0) marks an absent key.
struct Version
{
    std::uint64_t block_index = 0;
    std::uint32_t tx_index = 0;

    static constexpr Version absent() noexcept { return {}; }
    constexpr bool is_absent() const noexcept { return block_index == 0 && tx_index == 0; }

    friend constexpr auto operator<=>(const Version&, const Version&) = default;
};

std::string to_string(const Version& v);

struct ReadEntry
{
    std::string key;
    Version version;
    friend bool operator==(const ReadEntry&, const ReadEntry&) = default;
};

struct WriteEntry
{
    std::string key;
    std::string value;
    friend bool operator==(const WriteEntry&, const WriteEntry&) = default;
};

struct ReadSet
{
    std::vector<ReadEntry> entries;

    /// Records a read; a second read of the same key keeps the first version.
    void add(std::string key, Version version);
    friend bool operator==(const ReadSet&, const ReadSet&) = default;
};

struct WriteSet
{
    std::vector<WriteEntry> entries;

    /// Records a write; a later write to the same key replaces the value.
    void put(std::string key, std::string value);
    friend bool operator==(const WriteSet&, const WriteSet&) = default;
};

struct CreateOp
{
    std::string key;
    std::string value;
    friend bool operator==(const CreateOp&, const CreateOp&) = default;
};

struct UpdateOp
{
    std::string key;
    std::string value;
    friend bool operator==(const UpdateOp&, const UpdateOp&) = default;
};

struct QueryOp
{
    std::string key;
    friend bool operator==(const QueryOp&, const QueryOp&) = default;
};

using ChaincodeOp = std::variant<CreateOp, UpdateOp, QueryOp>;

struct Proposal
{
    std::string id;
    std::string client_id;
    ChaincodeOp op;
    TimeMs submit_time = 0;
    friend bool operator==(const Proposal&, const Proposal&) = default;
};

struct Endorsement
{
    std::string proposal_id;
    std::string endorser_id;
    ReadSet read_set;
    WriteSet write_set;
    bool signature_valid = true;
    friend bool operator==(const Endorsement&, const Endorsement&) = default;
};

struct Transaction
{
    std::string id;
    ReadSet read_set;
    WriteSet write_set;
    std::vector<Endorsement> endorsements;
    TimeMs created_time = 0;
    friend bool operator==(const Transaction&, const Transaction&) = default;
};

inline constexpr Digest kGenesisDigest = 0;

struct Block
{
    std::uint64_t index = 0;
    Digest prev_hash = kGenesisDigest;
    Digest hash = 0;
    std::vector<Transaction> transactions;
    std::vector<bool> validity;  // empty until committed
    TimeMs cut_time = 0;
    std::uint32_t size_bytes = 0;
    friend bool operator==(const Block&, const Block&) = default;
};

struct PeerSpec
{
    std::string peer_id;
    std::string site_label;
    bool endorser = false;
    bool committer = true;
    friend bool operator==(const PeerSpec&, const PeerSpec&) = default;
};

/// Digest of a block header over its canonical serialization:
///
///   u64 LE index | u64 LE prev_hash | u32 LE tx count |
///   for each tx id: u32 LE byte length, raw bytes
///
/// hashed with 64-bit FNV-1a (offset basis 0xcbf29ce484222325, prime 0x100000001b3).
Digest block_digest(std::uint64_t index, Digest prev_hash, std::span<const std::string> tx_ids);

/// Canonical header bytes that block_digest hashes.
Bytes canonical_header(std::uint64_t index, Digest prev_hash, std::span<const std::string> tx_ids);

Digest fnv1a64(std::span<const std::uint8_t> bytes, Digest seed = 0xcbf29ce484222325ULL) noexcept;
Digest fnv1a64(std::string_view text, Digest seed = 0xcbf29ce484222325ULL) noexcept;

std::vector<std::string> transaction_ids(const Block& block);

// Binary codec for the domain types (little-endian, u32 length prefixes).
Bytes encode(const Transaction& tx);
Bytes encode(const Block& block);
Bytes encode(const Proposal& proposal);
Transaction decode_transaction(std::span<const std::uint8_t> bytes);
Block decode_block(std::span<const std::uint8_t> bytes);
Proposal decode_proposal(std::span<const std::uint8_t> bytes);

}  // namespace fabsim
