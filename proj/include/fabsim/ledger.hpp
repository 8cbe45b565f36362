#pragma once

#include "fabsim/model.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fabsim {

struct VersionedValue
{
    std::string value;
    Version version;
    friend bool operator==(const VersionedValue&, const VersionedValue&) = default;
};

/// Latest (value, version) for every key. Keeps an order-independent digest of
/// its contents up to date on every write so replicas can be compared per height.
class WorldState
{
public:
    /// Version of `key`, or (0,0) when the key has never been written.
    Version version_of(const std::string& key) const;
    std::optional<VersionedValue> get(const std::string& key) const;
    void put(const std::string& key, std::string value, Version version);

    std::size_t size() const noexcept { return entries_.size(); }
    Digest digest() const noexcept { return digest_; }
    const std::map<std::string, VersionedValue>& entries() const noexcept { return entries_; }

    friend bool operator==(const WorldState& a, const WorldState& b) { return a.entries_ == b.entries_; }

private:
    std::map<std::string, VersionedValue> entries_;
    Digest digest_ = 0;
};

/// Per-peer replica: the committed chain plus the world state it produced.
class Ledger
{
public:
    std::uint64_t height() const noexcept { return blocks_.size(); }
    const std::vector<Block>& blocks() const noexcept { return blocks_; }
    const WorldState& state() const noexcept { return state_; }
    WorldState& mutable_state() noexcept { return state_; }
    Digest tip_hash() const noexcept { return blocks_.empty() ? kGenesisDigest : blocks_.back().hash; }

    /// World-state digest after each height; state_digests()[h-1] is the digest at height h.
    const std::vector<Digest>& state_digests() const noexcept { return state_digests_; }

    /// Appends a committed block. Requires the next index and a matching prev_hash.
    void append(Block block);

    /// True when prev_hash links hold for every block and indices run 1..height.
    bool chain_intact() const;

private:
    std::vector<Block> blocks_;
    WorldState state_;
    std::vector<Digest> state_digests_;
};

}  // namespace fabsim
