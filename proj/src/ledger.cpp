#include "fabsim/ledger.hpp"

namespace fabsim {

namespace {

Digest entry_digest(const std::string& key, const VersionedValue& v)
{
    Digest h = fnv1a64(key);
    h = fnv1a64(v.value, h ^ 0x9e3779b97f4a7c15ULL);
    h ^= v.version.block_index * 0xff51afd7ed558ccdULL;
    h ^= static_cast<Digest>(v.version.tx_index) * 0xc4ceb9fe1a85ec53ULL;
    return h * 0x100000001b3ULL;
}

}  // namespace

Version WorldState::version_of(const std::string& key) const
{
    auto it = entries_.find(key);
    return it == entries_.end() ? Version::absent() : it->second.version;
}

std::optional<VersionedValue> WorldState::get(const std::string& key) const
{
    auto it = entries_.find(key);
    if (it == entries_.end())
        return std::nullopt;
    return it->second;
}

void WorldState::put(const std::string& key, std::string value, Version version)
{
    auto [it, inserted] = entries_.try_emplace(key);
    if (!inserted)
        digest_ -= entry_digest(key, it->second);
    it->second = VersionedValue{std::move(value), version};
    digest_ += entry_digest(key, it->second);
}

void Ledger::append(Block block)
{
    if (block.index != height() + 1)
        throw SimulationError("block " + std::to_string(block.index) + " appended at height " +
                              std::to_string(height()));
    if (block.prev_hash != tip_hash())
        throw SimulationError("block " + std::to_string(block.index) + " does not extend the chain tip");
    blocks_.push_back(std::move(block));
    state_digests_.push_back(state_.digest());
}

bool Ledger::chain_intact() const
{
    Digest prev = kGenesisDigest;
    for (std::size_t i = 0; i < blocks_.size(); ++i)
    {
        const auto& b = blocks_[i];
        if (b.index != i + 1 || b.prev_hash != prev)
            return false;
        if (b.hash != block_digest(b.index, b.prev_hash, transaction_ids(b)))
            return false;
        prev = b.hash;
    }
    return true;
}

}  // namespace fabsim
