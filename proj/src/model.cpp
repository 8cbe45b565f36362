#include "fabsim/model.hpp"

#include <algorithm>
#include <type_traits>

namespace fabsim {

std::string to_string(const Version& v)
{
    return "(" + std::to_string(v.block_index) + "," + std::to_string(v.tx_index) + ")";
}

void ReadSet::add(std::string key, Version version)
{
    auto it = std::find_if(entries.begin(), entries.end(), [&](const ReadEntry& e) { return e.key == key; });
    if (it == entries.end())
        entries.push_back({std::move(key), version});
}

void WriteSet::put(std::string key, std::string value)
{
    auto it = std::find_if(entries.begin(), entries.end(), [&](const WriteEntry& e) { return e.key == key; });
    if (it == entries.end())
        entries.push_back({std::move(key), std::move(value)});
    else
        it->value = std::move(value);
}

Digest fnv1a64(std::span<const std::uint8_t> bytes, Digest seed) noexcept
{
    Digest h = seed;
    for (auto b : bytes)
    {
        h ^= b;
        h *= 0x100000001b3ULL;
    }
    return h;
}

Digest fnv1a64(std::string_view text, Digest seed) noexcept
{
    return fnv1a64(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()), seed);
}

namespace {

class Writer
{
public:
    template <typename T>
    void uint(T v)
    {
        static_assert(std::is_unsigned_v<T>);
        for (std::size_t i = 0; i < sizeof(T); ++i)
            out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void i64(std::int64_t v) { uint(static_cast<std::uint64_t>(v)); }
    void boolean(bool v) { out_.push_back(v ? 1 : 0); }
    void str(std::string_view s)
    {
        uint(static_cast<std::uint32_t>(s.size()));
        out_.insert(out_.end(), s.begin(), s.end());
    }
    Bytes take() { return std::move(out_); }

private:
    Bytes out_;
};

class Reader
{
public:
    explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

    template <typename T>
    T uint()
    {
        need(sizeof(T));
        T v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i)
            v |= static_cast<T>(static_cast<T>(in_[pos_ + i]) << (8 * i));
        pos_ += sizeof(T);
        return v;
    }
    std::int64_t i64() { return static_cast<std::int64_t>(uint<std::uint64_t>()); }
    bool boolean()
    {
        auto b = uint<std::uint8_t>();
        if (b > 1)
            throw DecodeError("invalid boolean byte");
        return b == 1;
    }
    std::string str()
    {
        auto n = uint<std::uint32_t>();
        need(n);
        std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
        pos_ += n;
        return s;
    }
    void finish() const
    {
        if (pos_ != in_.size())
            throw DecodeError("trailing bytes after record");
    }

private:
    void need(std::size_t n) const
    {
        if (in_.size() - pos_ < n)
            throw DecodeError("truncated record");
    }

    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
};

void put_version(Writer& w, const Version& v)
{
    w.uint(v.block_index);
    w.uint(v.tx_index);
}

Version get_version(Reader& r)
{
    Version v;
    v.block_index = r.uint<std::uint64_t>();
    v.tx_index = r.uint<std::uint32_t>();
    return v;
}

void put_sets(Writer& w, const ReadSet& rs, const WriteSet& ws)
{
    w.uint(static_cast<std::uint32_t>(rs.entries.size()));
    for (const auto& e : rs.entries)
    {
        w.str(e.key);
        put_version(w, e.version);
    }
    w.uint(static_cast<std::uint32_t>(ws.entries.size()));
    for (const auto& e : ws.entries)
    {
        w.str(e.key);
        w.str(e.value);
    }
}

void get_sets(Reader& r, ReadSet& rs, WriteSet& ws)
{
    auto nr = r.uint<std::uint32_t>();
    for (std::uint32_t i = 0; i < nr; ++i)
    {
        auto key = r.str();
        rs.entries.push_back({std::move(key), get_version(r)});
    }
    auto nw = r.uint<std::uint32_t>();
    for (std::uint32_t i = 0; i < nw; ++i)
    {
        auto key = r.str();
        ws.entries.push_back({std::move(key), r.str()});
    }
}

void put_tx(Writer& w, const Transaction& tx)
{
    w.str(tx.id);
    put_sets(w, tx.read_set, tx.write_set);
    w.uint(static_cast<std::uint32_t>(tx.endorsements.size()));
    for (const auto& e : tx.endorsements)
    {
        w.str(e.proposal_id);
        w.str(e.endorser_id);
        put_sets(w, e.read_set, e.write_set);
        w.boolean(e.signature_valid);
    }
    w.i64(tx.created_time);
}

Transaction get_tx(Reader& r)
{
    Transaction tx;
    tx.id = r.str();
    get_sets(r, tx.read_set, tx.write_set);
    auto ne = r.uint<std::uint32_t>();
    for (std::uint32_t i = 0; i < ne; ++i)
    {
        Endorsement e;
        e.proposal_id = r.str();
        e.endorser_id = r.str();
        get_sets(r, e.read_set, e.write_set);
        e.signature_valid = r.boolean();
        tx.endorsements.push_back(std::move(e));
    }
    tx.created_time = r.i64();
    return tx;
}

void put_block(Writer& w, const Block& b)
{
    w.uint(b.index);
    w.uint(b.prev_hash);
    w.uint(b.hash);
    w.uint(static_cast<std::uint32_t>(b.transactions.size()));
    for (const auto& tx : b.transactions)
        put_tx(w, tx);
    w.uint(static_cast<std::uint32_t>(b.validity.size()));
    for (bool v : b.validity)
        w.boolean(v);
    w.i64(b.cut_time);
    w.uint(b.size_bytes);
}

Block get_block(Reader& r)
{
    Block b;
    b.index = r.uint<std::uint64_t>();
    b.prev_hash = r.uint<std::uint64_t>();
    b.hash = r.uint<std::uint64_t>();
    auto nt = r.uint<std::uint32_t>();
    for (std::uint32_t i = 0; i < nt; ++i)
        b.transactions.push_back(get_tx(r));
    auto nv = r.uint<std::uint32_t>();
    for (std::uint32_t i = 0; i < nv; ++i)
        b.validity.push_back(r.boolean());
    b.cut_time = r.i64();
    b.size_bytes = r.uint<std::uint32_t>();
    return b;
}

}  // namespace

Bytes canonical_header(std::uint64_t index, Digest prev_hash, std::span<const std::string> tx_ids)
{
    Writer w;
    w.uint(index);
    w.uint(prev_hash);
    w.uint(static_cast<std::uint32_t>(tx_ids.size()));
    for (const auto& id : tx_ids)
        w.str(id);
    return w.take();
}

Digest block_digest(std::uint64_t index, Digest prev_hash, std::span<const std::string> tx_ids)
{
    return fnv1a64(canonical_header(index, prev_hash, tx_ids));
}

std::vector<std::string> transaction_ids(const Block& block)
{
    std::vector<std::string> ids;
    ids.reserve(block.transactions.size());
    for (const auto& tx : block.transactions)
        ids.push_back(tx.id);
    return ids;
}

Bytes encode(const Transaction& tx)
{
    Writer w;
    put_tx(w, tx);
    return w.take();
}

Bytes encode(const Block& block)
{
    Writer w;
    put_block(w, block);
    return w.take();
}

Bytes encode(const Proposal& p)
{
    Writer w;
    w.str(p.id);
    w.str(p.client_id);
    w.uint(static_cast<std::uint8_t>(p.op.index()));
    std::visit(
        [&](const auto& op) {
            using T = std::decay_t<decltype(op)>;
            w.str(op.key);
            if constexpr (!std::is_same_v<T, QueryOp>)
                w.str(op.value);
        },
        p.op);
    w.i64(p.submit_time);
    return w.take();
}

Transaction decode_transaction(std::span<const std::uint8_t> bytes)
{
    Reader r(bytes);
    auto tx = get_tx(r);
    r.finish();
    return tx;
}

Block decode_block(std::span<const std::uint8_t> bytes)
{
    Reader r(bytes);
    auto b = get_block(r);
    r.finish();
    return b;
}

Proposal decode_proposal(std::span<const std::uint8_t> bytes)
{
    Reader r(bytes);
    Proposal p;
    p.id = r.str();
    p.client_id = r.str();
    auto kind = r.uint<std::uint8_t>();
    auto key = r.str();
    switch (kind)
    {
    case 0: p.op = CreateOp{std::move(key), r.str()}; break;
    case 1: p.op = UpdateOp{std::move(key), r.str()}; break;
    case 2: p.op = QueryOp{std::move(key)}; break;
    default: throw DecodeError("unknown chaincode op tag");
    }
    p.submit_time = r.i64();
    r.finish();
    return p;
}

}  // namespace fabsim
