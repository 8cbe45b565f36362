#include "fabsim/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace fabsim {

void CommitLog::register_peer(const std::string& peer_id)
{
    per_peer_.try_emplace(peer_id);
}

void CommitLog::record(CommitEntry entry)
{
    auto& commits = per_peer_[entry.peer_id];
    if (!commits.empty())
    {
        auto [last_index, last_time] = *commits.rbegin();
        if (entry.block_index <= last_index || entry.commit_time < last_time)
            throw MetricsError("commit of block " + std::to_string(entry.block_index) + " on " + entry.peer_id +
                               " breaks per-peer ordering");
    }
    commits.emplace(entry.block_index, entry.commit_time);
    entries_.push_back(std::move(entry));
}

void CommitLog::record_halt(const std::string& peer_id, TimeMs time, std::string reason)
{
    per_peer_.try_emplace(peer_id);
    halts_.push_back(HaltEntry{peer_id, time, std::move(reason)});
}

bool CommitLog::halted(const std::string& peer_id) const
{
    return std::any_of(halts_.begin(), halts_.end(), [&](const HaltEntry& h) { return h.peer_id == peer_id; });
}

std::optional<TimeMs> CommitLog::commit_time(const std::string& peer_id, std::uint64_t block_index) const
{
    auto p = per_peer_.find(peer_id);
    if (p == per_peer_.end())
        return std::nullopt;
    auto it = p->second.find(block_index);
    if (it == p->second.end())
        return std::nullopt;
    return it->second;
}

const std::map<std::uint64_t, TimeMs>& CommitLog::commits_of(const std::string& peer_id) const
{
    auto p = per_peer_.find(peer_id);
    if (p == per_peer_.end())
        throw MetricsError("unknown peer " + peer_id);
    return p->second;
}

std::optional<TimeMs> OffsetSeries::at(std::uint64_t block_index) const
{
    auto it = std::lower_bound(offsets.begin(), offsets.end(), block_index,
                               [](const auto& entry, std::uint64_t i) { return entry.first < i; });
    if (it == offsets.end() || it->first != block_index)
        return std::nullopt;
    return it->second;
}

OffsetSeries compute_offsets(const CommitLog& log, const std::string& reference_peer, const std::string& target_peer)
{
    const auto& ref = log.commits_of(reference_peer);
    const auto& tgt = log.commits_of(target_peer);
    OffsetSeries s;
    s.reference_peer = reference_peer;
    s.target_peer = target_peer;
    s.target_halted = log.halted(target_peer);
    for (const auto& [index, t_ref] : ref)
    {
        if (auto it = tgt.find(index); it != tgt.end())
            s.offsets.emplace_back(index, it->second - t_ref);
        else
            s.missing.push_back(index);
    }
    return s;
}

std::vector<SummaryRow> summarize(const std::vector<OffsetSeries>& runs, const std::vector<std::uint64_t>& row_indices)
{
    if (runs.empty())
        throw MetricsError("summarize needs at least one run");
    std::vector<SummaryRow> rows;
    for (auto index : row_indices)
    {
        SummaryRow row{index, std::nullopt, 0};
        double sum = 0;
        for (const auto& r : runs)
        {
            if (auto v = r.at(index))
            {
                sum += static_cast<double>(*v);
                ++row.runs;
            }
        }
        if (row.runs > 0)
            row.mean_offset_ms = sum / static_cast<double>(row.runs);
        rows.push_back(row);
    }
    return rows;
}

double slope(const OffsetSeries& series, std::uint64_t from_index, std::uint64_t to_index)
{
    if (from_index == to_index)
        throw MetricsError("slope needs two distinct block indices");
    auto a = series.at(from_index);
    auto b = series.at(to_index);
    if (!a || !b)
        throw MetricsError("slope: block " + std::to_string(a ? to_index : from_index) + " has no offset");
    return static_cast<double>(*b - *a) / (static_cast<double>(to_index) - static_cast<double>(from_index));
}

void write_run_rows(std::ostream& out, const RunRecord& run)
{
    const auto& ref = run.log.commits_of(run.reference_peer);
    for (const auto& peer : run.peers)
    {
        const auto& commits = run.log.commits_of(peer);
        const int halted = run.log.halted(peer) ? 1 : 0;
        for (std::uint64_t b = 1; b <= run.blocks_cut; ++b)
        {
            out << run.run_id << ',' << run.delay_ms << ',' << run.seed << ',' << peer << ',' << b << ',';
            auto c = commits.find(b);
            auto r = ref.find(b);
            if (c != commits.end())
                out << c->second;
            out << ',';
            if (c != commits.end() && r != ref.end())
                out << (c->second - r->second);
            out << ',' << halted << '\n';
        }
    }
}

void write_run_csv(std::ostream& out, const std::vector<RunRecord>& runs)
{
    out << kRunCsvHeader << '\n';
    for (const auto& r : runs)
        write_run_rows(out, r);
}

std::string format_mean(const std::optional<double>& mean)
{
    if (!mean)
        return {};
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.1f", *mean);
    return buf;
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryColumn>& columns)
{
    out << kSummaryCsvHeader << '\n';
    for (const auto& c : columns)
        for (const auto& r : c.rows)
            out << c.delay_ms << ',' << r.block_index << ',' << format_mean(r.mean_offset_ms) << ',' << r.runs << '\n';
}

namespace {

std::vector<std::string> split(const std::string& line)
{
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ','))
        out.push_back(field);
    if (!line.empty() && line.back() == ',')
        out.emplace_back();
    return out;
}

template <typename T>
T parse_number(const std::string& s, std::size_t line)
{
    T value{};
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw MetricsError("line " + std::to_string(line) + ": bad number '" + s + "'");
    return value;
}

}  // namespace

std::vector<SummaryColumn> read_summary_csv(std::istream& in)
{
    std::string line;
    if (!std::getline(in, line) || line != kSummaryCsvHeader)
        throw MetricsError("expected summary header '" + std::string(kSummaryCsvHeader) + "'");
    std::vector<SummaryColumn> columns;
    std::size_t n = 1;
    while (std::getline(in, line))
    {
        ++n;
        if (line.empty())
            continue;
        auto f = split(line);
        if (f.size() != 4)
            throw MetricsError("line " + std::to_string(n) + ": expected 4 fields");
        auto delay = parse_number<TimeMs>(f[0], n);
        SummaryRow row;
        row.block_index = parse_number<std::uint64_t>(f[1], n);
        if (!f[2].empty())
        {
            std::istringstream num(f[2]);
            double v = 0;
            if (!(num >> v))
                throw MetricsError("line " + std::to_string(n) + ": bad mean '" + f[2] + "'");
            row.mean_offset_ms = v;
        }
        row.runs = parse_number<std::size_t>(f[3], n);
        if (columns.empty() || columns.back().delay_ms != delay)
            columns.push_back(SummaryColumn{delay, {}});
        columns.back().rows.push_back(row);
    }
    return columns;
}

std::string format_table(const std::vector<SummaryColumn>& columns)
{
    std::set<std::uint64_t> indices;
    for (const auto& c : columns)
        for (const auto& r : c.rows)
            indices.insert(r.block_index);

    std::ostringstream out;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%-10s", "ith-Block");
    out << buf;
    for (const auto& c : columns)
    {
        std::string head = c.delay_ms == 0 ? "No delay" : std::to_string(c.delay_ms) + "ms";
        std::snprintf(buf, sizeof buf, "%12s", head.c_str());
        out << buf;
    }
    out << '\n';
    for (auto index : indices)
    {
        std::snprintf(buf, sizeof buf, "%-10llu", static_cast<unsigned long long>(index));
        out << buf;
        for (const auto& c : columns)
        {
            auto it = std::find_if(c.rows.begin(), c.rows.end(), [&](const SummaryRow& r) { return r.block_index == index; });
            std::string cell = it == c.rows.end() ? "" : format_mean(it->mean_offset_ms);
            if (cell.empty())
                cell = "-";
            std::snprintf(buf, sizeof buf, "%12s", cell.c_str());
            out << buf;
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace fabsim
