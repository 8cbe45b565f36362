#pragma once

// Commit-time bookkeeping and the inter-site offsets derived from it.

#include "fabsim/model.hpp"

#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fabsim {

class MetricsError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

struct CommitEntry
{
    std::string peer_id;
    std::uint64_t block_index = 0;
    TimeMs commit_time = 0;
    std::uint32_t valid_count = 0;
    std::uint32_t invalid_count = 0;
    friend bool operator==(const CommitEntry&, const CommitEntry&) = default;
};

struct HaltEntry
{
    std::string peer_id;
    TimeMs time = 0;
    std::string reason;
    friend bool operator==(const HaltEntry&, const HaltEntry&) = default;
};

/// Append-only record of block commits per peer.
class CommitLog
{
public:
    /// Makes a peer known before its first commit.
    void register_peer(const std::string& peer_id);

    /// Throws MetricsError unless block_index grows and commit_time does not decrease per peer.
    void record(CommitEntry entry);
    void record_halt(const std::string& peer_id, TimeMs time, std::string reason);

    bool knows(const std::string& peer_id) const { return per_peer_.contains(peer_id); }
    bool halted(const std::string& peer_id) const;
    std::optional<TimeMs> commit_time(const std::string& peer_id, std::uint64_t block_index) const;
    /// block index -> commit time for one peer.
    const std::map<std::uint64_t, TimeMs>& commits_of(const std::string& peer_id) const;

    const std::vector<CommitEntry>& entries() const noexcept { return entries_; }
    const std::vector<HaltEntry>& halts() const noexcept { return halts_; }

private:
    std::vector<CommitEntry> entries_;
    std::vector<HaltEntry> halts_;
    std::map<std::string, std::map<std::uint64_t, TimeMs>> per_peer_;
};

struct OffsetSeries
{
    std::string reference_peer;
    std::string target_peer;
    /// (block index, target commit - reference commit), only for blocks both committed.
    std::vector<std::pair<std::uint64_t, TimeMs>> offsets;
    /// Blocks the reference committed that the target never did.
    std::vector<std::uint64_t> missing;
    bool target_halted = false;

    std::optional<TimeMs> at(std::uint64_t block_index) const;
};

/// Throws MetricsError for a peer the log does not know.
OffsetSeries compute_offsets(const CommitLog& log, const std::string& reference_peer, const std::string& target_peer);

inline const std::vector<std::uint64_t> kTableRows = {1, 10, 19, 30, 40, 49, 60, 70, 79, 88, 97};

struct SummaryRow
{
    std::uint64_t block_index = 0;
    std::optional<double> mean_offset_ms;  // nullopt when no run reached the block
    std::size_t runs = 0;
    friend bool operator==(const SummaryRow&, const SummaryRow&) = default;
};

/// Arithmetic mean per block index over the runs that have that block.
std::vector<SummaryRow> summarize(const std::vector<OffsetSeries>& runs,
                                  const std::vector<std::uint64_t>& row_indices = kTableRows);

/// (offset(to) - offset(from)) / (to - from). Throws MetricsError if either index is absent.
double slope(const OffsetSeries& series, std::uint64_t from_index = 1, std::uint64_t to_index = 97);

// ---- CSV ---------------------------------------------------------------

inline constexpr const char* kRunCsvHeader = "run_id,delay_ms,seed,peer_id,block_index,commit_time_ms,offset_ms,halted";
inline constexpr const char* kSummaryCsvHeader = "delay_ms,block_index,mean_offset_ms,runs";

struct RunRecord
{
    std::uint64_t run_id = 0;
    TimeMs delay_ms = 0;
    std::uint64_t seed = 0;
    std::string reference_peer;
    std::vector<std::string> peers;  // row order
    std::uint64_t blocks_cut = 0;
    CommitLog log;
};

/// One row per (peer, block 1..blocks_cut); missing commit times and offsets are empty fields.
void write_run_rows(std::ostream& out, const RunRecord& run);
void write_run_csv(std::ostream& out, const std::vector<RunRecord>& runs);

struct SummaryColumn
{
    TimeMs delay_ms = 0;
    std::vector<SummaryRow> rows;
    friend bool operator==(const SummaryColumn&, const SummaryColumn&) = default;
};

/// Mean formatted with one decimal; empty when absent.
std::string format_mean(const std::optional<double>& mean);

void write_summary_csv(std::ostream& out, const std::vector<SummaryColumn>& columns);
/// Throws MetricsError on a header or field mismatch.
std::vector<SummaryColumn> read_summary_csv(std::istream& in);

/// Table with block indices down and delays across; cells are the CSV strings.
std::string format_table(const std::vector<SummaryColumn>& columns);

}  // namespace fabsim
