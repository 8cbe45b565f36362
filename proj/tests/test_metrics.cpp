#include "fabsim/metrics.hpp"
#include "fabsim/net.hpp"

#include <gtest/gtest.h>

#include <sstream>

namespace fabsim {
namespace {

CommitLog log_of(const std::map<std::string, std::vector<TimeMs>>& commits)
{
    CommitLog log;
    for (const auto& [peer, times] : commits)
    {
        log.register_peer(peer);
        for (std::size_t i = 0; i < times.size(); ++i)
            log.record(CommitEntry{peer, i + 1, times[i], 10, 0});
    }
    return log;
}

TEST(CommitLog, EnforcesPerPeerOrder)
{
    CommitLog log;
    log.record({"p", 1, 100, 10, 0});
    EXPECT_THROW(log.record({"p", 1, 200, 10, 0}), MetricsError);
    EXPECT_THROW(log.record({"p", 2, 50, 10, 0}), MetricsError);
    EXPECT_NO_THROW(log.record({"p", 2, 100, 10, 0}));
    EXPECT_NO_THROW(log.record({"q", 1, 0, 10, 0}));
    EXPECT_EQ(log.commit_time("p", 2), 100);
    EXPECT_FALSE(log.commit_time("p", 3));
    EXPECT_THROW(log.commits_of("ghost"), MetricsError);
}

TEST(Offsets, IdenticalLogsGiveZero)
{
    auto log = log_of({{"a", {850, 1700, 2550}}, {"b", {850, 1700, 2550}}});
    auto s = compute_offsets(log, "a", "b");
    ASSERT_EQ(s.offsets.size(), 3u);
    for (const auto& [i, o] : s.offsets)
        EXPECT_EQ(o, 0);
    EXPECT_TRUE(s.missing.empty());
}

TEST(Offsets, SelfOffsetIsZeroAndSwapNegates)
{
    auto log = log_of({{"a", {850, 1700, 2550}}, {"b", {900, 2000, 4000}}});
    for (const auto& [i, o] : compute_offsets(log, "a", "a").offsets)
        EXPECT_EQ(o, 0);
    auto ab = compute_offsets(log, "a", "b");
    auto ba = compute_offsets(log, "b", "a");
    ASSERT_EQ(ab.offsets.size(), ba.offsets.size());
    for (std::size_t i = 0; i < ab.offsets.size(); ++i)
        EXPECT_EQ(ab.offsets[i].second, -ba.offsets[i].second);
    EXPECT_EQ(ab.at(3), 1450);
}

TEST(Offsets, HaltedTargetLeavesMissingBlocks)
{
    auto log = log_of({{"ref", {1, 2, 3, 4, 5}}, {"tgt", {10, 20}}});
    log.record_halt("tgt", 30, "heartbeat_timeout");
    auto s = compute_offsets(log, "ref", "tgt");
    EXPECT_TRUE(s.target_halted);
    EXPECT_EQ(s.offsets.size(), 2u);
    EXPECT_EQ(s.missing, (std::vector<std::uint64_t>{3, 4, 5}));
    EXPECT_FALSE(s.at(4));
    EXPECT_THROW(slope(s, 1, 4), MetricsError);
}

OffsetSeries series_of(const std::vector<std::pair<std::uint64_t, TimeMs>>& points)
{
    OffsetSeries s;
    s.offsets = points;
    return s;
}

TEST(Summary, ElevenFixedRows)
{
    std::vector<std::pair<std::uint64_t, TimeMs>> pts;
    for (std::uint64_t i = 1; i <= 100; ++i)
        pts.emplace_back(i, static_cast<TimeMs>(i * 10));
    auto s = series_of(pts);
    auto rows = summarize({s, s, s});
    ASSERT_EQ(rows.size(), 11u);
    for (std::size_t i = 0; i < rows.size(); ++i)
    {
        EXPECT_EQ(rows[i].block_index, kTableRows[i]);
        EXPECT_DOUBLE_EQ(*rows[i].mean_offset_ms, 10.0 * static_cast<double>(kTableRows[i]));
        EXPECT_EQ(rows[i].runs, 3u);
    }
}

TEST(Summary, MeanIgnoresRunsWithoutTheBlock)
{
    auto rows = summarize({series_of({{1, 10}, {10, 100}}), series_of({{1, 20}})}, {1, 10, 19});
    EXPECT_DOUBLE_EQ(*rows[0].mean_offset_ms, 15.0);
    EXPECT_EQ(rows[1].runs, 1u);
    EXPECT_DOUBLE_EQ(*rows[1].mean_offset_ms, 100.0);
    EXPECT_FALSE(rows[2].mean_offset_ms);
    EXPECT_EQ(rows[2].runs, 0u);
}

TEST(Slope, TableValuesAtLargestDelay)
{
    EXPECT_NEAR(slope(series_of({{1, 8778}, {97, 126680}})), 1228.1, 0.05);
    EXPECT_DOUBLE_EQ(slope(series_of({{1, 11}, {97, 11}})), 0.0);
}

TEST(Slope, StopAndWaitOracleGrowth)
{
    OracleParams p;
    p.block_interval_ms = 900;
    p.handshake_rtts = 0;
    p.delay_ms = 2000;
    auto offs = offset_oracle(p, 97);
    OffsetSeries s;
    for (std::size_t i = 0; i < offs.size(); ++i)
        s.offsets.emplace_back(i + 1, offs[i]);
    EXPECT_DOUBLE_EQ(slope(s), 3100.0);
}

TEST(Csv, RunRowsIncludeMissingCommitsAsEmptyFields)
{
    RunRecord r;
    r.run_id = 4;
    r.delay_ms = 3580;
    r.seed = 9;
    r.reference_peer = "ref";
    r.peers = {"ref", "tgt"};
    r.blocks_cut = 2;
    r.log = log_of({{"ref", {850, 1700}}, {"tgt", {8000}}});
    r.log.record_halt("tgt", 9000, "heartbeat_timeout");
    std::ostringstream out;
    write_run_csv(out, {r});
    EXPECT_EQ(out.str(), std::string(kRunCsvHeader) + "\n"
                             "4,3580,9,ref,1,850,0,0\n"
                             "4,3580,9,ref,2,1700,0,0\n"
                             "4,3580,9,tgt,1,8000,7150,1\n"
                             "4,3580,9,tgt,2,,,1\n");
}

TEST(Csv, SummaryRoundTrip)
{
    std::vector<SummaryColumn> cols{
        {0, {{1, 11.0, 5}, {10, 11.0, 5}}},
        {3580, {{1, 7150.4, 5}, {10, std::nullopt, 0}}},
    };
    std::ostringstream out;
    write_summary_csv(out, cols);
    EXPECT_EQ(out.str(), std::string(kSummaryCsvHeader) + "\n0,1,11.0,5\n0,10,11.0,5\n3580,1,7150.4,5\n3580,10,,0\n");
    std::istringstream in(out.str());
    auto back = read_summary_csv(in);
    ASSERT_EQ(back.size(), 2u);
    std::ostringstream again;
    write_summary_csv(again, back);
    EXPECT_EQ(again.str(), out.str());

    std::istringstream bad("delay,block\n");
    EXPECT_THROW(read_summary_csv(bad), MetricsError);
    std::istringstream short_row(std::string(kSummaryCsvHeader) + "\n1,2\n");
    EXPECT_THROW(read_summary_csv(short_row), MetricsError);
}

TEST(Table, CellsAreTheCsvStrings)
{
    std::vector<SummaryColumn> cols{
        {0, {{1, 11.0, 5}, {97, 11.0, 5}}},
        {2000, {{1, 5160.6, 5}, {97, 32155.0, 5}}},
        {3580, {{1, 7150.0, 5}, {97, std::nullopt, 0}}},
    };
    auto table = format_table(cols);
    std::istringstream lines(table);
    std::string header, row1, row97;
    std::getline(lines, header);
    std::getline(lines, row1);
    std::getline(lines, row97);
    EXPECT_NE(header.find("ith-Block"), std::string::npos);
    EXPECT_NE(header.find("No delay"), std::string::npos);
    EXPECT_NE(header.find("2000ms"), std::string::npos);
    auto cells = [](const std::string& line) {
        std::istringstream in(line);
        std::vector<std::string> out;
        for (std::string w; in >> w;)
            out.push_back(w);
        return out;
    };
    EXPECT_EQ(cells(row1), (std::vector<std::string>{"1", "11.0", "5160.6", "7150.0"}));
    EXPECT_EQ(cells(row97), (std::vector<std::string>{"97", "11.0", "32155.0", "-"}));
}

}  // namespace
}  // namespace fabsim
