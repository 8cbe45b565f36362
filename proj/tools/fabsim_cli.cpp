// fabsim: run delay experiments against the simulated pipeline.
//
//   fabsim run   --config PATH [--out PATH] [--seed N] [--delay MS] [--trace] [--dump-config]
//   fabsim sweep --config PATH --delays 0,1000,2000 --reps 5 [--out PATH] [--threads N]
//   fabsim report --in SUMMARY.csv
//
// Exit codes: 0 success, 1 configuration error, 2 a peer halted or disconnected.
// Without --out, files land in $FABSIM_OUT_DIR (or the working directory).

#include "fabsim/config.hpp"
#include "fabsim/metrics.hpp"
#include "fabsim/simulation.hpp"
#include "fabsim/sweep.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using namespace fabsim;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kHalted = 2;

fs::path output_path(const std::string& flag, const std::string& from_config, const char* default_name)
{
    if (!flag.empty())
        return flag;
    if (!from_config.empty())
        return from_config;
    if (const char* dir = std::getenv("FABSIM_OUT_DIR"); dir && *dir)
        return fs::path(dir) / default_name;
    return default_name;
}

void write_file(const fs::path& path, const std::string& content)
{
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + path.string());
    out << content;
}

std::vector<TimeMs> parse_delays(const std::string& text)
{
    std::vector<TimeMs> out;
    std::istringstream in(text);
    std::string item;
    while (std::getline(in, item, ','))
    {
        std::size_t used = 0;
        long long v = std::stoll(item, &used);
        if (used != item.size() || v < 0)
            throw ConfigError("--delays: bad value '" + item + "'");
        out.push_back(v);
    }
    if (out.empty())
        throw ConfigError("--delays needs at least one value");
    return out;
}

int cmd_run(const std::string& config_path, const std::string& out_flag, std::optional<std::uint64_t> seed,
            std::optional<TimeMs> delay, bool trace, bool dump)
{
    auto config = load_config(config_path);
    if (seed)
        config.seed = *seed;
    if (delay)
        config.net.injected_delay_ms = *delay;
    if (dump)
    {
        std::cout << dump_config(config);
        return kOk;
    }

    RunOptions options;
    if (trace)
        options.trace = &std::cerr;
    auto result = simulate(config, options);
    auto record = to_run_record(0, config, result);

    std::ostringstream csv;
    write_run_csv(csv, {record});
    auto path = output_path(out_flag, config.output_path, "run.csv");
    write_file(path, csv.str());

    std::cout << "blocks cut: " << result.blocks_cut << ", rejected proposals: " << result.rejections.size()
              << ", virtual time: " << result.final_time << " ms\n";
    for (const auto& p : result.peers)
    {
        std::cout << "  " << p.spec.peer_id << " (" << p.spec.site_label << "): height " << p.ledger.height();
        if (p.session_state == SessionState::disconnected)
            std::cout << ", HALTED (" << to_string(p.halt_reason) << " at " << p.halt_time.value_or(0) << " ms)";
        std::cout << '\n';
    }
    auto series = compute_offsets(result.log, config.reference_peer, config.target_peer);
    std::cout << "offsets " << config.target_peer << " vs " << config.reference_peer << ":\n";
    std::cout << format_table({SummaryColumn{config.net.injected_delay_ms, summarize({series})}});
    std::cout << "wrote " << path.string() << '\n';
    return result.halted ? kHalted : kOk;
}

int cmd_sweep(const std::string& config_path, const std::string& delays_text, std::size_t reps,
              const std::string& out_flag, std::size_t threads)
{
    auto config = load_config(config_path);
    auto delays = parse_delays(delays_text);
    auto sweep = run_sweep(config, delays, reps, threads);

    std::ostringstream summary;
    write_summary_csv(summary, sweep.columns);
    std::ostringstream runs;
    runs << kRunCsvHeader << '\n';
    for (const auto& r : sweep.runs)
        write_run_rows(runs, r.record);

    auto path = output_path(out_flag, config.output_path, "summary.csv");
    auto runs_path = path;
    runs_path.replace_filename(path.stem().string() + "_runs.csv");
    write_file(path, summary.str());
    write_file(runs_path, runs.str());

    std::cout << format_table(sweep.columns);
    for (const auto& r : sweep.runs)
        if (r.halted)
            std::cout << "run " << r.record.run_id << " (delay " << r.record.delay_ms << " ms) halted\n";
    std::cout << "wrote " << path.string() << " and " << runs_path.string() << '\n';
    return sweep.any_halt ? kHalted : kOk;
}

int cmd_report(const std::string& in_path)
{
    std::ifstream in(in_path);
    if (!in)
        throw ConfigError("cannot open " + in_path);
    std::cout << format_table(read_summary_csv(in));
    return kOk;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Delay experiments on a simulated execute-order-validate blockchain"};
    app.require_subcommand(1);

    std::string config_path, out, delays, in_path;
    std::optional<std::uint64_t> seed;
    std::optional<TimeMs> delay;
    bool trace = false, dump = false;
    std::size_t reps = 1, threads = 0;

    auto* run = app.add_subcommand("run", "Run one simulation and write per-block CSV");
    run->add_option("--config", config_path, "Run configuration file")->required();
    run->add_option("--out", out, "Per-block CSV path");
    run->add_option("--seed", seed, "Override the configured seed");
    run->add_option("--delay", delay, "Override net.delay_ms");
    run->add_flag("--trace", trace, "Dump one line per event to stderr");
    run->add_flag("--dump-config", dump, "Print the effective configuration and exit");

    auto* sweep = app.add_subcommand("sweep", "Run a delay sweep and write the summary CSV");
    sweep->add_option("--config", config_path, "Base configuration file")->required();
    sweep->add_option("--delays", delays, "Comma-separated injected delays in ms")->required();
    sweep->add_option("--reps", reps, "Repetitions per delay")->required()->check(CLI::PositiveNumber);
    sweep->add_option("--out", out, "Summary CSV path");
    sweep->add_option("--threads", threads, "Worker threads (0 = all cores)");

    auto* report = app.add_subcommand("report", "Print the table stored in a summary CSV");
    report->add_option("--in", in_path, "Summary CSV")->required();

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        return app.exit(e) == 0 ? kOk : kConfigError;
    }

    try
    {
        if (*run)
            return cmd_run(config_path, out, seed, delay, trace, dump);
        if (*sweep)
            return cmd_sweep(config_path, delays, reps, out, threads);
        return cmd_report(in_path);
    }
    catch (const ConfigError& e)
    {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    }
    catch (const MetricsError& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigError;
    }
    catch (const std::exception& e)
    {
        std::cerr << "error: " << e.what() << '\n';
        return kConfigError;
    }
}
