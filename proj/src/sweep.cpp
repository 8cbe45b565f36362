#include "fabsim/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

namespace fabsim {

SweepResult run_sweep(const RunConfig& base, const std::vector<TimeMs>& delays, std::size_t repetitions,
                      std::size_t threads, const std::vector<std::uint64_t>& rows)
{
    if (delays.empty())
        throw ConfigError("sweep needs at least one delay");
    if (repetitions == 0)
        throw ConfigError("sweep needs at least one repetition");

    const std::size_t total = delays.size() * repetitions;
    SweepResult out;
    out.runs.resize(total);
    for (std::size_t k = 0; k < total; ++k)
    {
        auto& c = out.runs[k].config;
        c = base;
        c.net.injected_delay_ms = delays[k / repetitions];
        c.seed = base.seed + k;
        validate_config(c);  // fail the whole sweep before any work starts
    }

    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t k; (k = next.fetch_add(1)) < total;)
        {
            try
            {
                auto& run = out.runs[k];
                auto result = simulate(run.config);
                run.record = to_run_record(k, run.config, result);
                run.offsets = compute_offsets(result.log, run.config.reference_peer, run.config.target_peer);
                run.halted = result.halted;
            }
            catch (...)
            {
                std::lock_guard lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
            }
        }
    };

    if (threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, total);
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < threads; ++t)
        pool.emplace_back(worker);
    worker();
    for (auto& t : pool)
        t.join();
    if (failure)
        std::rethrow_exception(failure);

    for (std::size_t d = 0; d < delays.size(); ++d)
    {
        std::vector<OffsetSeries> series;
        for (std::size_t r = 0; r < repetitions; ++r)
            series.push_back(out.runs[d * repetitions + r].offsets);
        out.columns.push_back(SummaryColumn{delays[d], summarize(series, rows)});
    }
    out.any_halt = std::any_of(out.runs.begin(), out.runs.end(), [](const SweepRun& r) { return r.halted; });
    return out;
}

}  // namespace fabsim
