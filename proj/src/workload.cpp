#include "fabsim/workload.hpp"

#include <stdexcept>

namespace fabsim {

void WorkloadConfig::validate() const
{
    if (tx_count < 1)
        throw std::invalid_argument("workload.tx_count must be >= 1");
    if (gap_ms <= 0)
        throw std::invalid_argument("workload.gap_ms must be positive");
    if (jitter_ms < 0 || jitter_ms >= gap_ms)
        throw std::invalid_argument("workload.jitter must lie in [0, gap_ms)");
    if (key_scheme == KeyScheme::fixed && fixed_key.empty())
        throw std::invalid_argument("workload.key_scheme fixed needs a key");
}

std::vector<Proposal> generate_flood(const WorkloadConfig& config, const std::string& client_id, std::mt19937_64& rng)
{
    config.validate();
    std::vector<Proposal> out;
    out.reserve(config.tx_count);
    std::uniform_int_distribution<TimeMs> jitter(-config.jitter_ms, config.jitter_ms);
    TimeMs t = 0;
    for (std::uint32_t i = 1; i <= config.tx_count; ++i)
    {
        t += config.gap_ms;
        if (config.jitter_ms > 0)
            t += jitter(rng);

        Proposal p;
        p.id = "tx" + std::to_string(i);
        p.client_id = client_id;
        p.submit_time = t;
        std::string key = config.key_scheme == WorkloadConfig::KeyScheme::distinct ? "asset" + std::to_string(i)
                                                                                    : config.fixed_key;
        std::string value = "v" + std::to_string(i);
        if (config.op_kind == WorkloadConfig::OpKind::create)
            p.op = CreateOp{std::move(key), std::move(value)};
        else
            p.op = UpdateOp{std::move(key), std::move(value)};
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<Proposal> generate_flood(const WorkloadConfig& config, const std::string& client_id)
{
    std::mt19937_64 rng(0);
    return generate_flood(config, client_id, rng);
}

WorkloadConfig long_flood(WorkloadConfig base)
{
    base.tx_count = 30000;
    return base;
}

}  // namespace fabsim
