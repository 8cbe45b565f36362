#pragma once

// Run configuration and its flat, line-oriented file format.
//
//   # comment
//   key = value
//
// Keys use dotted sections; list items are indexed from 0 (`topology.peers[0].id`).
// Unknown keys, duplicate keys and malformed values are errors. Omitted keys keep
// the defaults of default_topology(): six peers over three sites, one endorser
// per site, orderer and client at Heidelberg, Sorbonne as the delayed site.
//
// Recognised keys:
//   seed
//   endorsement_policy
//   topology.peers[N].id | .site | .roles        roles: endorser,committer | committer
//   topology.orderer.id | .site
//   topology.client.id | .site
//   batch.max_message_count | batch.timeout_ms | batch.block_size_bytes
//   phases.commit_processing_ms
//   net.base_delay_ms | net.intra_site_delay_ms | net.delayed_site | net.delay_ms
//   net.links[N].from | .to | .delay_ms
//   net.window_bytes | net.segment_bytes | net.backlog_limit_blocks | net.handshake_rtts
//   net.heartbeat.interval_ms | net.heartbeat.timeout_ms
//   workload.tx_count | workload.gap_ms | workload.key_scheme | workload.op | workload.jitter
//       key_scheme: distinct | fixed:<key>      op: create | update
//   metrics.reference_peer | metrics.target_peer
//   output.path

#include "fabsim/model.hpp"
#include "fabsim/net.hpp"
#include "fabsim/phases.hpp"
#include "fabsim/workload.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fabsim {

class ConfigError : public std::runtime_error
{
public:
    ConfigError(const std::string& origin, std::size_t line, const std::string& key, const std::string& message);
    explicit ConfigError(const std::string& message);

    std::size_t line() const noexcept { return line_; }
    const std::string& key() const noexcept { return key_; }

private:
    std::size_t line_ = 0;
    std::string key_;
};

struct RunConfig
{
    std::vector<PeerSpec> peers;
    std::string orderer_id = "orderer0";
    std::string orderer_site = "Heidelberg";
    std::string client_id = "client0";
    std::string client_site = "Heidelberg";
    std::string endorsement_policy = R"(AND ("Heidelberg" peer, "Poland" peer))";
    BatchConfig batch;
    TimeMs commit_processing_ms = 0;
    NetConfig net;
    WorkloadConfig workload;
    std::uint64_t seed = 1;
    std::string reference_peer = "peer0.heidelberg";
    std::string target_peer = "peer0.sorbonne";
    std::string output_path;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

/// Sorbonne / Heidelberg / Poland, peer0 endorsing and peer1 committing at each.
RunConfig default_topology();

RunConfig parse_config(std::string_view text, const std::string& origin = "<config>");
RunConfig load_config(const std::filesystem::path& path);

/// Every key with its effective value; parse_config(dump_config(c)) == c.
std::string dump_config(const RunConfig& config);

/// Cross-field checks: unique node ids, every peer a committer, an endorser for
/// every principal in the policy, known reference/target peers and link endpoints.
void validate_config(const RunConfig& config);

}  // namespace fabsim
