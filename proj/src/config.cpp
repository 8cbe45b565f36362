#include "fabsim/config.hpp"

#include "fabsim/policy.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <regex>
#include <set>
#include <sstream>

namespace fabsim {

ConfigError::ConfigError(const std::string& origin, std::size_t line, const std::string& key, const std::string& message)
    : std::runtime_error(origin + ":" + std::to_string(line) + ": " + (key.empty() ? "" : key + ": ") + message),
      line_(line), key_(key)
{
}

ConfigError::ConfigError(const std::string& message) : std::runtime_error(message) {}

RunConfig default_topology()
{
    RunConfig c;
    for (const char* site : {"Sorbonne", "Heidelberg", "Poland"})
    {
        std::string lower(site);
        std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char ch) { return std::tolower(ch); });
        c.peers.push_back(PeerSpec{"peer0." + lower, site, true, true});
        c.peers.push_back(PeerSpec{"peer1." + lower, site, false, true});
    }
    return c;
}

namespace {

struct Field
{
    std::function<void(const std::string&)> set;
};

template <typename T>
T to_number(const std::string& v)
{
    T out{};
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size())
        throw std::invalid_argument("expected an integer, got '" + v + "'");
    return out;
}

std::string trim(std::string_view s)
{
    auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

void parse_roles(const std::string& v, PeerSpec& p)
{
    p.endorser = false;
    p.committer = false;
    std::istringstream in(v);
    std::string role;
    while (std::getline(in, role, ','))
    {
        role = trim(role);
        if (role == "endorser")
            p.endorser = true;
        else if (role == "committer")
            p.committer = true;
        else
            throw std::invalid_argument("unknown role '" + role + "'");
    }
}

std::string roles_text(const PeerSpec& p)
{
    std::string out;
    if (p.endorser)
        out += "endorser";
    if (p.committer)
        out += out.empty() ? "committer" : ",committer";
    return out;
}

void parse_key_scheme(const std::string& v, WorkloadConfig& w)
{
    if (v == "distinct")
    {
        w.key_scheme = WorkloadConfig::KeyScheme::distinct;
        return;
    }
    if (v.rfind("fixed:", 0) == 0 && v.size() > 6)
    {
        w.key_scheme = WorkloadConfig::KeyScheme::fixed;
        w.fixed_key = v.substr(6);
        return;
    }
    throw std::invalid_argument("key_scheme must be 'distinct' or 'fixed:<key>'");
}

/// Setters for scalar keys of `c`.
std::map<std::string, Field> scalar_fields(RunConfig& c)
{
    auto str = [](std::string& dst) { return Field{[&dst](const std::string& v) { dst = v; }}; };
    auto i64 = [](TimeMs& dst) { return Field{[&dst](const std::string& v) { dst = to_number<TimeMs>(v); }}; };
    auto u32 = [](std::uint32_t& dst) { return Field{[&dst](const std::string& v) { dst = to_number<std::uint32_t>(v); }}; };
    return {
        {"seed", Field{[&](const std::string& v) { c.seed = to_number<std::uint64_t>(v); }}},
        {"endorsement_policy", str(c.endorsement_policy)},
        {"topology.orderer.id", str(c.orderer_id)},
        {"topology.orderer.site", str(c.orderer_site)},
        {"topology.client.id", str(c.client_id)},
        {"topology.client.site", str(c.client_site)},
        {"batch.max_message_count", u32(c.batch.max_message_count)},
        {"batch.timeout_ms", i64(c.batch.batch_timeout_ms)},
        {"batch.block_size_bytes", u32(c.batch.block_size_bytes)},
        {"phases.commit_processing_ms", i64(c.commit_processing_ms)},
        {"net.base_delay_ms", i64(c.net.base_delay_ms)},
        {"net.intra_site_delay_ms", i64(c.net.intra_site_delay_ms)},
        {"net.delayed_site", str(c.net.delayed_site)},
        {"net.delay_ms", i64(c.net.injected_delay_ms)},
        {"net.window_bytes", u32(c.net.window_bytes)},
        {"net.segment_bytes", u32(c.net.segment_bytes)},
        {"net.backlog_limit_blocks", u32(c.net.backlog_limit_blocks)},
        {"net.handshake_rtts", u32(c.net.handshake_rtts)},
        {"net.heartbeat.interval_ms", i64(c.net.heartbeat.interval_ms)},
        {"net.heartbeat.timeout_ms", i64(c.net.heartbeat.timeout_ms)},
        {"workload.tx_count", u32(c.workload.tx_count)},
        {"workload.gap_ms", i64(c.workload.gap_ms)},
        {"workload.key_scheme", Field{[&](const std::string& v) { parse_key_scheme(v, c.workload); }}},
        {"workload.op",
         Field{[&](const std::string& v) {
             if (v == "create")
                 c.workload.op_kind = WorkloadConfig::OpKind::create;
             else if (v == "update")
                 c.workload.op_kind = WorkloadConfig::OpKind::update;
             else
                 throw std::invalid_argument("op must be 'create' or 'update'");
         }}},
        {"workload.jitter", i64(c.workload.jitter_ms)},
        {"metrics.reference_peer", str(c.reference_peer)},
        {"metrics.target_peer", str(c.target_peer)},
        {"output.path", str(c.output_path)},
    };
}

struct Located
{
    std::size_t line;
    std::string key;
};

}  // namespace

RunConfig parse_config(std::string_view text, const std::string& origin)
{
    RunConfig c = default_topology();
    auto fields = scalar_fields(c);

    static const std::regex list_key(R"(^(topology\.peers|net\.links)\[(\d+)\]\.([a-z_]+)$)");
    std::map<std::size_t, std::map<std::string, std::pair<std::string, std::size_t>>> peer_items, link_items;
    std::set<std::string> seen;

    std::istringstream in{std::string(text)};
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw))
    {
        ++line_no;
        auto line = trim(raw);
        if (line.empty() || line[0] == '#')
            continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin, line_no, "", "expected 'key = value'");
        auto key = trim(std::string_view(line).substr(0, eq));
        auto value = trim(std::string_view(line).substr(eq + 1));
        if (key.empty())
            throw ConfigError(origin, line_no, "", "empty key");
        if (!seen.insert(key).second)
            throw ConfigError(origin, line_no, key, "duplicate key");

        std::smatch m;
        if (std::regex_match(key, m, list_key))
        {
            auto index = to_number<std::size_t>(m[2].str());
            auto& items = m[1].str() == "topology.peers" ? peer_items : link_items;
            items[index][m[3].str()] = {value, line_no};
            continue;
        }
        auto it = fields.find(key);
        if (it == fields.end())
            throw ConfigError(origin, line_no, key, "unknown key");
        try
        {
            it->second.set(value);
        }
        catch (const std::exception& e)
        {
            throw ConfigError(origin, line_no, key, e.what());
        }
    }

    auto check_dense = [&](const auto& items, const char* what) {
        std::size_t expect = 0;
        for (const auto& [index, props] : items)
        {
            if (index != expect++)
            {
                auto line = props.begin()->second.second;
                throw ConfigError(origin, line, std::string(what) + "[" + std::to_string(index) + "]",
                                  "list indices must run 0,1,2,...");
            }
        }
    };
    check_dense(peer_items, "topology.peers");
    check_dense(link_items, "net.links");

    if (!peer_items.empty())
    {
        c.peers.clear();
        for (const auto& [index, props] : peer_items)
        {
            PeerSpec p;
            p.endorser = false;
            p.committer = true;
            std::string prefix = "topology.peers[" + std::to_string(index) + "].";
            for (const auto& [name, vl] : props)
            {
                try
                {
                    if (name == "id")
                        p.peer_id = vl.first;
                    else if (name == "site")
                        p.site_label = vl.first;
                    else if (name == "roles")
                        parse_roles(vl.first, p);
                    else
                        throw std::invalid_argument("unknown key");
                }
                catch (const std::exception& e)
                {
                    throw ConfigError(origin, vl.second, prefix + name, e.what());
                }
            }
            if (p.peer_id.empty() || p.site_label.empty())
                throw ConfigError(origin, props.begin()->second.second, prefix + "id", "peer needs id and site");
            c.peers.push_back(std::move(p));
        }
    }
    for (const auto& [index, props] : link_items)
    {
        LinkSpec l;
        l.one_way_delay_ms = -1;
        std::string prefix = "net.links[" + std::to_string(index) + "].";
        for (const auto& [name, vl] : props)
        {
            try
            {
                if (name == "from")
                    l.from = vl.first;
                else if (name == "to")
                    l.to = vl.first;
                else if (name == "delay_ms")
                    l.one_way_delay_ms = to_number<TimeMs>(vl.first);
                else
                    throw std::invalid_argument("unknown key");
            }
            catch (const std::exception& e)
            {
                throw ConfigError(origin, vl.second, prefix + name, e.what());
            }
        }
        if (l.from.empty() || l.to.empty() || l.one_way_delay_ms < 0)
            throw ConfigError(origin, props.begin()->second.second, prefix + "from", "link needs from, to and delay_ms");
        c.net.links.push_back(std::move(l));
    }

    try
    {
        validate_config(c);
    }
    catch (const ConfigError& e)
    {
        throw ConfigError(origin + ": " + e.what());
    }
    return c;
}

RunConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path.string());
}

std::string dump_config(const RunConfig& c)
{
    std::ostringstream out;
    out << "seed = " << c.seed << '\n';
    out << "endorsement_policy = " << c.endorsement_policy << '\n';
    for (std::size_t i = 0; i < c.peers.size(); ++i)
    {
        const auto& p = c.peers[i];
        out << "topology.peers[" << i << "].id = " << p.peer_id << '\n';
        out << "topology.peers[" << i << "].site = " << p.site_label << '\n';
        out << "topology.peers[" << i << "].roles = " << roles_text(p) << '\n';
    }
    out << "topology.orderer.id = " << c.orderer_id << '\n';
    out << "topology.orderer.site = " << c.orderer_site << '\n';
    out << "topology.client.id = " << c.client_id << '\n';
    out << "topology.client.site = " << c.client_site << '\n';
    out << "batch.max_message_count = " << c.batch.max_message_count << '\n';
    out << "batch.timeout_ms = " << c.batch.batch_timeout_ms << '\n';
    out << "batch.block_size_bytes = " << c.batch.block_size_bytes << '\n';
    out << "phases.commit_processing_ms = " << c.commit_processing_ms << '\n';
    out << "net.base_delay_ms = " << c.net.base_delay_ms << '\n';
    out << "net.intra_site_delay_ms = " << c.net.intra_site_delay_ms << '\n';
    out << "net.delayed_site = " << c.net.delayed_site << '\n';
    out << "net.delay_ms = " << c.net.injected_delay_ms << '\n';
    for (std::size_t i = 0; i < c.net.links.size(); ++i)
    {
        const auto& l = c.net.links[i];
        out << "net.links[" << i << "].from = " << l.from << '\n';
        out << "net.links[" << i << "].to = " << l.to << '\n';
        out << "net.links[" << i << "].delay_ms = " << l.one_way_delay_ms << '\n';
    }
    out << "net.window_bytes = " << c.net.window_bytes << '\n';
    out << "net.segment_bytes = " << c.net.segment_bytes << '\n';
    out << "net.backlog_limit_blocks = " << c.net.backlog_limit_blocks << '\n';
    out << "net.handshake_rtts = " << c.net.handshake_rtts << '\n';
    out << "net.heartbeat.interval_ms = " << c.net.heartbeat.interval_ms << '\n';
    out << "net.heartbeat.timeout_ms = " << c.net.heartbeat.timeout_ms << '\n';
    out << "workload.tx_count = " << c.workload.tx_count << '\n';
    out << "workload.gap_ms = " << c.workload.gap_ms << '\n';
    out << "workload.key_scheme = "
        << (c.workload.key_scheme == WorkloadConfig::KeyScheme::distinct ? std::string("distinct")
                                                                          : "fixed:" + c.workload.fixed_key)
        << '\n';
    out << "workload.op = " << (c.workload.op_kind == WorkloadConfig::OpKind::create ? "create" : "update") << '\n';
    out << "workload.jitter = " << c.workload.jitter_ms << '\n';
    out << "metrics.reference_peer = " << c.reference_peer << '\n';
    out << "metrics.target_peer = " << c.target_peer << '\n';
    if (!c.output_path.empty())
        out << "output.path = " << c.output_path << '\n';
    return out.str();
}

void validate_config(const RunConfig& c)
{
    auto fail = [](const std::string& msg) { throw ConfigError(msg); };
    try
    {
        c.batch.validate();
        c.net.validate();
        c.workload.validate();
    }
    catch (const std::invalid_argument& e)
    {
        fail(e.what());
    }
    if (c.commit_processing_ms < 0)
        fail("phases.commit_processing_ms must be non-negative");
    if (c.peers.empty())
        fail("topology needs at least one peer");

    std::set<std::string> ids{c.orderer_id, c.client_id};
    if (ids.size() != 2)
        fail("orderer and client ids must differ");
    for (const auto& p : c.peers)
    {
        if (!ids.insert(p.peer_id).second)
            fail("duplicate node id '" + p.peer_id + "'");
        if (!p.committer)
            fail("peer '" + p.peer_id + "' must have the committer role");
    }
    for (const auto& l : c.net.links)
        if (!ids.contains(l.from) || !ids.contains(l.to))
            fail("link " + l.from + "->" + l.to + " names an unknown node");

    Policy policy;
    try
    {
        policy = parse_policy(c.endorsement_policy);
    }
    catch (const PolicyParseError& e)
    {
        fail(std::string("endorsement_policy: ") + e.what());
    }
    for (const auto& site : principal_sites(policy))
    {
        bool found = std::any_of(c.peers.begin(), c.peers.end(),
                                 [&](const PeerSpec& p) { return p.endorser && p.site_label == site; });
        if (!found)
            fail("endorsement_policy names site '" + site + "' which has no endorser");
    }
    auto is_peer = [&](const std::string& id) {
        return std::any_of(c.peers.begin(), c.peers.end(), [&](const PeerSpec& p) { return p.peer_id == id; });
    };
    if (!is_peer(c.reference_peer))
        fail("metrics.reference_peer '" + c.reference_peer + "' is not a peer");
    if (!is_peer(c.target_peer))
        fail("metrics.target_peer '" + c.target_peer + "' is not a peer");
}

}  // namespace fabsim
