#include "fabsim/simulation.hpp"

#include "fabsim/policy.hpp"
#include "fabsim/workload.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <ostream>
#include <stdexcept>

namespace fabsim {

const PeerOutcome& RunResult::peer(const std::string& peer_id) const
{
    auto it = std::find_if(peers.begin(), peers.end(), [&](const PeerOutcome& p) { return p.spec.peer_id == peer_id; });
    if (it == peers.end())
        throw std::out_of_range("no peer " + peer_id);
    return *it;
}

namespace {

class Run
{
public:
    Run(const RunConfig& config, const RunOptions& options)
        : config_(config), options_(options), engine_(config.seed), policy_(parse_policy(config.endorsement_policy)),
          orderer_(config.batch), links_(config.net, node_sites(config))
    {
        for (const auto& p : config_.peers)
            sites_[p.peer_id] = p.site_label;
        node_names_ = {config_.orderer_id, config_.client_id};
        for (const auto& p : config_.peers)
            node_names_.push_back(p.peer_id);

        peers_.reserve(config_.peers.size());
        for (std::size_t i = 0; i < config_.peers.size(); ++i)
        {
            const auto& spec = config_.peers[i];
            Peer peer;
            peer.outcome.spec = spec;
            peer.node = static_cast<std::uint32_t>(i + 2);
            SessionParams sp;
            sp.window_bytes = config_.net.window_bytes;
            sp.segment_bytes = config_.net.segment_bytes;
            sp.backlog_limit_blocks = config_.net.backlog_limit_blocks;
            sp.forward_delay_ms = links_.delay(config_.orderer_id, spec.peer_id);
            sp.reverse_delay_ms = links_.delay(spec.peer_id, config_.orderer_id);
            peer.session = std::make_unique<DeliverySession>(config_.orderer_id, spec.peer_id, sp);
            result_.log.register_peer(spec.peer_id);
            peers_.push_back(std::move(peer));
        }

        if (options_.trace)
        {
            engine_.set_trace([this](const TraceRecord& r) {
                *options_.trace << r.time << ' ' << r.seq << ' ' << r.tag.kind << ' ' << node_names_.at(r.tag.subject)
                                << ' ' << r.tag.arg << '\n';
            });
        }
    }

    RunResult execute()
    {
        for (std::size_t i = 0; i < peers_.size(); ++i)
            open_session(i);

        auto proposals = generate_flood(config_.workload, config_.client_id, engine_.rng());
        pending_.reserve(proposals.size());
        for (auto& p : proposals)
        {
            auto slot = pending_.size();
            auto at = p.submit_time;
            pending_.push_back(Pending{std::move(p), {}, 0, false});
            engine_.schedule(at, {"submit", kClient, slot}, [this, slot] { submit(slot); });
        }

        result_.final_time = engine_.run(options_.until);
        result_.events = engine_.processed();
        result_.blocks_cut = orderer_.blocks_cut();
        for (auto& peer : peers_)
        {
            auto& o = peer.outcome;
            o.session_state = peer.session->state();
            o.halt_reason = peer.session->halt_reason();
            o.halt_time = peer.session->halt_time();
            o.peak_backlog = peer.session->peak_backlog();
            o.dropped_dispatches = peer.session->dropped_dispatches();
            result_.halted = result_.halted || o.session_state == SessionState::disconnected;
            result_.peers.push_back(std::move(o));
        }
        return std::move(result_);
    }

private:
    static constexpr std::uint32_t kOrderer = 0;
    static constexpr std::uint32_t kClient = 1;

    struct Peer
    {
        PeerOutcome outcome;
        std::uint32_t node = 0;
        std::unique_ptr<DeliverySession> session;
        TimeMs busy_until = 0;
    };

    struct Pending
    {
        Proposal proposal;
        std::vector<Endorsement> responses;
        std::size_t answered = 0;
        bool done = false;
    };

    static std::map<std::string, std::string> node_sites(const RunConfig& c)
    {
        std::map<std::string, std::string> m{{c.orderer_id, c.orderer_site}, {c.client_id, c.client_site}};
        for (const auto& p : c.peers)
            m[p.peer_id] = p.site_label;
        return m;
    }

    // ---- client and endorsers ------------------------------------------

    void submit(std::size_t slot)
    {
        for (std::size_t i = 0; i < peers_.size(); ++i)
        {
            if (!peers_[i].outcome.spec.endorser)
                continue;
            auto d = links_.delay(config_.client_id, peers_[i].outcome.spec.peer_id);
            engine_.schedule_after(d, {"proposal", peers_[i].node, slot}, [this, slot, i] { endorse(slot, i); });
        }
    }

    void endorse(std::size_t slot, std::size_t peer_index)
    {
        auto& peer = peers_[peer_index];
        auto e = execute_proposal(peer.outcome.ledger.state(), pending_[slot].proposal, peer.outcome.spec.peer_id);
        auto d = links_.delay(peer.outcome.spec.peer_id, config_.client_id);
        engine_.schedule_after(d, {"endorsement", kClient, slot},
                               [this, slot, e = std::move(e)]() mutable { collect(slot, std::move(e)); });
    }

    void collect(std::size_t slot, Endorsement e)
    {
        auto& p = pending_[slot];
        ++p.answered;
        if (p.done)
            return;
        p.responses.push_back(std::move(e));
        if (!evaluate(policy_, p.responses, sites_))
        {
            if (p.answered == endorser_count())
            {
                p.done = true;
                result_.rejections.push_back({p.proposal.id, "endorsement policy unmet"});
            }
            return;
        }
        auto assembled = assemble_transaction(p.proposal, p.responses, policy_, sites_, engine_.now());
        p.done = true;
        auto tx = std::get<Transaction>(std::move(assembled));
        result_.submitted.push_back(tx.id);
        auto d = links_.delay(config_.client_id, config_.orderer_id);
        engine_.schedule_after(d, {"broadcast", kOrderer, slot},
                               [this, tx = std::move(tx)]() mutable { order(std::move(tx)); });
    }

    std::size_t endorser_count() const
    {
        return static_cast<std::size_t>(
            std::count_if(peers_.begin(), peers_.end(), [](const Peer& p) { return p.outcome.spec.endorser; }));
    }

    // ---- ordering ---------------------------------------------------------

    void order(Transaction tx)
    {
        auto receipt = orderer_.order_receive(std::move(tx), engine_.now());
        if (receipt.arm_timer)
        {
            auto gen = *receipt.arm_timer;
            engine_.schedule_after(config_.batch.batch_timeout_ms, {"batch_timeout", kOrderer, gen}, [this, gen] {
                if (auto block = orderer_.order_timeout(gen, engine_.now()))
                    deliver_all(std::move(*block));
            });
        }
        if (receipt.block)
            deliver_all(std::move(*receipt.block));
    }

    void deliver_all(Block block)
    {
        auto index = block.index;
        auto size = block.size_bytes;
        blocks_.push_back(std::move(block));
        for (std::size_t i = 0; i < peers_.size(); ++i)
        {
            auto& s = *peers_[i].session;
            bool was_connected = s.state() != SessionState::disconnected;
            send(i, s.dispatch_block(index, size, engine_.now()));
            if (was_connected && s.state() == SessionState::disconnected)
                note_halt(i);
        }
    }

    // ---- delivery sessions --------------------------------------------

    void open_session(std::size_t i)
    {
        auto& peer = peers_[i];
        auto ready = peer.session->open_session(engine_.now(), config_.net.handshake_rtts);
        engine_.schedule(ready, {"stream_start", peer.node, 0}, [this, i] {
            auto& s = *peers_[i].session;
            if (s.state() != SessionState::handshaking)
                return;
            send(i, s.start_streaming(engine_.now()));
            auto cut_off = heartbeat_check(config_.net.heartbeat, s.params().forward_delay_ms,
                                           s.params().reverse_delay_ms, engine_.now());
            if (cut_off)
            {
                engine_.schedule(*cut_off, {"heartbeat_timeout", peers_[i].node, 0}, [this, i] {
                    auto& session = *peers_[i].session;
                    if (session.state() == SessionState::disconnected)
                        return;
                    session.disconnect(HaltReason::heartbeat_timeout, engine_.now());
                    note_halt(i);
                });
            }
        });
    }

    void send(std::size_t i, const std::vector<Transmission>& segments)
    {
        auto& peer = peers_[i];
        const auto reverse = peer.session->params().reverse_delay_ms;
        for (const auto& t : segments)
        {
            if (t.final_segment)
            {
                engine_.schedule(t.arrive, {"block_arrival", peer.node, t.block_index},
                                 [this, i, index = t.block_index] { arrive(i, index); });
            }
            else
            {
                engine_.schedule(t.arrive + reverse, {"segment_ack", kOrderer, t.block_index},
                                 [this, i, index = t.block_index, bytes = t.bytes] {
                                     send(i, peers_[i].session->on_segment_ack(index, bytes, engine_.now()));
                                 });
            }
        }
    }

    void arrive(std::size_t i, std::uint64_t index)
    {
        auto& peer = peers_[i];
        if (peer.session->state() == SessionState::disconnected)
            return;
        auto at = std::max(engine_.now(), peer.busy_until) + config_.commit_processing_ms;
        peer.busy_until = at;
        engine_.schedule(at, {"commit", peer.node, index}, [this, i, index] { commit(i, index); });
    }

    void commit(std::size_t i, std::uint64_t index)
    {
        auto& peer = peers_[i];
        auto report = validate_and_commit(peer.outcome.ledger, blocks_.at(index - 1), policy_, sites_, engine_.now());
        result_.log.record(CommitEntry{peer.outcome.spec.peer_id, index, engine_.now(),
                                       static_cast<std::uint32_t>(report.valid_count()),
                                       static_cast<std::uint32_t>(report.invalid_count())});
        peer.outcome.reports.push_back(std::move(report));
        engine_.schedule_after(peer.session->params().reverse_delay_ms, {"block_ack", kOrderer, index},
                               [this, i, index] { send(i, peers_[i].session->on_ack(index, engine_.now())); });
    }

    void note_halt(std::size_t i)
    {
        const auto& s = *peers_[i].session;
        result_.log.record_halt(s.peer_id(), s.halt_time().value_or(engine_.now()), to_string(s.halt_reason()));
    }

    const RunConfig& config_;
    const RunOptions& options_;
    Engine engine_;
    Policy policy_;
    OrderingService orderer_;
    LinkTable links_;
    PeerSites sites_;
    std::vector<std::string> node_names_;
    std::vector<Peer> peers_;
    std::vector<Pending> pending_;
    std::vector<Block> blocks_;
    RunResult result_;
};

}  // namespace

RunResult simulate(const RunConfig& config, const RunOptions& options)
{
    validate_config(config);
    return Run(config, options).execute();
}

RunRecord to_run_record(std::uint64_t run_id, const RunConfig& config, const RunResult& result)
{
    RunRecord r;
    r.run_id = run_id;
    r.delay_ms = config.net.injected_delay_ms;
    r.seed = config.seed;
    r.reference_peer = config.reference_peer;
    for (const auto& p : config.peers)
        r.peers.push_back(p.peer_id);
    r.blocks_cut = result.blocks_cut;
    r.log = result.log;
    return r;
}

}  // namespace fabsim
