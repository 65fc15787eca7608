#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "ratchetlab/key_store.hpp"
#include "ratchetlab/metadata.hpp"
#include "ratchetlab/ratchet.hpp"
#include "ratchetlab/server.hpp"
#include "ratchetlab/session.hpp"

namespace ratchetlab {

// Seeded conversation workload. Everything flows from the seed: key
// material, schedule, group rosters, message sizes. Two runs with the same
// config produce byte-identical ledgers.
struct SimulationConfig {
    std::size_t n_users = 50;
    std::size_t n_messages = 5000;  // send events in the main loop
    std::size_t n_groups = 5;
    std::uint64_t seed = 42;
    std::size_t prekeys_per_user = 16;
    std::size_t min_group_size = 3;
    std::size_t max_group_size = 8;
    int group_send_percent = 15;
    std::int64_t start_time_ms = 1'700'000'000'000;
    // Gap between send events; keeping it above the analysis window makes
    // distinct sends separable, which is the noiseless baseline.
    std::int64_t min_gap_ms = 3000;
    std::int64_t max_gap_ms = 8000;
};

struct GroundTruthGroup {
    std::string group_id;
    std::set<std::string> members;
    std::size_t sends = 0;
};

struct SimulationResult {
    std::vector<MetadataRecord> ledger;
    std::string ledger_text;  // exact export format, one JSON object per line
    std::vector<GroundTruthGroup> groups;
    // unordered pair (lexicographically smaller id first) -> relayed traffic
    std::map<std::pair<std::string, std::string>, std::uint64_t> pair_messages;
    std::map<std::pair<std::string, std::string>, std::uint64_t> pair_bytes;
    std::vector<std::string> plaintexts_sent;
    std::vector<std::string> plaintexts_received;
    std::vector<std::string> secret_hex;  // key material that must never reach the ledger
    std::size_t relayed_messages = 0;
};

inline SimulationResult run_simulation(const SimulationConfig& cfg) {
    if (cfg.n_users < 2) throw ValidationError("simulation needs at least 2 users");
    if (cfg.min_group_size < 3 || cfg.max_group_size < cfg.min_group_size)
        throw ValidationError("bad group size bounds");

    DeterministicRandom rng(cfg.seed);
    SimClock clock(cfg.start_time_ms);
    Server server(clock);
    SimulationResult result;

    std::vector<std::string> users;
    std::map<std::string, KeyStore> stores;
    std::map<std::string, std::map<std::string, SessionState>> sessions;

    for (std::size_t i = 0; i < cfg.n_users; ++i) {
        char id[20];
        std::snprintf(id, sizeof(id), "+1555%07zu", i);
        users.emplace_back(id);
    }
    for (const auto& id : users) {
        stores.emplace(id, KeyStore::generate(id, cfg.prekeys_per_user, rng, clock.now_ms()));
        Registration reg = make_registration(stores.at(id));
        for (std::size_t n = 0; n < cfg.prekeys_per_user; ++n) {
            PreKeyBundle b = stores.at(id).public_bundle(true);
            if (b.one_time_prekey) reg.one_time_prekeys.push_back(*b.one_time_prekey);
        }
        server.register_user(reg);
        clock.advance(10);
    }

    auto pair_key = [](const std::string& a, const std::string& b) {
        return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
    };

    auto drain = [&](const std::string& who) {
        for (MessageEnvelope& env : server.deliver(who)) {
            auto& mine = sessions[who];
            auto sit = mine.find(env.sender_id);
            if (sit == mine.end()) {
                if (!env.handshake)
                    throw ProtocolError("envelope for unknown session without handshake header");
                sit = mine.emplace(env.sender_id,
                                   accept_session(stores.at(who), *env.handshake, env.sender_id))
                          .first;
            }
            Bytes plain = decrypt_message(sit->second, env);
            result.plaintexts_received.push_back(to_string(plain));
        }
    };

    auto ensure_session = [&](const std::string& from, const std::string& to) -> SessionState& {
        auto& mine = sessions[from];
        auto it = mine.find(to);
        if (it != mine.end()) return it->second;
        PreKeyBundle bundle = server.fetch_bundle(from, to);
        InitiationResult init = initiate_session(stores.at(from), bundle, rng);
        return mine.emplace(to, std::move(init.session)).first->second;
    };

    auto record_pair = [&](const std::string& from, const std::string& to, std::size_t wire_size) {
        result.pair_messages[pair_key(from, to)] += 1;
        result.pair_bytes[pair_key(from, to)] += wire_size;
        result.relayed_messages += 1;
    };

    auto send_pairwise = [&](const std::string& from, const std::string& to, const std::string& text) {
        drain(from);  // pick up any pending handshake from the peer first
        SessionState& session = ensure_session(from, to);
        MessageEnvelope env = encrypt_message(session, to_bytes(text));
        server.relay(env);
        record_pair(from, to, env.encode().size());
        result.plaintexts_sent.push_back(text);
        drain(to);
    };

    auto gap = [&] {
        clock.advance(cfg.min_gap_ms +
                      static_cast<std::int64_t>(rng.uniform(
                          static_cast<std::uint64_t>(cfg.max_gap_ms - cfg.min_gap_ms + 1))));
    };

    // Group rosters: distinct member sets, sizes in the configured range.
    std::set<std::set<std::string>> used_rosters;
    for (std::size_t g = 0; g < cfg.n_groups; ++g) {
        std::set<std::string> members;
        do {
            members.clear();
            std::size_t span = cfg.max_group_size - cfg.min_group_size + 1;
            std::size_t size = std::min(cfg.min_group_size + rng.uniform(span), cfg.n_users);
            while (members.size() < size) members.insert(users[rng.uniform(users.size())]);
        } while (used_rosters.contains(members));
        used_rosters.insert(members);
        std::string gid = "g" + std::to_string(g + 1);
        server.create_group(gid, members);
        result.groups.push_back(GroundTruthGroup{gid, members, 0});
    }

    // Warm up every member pair with a hello round trip, so later fan-out
    // envelopes carry no handshake header and stay size-uniform.
    for (const auto& g : result.groups) {
        std::vector<std::string> members(g.members.begin(), g.members.end());
        for (std::size_t i = 0; i < members.size(); ++i) {
            for (std::size_t j = i + 1; j < members.size(); ++j) {
                if (sessions[members[i]].contains(members[j])) continue;
                gap();
                send_pairwise(members[i], members[j], "hello " + members[j]);
                gap();
                send_pairwise(members[j], members[i], "hello " + members[i]);
            }
        }
    }

    auto send_group = [&](std::size_t group_index) {
        GroundTruthGroup& g = result.groups[group_index];
        std::vector<std::string> members(g.members.begin(), g.members.end());
        const std::string& sender = members[rng.uniform(members.size())];
        drain(sender);
        std::string text = "group " + g.group_id + " note " + hex_encode(rng.bytes(8));

        std::map<std::string, MessageEnvelope> fan_out;
        for (const auto& member : members) {
            if (member == sender) continue;
            SessionState& session = ensure_session(sender, member);
            fan_out.emplace(member, encrypt_message(session, to_bytes(text)));
        }
        server.group_send(sender, g.group_id, fan_out);
        for (const auto& [member, env] : fan_out) {
            record_pair(sender, member, env.encode().size());
            result.plaintexts_sent.push_back(text);
        }
        for (const auto& member : members)
            if (member != sender) drain(member);
        g.sends += 1;
    };

    auto send_random_pairwise = [&](std::size_t i) {
        std::size_t ai = rng.uniform(users.size());
        std::size_t bi = rng.uniform(users.size() - 1);
        if (bi >= ai) ++bi;
        std::string text = "m" + std::to_string(i) + ":" + hex_encode(rng.bytes(rng.uniform(24)));
        send_pairwise(users[ai], users[bi], text);
    };

    for (std::size_t i = 0; i < cfg.n_messages; ++i) {
        gap();
        // Guarantee enough fan-outs per group for inference, then mix.
        if (cfg.n_groups > 0 && i < 3 * cfg.n_groups) {
            send_group(i % cfg.n_groups);
        } else if (cfg.n_groups > 0 &&
                   rng.uniform(100) < static_cast<std::uint64_t>(cfg.group_send_percent)) {
            send_group(rng.uniform(cfg.n_groups));
        } else {
            send_random_pairwise(i);
        }
    }
    for (const auto& id : users) drain(id);

    // Harvest everything that must never show up server-side.
    for (const auto& [id, store] : stores) {
        result.secret_hex.push_back(hex_encode(store.identity().dh.secret));
        result.secret_hex.push_back(hex_encode(store.identity().signing.seed));
        result.secret_hex.push_back(hex_encode(store.active_signed_prekey().pair.secret));
    }
    for (const auto& [id, peers] : sessions) {
        for (const auto& [peer, session] : peers) {
            result.secret_hex.push_back(hex_encode(session.root_key));
            result.secret_hex.push_back(hex_encode(session.send_chain.chain_key));
            result.secret_hex.push_back(hex_encode(session.recv_chain.chain_key));
        }
    }

    result.ledger = server.ledger();
    result.ledger_text = server.ledger_text();
    return result;
}

}  // namespace ratchetlab
