// ratchetlab command-line driver: workspaces hold per-user key stores, live
// sessions, and the simulated relay's state, so conversations survive across
// invocations. Every subcommand is a thin shell over the library.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "ratchetlab/ratchetlab.hpp"

namespace fs = std::filesystem;
using namespace ratchetlab;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr std::int64_t kSimClockStep = 1000;  // per-invocation advance in sim mode

struct Workspace {
    fs::path dir;
    ordered_json config;
    SimClock sim_clock{0};
    SystemClock system_clock;
    std::unique_ptr<Server> server;

    bool sim_mode() const { return config.at("clock").get<std::string>() == "sim"; }
    Clock& clock() { return sim_mode() ? static_cast<Clock&>(sim_clock) : system_clock; }

    static Workspace open(const fs::path& dir) {
        Workspace ws;
        ws.dir = dir;
        std::ifstream cfg(dir / "workspace.json");
        if (!cfg) throw IoError("no workspace at " + dir.string() + " (run init first)");
        ws.config = ordered_json::parse(cfg, nullptr, false);
        if (ws.config.is_discarded()) throw IoError("corrupt workspace.json");
        if (ws.sim_mode()) {
            ws.sim_clock.set(ws.config.at("clock_ms").get<std::int64_t>());
            ws.sim_clock.advance(kSimClockStep);
        }

        std::ifstream srv(dir / "server.json");
        if (!srv) throw IoError("missing server.json in workspace");
        json sj = json::parse(srv, nullptr, false);
        if (sj.is_discarded()) throw IoError("corrupt server.json");
        ws.server = std::make_unique<Server>(Server::from_json(sj, ws.clock()));
        return ws;
    }

    void save() {
        if (sim_mode()) config["clock_ms"] = sim_clock.now_ms();
        write_text(dir / "workspace.json", config.dump(2) + "\n");
        write_text(dir / "server.json", server->to_json().dump() + "\n");
    }

    fs::path store_path(const std::string& user) const { return dir / "users" / (user + ".keys"); }
    fs::path sessions_path(const std::string& user) const {
        return dir / "users" / (user + ".sessions");
    }

    KeyStore load_store(const std::string& user) const {
        if (!fs::exists(store_path(user)))
            throw IoError("no key store for " + user + " (run user-add first)");
        return KeyStore::load(store_path(user));
    }

    std::map<std::string, SessionState> load_sessions(const std::string& user) const {
        std::map<std::string, SessionState> out;
        std::ifstream in(sessions_path(user));
        if (!in) return out;
        json j = json::parse(in, nullptr, false);
        if (j.is_discarded()) throw IoError("corrupt sessions file for " + user);
        for (const auto& [peer, sj] : j.items()) out.emplace(peer, SessionState::from_json(sj));
        return out;
    }

    void save_sessions(const std::string& user,
                       const std::map<std::string, SessionState>& sessions) const {
        ordered_json j = ordered_json::object();
        for (const auto& [peer, s] : sessions) j[peer] = s.to_json();
        write_text(sessions_path(user), j.dump() + "\n");
    }

    static void write_text(const fs::path& path, const std::string& text) {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + path.string());
        out << text;
        if (!out.good()) throw IoError("short write to " + path.string());
    }
};

void append_captured(const fs::path& path, const MessageEnvelope& env) {
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) throw IoError("cannot open capture file " + path.string());
    Bytes wire = env.encode();
    Bytes framed;
    append_u32_be(framed, static_cast<std::uint32_t>(wire.size()));
    append(framed, wire);
    out.write(reinterpret_cast<const char*>(framed.data()),
              static_cast<std::streamsize>(framed.size()));
    if (!out.good()) throw IoError("short write to capture file");
}

std::vector<MessageEnvelope> read_captured(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open capture file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    std::string data = buf.str();
    std::vector<MessageEnvelope> out;
    std::size_t off = 0;
    while (off < data.size()) {
        if (data.size() - off < 4) throw IoError("truncated capture file");
        std::uint32_t len = read_u32_be(reinterpret_cast<const std::uint8_t*>(data.data()) + off);
        off += 4;
        if (data.size() - off < len) throw IoError("truncated capture file");
        out.push_back(MessageEnvelope::decode(
            {reinterpret_cast<const std::uint8_t*>(data.data()) + off, len}));
        off += len;
    }
    return out;
}

// Establishes the initiator-side session on first contact.
SessionState& ensure_session(Workspace& ws, KeyStore& store,
                             std::map<std::string, SessionState>& sessions,
                             const std::string& peer) {
    auto it = sessions.find(peer);
    if (it != sessions.end()) return it->second;
    PreKeyBundle bundle = ws.server->fetch_bundle(store.user_id(), peer);
    SystemRandom rng;
    InitiationResult init = initiate_session(store, bundle, rng);
    store.record_peer_identity(peer, bundle.identity_public, bundle.identity_signing_public);
    return sessions.emplace(peer, std::move(init.session)).first->second;
}

int cmd_init(const fs::path& dir, const std::string& clock_mode, std::int64_t start_ms,
             std::uint64_t seed) {
    if (fs::exists(dir / "workspace.json")) throw IoError("workspace already exists at " + dir.string());
    fs::create_directories(dir / "users");
    ordered_json cfg;
    cfg["version"] = 1;
    cfg["clock"] = clock_mode;
    cfg["clock_ms"] = start_ms;
    cfg["seed"] = seed;  // default seed for simulate
    Workspace::write_text(dir / "workspace.json", cfg.dump(2) + "\n");
    SimClock clock(start_ms);
    Server empty(clock);
    Workspace::write_text(dir / "server.json", empty.to_json().dump() + "\n");
    std::cout << "initialized workspace at " << dir.string() << " (clock: " << clock_mode << ")\n";
    return 0;
}

int cmd_user_add(Workspace& ws, const std::string& user, std::size_t prekeys) {
    if (fs::exists(ws.store_path(user))) throw IoError("user " + user + " already exists");
    SystemRandom rng;
    KeyStore store = KeyStore::generate(user, prekeys, rng, ws.clock().now_ms());
    store.save(ws.store_path(user));
    ws.save_sessions(user, {});
    ws.save();
    std::cout << "created " << user << " with " << prekeys << " one-time prekeys\n";
    return 0;
}

int cmd_register(Workspace& ws, const std::string& user, bool replace) {
    KeyStore store = ws.load_store(user);
    Registration reg = make_registration(store);
    while (store.one_time_pool_size() > 0) {
        PreKeyBundle b = store.public_bundle(true);
        if (!b.one_time_prekey) break;
        reg.one_time_prekeys.push_back(*b.one_time_prekey);
    }
    ws.server->register_user(reg, replace);
    store.save(ws.store_path(user));
    ws.save();
    std::cout << "registered " << user << " (" << reg.one_time_prekeys.size()
              << " one-time prekeys uploaded)\n";
    return 0;
}

int cmd_send(Workspace& ws, const std::string& from, const std::string& to, const std::string& msg,
             const std::string& capture, bool as_json) {
    KeyStore store = ws.load_store(from);
    auto sessions = ws.load_sessions(from);
    SessionState& session = ensure_session(ws, store, sessions, to);
    MessageEnvelope env = encrypt_message(session, to_bytes(msg));
    ws.server->relay(env);
    if (!capture.empty()) append_captured(capture, env);
    store.save(ws.store_path(from));
    ws.save_sessions(from, sessions);
    ws.save();
    for (const auto& w : ws.server->warnings()) std::cerr << "server warning: " << w << "\n";
    if (as_json) {
        ordered_json j;
        j["from"] = from;
        j["to"] = to;
        j["counter"] = env.counter;
        j["wire_bytes"] = env.encode().size();
        j["handshake_attached"] = env.handshake.has_value();
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "sent " << env.encode().size() << " bytes " << from << " -> " << to
                  << " (counter " << env.counter << ")\n";
    }
    return 0;
}

int cmd_recv(Workspace& ws, const std::string& user, bool as_json) {
    KeyStore store = ws.load_store(user);
    auto sessions = ws.load_sessions(user);
    ordered_json messages = ordered_json::array();
    int failures = 0;

    for (MessageEnvelope& env : ws.server->deliver(user)) {
        try {
            auto it = sessions.find(env.sender_id);
            if (it == sessions.end()) {
                if (!env.handshake)
                    throw ProtocolError("no session with " + env.sender_id +
                                        " and no handshake header");
                it = sessions.emplace(env.sender_id,
                                      accept_session(store, *env.handshake, env.sender_id))
                         .first;
            }
            Bytes plain = decrypt_message(it->second, env);
            if (as_json) {
                messages.push_back({{"from", env.sender_id},
                                    {"counter", env.counter},
                                    {"text", to_string(plain)}});
            } else {
                std::cout << "from " << env.sender_id << ": " << to_string(plain) << "\n";
            }
        } catch (const Error& e) {
            ++failures;
            std::cerr << "rejected envelope from " << env.sender_id << ": " << e.what() << "\n";
        }
    }

    store.save(ws.store_path(user));
    ws.save_sessions(user, sessions);
    ws.save();
    if (as_json) std::cout << messages.dump(2) << "\n";
    return failures > 0 ? 2 : 0;
}

int cmd_group_create(Workspace& ws, const std::string& group_id, const std::string& members_csv) {
    std::set<std::string> members;
    std::stringstream ss(members_csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) members.insert(item);
    }
    ws.server->create_group(group_id, members);
    ws.save();
    std::cout << "created group " << group_id << " with " << members.size() << " members\n";
    return 0;
}

int cmd_group_send(Workspace& ws, const std::string& from, const std::string& group_id,
                   const std::string& msg, const std::string& capture) {
    KeyStore store = ws.load_store(from);
    auto sessions = ws.load_sessions(from);
    Group group = ws.server->group(group_id);

    std::map<std::string, MessageEnvelope> fan_out;
    for (const auto& member : group.members) {
        if (member == from) continue;
        SessionState& session = ensure_session(ws, store, sessions, member);
        fan_out.emplace(member, encrypt_message(session, to_bytes(msg)));
    }
    ws.server->group_send(from, group_id, fan_out);
    if (!capture.empty())
        for (const auto& [member, env] : fan_out) append_captured(capture, env);

    store.save(ws.store_path(from));
    ws.save_sessions(from, sessions);
    ws.save();
    std::cout << "fanned out to " << fan_out.size() << " members of " << group_id << "\n";
    return 0;
}

int cmd_verify(Workspace& ws, const std::string& a, const std::string& b, bool as_json) {
    KeyStore store_a = ws.load_store(a);
    KeyStore store_b = ws.load_store(b);

    // Each side pairs its own identity with what it knows (or the server
    // claims) about the peer. A MITM key swap surfaces as a mismatch.
    auto peer_key = [&](const KeyStore& store, const std::string& peer) -> Point32 {
        if (const auto* known = store.peer_identity(peer)) return known->dh_public;
        return ws.server->identity_of(peer).first;
    };

    std::string number_a = safety_number(a, store_a.identity().dh.public_key, b, peer_key(store_a, b));
    std::string number_b = safety_number(b, store_b.identity().dh.public_key, a, peer_key(store_b, a));
    bool match = number_a == number_b;

    Bytes qr = qr_payload(a, store_a.identity().dh.public_key, b, peer_key(store_a, b));
    ws.save();

    if (as_json) {
        ordered_json j;
        j["a"] = a;
        j["b"] = b;
        j["number_a"] = number_a;
        j["number_b"] = number_b;
        j["match"] = match;
        j["qr_base32"] = qr_payload_base32(qr);
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << a << ": " << number_a << "\n" << b << ": " << number_b << "\n";
        std::cout << "qr: " << qr_payload_base32(qr) << "\n";
        std::cout << (match ? "MATCH" : "MISMATCH") << "\n";
    }
    return match ? 0 : 2;
}

int cmd_compromise_dump(Workspace& ws, const std::string& user, const fs::path& out) {
    auto sessions = ws.load_sessions(user);
    ordered_json dump;
    dump["user"] = user;
    ordered_json sj = ordered_json::object();
    for (const auto& [peer, s] : sessions) sj[peer] = s.to_json();
    dump["sessions"] = sj;
    Workspace::write_text(out, dump.dump(2) + "\n");
    std::cout << "dumped " << sessions.size() << " session(s) of " << user << " to " << out.string()
              << "\n";
    return 0;
}

int cmd_compromise_replay(const fs::path& dump_path, const fs::path& captured_path, bool as_json) {
    std::ifstream in(dump_path);
    if (!in) throw IoError("cannot open dump " + dump_path.string());
    json dump = json::parse(in, nullptr, false);
    if (dump.is_discarded()) throw IoError("corrupt dump file");

    std::string user = dump.at("user").get<std::string>();
    std::map<std::string, SessionState> sessions;
    for (const auto& [peer, sj] : dump.at("sessions").items())
        sessions.emplace(peer, SessionState::from_json(sj));

    auto envelopes = read_captured(captured_path);
    std::size_t decrypted = 0;
    for (const MessageEnvelope& env : envelopes) {
        if (env.recipient_id != user) continue;
        auto it = sessions.find(env.sender_id);
        if (it == sessions.end()) continue;
        try {
            decrypt_message(it->second, env);
            ++decrypted;
        } catch (const Error&) {
        }
    }
    if (as_json) {
        ordered_json j;
        j["decrypted"] = decrypted;
        j["captured"] = envelopes.size();
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << decrypted << "/" << envelopes.size() << " decrypted\n";
    }
    return 0;
}

int cmd_metadata_report(Workspace* ws, const std::string& ledger_file, const std::string& out_base,
                        std::int64_t window_ms, std::size_t min_size, bool labeled, int tz_offset,
                        bool as_json) {
    std::vector<MetadataRecord> rows;
    if (!ledger_file.empty()) {
        rows = read_ledger_file(ledger_file);
    } else if (ws) {
        rows = ws->server->ledger();
    } else {
        throw IoError("no ledger: pass --ledger or run inside a workspace");
    }

    auto graph = analysis::build_graph(rows);
    auto groups = analysis::infer_groups(
        rows, window_ms, min_size,
        labeled ? analysis::GroupInferenceMode::labeled : analysis::GroupInferenceMode::blind);
    std::vector<analysis::ActivityProfile> profiles;
    for (const auto& node : graph.nodes)
        profiles.push_back(analysis::activity_profile(rows, node, tz_offset));

    ordered_json report = analysis::report_json(graph, groups, profiles);
    if (!out_base.empty()) report = analysis::write_report(graph, groups, profiles, out_base);
    if (as_json) std::cout << report.dump(2) << "\n";
    else std::cout << analysis::report_text(graph, groups, profiles);
    return 0;
}

int cmd_simulate(Workspace& ws, std::size_t users, std::size_t messages, std::size_t groups,
                 std::uint64_t seed, std::size_t prekeys, bool as_json) {
    SimulationConfig cfg;
    cfg.n_users = users;
    cfg.n_messages = messages;
    cfg.n_groups = groups;
    cfg.seed = seed;
    cfg.prekeys_per_user = prekeys;
    SimulationResult sim = run_simulation(cfg);

    Workspace::write_text(ws.dir / "ledger.jsonl", sim.ledger_text);

    ordered_json truth;
    ordered_json gj = ordered_json::array();
    for (const auto& g : sim.groups)
        gj.push_back({{"group_id", g.group_id}, {"members", g.members}, {"sends", g.sends}});
    truth["groups"] = gj;
    ordered_json pairs = ordered_json::array();
    for (const auto& [key, count] : sim.pair_messages)
        pairs.push_back({{"a", key.first},
                         {"b", key.second},
                         {"messages", count},
                         {"bytes", sim.pair_bytes.at(key)}});
    truth["pairs"] = pairs;
    Workspace::write_text(ws.dir / "groundtruth.json", truth.dump(2) + "\n");

    ws.save();
    if (as_json) {
        ordered_json j;
        j["users"] = users;
        j["relayed_messages"] = sim.relayed_messages;
        j["groups"] = groups;
        j["seed"] = seed;
        j["ledger_rows"] = sim.ledger.size();
        j["ledger_path"] = (ws.dir / "ledger.jsonl").string();
        j["groundtruth_path"] = (ws.dir / "groundtruth.json").string();
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "simulated " << users << " users, " << sim.relayed_messages
                  << " relayed messages, " << groups << " groups (seed " << seed << ")\n"
                  << "ledger: " << (ws.dir / "ledger.jsonl").string() << " (" << sim.ledger.size()
                  << " rows)\n"
                  << "ground truth: " << (ws.dir / "groundtruth.json").string() << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ratchetlab: end-to-end encrypted messaging lab with a metadata-analysis twist"};
    app.require_subcommand(1);
    app.fallthrough();  // accept --dir/--json after the subcommand name

    std::string dir = "ratchetlab-ws";
    bool as_json = false;
    app.add_option("-d,--dir", dir, "workspace directory")->capture_default_str();
    app.add_flag("--json", as_json, "machine-readable output where supported");

    // init
    auto* init = app.add_subcommand("init", "create a new workspace");
    std::string clock_mode = "sim";
    std::int64_t start_ms = 1'700'000'000'000;
    std::uint64_t ws_seed = 42;
    init->add_option("--clock", clock_mode, "clock mode: sim or system")
        ->check(CLI::IsMember({"sim", "system"}))
        ->capture_default_str();
    init->add_option("--start-ms", start_ms, "sim clock start (ms since epoch)")
        ->capture_default_str();
    init->add_option("--seed", ws_seed, "default seed for simulate")->capture_default_str();

    // user-add
    auto* user_add = app.add_subcommand("user-add", "generate a user's key hierarchy");
    std::string user, from, to, msg, capture, group_id, members_csv, a_user, b_user;
    std::size_t prekeys = 100;
    user_add->add_option("--user", user, "phone-number id, e.g. +15551234567")->required();
    user_add->add_option("--prekeys", prekeys, "one-time prekeys to create")->capture_default_str();

    // register
    auto* reg = app.add_subcommand("register", "upload public keys to the server");
    bool replace = false;
    reg->add_option("--user", user, "user to register")->required();
    reg->add_flag("--replace", replace, "replace an existing registration (reinstall)");

    // send
    auto* send = app.add_subcommand("send", "send an encrypted message");
    send->add_option("--from", from, "sender id")->required();
    send->add_option("--to", to, "recipient id")->required();
    send->add_option("--msg", msg, "plaintext message")->required();
    send->add_option("--capture", capture, "append the wire envelope to this file");

    // recv
    auto* recv = app.add_subcommand("recv", "drain the queue and decrypt");
    recv->add_option("--user", user, "receiving user")->required();

    // group-create
    auto* gcreate = app.add_subcommand("group-create", "create a group");
    gcreate->add_option("--group", group_id, "group id")->required();
    gcreate->add_option("--members", members_csv, "comma-separated member ids")->required();

    // group-send
    auto* gsend = app.add_subcommand("group-send", "fan a message out to a group");
    gsend->add_option("--from", from, "sender id")->required();
    gsend->add_option("--group", group_id, "group id")->required();
    gsend->add_option("--msg", msg, "plaintext message")->required();
    gsend->add_option("--capture", capture, "append the wire envelopes to this file");

    // verify
    auto* verify = app.add_subcommand("verify", "compare 60-digit safety numbers");
    verify->add_option("--a", a_user, "first party")->required();
    verify->add_option("--b", b_user, "second party")->required();

    // compromise
    auto* compromise = app.add_subcommand("compromise", "snapshot or replay session state");
    std::string dump_out, replay_dump, captured_file;
    compromise->add_option("--user", user, "user whose sessions to dump");
    compromise->add_option("--out", dump_out, "dump file to write");
    compromise->add_option("--replay", replay_dump, "previously written dump file");
    compromise->add_option("--captured", captured_file, "captured traffic (length-prefixed envelopes)");

    // metadata-report
    auto* report = app.add_subcommand("metadata-report", "analyze the metadata ledger");
    std::string ledger_file, out_base;
    std::int64_t window_ms = analysis::kDefaultGroupWindowMs;
    std::size_t min_size = 3;
    bool labeled = false, blind = false;
    int tz_offset = 0;
    report->add_option("--ledger", ledger_file, "ledger file (default: workspace server state)");
    report->add_option("--out", out_base, "write <out>.json and <out>.txt");
    report->add_option("--window-ms", window_ms, "fan-out clustering window")->capture_default_str();
    report->add_option("--min-size", min_size, "minimum group size")->capture_default_str();
    report->add_flag("--labeled", labeled, "use ledger group ids (upper bound)");
    report->add_flag("--blind", blind, "ignore group ids; cluster by traffic only (default)");
    report->add_option("--tz-offset", tz_offset, "timezone offset in minutes")->capture_default_str();

    // simulate
    auto* simulate = app.add_subcommand("simulate", "run a seeded conversation workload");
    std::size_t sim_users = 50, sim_messages = 5000, sim_groups = 5, sim_prekeys = 16;
    std::uint64_t sim_seed = 42;
    simulate->add_option("--users", sim_users, "number of users")->capture_default_str();
    simulate->add_option("--messages", sim_messages, "number of send events")->capture_default_str();
    simulate->add_option("--groups", sim_groups, "number of groups")->capture_default_str();
    simulate->add_option("--seed", sim_seed, "workload seed")->capture_default_str();
    simulate->add_option("--prekeys", sim_prekeys, "one-time prekeys per user")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;  // help/version exit 0, usage errors exit 1
    }

    try {
        if (blind && labeled) throw ValidationError("--blind and --labeled are mutually exclusive");
        if (init->parsed()) return cmd_init(dir, clock_mode, start_ms, ws_seed);

        if (report->parsed() && !ledger_file.empty() && !fs::exists(fs::path(dir) / "workspace.json")) {
            // report on a standalone ledger file, no workspace needed
            return cmd_metadata_report(nullptr, ledger_file, out_base, window_ms, min_size, labeled,
                                       tz_offset, as_json);
        }
        if (compromise->parsed() && !replay_dump.empty()) {
            if (captured_file.empty()) throw ValidationError("--replay requires --captured");
            return cmd_compromise_replay(replay_dump, captured_file, as_json);
        }

        Workspace ws = Workspace::open(dir);
        if (user_add->parsed()) return cmd_user_add(ws, user, prekeys);
        if (reg->parsed()) return cmd_register(ws, user, replace);
        if (send->parsed()) return cmd_send(ws, from, to, msg, capture, as_json);
        if (recv->parsed()) return cmd_recv(ws, user, as_json);
        if (gcreate->parsed()) return cmd_group_create(ws, group_id, members_csv);
        if (gsend->parsed()) return cmd_group_send(ws, from, group_id, msg, capture);
        if (verify->parsed()) return cmd_verify(ws, a_user, b_user, as_json);
        if (compromise->parsed()) {
            if (user.empty() || dump_out.empty())
                throw ValidationError("compromise needs --user and --out, or --replay and --captured");
            return cmd_compromise_dump(ws, user, dump_out);
        }
        if (report->parsed())
            return cmd_metadata_report(&ws, ledger_file, out_base, window_ms, min_size, labeled,
                                       tz_offset, as_json);
        if (simulate->parsed()) {
            if (simulate->count("--seed") == 0) sim_seed = ws.config.value("seed", sim_seed);
            return cmd_simulate(ws, sim_users, sim_messages, sim_groups, sim_seed, sim_prekeys,
                                as_json);
        }
        throw ValidationError("no subcommand selected");
    } catch (const ValidationError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const ProtocolError& e) {
        std::cerr << "protocol error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
