#pragma once

#include <chrono>
#include <deque>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ratchetlab/key_store.hpp"
#include "ratchetlab/metadata.hpp"
#include "ratchetlab/ratchet.hpp"

namespace ratchetlab {

// Injectable time source so simulations replay identically.
class Clock {
  public:
    virtual ~Clock() = default;
    virtual std::int64_t now_ms() = 0;
};

class SystemClock final : public Clock {
  public:
    std::int64_t now_ms() override {
        return std::chrono::duration_cast<std::chrono::milliseconds>(
                   std::chrono::system_clock::now().time_since_epoch())
            .count();
    }
};

class SimClock final : public Clock {
  public:
    explicit SimClock(std::int64_t start_ms = 0) : now_(start_ms) {}
    std::int64_t now_ms() override { return now_; }
    void advance(std::int64_t delta_ms) { now_ += delta_ms; }
    void set(std::int64_t ms) { now_ = ms; }

  private:
    std::int64_t now_;
};

// What a client uploads at registration: public halves only. The server
// never sees a private scalar or a plaintext; there is no field to put one in.
struct Registration {
    std::string user_id;
    Point32 identity_public{};
    Key32 identity_signing_public{};
    std::uint32_t signed_prekey_id = 0;
    Point32 signed_prekey_public{};
    Signature signed_prekey_signature{};
    std::vector<std::pair<std::uint32_t, Point32>> one_time_prekeys;
};

inline Registration make_registration(const KeyStore& store) {
    Registration reg;
    reg.user_id = store.user_id();
    reg.identity_public = store.identity().dh.public_key;
    reg.identity_signing_public = store.identity().signing.public_key;
    const SignedPreKey& spk = store.active_signed_prekey();
    reg.signed_prekey_id = spk.id;
    reg.signed_prekey_public = spk.pair.public_key;
    reg.signed_prekey_signature = spk.signature;
    return reg;
}

struct Group {
    std::string group_id;
    std::set<std::string> members;  // >= 2
};

// In-process store-and-forward relay: registration, bundle handout with
// one-time consumption, per-recipient queues, group fan-out — and the
// append-only metadata ledger recording all of it. Thread-safe.
class Server {
  public:
    static constexpr std::size_t kLowPoolThreshold = 10;

    explicit Server(Clock& clock) : clock_(clock), mutex_(std::make_unique<std::mutex>()) {}

    Server(Server&&) = default;

    void register_user(const Registration& reg, bool replace = false) {
        if (!is_valid_user_id(reg.user_id)) throw ValidationError("invalid user id " + reg.user_id);
        std::lock_guard lock(*mutex_);
        if (users_.contains(reg.user_id) && !replace)
            throw ProtocolError("user " + reg.user_id + " already registered (pass replace to reinstall)");
        UserRecord rec;
        rec.registration = reg;
        rec.registered_at_ms = tick();
        users_[reg.user_id] = std::move(rec);  // reinstall discards old prekeys and queue
        log({MetadataEvent::registered, reg.user_id, reg.user_id, std::nullopt,
             users_[reg.user_id].registered_at_ms, 0});
    }

    // Uploading more one-time prekeys after registration.
    void upload_one_time_prekeys(const std::string& user_id,
                                 const std::vector<std::pair<std::uint32_t, Point32>>& keys) {
        std::lock_guard lock(*mutex_);
        UserRecord& rec = find_user(user_id);
        for (const auto& k : keys) rec.registration.one_time_prekeys.push_back(k);
    }

    PreKeyBundle fetch_bundle(const std::string& requester_id, const std::string& target_id) {
        std::lock_guard lock(*mutex_);
        UserRecord& rec = find_user(target_id);
        const Registration& reg = rec.registration;

        PreKeyBundle bundle;
        bundle.user_id = reg.user_id;
        bundle.identity_public = reg.identity_public;
        bundle.identity_signing_public = reg.identity_signing_public;
        bundle.signed_prekey_id = reg.signed_prekey_id;
        bundle.signed_prekey_public = reg.signed_prekey_public;
        bundle.signed_prekey_signature = reg.signed_prekey_signature;
        if (!rec.registration.one_time_prekeys.empty()) {
            bundle.one_time_prekey = rec.registration.one_time_prekeys.front();
            rec.registration.one_time_prekeys.erase(rec.registration.one_time_prekeys.begin());
            if (rec.registration.one_time_prekeys.size() < kLowPoolThreshold)
                warnings_.push_back("one-time pool for " + target_id + " down to " +
                                    std::to_string(rec.registration.one_time_prekeys.size()));
        }
        log({MetadataEvent::bundle_fetched, requester_id, target_id, std::nullopt, tick(), 0});
        return bundle;
    }

    void relay(const MessageEnvelope& envelope) {
        std::lock_guard lock(*mutex_);
        relay_locked(envelope, std::nullopt);
    }

    std::vector<MessageEnvelope> deliver(const std::string& user_id) {
        std::lock_guard lock(*mutex_);
        UserRecord& rec = find_user(user_id);
        std::vector<MessageEnvelope> out;
        while (!rec.queue.empty()) {
            QueueEntry entry = std::move(rec.queue.front());
            rec.queue.pop_front();
            log({MetadataEvent::message_delivered, entry.sender_id, user_id, entry.group_id, tick(),
                 entry.wire.size()});
            out.push_back(MessageEnvelope::decode(entry.wire));
        }
        return out;
    }

    void create_group(const std::string& group_id, const std::set<std::string>& members) {
        std::lock_guard lock(*mutex_);
        if (members.size() < 2) throw ValidationError("a group needs at least 2 members");
        if (groups_.contains(group_id)) throw ProtocolError("group " + group_id + " already exists");
        for (const auto& m : members) find_user(m);
        groups_[group_id] = Group{group_id, members};
    }

    const Group& group(const std::string& group_id) const {
        std::lock_guard lock(*mutex_);
        auto it = groups_.find(group_id);
        if (it == groups_.end()) throw ProtocolError("unknown group " + group_id);
        return it->second;
    }

    // Client-side fan-out: the sender supplies one pairwise envelope per
    // other member; the relay queues each and records the shared group id.
    void group_send(const std::string& sender_id, const std::string& group_id,
                    const std::map<std::string, MessageEnvelope>& per_member) {
        std::lock_guard lock(*mutex_);
        auto git = groups_.find(group_id);
        if (git == groups_.end()) throw ProtocolError("unknown group " + group_id);
        const Group& g = git->second;
        if (!g.members.contains(sender_id))
            throw ProtocolError(sender_id + " is not a member of " + group_id);

        for (const auto& member : g.members) {
            if (member == sender_id) continue;
            if (!per_member.contains(member))
                throw ValidationError("missing envelope for member " + member);
        }
        for (const auto& [member, env] : per_member) {
            if (!g.members.contains(member) || member == sender_id)
                throw ValidationError("unexpected envelope for " + member);
            if (env.sender_id != sender_id || env.recipient_id != member)
                throw ValidationError("envelope ids do not match fan-out for " + member);
        }

        std::int64_t ts = tick();  // one timestamp for the whole fan-out
        for (const auto& [member, env] : per_member) relay_locked(env, group_id, ts);
    }

    std::vector<MetadataRecord> ledger() const {
        std::lock_guard lock(*mutex_);
        return ledger_;
    }

    std::string ledger_text() const {
        std::lock_guard lock(*mutex_);
        std::string out;
        for (const auto& row : ledger_) {
            out += to_json_line(row);
            out += '\n';
        }
        return out;
    }

    std::size_t export_ledger(const std::filesystem::path& path) const {
        std::string text;
        std::size_t rows;
        {
            std::lock_guard lock(*mutex_);
            rows = ledger_.size();
            for (const auto& row : ledger_) {
                text += to_json_line(row);
                text += '\n';
            }
        }
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + path.string() + " for writing");
        out << text;
        if (!out.good()) throw IoError("short write to " + path.string());
        return rows;
    }

    std::size_t one_time_pool_size(const std::string& user_id) const {
        std::lock_guard lock(*mutex_);
        auto it = users_.find(user_id);
        if (it == users_.end()) throw ProtocolError("unknown user " + user_id);
        return it->second.registration.one_time_prekeys.size();
    }

    // Directory lookup of registered identity keys; consumes nothing.
    std::pair<Point32, Key32> identity_of(const std::string& user_id) const {
        std::lock_guard lock(*mutex_);
        auto it = users_.find(user_id);
        if (it == users_.end()) throw ProtocolError("unknown user " + user_id);
        return {it->second.registration.identity_public,
                it->second.registration.identity_signing_public};
    }

    bool is_registered(const std::string& user_id) const {
        std::lock_guard lock(*mutex_);
        return users_.contains(user_id);
    }

    std::size_t queue_depth(const std::string& user_id) const {
        std::lock_guard lock(*mutex_);
        auto it = users_.find(user_id);
        if (it == users_.end()) throw ProtocolError("unknown user " + user_id);
        return it->second.queue.size();
    }

    std::vector<std::string> warnings() const {
        std::lock_guard lock(*mutex_);
        return warnings_;
    }

    std::vector<std::string> group_ids() const {
        std::lock_guard lock(*mutex_);
        std::vector<std::string> ids;
        for (const auto& [id, g] : groups_) ids.push_back(id);
        return ids;
    }

    nlohmann::ordered_json to_json() const {
        std::lock_guard lock(*mutex_);
        nlohmann::ordered_json j;
        j["version"] = 1;
        nlohmann::ordered_json users = nlohmann::ordered_json::object();
        for (const auto& [id, rec] : users_) {
            nlohmann::ordered_json u;
            u["identity_public"] = hex_encode(rec.registration.identity_public);
            u["identity_signing_public"] = hex_encode(rec.registration.identity_signing_public);
            u["signed_prekey_id"] = rec.registration.signed_prekey_id;
            u["signed_prekey_public"] = hex_encode(rec.registration.signed_prekey_public);
            u["signed_prekey_signature"] = hex_encode(rec.registration.signed_prekey_signature);
            nlohmann::ordered_json pool = nlohmann::ordered_json::array();
            for (const auto& [otp_id, pub] : rec.registration.one_time_prekeys)
                pool.push_back({{"id", otp_id}, {"public", hex_encode(pub)}});
            u["one_time_prekeys"] = pool;
            u["registered_at_ms"] = rec.registered_at_ms;
            nlohmann::ordered_json queue = nlohmann::ordered_json::array();
            for (const auto& entry : rec.queue)
                queue.push_back({{"sender_id", entry.sender_id},
                                 {"group_id", entry.group_id ? nlohmann::ordered_json(*entry.group_id)
                                                             : nlohmann::ordered_json(nullptr)},
                                 {"wire", hex_encode(entry.wire)}});
            u["queue"] = queue;
            users[id] = u;
        }
        j["users"] = users;
        nlohmann::ordered_json groups = nlohmann::ordered_json::object();
        for (const auto& [id, g] : groups_) groups[id] = g.members;
        j["groups"] = groups;
        nlohmann::ordered_json ledger = nlohmann::ordered_json::array();
        for (const auto& row : ledger_) ledger.push_back(nlohmann::ordered_json::parse(to_json_line(row)));
        j["ledger"] = ledger;
        j["warnings"] = warnings_;
        j["last_ts_ms"] = last_ts_ms_;
        return j;
    }

    static Server from_json(const nlohmann::json& j, Clock& clock) {
        Server s(clock);
        auto key32 = [](const nlohmann::json& v) {
            Bytes raw;
            if (!v.is_string() || !hex_decode(v.get<std::string>(), raw) || raw.size() != 32)
                throw IoError("server state: bad 32-byte hex field");
            Key32 k;
            std::copy(raw.begin(), raw.end(), k.begin());
            return k;
        };
        for (const auto& [id, u] : j.at("users").items()) {
            UserRecord rec;
            rec.registration.user_id = id;
            rec.registration.identity_public = key32(u.at("identity_public"));
            rec.registration.identity_signing_public = key32(u.at("identity_signing_public"));
            rec.registration.signed_prekey_id = u.at("signed_prekey_id").get<std::uint32_t>();
            rec.registration.signed_prekey_public = key32(u.at("signed_prekey_public"));
            Bytes sig_raw;
            if (!hex_decode(u.at("signed_prekey_signature").get<std::string>(), sig_raw) ||
                sig_raw.size() != 64)
                throw IoError("server state: bad signature field");
            std::copy(sig_raw.begin(), sig_raw.end(), rec.registration.signed_prekey_signature.begin());
            for (const auto& p : u.at("one_time_prekeys"))
                rec.registration.one_time_prekeys.emplace_back(p.at("id").get<std::uint32_t>(),
                                                               key32(p.at("public")));
            rec.registered_at_ms = u.at("registered_at_ms").get<std::int64_t>();
            for (const auto& q : u.at("queue")) {
                QueueEntry entry;
                entry.sender_id = q.at("sender_id").get<std::string>();
                if (!q.at("group_id").is_null()) entry.group_id = q.at("group_id").get<std::string>();
                if (!hex_decode(q.at("wire").get<std::string>(), entry.wire))
                    throw IoError("server state: bad queued envelope");
                rec.queue.push_back(std::move(entry));
            }
            s.users_[id] = std::move(rec);
        }
        for (const auto& [id, members] : j.at("groups").items()) {
            Group g;
            g.group_id = id;
            for (const auto& m : members) g.members.insert(m.get<std::string>());
            s.groups_[id] = std::move(g);
        }
        std::size_t line_no = 0;
        for (const auto& row : j.at("ledger")) s.ledger_.push_back(metadata_record_from_json(row, ++line_no));
        for (const auto& w : j.at("warnings")) s.warnings_.push_back(w.get<std::string>());
        s.last_ts_ms_ = j.at("last_ts_ms").get<std::int64_t>();
        return s;
    }

  private:
    struct QueueEntry {
        std::string sender_id;
        std::optional<std::string> group_id;
        Bytes wire;  // exact relayed bytes; delivery hands them back untouched
    };

    struct UserRecord {
        Registration registration;
        std::int64_t registered_at_ms = 0;
        std::deque<QueueEntry> queue;
    };

    UserRecord& find_user(const std::string& user_id) {
        auto it = users_.find(user_id);
        if (it == users_.end()) throw ProtocolError("unknown user " + user_id);
        return it->second;
    }

    // Monotone per logical clock even if the wall clock steps backwards.
    std::int64_t tick() {
        std::int64_t now = clock_.now_ms();
        if (now < last_ts_ms_) now = last_ts_ms_;
        last_ts_ms_ = now;
        return now;
    }

    void relay_locked(const MessageEnvelope& envelope, std::optional<std::string> group_id) {
        relay_locked(envelope, std::move(group_id), tick());
    }

    void relay_locked(const MessageEnvelope& envelope, std::optional<std::string> group_id,
                      std::int64_t ts) {
        UserRecord& rec = find_user(envelope.recipient_id);
        QueueEntry entry;
        entry.sender_id = envelope.sender_id;
        entry.group_id = group_id;
        entry.wire = envelope.encode();
        std::uint64_t size = entry.wire.size();
        rec.queue.push_back(std::move(entry));
        log({MetadataEvent::message_relayed, envelope.sender_id, envelope.recipient_id,
             std::move(group_id), ts, size});
    }

    void log(MetadataRecord row) { ledger_.push_back(std::move(row)); }

    Clock& clock_;
    std::unique_ptr<std::mutex> mutex_;
    std::map<std::string, UserRecord> users_;
    std::map<std::string, Group> groups_;
    std::vector<MetadataRecord> ledger_;
    std::vector<std::string> warnings_;
    std::int64_t last_ts_ms_ = 0;
};

}  // namespace ratchetlab
