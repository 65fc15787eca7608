#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ratchetlab/crypto.hpp"

namespace ratchetlab {

// E.164-shaped id: '+', leading digit 1-9, 5 to 15 digits total.
inline bool is_valid_user_id(std::string_view id) {
    if (id.size() < 6 || id.size() > 16) return false;
    if (id[0] != '+') return false;
    if (id[1] < '1' || id[1] > '9') return false;
    for (std::size_t i = 2; i < id.size(); ++i)
        if (id[i] < '0' || id[i] > '9') return false;
    return true;
}

struct IdentityKeyPair {
    DhKeyPair dh;
    SigningKeyPair signing;
};

struct SignedPreKey {
    std::uint32_t id = 0;
    DhKeyPair pair;
    Signature signature{};
    std::int64_t created_at_ms = 0;
};

struct OneTimePreKey {
    std::uint32_t id = 0;
    DhKeyPair pair;
};

struct PreKeyBundle {
    std::string user_id;
    Point32 identity_public{};
    Key32 identity_signing_public{};
    std::uint32_t signed_prekey_id = 0;
    Point32 signed_prekey_public{};
    Signature signed_prekey_signature{};
    std::optional<std::pair<std::uint32_t, Point32>> one_time_prekey;
};

// The prekey signature binds the DH identity, the signing identity, and the
// prekey point together, so swapping any one of them invalidates the bundle.
inline Bytes signed_prekey_message(const Point32& identity_dh, const Key32& identity_signing,
                                   const Point32& prekey_public) {
    Bytes msg = to_bytes("ratchetlab-signed-prekey-v1");
    append(msg, identity_dh);
    append(msg, identity_signing);
    append(msg, prekey_public);
    return msg;
}

inline bool verify_bundle(const PreKeyBundle& bundle) {
    Bytes msg = signed_prekey_message(bundle.identity_public, bundle.identity_signing_public,
                                      bundle.signed_prekey_public);
    return ed25519_verify(bundle.identity_signing_public, msg, bundle.signed_prekey_signature);
}

// Per-user key hierarchy: one identity, one active signed prekey (plus at
// most one grace predecessor), and a replenishable one-time pool. Single
// logical writer; concurrent bundle reads are safe.
class KeyStore {
  public:
    struct PeerIdentity {
        Point32 dh_public{};
        Key32 signing_public{};
    };

    static KeyStore generate(const std::string& user_id, std::size_t n_one_time, RandomSource& rng,
                             std::int64_t now_ms = 0) {
        if (!is_valid_user_id(user_id))
            throw ValidationError("invalid user id '" + user_id + "': expected +<5..15 digits>");
        KeyStore store;
        store.user_id_ = user_id;
        store.identity_.dh = generate_dh_keypair(rng);
        store.identity_.signing = generate_signing_keypair(rng);
        store.active_spk_ = store.make_signed_prekey(1, rng, now_ms);
        store.next_signed_prekey_id_ = 2;
        store.next_one_time_id_ = 1;
        store.add_one_time_prekeys(n_one_time, rng);
        return store;
    }

    const std::string& user_id() const { return user_id_; }
    const IdentityKeyPair& identity() const { return identity_; }
    const SignedPreKey& active_signed_prekey() const { return active_spk_; }
    const std::optional<SignedPreKey>& grace_signed_prekey() const { return grace_spk_; }

    // One-time keys not yet handed out in any bundle.
    std::size_t one_time_pool_size() const {
        std::size_t n = 0;
        for (const auto& [id, otp] : one_time_) {
            (void)otp;
            if (!bundled_.contains(id)) ++n;
        }
        return n;
    }

    std::size_t one_time_total() const { return one_time_.size(); }

    // Public bundle as the server would hand it out. Consuming removes the
    // one-time public from the available pool; the private half stays until
    // a handshake references it.
    PreKeyBundle public_bundle(bool consume_one_time) {
        PreKeyBundle bundle;
        bundle.user_id = user_id_;
        bundle.identity_public = identity_.dh.public_key;
        bundle.identity_signing_public = identity_.signing.public_key;
        bundle.signed_prekey_id = active_spk_.id;
        bundle.signed_prekey_public = active_spk_.pair.public_key;
        bundle.signed_prekey_signature = active_spk_.signature;
        if (consume_one_time) {
            for (const auto& [id, otp] : one_time_) {
                if (bundled_.contains(id)) continue;
                bundled_.insert(id);
                bundle.one_time_prekey = {id, otp.pair.public_key};
                break;
            }
        }
        return bundle;
    }

    // New active key; the previous one stays valid for in-flight handshakes,
    // anything older is purged.
    const SignedPreKey& rotate_signed_prekey(RandomSource& rng, std::int64_t now_ms = 0) {
        SignedPreKey fresh = make_signed_prekey(next_signed_prekey_id_++, rng, now_ms);
        grace_spk_ = std::move(active_spk_);
        active_spk_ = std::move(fresh);
        return active_spk_;
    }

    void replenish_one_time(std::size_t count, RandomSource& rng) { add_one_time_prekeys(count, rng); }

    const SignedPreKey* find_signed_prekey(std::uint32_t id) const {
        if (active_spk_.id == id) return &active_spk_;
        if (grace_spk_ && grace_spk_->id == id) return &*grace_spk_;
        return nullptr;
    }

    // Removes the private key; a second take of the same id fails.
    std::optional<DhKeyPair> take_one_time_prekey(std::uint32_t id) {
        auto it = one_time_.find(id);
        if (it == one_time_.end()) return std::nullopt;
        DhKeyPair pair = it->second.pair;
        one_time_.erase(it);
        bundled_.erase(id);
        return pair;
    }

    void record_peer_identity(const std::string& peer_id, const Point32& dh_public,
                              const Key32& signing_public) {
        peers_[peer_id] = PeerIdentity{dh_public, signing_public};
    }

    const PeerIdentity* peer_identity(const std::string& peer_id) const {
        auto it = peers_.find(peer_id);
        return it == peers_.end() ? nullptr : &it->second;
    }

    const std::map<std::string, PeerIdentity>& peers() const { return peers_; }
    const std::vector<std::string>& load_warnings() const { return load_warnings_; }

    void save(const std::filesystem::path& path) const {
        std::string text = serialize();
        std::filesystem::path tmp = path;
        tmp += ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
            out << text;
            if (!out.good()) throw IoError("short write to " + tmp.string());
        }
        std::error_code ec;
        std::filesystem::permissions(tmp,
                                     std::filesystem::perms::owner_read | std::filesystem::perms::owner_write,
                                     std::filesystem::perm_options::replace, ec);
        std::filesystem::rename(tmp, path, ec);
        if (ec) throw IoError("cannot move store into place: " + ec.message());
    }

    static KeyStore load(const std::filesystem::path& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw IoError("cannot open key store " + path.string());
        std::stringstream buffer;
        buffer << in.rdbuf();
        return deserialize(buffer.str());
    }

    std::string serialize() const {
        using json = nlohmann::ordered_json;
        std::ostringstream out;
        json header;
        header["version"] = 1;
        header["user_id"] = user_id_;
        out << header.dump() << "\n";

        json identity;
        identity["type"] = "identity";
        identity["dh_secret"] = hex_encode(identity_.dh.secret);
        identity["dh_public"] = hex_encode(identity_.dh.public_key);
        identity["sign_seed"] = hex_encode(identity_.signing.seed);
        identity["sign_public"] = hex_encode(identity_.signing.public_key);
        out << identity.dump() << "\n";

        auto spk_line = [&](const SignedPreKey& spk, const char* status) {
            json j;
            j["type"] = "signed_prekey";
            j["status"] = status;
            j["id"] = spk.id;
            j["secret"] = hex_encode(spk.pair.secret);
            j["public"] = hex_encode(spk.pair.public_key);
            j["signature"] = hex_encode(spk.signature);
            j["created_at_ms"] = spk.created_at_ms;
            out << j.dump() << "\n";
        };
        spk_line(active_spk_, "active");
        if (grace_spk_) spk_line(*grace_spk_, "grace");

        for (const auto& [id, otp] : one_time_) {
            json j;
            j["type"] = "one_time";
            j["id"] = id;
            j["secret"] = hex_encode(otp.pair.secret);
            j["public"] = hex_encode(otp.pair.public_key);
            j["bundled"] = bundled_.contains(id);
            out << j.dump() << "\n";
        }

        for (const auto& [peer_id, peer] : peers_) {
            json j;
            j["type"] = "peer";
            j["user_id"] = peer_id;
            j["dh_public"] = hex_encode(peer.dh_public);
            j["sign_public"] = hex_encode(peer.signing_public);
            out << j.dump() << "\n";
        }

        json counters;
        counters["type"] = "counters";
        counters["next_one_time_id"] = next_one_time_id_;
        counters["next_signed_prekey_id"] = next_signed_prekey_id_;
        out << counters.dump() << "\n";
        return out.str();
    }

    static KeyStore deserialize(const std::string& text) {
        KeyStore store;
        std::istringstream in(text);
        std::string line;
        std::size_t line_no = 0;
        bool saw_header = false, saw_identity = false, saw_active = false, saw_counters = false;

        static const std::map<std::string, std::set<std::string>> known_fields = {
            {"header", {"version", "user_id"}},
            {"identity", {"type", "dh_secret", "dh_public", "sign_seed", "sign_public"}},
            {"signed_prekey", {"type", "status", "id", "secret", "public", "signature", "created_at_ms"}},
            {"one_time", {"type", "id", "secret", "public", "bundled"}},
            {"peer", {"type", "user_id", "dh_public", "sign_public"}},
            {"counters", {"type", "next_one_time_id", "next_signed_prekey_id"}},
        };

        auto fail = [&](const std::string& why) -> void {
            throw IoError("key store line " + std::to_string(line_no) + ": " + why);
        };
        auto warn_unknown = [&](const nlohmann::json& j, const std::string& kind) {
            const auto& known = known_fields.at(kind);
            for (auto it = j.begin(); it != j.end(); ++it)
                if (!known.contains(it.key()))
                    store.load_warnings_.push_back("line " + std::to_string(line_no) +
                                                   ": ignoring unknown field '" + it.key() + "'");
        };

        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
            if (j.is_discarded()) fail("not valid JSON");

            if (!saw_header) {
                if (!j.contains("version") || !j.contains("user_id")) fail("missing store header");
                if (j["version"].get<int>() != 1) fail("unsupported store version");
                store.user_id_ = j["user_id"].get<std::string>();
                if (!is_valid_user_id(store.user_id_)) fail("invalid user id in header");
                warn_unknown(j, "header");
                saw_header = true;
                continue;
            }

            std::string type = j.value("type", "");
            if (type == "identity") {
                store.identity_.dh.secret = read_key32(j, "dh_secret", line_no);
                store.identity_.dh.public_key = read_key32(j, "dh_public", line_no);
                store.identity_.signing.seed = read_key32(j, "sign_seed", line_no);
                store.identity_.signing.public_key = read_key32(j, "sign_public", line_no);
                warn_unknown(j, "identity");
                saw_identity = true;
            } else if (type == "signed_prekey") {
                SignedPreKey spk;
                spk.id = j.at("id").get<std::uint32_t>();
                spk.pair.secret = read_key32(j, "secret", line_no);
                spk.pair.public_key = read_key32(j, "public", line_no);
                spk.signature = read_signature(j, "signature", line_no);
                spk.created_at_ms = j.at("created_at_ms").get<std::int64_t>();
                std::string status = j.at("status").get<std::string>();
                warn_unknown(j, "signed_prekey");
                if (status == "active") {
                    store.active_spk_ = spk;
                    saw_active = true;
                } else if (status == "grace") {
                    store.grace_spk_ = spk;
                } else {
                    fail("unknown signed_prekey status '" + status + "'");
                }
            } else if (type == "one_time") {
                OneTimePreKey otp;
                otp.id = j.at("id").get<std::uint32_t>();
                otp.pair.secret = read_key32(j, "secret", line_no);
                otp.pair.public_key = read_key32(j, "public", line_no);
                if (store.one_time_.contains(otp.id)) fail("duplicate one-time prekey id");
                if (j.at("bundled").get<bool>()) store.bundled_.insert(otp.id);
                store.one_time_.emplace(otp.id, otp);
                warn_unknown(j, "one_time");
            } else if (type == "peer") {
                PeerIdentity peer;
                peer.dh_public = read_key32(j, "dh_public", line_no);
                peer.signing_public = read_key32(j, "sign_public", line_no);
                store.peers_[j.at("user_id").get<std::string>()] = peer;
                warn_unknown(j, "peer");
            } else if (type == "counters") {
                store.next_one_time_id_ = j.at("next_one_time_id").get<std::uint32_t>();
                store.next_signed_prekey_id_ = j.at("next_signed_prekey_id").get<std::uint32_t>();
                warn_unknown(j, "counters");
                saw_counters = true;
            } else {
                store.load_warnings_.push_back("line " + std::to_string(line_no) +
                                               ": ignoring unknown record type '" + type + "'");
            }
        }

        if (!saw_header || !saw_identity || !saw_active || !saw_counters)
            throw IoError("key store truncated: missing " +
                          std::string(!saw_header     ? "header"
                                      : !saw_identity ? "identity record"
                                      : !saw_active   ? "active signed prekey"
                                                      : "counters record"));
        return store;
    }

  private:
    static Key32 read_key32(const nlohmann::json& j, const char* field, std::size_t line_no) {
        Bytes raw;
        if (!j.contains(field) || !j[field].is_string() ||
            !hex_decode(j[field].get<std::string>(), raw) || raw.size() != 32)
            throw IoError("key store line " + std::to_string(line_no) + ": field '" + field +
                          "' is not 32 hex-encoded bytes");
        Key32 out;
        std::copy(raw.begin(), raw.end(), out.begin());
        return out;
    }

    static Signature read_signature(const nlohmann::json& j, const char* field, std::size_t line_no) {
        Bytes raw;
        if (!j.contains(field) || !j[field].is_string() ||
            !hex_decode(j[field].get<std::string>(), raw) || raw.size() != 64)
            throw IoError("key store line " + std::to_string(line_no) + ": field '" + field +
                          "' is not 64 hex-encoded bytes");
        Signature out;
        std::copy(raw.begin(), raw.end(), out.begin());
        return out;
    }

    SignedPreKey make_signed_prekey(std::uint32_t id, RandomSource& rng, std::int64_t now_ms) const {
        SignedPreKey spk;
        spk.id = id;
        spk.pair = generate_dh_keypair(rng);
        spk.created_at_ms = now_ms;
        Bytes msg = signed_prekey_message(identity_.dh.public_key, identity_.signing.public_key,
                                          spk.pair.public_key);
        spk.signature = ed25519_sign(identity_.signing.seed, identity_.signing.public_key, msg);
        return spk;
    }

    void add_one_time_prekeys(std::size_t count, RandomSource& rng) {
        for (std::size_t i = 0; i < count; ++i) {
            OneTimePreKey otp;
            otp.id = next_one_time_id_++;
            otp.pair = generate_dh_keypair(rng);
            one_time_.emplace(otp.id, otp);
        }
    }

    std::string user_id_;
    IdentityKeyPair identity_;
    SignedPreKey active_spk_;
    std::optional<SignedPreKey> grace_spk_;
    std::map<std::uint32_t, OneTimePreKey> one_time_;
    std::set<std::uint32_t> bundled_;
    std::map<std::string, PeerIdentity> peers_;
    std::uint32_t next_one_time_id_ = 1;
    std::uint32_t next_signed_prekey_id_ = 1;
    std::vector<std::string> load_warnings_;
};

}  // namespace ratchetlab
