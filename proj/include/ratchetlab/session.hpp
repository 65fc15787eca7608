#pragma once

#include <map>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "ratchetlab/crypto.hpp"
#include "ratchetlab/key_store.hpp"

namespace ratchetlab {

inline constexpr std::string_view kSessionInfo = "ratchetlab-session-v1";
inline constexpr std::size_t kMasterKeyFull = 128;      // 4 ECDH terms
inline constexpr std::size_t kMasterKeyFallback = 96;   // pool exhausted: 3 terms

struct ChainState {
    Key32 chain_key{};
    std::uint32_t counter = 0;

    bool operator==(const ChainState&) const = default;
};

// First-message bootstrap data; rides on every envelope until the initiator
// sees a reply. Wire layout (big-endian):
//   version 0x01 | flags (bit0 = one-time id present)
//   | identity_dh(32) | identity_signing(32) | ephemeral(32)
//   | signed_prekey_id(4) | one_time_prekey_id(4, iff flag)
struct HandshakeHeader {
    Point32 initiator_identity_dh{};
    Key32 initiator_identity_signing{};
    Point32 initiator_ephemeral{};
    std::uint32_t signed_prekey_id = 0;
    std::optional<std::uint32_t> one_time_prekey_id;

    static constexpr std::size_t kBaseSize = 1 + 1 + 32 + 32 + 32 + 4;

    std::size_t encoded_size() const { return kBaseSize + (one_time_prekey_id ? 4 : 0); }

    void encode_to(Bytes& out) const {
        append_u8(out, 0x01);
        append_u8(out, one_time_prekey_id ? 0x01 : 0x00);
        append(out, initiator_identity_dh);
        append(out, initiator_identity_signing);
        append(out, initiator_ephemeral);
        append_u32_be(out, signed_prekey_id);
        if (one_time_prekey_id) append_u32_be(out, *one_time_prekey_id);
    }

    Bytes encode() const {
        Bytes out;
        out.reserve(encoded_size());
        encode_to(out);
        return out;
    }

    // Consumes its bytes from the front of `data`; strict on version/flags.
    static HandshakeHeader decode(std::span<const std::uint8_t> data, std::size_t& offset) {
        if (data.size() - offset < kBaseSize) throw IntegrityError("handshake header truncated");
        const std::uint8_t* p = data.data() + offset;
        if (p[0] != 0x01) throw IntegrityError("unsupported handshake version");
        std::uint8_t flags = p[1];
        if (flags > 0x01) throw IntegrityError("unknown handshake flags");
        HandshakeHeader h;
        std::copy(p + 2, p + 34, h.initiator_identity_dh.begin());
        std::copy(p + 34, p + 66, h.initiator_identity_signing.begin());
        std::copy(p + 66, p + 98, h.initiator_ephemeral.begin());
        h.signed_prekey_id = read_u32_be(p + 98);
        offset += kBaseSize;
        if (flags & 0x01) {
            if (data.size() - offset < 4) throw IntegrityError("handshake header truncated");
            h.one_time_prekey_id = read_u32_be(data.data() + offset);
            offset += 4;
        }
        return h;
    }

    bool operator==(const HandshakeHeader&) const = default;
};

struct DerivedChains {
    Key32 root{};
    Key32 chain_a{};  // initiator sends on this one
    Key32 chain_b{};
};

// Split of hkdf(master, 32 zero bytes, "ratchetlab-session-v1", 96).
inline DerivedChains derive_chains(std::span<const std::uint8_t> master) {
    if (master.size() != kMasterKeyFull && master.size() != kMasterKeyFallback)
        throw ValidationError("master key must be 96 or 128 bytes, got " +
                              std::to_string(master.size()));
    Key32 zero_salt{};
    Bytes okm = hkdf(master, zero_salt, to_bytes(kSessionInfo), 96);
    DerivedChains out;
    std::copy(okm.begin(), okm.begin() + 32, out.root.begin());
    std::copy(okm.begin() + 32, okm.begin() + 64, out.chain_a.begin());
    std::copy(okm.begin() + 64, okm.end(), out.chain_b.begin());
    secure_wipe(okm);
    return out;
}

enum class Role : std::uint8_t { initiator, recipient };

using MessageKey = std::array<std::uint8_t, kMessageKeySize>;

// Live ratchet state for one pairwise conversation. Single-owner mutable;
// the master secret never outlives establishment.
struct SessionState {
    std::string self_id;
    std::string peer_id;
    Role role = Role::initiator;
    Key32 root_key{};
    ChainState send_chain;
    ChainState recv_chain;
    std::map<std::uint32_t, MessageKey> skipped_keys;  // recv counter -> message key
    std::optional<HandshakeHeader> pending_handshake;
    Point32 peer_identity_dh{};

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["self_id"] = self_id;
        j["peer_id"] = peer_id;
        j["role"] = role == Role::initiator ? "initiator" : "recipient";
        j["root_key"] = hex_encode(root_key);
        j["send_chain_key"] = hex_encode(send_chain.chain_key);
        j["send_counter"] = send_chain.counter;
        j["recv_chain_key"] = hex_encode(recv_chain.chain_key);
        j["recv_counter"] = recv_chain.counter;
        nlohmann::ordered_json skipped = nlohmann::ordered_json::object();
        for (const auto& [counter, key] : skipped_keys)
            skipped[std::to_string(counter)] = hex_encode(key);
        j["skipped_keys"] = skipped;
        if (pending_handshake) j["pending_handshake"] = hex_encode(pending_handshake->encode());
        j["peer_identity_dh"] = hex_encode(peer_identity_dh);
        return j;
    }

    static SessionState from_json(const nlohmann::json& j) {
        auto key32 = [](const nlohmann::json& v) {
            Bytes raw;
            if (!v.is_string() || !hex_decode(v.get<std::string>(), raw) || raw.size() != 32)
                throw IoError("session state: bad 32-byte hex field");
            Key32 k;
            std::copy(raw.begin(), raw.end(), k.begin());
            return k;
        };
        SessionState s;
        s.self_id = j.at("self_id").get<std::string>();
        s.peer_id = j.at("peer_id").get<std::string>();
        s.role = j.at("role").get<std::string>() == "initiator" ? Role::initiator : Role::recipient;
        s.root_key = key32(j.at("root_key"));
        s.send_chain.chain_key = key32(j.at("send_chain_key"));
        s.send_chain.counter = j.at("send_counter").get<std::uint32_t>();
        s.recv_chain.chain_key = key32(j.at("recv_chain_key"));
        s.recv_chain.counter = j.at("recv_counter").get<std::uint32_t>();
        for (const auto& [counter_str, key_hex] : j.at("skipped_keys").items()) {
            Bytes raw;
            if (!hex_decode(key_hex.get<std::string>(), raw) || raw.size() != kMessageKeySize)
                throw IoError("session state: bad skipped key");
            MessageKey mk;
            std::copy(raw.begin(), raw.end(), mk.begin());
            s.skipped_keys[static_cast<std::uint32_t>(std::stoul(counter_str))] = mk;
        }
        if (j.contains("pending_handshake")) {
            Bytes raw;
            if (!hex_decode(j["pending_handshake"].get<std::string>(), raw))
                throw IoError("session state: bad pending handshake");
            std::size_t offset = 0;
            s.pending_handshake = HandshakeHeader::decode(raw, offset);
        }
        s.peer_identity_dh = key32(j.at("peer_identity_dh"));
        return s;
    }
};

struct InitiationResult {
    SessionState session;
    HandshakeHeader header;
};

namespace detail {

inline SessionState session_from_master(Bytes& master, Role role, std::string self_id,
                                         std::string peer_id, const Point32& peer_identity_dh) {
    DerivedChains chains = derive_chains(master);
    secure_wipe(master);  // the master secret must not survive establishment

    SessionState s;
    s.self_id = std::move(self_id);
    s.peer_id = std::move(peer_id);
    s.role = role;
    s.root_key = chains.root;
    s.send_chain.chain_key = role == Role::initiator ? chains.chain_a : chains.chain_b;
    s.recv_chain.chain_key = role == Role::initiator ? chains.chain_b : chains.chain_a;
    s.peer_identity_dh = peer_identity_dh;
    return s;
}

}  // namespace detail

// Initiator side: verify the bundle signature, generate the ephemeral pair,
// run the (3 or 4)-term ECDH and derive the session chains.
inline InitiationResult initiate_session(const KeyStore& initiator, const PreKeyBundle& bundle,
                                         RandomSource& rng) {
    if (!verify_bundle(bundle))
        throw ProtocolError("handshake refused: signed-prekey signature does not verify for " +
                            bundle.user_id);

    DhKeyPair ephemeral = generate_dh_keypair(rng);

    Bytes master;
    master.reserve(kMasterKeyFull);
    append(master, ecdh(initiator.identity().dh.secret, bundle.signed_prekey_public));
    append(master, ecdh(ephemeral.secret, bundle.identity_public));
    append(master, ecdh(ephemeral.secret, bundle.signed_prekey_public));
    if (bundle.one_time_prekey) append(master, ecdh(ephemeral.secret, bundle.one_time_prekey->second));

    HandshakeHeader header;
    header.initiator_identity_dh = initiator.identity().dh.public_key;
    header.initiator_identity_signing = initiator.identity().signing.public_key;
    header.initiator_ephemeral = ephemeral.public_key;
    header.signed_prekey_id = bundle.signed_prekey_id;
    if (bundle.one_time_prekey) header.one_time_prekey_id = bundle.one_time_prekey->first;

    SessionState session = detail::session_from_master(master, Role::initiator, initiator.user_id(),
                                                       bundle.user_id, bundle.identity_public);
    session.pending_handshake = header;
    secure_wipe(ephemeral.secret);
    return InitiationResult{std::move(session), header};
}

// Recipient side: mirror the ECDH terms with the private halves and delete
// the referenced one-time prekey. The sender id comes from the envelope.
inline SessionState accept_session(KeyStore& recipient, const HandshakeHeader& header,
                                   const std::string& initiator_id) {
    const SignedPreKey* spk = recipient.find_signed_prekey(header.signed_prekey_id);
    if (!spk)
        throw ProtocolError("handshake refers to unknown signed prekey id " +
                            std::to_string(header.signed_prekey_id));

    std::optional<DhKeyPair> one_time;
    if (header.one_time_prekey_id) {
        one_time = recipient.take_one_time_prekey(*header.one_time_prekey_id);
        if (!one_time)
            throw ReplayError("one-time prekey id " + std::to_string(*header.one_time_prekey_id) +
                              " already consumed or unknown");
    }

    Bytes master;
    master.reserve(kMasterKeyFull);
    append(master, ecdh(spk->pair.secret, header.initiator_identity_dh));
    append(master, ecdh(recipient.identity().dh.secret, header.initiator_ephemeral));
    append(master, ecdh(spk->pair.secret, header.initiator_ephemeral));
    if (one_time) {
        append(master, ecdh(one_time->secret, header.initiator_ephemeral));
        secure_wipe(one_time->secret);
    }

    recipient.record_peer_identity(initiator_id, header.initiator_identity_dh,
                                   header.initiator_identity_signing);
    return detail::session_from_master(master, Role::recipient, recipient.user_id(), initiator_id,
                                       header.initiator_identity_dh);
}

}  // namespace ratchetlab
