#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ratchetlab/crypto.hpp"
#include "ratchetlab/session.hpp"

namespace ratchetlab {

inline constexpr std::string_view kMessageInfo = "ratchetlab-msg-v1";
inline constexpr std::uint32_t kMaxSkip = 1000;          // flood guard
inline constexpr std::size_t kSkippedCacheCapacity = 1000;

// Wire record (big-endian):
//   version 0x01 | flags (bit0 = handshake present)
//   | sender len(1)+bytes | recipient len(1)+bytes | counter(4)
//   | [handshake header] | ciphertext len(4)+bytes | mac(32)
// The MAC covers everything before the ciphertext length as associated data.
struct MessageEnvelope {
    std::uint8_t version = 0x01;
    std::string sender_id;
    std::string recipient_id;
    std::uint32_t counter = 0;
    std::optional<HandshakeHeader> handshake;
    Bytes ciphertext;
    Key32 mac{};

    Bytes associated_data() const {
        Bytes out;
        append_u8(out, version);
        append_u8(out, handshake ? 0x01 : 0x00);
        append_u8(out, static_cast<std::uint8_t>(sender_id.size()));
        append(out, to_bytes(sender_id));
        append_u8(out, static_cast<std::uint8_t>(recipient_id.size()));
        append(out, to_bytes(recipient_id));
        append_u32_be(out, counter);
        if (handshake) handshake->encode_to(out);
        return out;
    }

    Bytes encode() const {
        Bytes out = associated_data();
        append_u32_be(out, static_cast<std::uint32_t>(ciphertext.size()));
        append(out, ciphertext);
        append(out, mac);
        return out;
    }

    static MessageEnvelope decode(std::span<const std::uint8_t> data) {
        std::size_t off = 0;
        auto need = [&](std::size_t n) {
            if (data.size() - off < n) throw IntegrityError("envelope truncated");
        };

        need(2);
        MessageEnvelope env;
        env.version = data[off++];
        if (env.version != 0x01) throw IntegrityError("unsupported envelope version");
        std::uint8_t flags = data[off++];
        if (flags > 0x01) throw IntegrityError("unknown envelope flags");

        auto read_id = [&]() {
            need(1);
            std::size_t len = data[off++];
            need(len);
            std::string id(reinterpret_cast<const char*>(data.data() + off), len);
            off += len;
            return id;
        };
        env.sender_id = read_id();
        env.recipient_id = read_id();

        need(4);
        env.counter = read_u32_be(data.data() + off);
        off += 4;

        if (flags & 0x01) env.handshake = HandshakeHeader::decode(data, off);

        need(4);
        std::uint32_t ct_len = read_u32_be(data.data() + off);
        off += 4;
        need(ct_len);
        env.ciphertext.assign(data.begin() + off, data.begin() + off + ct_len);
        off += ct_len;

        need(32);
        std::copy(data.begin() + off, data.begin() + off + 32, env.mac.begin());
        off += 32;
        if (off != data.size()) throw IntegrityError("trailing bytes after envelope");
        return env;
    }
};

struct ChainStep {
    MessageKey message_key{};
    ChainState next;
};

// One ratchet step. The message key is the HMAC(chain, 0x01) seed expanded
// to 80 bytes; the chain key moves to HMAC(chain, 0x02). Pure function.
inline ChainStep advance_chain(const ChainState& chain) {
    if (chain.counter == 0xffffffffu) throw ProtocolError("chain exhausted at counter 2^32-1");

    static constexpr std::uint8_t kMessageSeed[1] = {0x01};
    static constexpr std::uint8_t kChainSeed[1] = {0x02};

    Key32 seed = hmac_sha256(chain.chain_key, kMessageSeed);
    Key32 zero_salt{};
    Bytes expanded = hkdf(seed, zero_salt, to_bytes(kMessageInfo), kMessageKeySize);

    ChainStep step;
    std::copy(expanded.begin(), expanded.end(), step.message_key.begin());
    step.next.chain_key = hmac_sha256(chain.chain_key, kChainSeed);
    step.next.counter = chain.counter + 1;

    secure_wipe(seed);
    secure_wipe(expanded);
    return step;
}

// Encrypts on the send chain and ratchets it forward; the spent chain key is
// overwritten in place. The handshake header rides along while pending.
inline MessageEnvelope encrypt_message(SessionState& session, std::span<const std::uint8_t> plaintext) {
    ChainStep step = advance_chain(session.send_chain);

    MessageEnvelope env;
    env.sender_id = session.self_id;
    env.recipient_id = session.peer_id;
    env.counter = session.send_chain.counter;
    env.handshake = session.pending_handshake;

    AeadResult sealed = aead_encrypt(step.message_key, plaintext, env.associated_data());
    env.ciphertext = std::move(sealed.ciphertext);
    env.mac = sealed.mac;

    session.send_chain = step.next;
    secure_wipe(step.message_key);
    return env;
}

namespace detail {

inline void cache_skipped_key(SessionState& session, std::uint32_t counter, const MessageKey& key) {
    session.skipped_keys[counter] = key;
    while (session.skipped_keys.size() > kSkippedCacheCapacity)
        session.skipped_keys.erase(session.skipped_keys.begin());  // drop oldest counter
}

}  // namespace detail

// Verifies the MAC before touching any state; on success the receive chain
// is committed past the message and the used key is destroyed. Messages
// arriving early leave keys in the skipped cache; replays are refused.
inline Bytes decrypt_message(SessionState& session, const MessageEnvelope& envelope) {
    if (envelope.recipient_id != session.self_id)
        throw ValidationError("envelope addressed to " + envelope.recipient_id + ", not " +
                              session.self_id);
    if (envelope.sender_id != session.peer_id)
        throw ValidationError("envelope from " + envelope.sender_id +
                              " does not belong to this session");

    const Bytes ad = envelope.associated_data();
    const std::uint32_t expected = session.recv_chain.counter;

    if (envelope.counter < expected) {
        auto it = session.skipped_keys.find(envelope.counter);
        if (it == session.skipped_keys.end())
            throw ReplayError("counter " + std::to_string(envelope.counter) +
                              " already consumed (at-most-once decryption)");
        Bytes plaintext = aead_decrypt(it->second, envelope.ciphertext, envelope.mac, ad);
        secure_wipe(it->second);
        session.skipped_keys.erase(it);
        session.pending_handshake.reset();  // peer provably has the session
        return plaintext;
    }

    if (envelope.counter - expected > kMaxSkip)
        throw ProtocolError("skip distance " + std::to_string(envelope.counter - expected) +
                            " exceeds flood guard of " + std::to_string(kMaxSkip));

    // Work on a copy so a MAC failure leaves the session untouched.
    ChainState work = session.recv_chain;
    std::vector<std::pair<std::uint32_t, MessageKey>> skipped;
    while (work.counter < envelope.counter) {
        ChainStep step = advance_chain(work);
        skipped.emplace_back(work.counter, step.message_key);
        work = step.next;
    }
    ChainStep step = advance_chain(work);

    Bytes plaintext;
    try {
        plaintext = aead_decrypt(step.message_key, envelope.ciphertext, envelope.mac, ad);
    } catch (...) {
        secure_wipe(step.message_key);
        for (auto& [counter, key] : skipped) secure_wipe(key);
        throw;
    }

    session.recv_chain = step.next;
    for (auto& [counter, key] : skipped) {
        detail::cache_skipped_key(session, counter, key);
        secure_wipe(key);
    }
    secure_wipe(step.message_key);
    session.pending_handshake.reset();  // peer provably has the session
    return plaintext;
}

// Demonstration code, not part of the messaging path: because both parties
// hold both chain keys, the receiving side can mint an envelope that is
// indistinguishable from one authored by the peer. The session is not
// modified; the forgery targets the peer's next expected counter.
namespace deniability {

inline MessageEnvelope forge_envelope(const SessionState& session,
                                      std::span<const std::uint8_t> fake_plaintext) {
    ChainStep step = advance_chain(session.recv_chain);

    MessageEnvelope env;
    env.sender_id = session.peer_id;      // attributed to the peer
    env.recipient_id = session.self_id;
    env.counter = session.recv_chain.counter;

    AeadResult sealed = aead_encrypt(step.message_key, fake_plaintext, env.associated_data());
    env.ciphertext = std::move(sealed.ciphertext);
    env.mac = sealed.mac;
    secure_wipe(step.message_key);
    return env;
}

}  // namespace deniability

}  // namespace ratchetlab
