#pragma once

#include <cstdint>
#include <span>

#include "ratchetlab/aes256.hpp"
#include "ratchetlab/bytes.hpp"
#include "ratchetlab/curve25519.hpp"
#include "ratchetlab/ed25519.hpp"
#include "ratchetlab/errors.hpp"
#include "ratchetlab/random.hpp"
#include "ratchetlab/sha256.hpp"

namespace ratchetlab {

// 32-byte Curve25519 secret scalar (stored clamped) and public u-coordinate.
using Scalar32 = Key32;
using Point32 = Key32;

struct DhKeyPair {
    Scalar32 secret{};
    Point32 public_key{};
};

struct SigningKeyPair {
    Key32 seed{};
    Key32 public_key{};
};

inline DhKeyPair generate_dh_keypair(RandomSource& rng) {
    DhKeyPair kp;
    kp.secret = rng.key32();
    clamp_scalar(kp.secret);
    kp.public_key = x25519_public_key(kp.secret);
    return kp;
}

inline SigningKeyPair generate_signing_keypair(RandomSource& rng) {
    SigningKeyPair kp;
    kp.seed = rng.key32();
    kp.public_key = ed25519_public_key(kp.seed);
    return kp;
}

// X25519 shared secret. An all-zero output means the peer supplied a
// low-order point; accepting it would let the peer force the session key.
inline Key32 ecdh(const Scalar32& secret, const Point32& peer_public) {
    Key32 shared = x25519_scalarmult(secret, peer_public);
    std::uint8_t acc = 0;
    for (std::uint8_t b : shared) acc |= b;
    if (acc == 0) throw ProtocolError("ecdh: low-order peer point rejected (non-contributory)");
    return shared;
}

// Message keys are 80 bytes: AES-256 key || HMAC key || CBC IV.
inline constexpr std::size_t kMessageKeySize = 80;
inline constexpr std::size_t kMacSize = 32;

struct MessageKeyParts {
    std::span<const std::uint8_t> enc_key;  // 32
    std::span<const std::uint8_t> mac_key;  // 32
    std::span<const std::uint8_t> iv;       // 16
};

inline MessageKeyParts split_message_key(std::span<const std::uint8_t> msg_key) {
    if (msg_key.size() != kMessageKeySize)
        throw ValidationError("message key must be 80 bytes");
    return MessageKeyParts{msg_key.subspan(0, 32), msg_key.subspan(32, 32), msg_key.subspan(64, 16)};
}

struct AeadResult {
    Bytes ciphertext;
    Key32 mac;
};

// AES-256-CBC + HMAC-SHA256 encrypt-then-MAC. The MAC binds the associated
// data ahead of the ciphertext, so header splicing fails verification.
inline AeadResult aead_encrypt(std::span<const std::uint8_t> msg_key,
                               std::span<const std::uint8_t> plaintext,
                               std::span<const std::uint8_t> associated_data) {
    MessageKeyParts parts = split_message_key(msg_key);
    AeadResult out;
    out.ciphertext = aes256_cbc_encrypt(parts.enc_key, parts.iv, plaintext);

    Bytes mac_input;
    mac_input.reserve(associated_data.size() + out.ciphertext.size());
    append(mac_input, associated_data);
    append(mac_input, out.ciphertext);
    out.mac = hmac_sha256(parts.mac_key, mac_input);
    return out;
}

inline Bytes aead_decrypt(std::span<const std::uint8_t> msg_key,
                          std::span<const std::uint8_t> ciphertext, const Key32& mac,
                          std::span<const std::uint8_t> associated_data) {
    MessageKeyParts parts = split_message_key(msg_key);

    Bytes mac_input;
    mac_input.reserve(associated_data.size() + ciphertext.size());
    append(mac_input, associated_data);
    append(mac_input, ciphertext);
    Key32 expected = hmac_sha256(parts.mac_key, mac_input);
    if (!constant_time_equal(expected, mac)) throw IntegrityError("message MAC verification failed");

    return aes256_cbc_decrypt(parts.enc_key, parts.iv, ciphertext);
}

}  // namespace ratchetlab
