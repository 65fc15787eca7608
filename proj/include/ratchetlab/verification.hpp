#pragma once

#include <string>

#include "ratchetlab/crypto.hpp"
#include "ratchetlab/key_store.hpp"

namespace ratchetlab {

// Iteration count for the fingerprint hash chain; mild hardening against
// brute-forcing a key that matches a target number.
inline constexpr int kFingerprintIterations = 1024;

struct QrPayload {
    std::string user_lo;
    Point32 key_lo{};
    std::string user_hi;
    Point32 key_hi{};
};

// Byte payload behind the verification QR code:
//   version 0x01 | id_lo len(1)+bytes | key_lo(32) | id_hi len(1)+bytes | key_hi(32)
// Parties are ordered by user id so both sides emit identical bytes.
inline Bytes qr_payload(const std::string& user_a, const Point32& key_a, const std::string& user_b,
                        const Point32& key_b) {
    if (!is_valid_user_id(user_a) || !is_valid_user_id(user_b))
        throw ValidationError("qr_payload: malformed user id");
    if (user_a == user_b) throw ValidationError("qr_payload: the two parties must differ");

    const bool a_first = user_a < user_b;
    const std::string& lo = a_first ? user_a : user_b;
    const std::string& hi = a_first ? user_b : user_a;
    const Point32& key_lo = a_first ? key_a : key_b;
    const Point32& key_hi = a_first ? key_b : key_a;

    Bytes out;
    append_u8(out, 0x01);
    append_u8(out, static_cast<std::uint8_t>(lo.size()));
    append(out, to_bytes(lo));
    append(out, key_lo);
    append_u8(out, static_cast<std::uint8_t>(hi.size()));
    append(out, to_bytes(hi));
    append(out, key_hi);
    return out;
}

inline QrPayload parse_qr_payload(std::span<const std::uint8_t> data) {
    std::size_t off = 0;
    auto need = [&](std::size_t n) {
        if (data.size() - off < n) throw ValidationError("qr payload truncated");
    };
    need(1);
    if (data[off++] != 0x01) throw ValidationError("unsupported qr payload version");

    QrPayload p;
    auto read_party = [&](std::string& id, Point32& key) {
        need(1);
        std::size_t len = data[off++];
        need(len + 32);
        id.assign(reinterpret_cast<const char*>(data.data() + off), len);
        off += len;
        std::copy(data.begin() + off, data.begin() + off + 32, key.begin());
        off += 32;
    };
    read_party(p.user_lo, p.key_lo);
    read_party(p.user_hi, p.key_hi);
    if (off != data.size()) throw ValidationError("trailing bytes in qr payload");
    return p;
}

inline std::string qr_payload_base32(const Bytes& payload) { return base32_encode(payload); }

namespace detail {

// 30 digits for one party: iterate h = SHA256(h || key || id) from a zero
// seed, then read the first 30 digest bytes as six 5-byte big-endian
// integers mod 100000.
inline std::string fingerprint_half(const std::string& user_id, const Point32& identity_key) {
    Bytes input;
    Key32 h{};
    for (int i = 0; i < kFingerprintIterations; ++i) {
        input.clear();
        append(input, h);
        append(input, identity_key);
        append(input, to_bytes(user_id));
        h = sha256(input);
    }
    std::string digits;
    digits.reserve(30);
    for (int chunk = 0; chunk < 6; ++chunk) {
        std::uint64_t value = 0;
        for (int i = 0; i < 5; ++i) value = (value << 8) | h[5 * chunk + i];
        value %= 100000;
        char buf[6];
        std::snprintf(buf, sizeof(buf), "%05llu", static_cast<unsigned long long>(value));
        digits += buf;
    }
    return digits;
}

}  // namespace detail

// The 60-digit comparable number: both parties' 30-digit halves, smaller
// half first, so either side computes the same string.
inline std::string safety_number(const std::string& user_a, const Point32& key_a,
                                 const std::string& user_b, const Point32& key_b) {
    if (!is_valid_user_id(user_a) || !is_valid_user_id(user_b))
        throw ValidationError("safety_number: malformed user id");
    std::string half_a = detail::fingerprint_half(user_a, key_a);
    std::string half_b = detail::fingerprint_half(user_b, key_b);
    return half_a < half_b ? half_a + half_b : half_b + half_a;
}

}  // namespace ratchetlab
