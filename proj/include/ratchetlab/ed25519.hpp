#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <span>

#include "ratchetlab/bytes.hpp"
#include "ratchetlab/curve25519.hpp"
#include "ratchetlab/sha512.hpp"

namespace ratchetlab {

using Signature = std::array<std::uint8_t, 64>;

namespace ed25519_detail {

using fe25519::Fe;
using namespace fe25519;

// Extended homogeneous coordinates on the twisted Edwards curve
// -x^2 + y^2 = 1 + d x^2 y^2, with x = X/Z, y = Y/Z, XY = ZT.
struct GeP3 {
    Fe x, y, z, t;
};

inline const Fe& const_d() {
    static const Fe d = mul(neg(from_u64(121665)), invert(from_u64(121666)));
    return d;
}

inline const Fe& const_d2() {
    static const Fe d2 = add(const_d(), const_d());
    return d2;
}

inline const Fe& const_sqrtm1() {
    // sqrt(-1) = 2^((p-1)/4) = (2^((p-5)/8))^2 * 2
    static const Fe s = mul(sq(pow22523(from_u64(2))), from_u64(2));
    return s;
}

inline GeP3 identity() { return GeP3{from_u64(0), from_u64(1), from_u64(1), from_u64(0)}; }

// Unified addition; valid for doubling as well.
inline GeP3 add_points(const GeP3& p, const GeP3& q) {
    Fe a = mul(sub(p.y, p.x), sub(q.y, q.x));
    Fe b = mul(add(p.y, p.x), add(q.y, q.x));
    Fe c = mul(mul(p.t, const_d2()), q.t);
    Fe d = mul(add(p.z, p.z), q.z);
    Fe e = sub(b, a);
    Fe f = sub(d, c);
    Fe g = add(d, c);
    Fe h = add(b, a);
    return GeP3{mul(e, f), mul(g, h), mul(f, g), mul(e, h)};
}

inline void compress(std::uint8_t out[32], const GeP3& p) {
    Fe zinv = invert(p.z);
    Fe x = mul(p.x, zinv);
    Fe y = mul(p.y, zinv);
    to_bytes(out, y);
    out[31] ^= static_cast<std::uint8_t>(is_negative(x) ? 0x80 : 0x00);
}

// RFC 8032 point decoding. Returns false for non-points.
inline bool decompress(GeP3& out, const std::uint8_t s[32]) {
    Fe y = from_bytes(s);
    bool sign = (s[31] & 0x80) != 0;

    Fe y2 = sq(y);
    Fe u = sub(y2, from_u64(1));
    Fe v = add(mul(y2, const_d()), from_u64(1));

    // candidate root x = u v^3 (u v^7)^((p-5)/8)
    Fe v3 = mul(sq(v), v);
    Fe v7 = mul(sq(v3), v);
    Fe x = mul(mul(u, v3), pow22523(mul(u, v7)));

    Fe vx2 = mul(v, sq(x));
    if (!is_zero(sub(vx2, u))) {
        if (!is_zero(add(vx2, u))) return false;
        x = mul(x, const_sqrtm1());
    }
    if (is_zero(x) && sign) return false;
    if (is_negative(x) != sign) x = neg(x);

    out.x = x;
    out.y = y;
    out.z = from_u64(1);
    out.t = mul(x, y);
    return true;
}

// Plain double-and-add; constant-time execution is out of scope here.
inline GeP3 scalarmult(const std::uint8_t scalar[32], const GeP3& p) {
    GeP3 r = identity();
    for (int pos = 255; pos >= 0; --pos) {
        r = add_points(r, r);
        if ((scalar[pos >> 3] >> (pos & 7)) & 1) r = add_points(r, p);
    }
    return r;
}

inline const GeP3& base_point() {
    static const GeP3 b = [] {
        std::uint8_t enc[32];
        enc[0] = 0x58;  // y = 4/5, sign bit clear
        std::memset(enc + 1, 0x66, 31);
        GeP3 p;
        bool ok = decompress(p, enc);
        (void)ok;
        return p;
    }();
    return b;
}

inline GeP3 scalarmult_base(const std::uint8_t scalar[32]) { return scalarmult(scalar, base_point()); }

// Group order L, little-endian.
inline const std::uint8_t* order_l() {
    static const std::uint8_t l[32] = {0xed, 0xd3, 0xf5, 0x5c, 0x1a, 0x63, 0x12, 0x58,
                                       0xd6, 0x9c, 0xf7, 0xa2, 0xde, 0xf9, 0xde, 0x14,
                                       0,    0,    0,    0,    0,    0,    0,    0,
                                       0,    0,    0,    0,    0,    0,    0,    0x10};
    return l;
}

// Barrett-free byte-wise reduction mod L on a 64-byte accumulator.
inline void mod_l(std::uint8_t r[32], std::int64_t x[64]) {
    const std::uint8_t* l = order_l();
    std::int64_t carry;
    for (int i = 63; i >= 32; --i) {
        carry = 0;
        int j;
        for (j = i - 32; j < i - 12; ++j) {
            x[j] += carry - 16 * x[i] * l[j - (i - 32)];
            carry = (x[j] + 128) >> 8;
            x[j] -= carry << 8;
        }
        x[j] += carry;
        x[i] = 0;
    }
    carry = 0;
    for (int j = 0; j < 32; ++j) {
        x[j] += carry - (x[31] >> 4) * l[j];
        carry = x[j] >> 8;
        x[j] &= 255;
    }
    for (int j = 0; j < 32; ++j) x[j] -= carry * l[j];
    for (int i = 0; i < 32; ++i) {
        x[i + 1] += x[i] >> 8;
        r[i] = static_cast<std::uint8_t>(x[i] & 255);
    }
}

inline void sc_reduce(std::uint8_t out[32], const std::uint8_t in[64]) {
    std::int64_t x[64];
    for (int i = 0; i < 64; ++i) x[i] = in[i];
    mod_l(out, x);
}

// out = (a*b + c) mod L
inline void sc_muladd(std::uint8_t out[32], const std::uint8_t a[32], const std::uint8_t b[32],
                      const std::uint8_t c[32]) {
    std::int64_t x[64] = {};
    for (int i = 0; i < 32; ++i) x[i] = c[i];
    for (int i = 0; i < 32; ++i)
        for (int j = 0; j < 32; ++j) x[i + j] += static_cast<std::int64_t>(a[i]) * b[j];
    mod_l(out, x);
}

inline void clamp_ed(std::uint8_t a[32]) {
    a[0] &= 248;
    a[31] &= 63;
    a[31] |= 64;
}

}  // namespace ed25519_detail

// Ed25519 over the seed form of the private key (RFC 8032).
inline Key32 ed25519_public_key(const Key32& seed) {
    using namespace ed25519_detail;
    auto h = sha512(seed);
    std::uint8_t a[32];
    std::memcpy(a, h.data(), 32);
    clamp_ed(a);
    Key32 pub;
    compress(pub.data(), scalarmult_base(a));
    secure_wipe(a, sizeof(a));
    secure_wipe(h.data(), h.size());
    return pub;
}

inline Signature ed25519_sign(const Key32& seed, const Key32& public_key,
                              std::span<const std::uint8_t> message) {
    using namespace ed25519_detail;
    auto h = sha512(seed);
    std::uint8_t a[32];
    std::memcpy(a, h.data(), 32);
    clamp_ed(a);

    Sha512 nonce_hash;
    nonce_hash.update({h.data() + 32, 32});
    nonce_hash.update(message);
    auto nonce64 = nonce_hash.finish();
    std::uint8_t r[32];
    sc_reduce(r, nonce64.data());

    Signature sig{};
    compress(sig.data(), scalarmult_base(r));

    Sha512 hram_hash;
    hram_hash.update({sig.data(), 32});
    hram_hash.update(public_key);
    hram_hash.update(message);
    auto hram64 = hram_hash.finish();
    std::uint8_t k[32];
    sc_reduce(k, hram64.data());

    sc_muladd(sig.data() + 32, k, a, r);

    secure_wipe(a, sizeof(a));
    secure_wipe(r, sizeof(r));
    secure_wipe(h.data(), h.size());
    return sig;
}

inline bool ed25519_verify(const Key32& public_key, std::span<const std::uint8_t> message,
                           const Signature& sig) {
    using namespace ed25519_detail;

    // Reject S >= L (signature malleability).
    const std::uint8_t* l = order_l();
    for (int i = 31; i >= 0; --i) {
        if (sig[32 + i] < l[i]) break;
        if (sig[32 + i] > l[i]) return false;
        if (i == 0) return false;  // S == L
    }

    GeP3 a_point, r_point;
    if (!decompress(a_point, public_key.data())) return false;
    if (!decompress(r_point, sig.data())) return false;

    Sha512 hram_hash;
    hram_hash.update({sig.data(), 32});
    hram_hash.update(public_key);
    hram_hash.update(message);
    auto hram64 = hram_hash.finish();
    std::uint8_t k[32];
    sc_reduce(k, hram64.data());

    // Accept iff S*B == R + k*A.
    GeP3 lhs = scalarmult_base(sig.data() + 32);
    GeP3 rhs = add_points(r_point, scalarmult(k, a_point));
    std::uint8_t lhs_bytes[32], rhs_bytes[32];
    compress(lhs_bytes, lhs);
    compress(rhs_bytes, rhs);
    return constant_time_equal({lhs_bytes, 32}, {rhs_bytes, 32});
}

}  // namespace ratchetlab
