#pragma once

#include <cstdint>
#include <cstring>

#include "ratchetlab/bytes.hpp"

namespace ratchetlab {

// GF(2^255 - 19) arithmetic on five 51-bit limbs, unsigned 64-bit storage
// with 128-bit intermediates. Limbs stay below 2^55 between reductions.
namespace fe25519 {

struct Fe {
    std::uint64_t v[5];
};

using u64 = std::uint64_t;
using u128 = unsigned __int128;

inline constexpr u64 kMask = (u64(1) << 51) - 1;

inline Fe from_u64(u64 x) { return Fe{{x, 0, 0, 0, 0}}; }

// Little-endian load; bit 255 is ignored.
inline Fe from_bytes(const std::uint8_t s[32]) {
    auto load64 = [](const std::uint8_t* p) {
        u64 r;
        std::memcpy(&r, p, 8);
        return r;  // little-endian hosts only; asserted in tests
    };
    u64 u0 = load64(s), u1 = load64(s + 8), u2 = load64(s + 16), u3 = load64(s + 24);
    Fe h;
    h.v[0] = u0 & kMask;
    h.v[1] = ((u0 >> 51) | (u1 << 13)) & kMask;
    h.v[2] = ((u1 >> 38) | (u2 << 26)) & kMask;
    h.v[3] = ((u2 >> 25) | (u3 << 39)) & kMask;
    h.v[4] = (u3 >> 12) & kMask;
    return h;
}

// Freeze to the canonical representative in [0, p) and serialize.
inline void to_bytes(std::uint8_t out[32], const Fe& f) {
    u128 t[5];
    for (int i = 0; i < 5; ++i) t[i] = f.v[i];

    auto carry_wrap = [&] {
        t[1] += t[0] >> 51;
        t[0] &= kMask;
        t[2] += t[1] >> 51;
        t[1] &= kMask;
        t[3] += t[2] >> 51;
        t[2] &= kMask;
        t[4] += t[3] >> 51;
        t[3] &= kMask;
        t[0] += 19 * (t[4] >> 51);
        t[4] &= kMask;
    };
    carry_wrap();
    carry_wrap();

    // Value now in [0, 2^255-1]. Add 19, wrap, then add p and drop bit 255:
    // the net effect is reduction mod p regardless of which side of p we are.
    t[0] += 19;
    carry_wrap();

    t[0] += (u64(1) << 51) - 19;
    t[1] += (u64(1) << 51) - 1;
    t[2] += (u64(1) << 51) - 1;
    t[3] += (u64(1) << 51) - 1;
    t[4] += (u64(1) << 51) - 1;

    t[1] += t[0] >> 51;
    t[0] &= kMask;
    t[2] += t[1] >> 51;
    t[1] &= kMask;
    t[3] += t[2] >> 51;
    t[2] &= kMask;
    t[4] += t[3] >> 51;
    t[3] &= kMask;
    t[4] &= kMask;  // discard bit 255

    u64 w0 = static_cast<u64>(t[0]) | (static_cast<u64>(t[1]) << 51);
    u64 w1 = (static_cast<u64>(t[1]) >> 13) | (static_cast<u64>(t[2]) << 38);
    u64 w2 = (static_cast<u64>(t[2]) >> 26) | (static_cast<u64>(t[3]) << 25);
    u64 w3 = (static_cast<u64>(t[3]) >> 39) | (static_cast<u64>(t[4]) << 12);
    std::memcpy(out, &w0, 8);
    std::memcpy(out + 8, &w1, 8);
    std::memcpy(out + 16, &w2, 8);
    std::memcpy(out + 24, &w3, 8);
}

inline Fe add(const Fe& f, const Fe& g) {
    Fe h;
    for (int i = 0; i < 5; ++i) h.v[i] = f.v[i] + g.v[i];
    return h;
}

// f - g, offset by 8p to stay non-negative.
inline Fe sub(const Fe& f, const Fe& g) {
    constexpr u64 kTwo54m152 = (u64(1) << 54) - 152;
    constexpr u64 kTwo54m8 = (u64(1) << 54) - 8;
    Fe h;
    h.v[0] = f.v[0] + kTwo54m152 - g.v[0];
    h.v[1] = f.v[1] + kTwo54m8 - g.v[1];
    h.v[2] = f.v[2] + kTwo54m8 - g.v[2];
    h.v[3] = f.v[3] + kTwo54m8 - g.v[3];
    h.v[4] = f.v[4] + kTwo54m8 - g.v[4];
    return h;
}

namespace detail {
inline Fe carry_reduce(u128 t0, u128 t1, u128 t2, u128 t3, u128 t4) {
    t1 += t0 >> 51;
    t2 += t1 >> 51;
    t3 += t2 >> 51;
    t4 += t3 >> 51;
    u128 carry = t4 >> 51;
    u64 r0 = static_cast<u64>(t0) & kMask;
    u64 r1 = static_cast<u64>(t1) & kMask;
    u64 r2 = static_cast<u64>(t2) & kMask;
    u64 r3 = static_cast<u64>(t3) & kMask;
    u64 r4 = static_cast<u64>(t4) & kMask;
    u128 r0w = static_cast<u128>(r0) + carry * 19;
    r0 = static_cast<u64>(r0w) & kMask;
    r1 += static_cast<u64>(r0w >> 51);
    return Fe{{r0, r1, r2, r3, r4}};
}
}  // namespace detail

inline Fe mul(const Fe& f, const Fe& g) {
    const u64 f0 = f.v[0], f1 = f.v[1], f2 = f.v[2], f3 = f.v[3], f4 = f.v[4];
    const u64 g0 = g.v[0], g1 = g.v[1], g2 = g.v[2], g3 = g.v[3], g4 = g.v[4];
    const u64 g1_19 = 19 * g1, g2_19 = 19 * g2, g3_19 = 19 * g3, g4_19 = 19 * g4;

    u128 t0 = static_cast<u128>(f0) * g0 + static_cast<u128>(f1) * g4_19 +
              static_cast<u128>(f2) * g3_19 + static_cast<u128>(f3) * g2_19 +
              static_cast<u128>(f4) * g1_19;
    u128 t1 = static_cast<u128>(f0) * g1 + static_cast<u128>(f1) * g0 +
              static_cast<u128>(f2) * g4_19 + static_cast<u128>(f3) * g3_19 +
              static_cast<u128>(f4) * g2_19;
    u128 t2 = static_cast<u128>(f0) * g2 + static_cast<u128>(f1) * g1 +
              static_cast<u128>(f2) * g0 + static_cast<u128>(f3) * g4_19 +
              static_cast<u128>(f4) * g3_19;
    u128 t3 = static_cast<u128>(f0) * g3 + static_cast<u128>(f1) * g2 +
              static_cast<u128>(f2) * g1 + static_cast<u128>(f3) * g0 +
              static_cast<u128>(f4) * g4_19;
    u128 t4 = static_cast<u128>(f0) * g4 + static_cast<u128>(f1) * g3 +
              static_cast<u128>(f2) * g2 + static_cast<u128>(f3) * g1 +
              static_cast<u128>(f4) * g0;
    return detail::carry_reduce(t0, t1, t2, t3, t4);
}

inline Fe sq(const Fe& f) { return mul(f, f); }

inline Fe mul_small(const Fe& f, u64 s) {
    u128 t0 = static_cast<u128>(f.v[0]) * s;
    u128 t1 = static_cast<u128>(f.v[1]) * s;
    u128 t2 = static_cast<u128>(f.v[2]) * s;
    u128 t3 = static_cast<u128>(f.v[3]) * s;
    u128 t4 = static_cast<u128>(f.v[4]) * s;
    return detail::carry_reduce(t0, t1, t2, t3, t4);
}

inline void cswap(u64 bit, Fe& f, Fe& g) {
    u64 mask = u64(0) - bit;
    for (int i = 0; i < 5; ++i) {
        u64 x = mask & (f.v[i] ^ g.v[i]);
        f.v[i] ^= x;
        g.v[i] ^= x;
    }
}

// z^(p-2); standard square-and-multiply chain.
inline Fe invert(const Fe& z) {
    Fe t0, t1, t2, t3;
    t0 = sq(z);
    t1 = sq(t0);
    t1 = sq(t1);
    t1 = mul(z, t1);
    t0 = mul(t0, t1);
    t2 = sq(t0);
    t1 = mul(t1, t2);
    t2 = sq(t1);
    for (int i = 1; i < 5; ++i) t2 = sq(t2);
    t1 = mul(t2, t1);
    t2 = sq(t1);
    for (int i = 1; i < 10; ++i) t2 = sq(t2);
    t2 = mul(t2, t1);
    t3 = sq(t2);
    for (int i = 1; i < 20; ++i) t3 = sq(t3);
    t2 = mul(t3, t2);
    t2 = sq(t2);
    for (int i = 1; i < 10; ++i) t2 = sq(t2);
    t1 = mul(t2, t1);
    t2 = sq(t1);
    for (int i = 1; i < 50; ++i) t2 = sq(t2);
    t2 = mul(t2, t1);
    t3 = sq(t2);
    for (int i = 1; i < 100; ++i) t3 = sq(t3);
    t2 = mul(t3, t2);
    t2 = sq(t2);
    for (int i = 1; i < 50; ++i) t2 = sq(t2);
    t1 = mul(t2, t1);
    t1 = sq(t1);
    for (int i = 1; i < 5; ++i) t1 = sq(t1);
    return mul(t1, t0);
}

// z^((p-5)/8); used by point decompression and to derive sqrt(-1).
inline Fe pow22523(const Fe& z) {
    Fe t0, t1, t2;
    t0 = sq(z);
    t1 = sq(t0);
    t1 = sq(t1);
    t1 = mul(z, t1);
    t0 = mul(t0, t1);
    t0 = sq(t0);
    t0 = mul(t1, t0);
    t1 = sq(t0);
    for (int i = 1; i < 5; ++i) t1 = sq(t1);
    t0 = mul(t1, t0);
    t1 = sq(t0);
    for (int i = 1; i < 10; ++i) t1 = sq(t1);
    t1 = mul(t1, t0);
    t2 = sq(t1);
    for (int i = 1; i < 20; ++i) t2 = sq(t2);
    t1 = mul(t2, t1);
    t1 = sq(t1);
    for (int i = 1; i < 10; ++i) t1 = sq(t1);
    t0 = mul(t1, t0);
    t1 = sq(t0);
    for (int i = 1; i < 50; ++i) t1 = sq(t1);
    t1 = mul(t1, t0);
    t2 = sq(t1);
    for (int i = 1; i < 100; ++i) t2 = sq(t2);
    t1 = mul(t2, t1);
    t1 = sq(t1);
    for (int i = 1; i < 50; ++i) t1 = sq(t1);
    t0 = mul(t1, t0);
    t0 = sq(t0);
    t0 = sq(t0);
    return mul(t0, z);
}

inline bool is_zero(const Fe& f) {
    std::uint8_t b[32];
    to_bytes(b, f);
    std::uint8_t acc = 0;
    for (std::uint8_t x : b) acc |= x;
    return acc == 0;
}

inline bool is_negative(const Fe& f) {
    std::uint8_t b[32];
    to_bytes(b, f);
    return (b[0] & 1) != 0;
}

inline Fe neg(const Fe& f) { return sub(from_u64(0), f); }

}  // namespace fe25519

inline void clamp_scalar(Key32& scalar) {
    scalar[0] &= 248;
    scalar[31] &= 127;
    scalar[31] |= 64;
}

// X25519 scalar multiplication, RFC 7748 Montgomery ladder. The scalar is
// clamped internally; callers keep the stored secret already clamped.
inline Key32 x25519_scalarmult(const Key32& scalar, const Key32& u_point) {
    using namespace fe25519;
    Key32 e = scalar;
    clamp_scalar(e);

    Fe x1 = from_bytes(u_point.data());
    Fe x2 = from_u64(1), z2 = from_u64(0);
    Fe x3 = x1, z3 = from_u64(1);

    u64 swap = 0;
    for (int pos = 254; pos >= 0; --pos) {
        u64 bit = (e[pos >> 3] >> (pos & 7)) & 1;
        swap ^= bit;
        cswap(swap, x2, x3);
        cswap(swap, z2, z3);
        swap = bit;

        Fe a = add(x2, z2);
        Fe aa = sq(a);
        Fe b = sub(x2, z2);
        Fe bb = sq(b);
        Fe e_ = sub(aa, bb);
        Fe c = add(x3, z3);
        Fe d = sub(x3, z3);
        Fe da = mul(d, a);
        Fe cb = mul(c, b);
        x3 = sq(add(da, cb));
        z3 = mul(x1, sq(sub(da, cb)));
        x2 = mul(aa, bb);
        z2 = mul(e_, add(aa, mul_small(e_, 121665)));
    }
    cswap(swap, x2, x3);
    cswap(swap, z2, z3);

    Fe out = mul(x2, invert(z2));
    Key32 result;
    to_bytes(result.data(), out);
    return result;
}

inline Key32 x25519_base_point() {
    Key32 base{};
    base[0] = 9;
    return base;
}

inline Key32 x25519_public_key(const Key32& scalar) {
    return x25519_scalarmult(scalar, x25519_base_point());
}

}  // namespace ratchetlab
