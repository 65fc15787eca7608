#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <span>

#include "ratchetlab/bytes.hpp"

namespace ratchetlab {

// Incremental SHA-512 (FIPS 180-4). Only consumer is the signature scheme.
class Sha512 {
  public:
    static constexpr std::size_t kDigestSize = 64;
    static constexpr std::size_t kBlockSize = 128;

    using Digest = std::array<std::uint8_t, kDigestSize>;

    Sha512() { reset(); }

    void reset() {
        state_ = {0x6a09e667f3bcc908ull, 0xbb67ae8584caa73bull, 0x3c6ef372fe94f82bull,
                  0xa54ff53a5f1d36f1ull, 0x510e527fade682d1ull, 0x9b05688c2b3e6c1full,
                  0x1f83d9abfb41bd6bull, 0x5be0cd19137e2179ull};
        total_len_ = 0;
        buffer_len_ = 0;
    }

    void update(std::span<const std::uint8_t> data) {
        total_len_ += data.size();
        std::size_t offset = 0;
        if (buffer_len_ > 0) {
            std::size_t take = std::min(kBlockSize - buffer_len_, data.size());
            std::memcpy(buffer_ + buffer_len_, data.data(), take);
            buffer_len_ += take;
            offset = take;
            if (buffer_len_ == kBlockSize) {
                compress(buffer_);
                buffer_len_ = 0;
            }
        }
        while (offset + kBlockSize <= data.size()) {
            compress(data.data() + offset);
            offset += kBlockSize;
        }
        if (offset < data.size()) {
            buffer_len_ = data.size() - offset;
            std::memcpy(buffer_, data.data() + offset, buffer_len_);
        }
    }

    Digest finish() {
        std::uint64_t bit_len = total_len_ * 8;
        std::uint8_t pad = 0x80;
        update({&pad, 1});
        std::uint8_t zero = 0;
        while (buffer_len_ != 112) update({&zero, 1});
        // 128-bit length field; messages here never exceed 2^64 bits.
        std::uint8_t len_be[16] = {};
        for (int i = 0; i < 8; ++i) len_be[8 + i] = static_cast<std::uint8_t>(bit_len >> (56 - 8 * i));
        update({len_be, 16});
        Digest out;
        for (int i = 0; i < 8; ++i)
            for (int j = 0; j < 8; ++j)
                out[8 * i + j] = static_cast<std::uint8_t>(state_[i] >> (56 - 8 * j));
        return out;
    }

  private:
    static std::uint64_t rotr(std::uint64_t x, int n) { return (x >> n) | (x << (64 - n)); }

    void compress(const std::uint8_t* block) {
        static constexpr std::uint64_t k[80] = {
            0x428a2f98d728ae22ull, 0x7137449123ef65cdull, 0xb5c0fbcfec4d3b2full, 0xe9b5dba58189dbbcull,
            0x3956c25bf348b538ull, 0x59f111f1b605d019ull, 0x923f82a4af194f9bull, 0xab1c5ed5da6d8118ull,
            0xd807aa98a3030242ull, 0x12835b0145706fbeull, 0x243185be4ee4b28cull, 0x550c7dc3d5ffb4e2ull,
            0x72be5d74f27b896full, 0x80deb1fe3b1696b1ull, 0x9bdc06a725c71235ull, 0xc19bf174cf692694ull,
            0xe49b69c19ef14ad2ull, 0xefbe4786384f25e3ull, 0x0fc19dc68b8cd5b5ull, 0x240ca1cc77ac9c65ull,
            0x2de92c6f592b0275ull, 0x4a7484aa6ea6e483ull, 0x5cb0a9dcbd41fbd4ull, 0x76f988da831153b5ull,
            0x983e5152ee66dfabull, 0xa831c66d2db43210ull, 0xb00327c898fb213full, 0xbf597fc7beef0ee4ull,
            0xc6e00bf33da88fc2ull, 0xd5a79147930aa725ull, 0x06ca6351e003826full, 0x142929670a0e6e70ull,
            0x27b70a8546d22ffcull, 0x2e1b21385c26c926ull, 0x4d2c6dfc5ac42aedull, 0x53380d139d95b3dfull,
            0x650a73548baf63deull, 0x766a0abb3c77b2a8ull, 0x81c2c92e47edaee6ull, 0x92722c851482353bull,
            0xa2bfe8a14cf10364ull, 0xa81a664bbc423001ull, 0xc24b8b70d0f89791ull, 0xc76c51a30654be30ull,
            0xd192e819d6ef5218ull, 0xd69906245565a910ull, 0xf40e35855771202aull, 0x106aa07032bbd1b8ull,
            0x19a4c116b8d2d0c8ull, 0x1e376c085141ab53ull, 0x2748774cdf8eeb99ull, 0x34b0bcb5e19b48a8ull,
            0x391c0cb3c5c95a63ull, 0x4ed8aa4ae3418acbull, 0x5b9cca4f7763e373ull, 0x682e6ff3d6b2b8a3ull,
            0x748f82ee5defb2fcull, 0x78a5636f43172f60ull, 0x84c87814a1f0ab72ull, 0x8cc702081a6439ecull,
            0x90befffa23631e28ull, 0xa4506cebde82bde9ull, 0xbef9a3f7b2c67915ull, 0xc67178f2e372532bull,
            0xca273eceea26619cull, 0xd186b8c721c0c207ull, 0xeada7dd6cde0eb1eull, 0xf57d4f7fee6ed178ull,
            0x06f067aa72176fbaull, 0x0a637dc5a2c898a6ull, 0x113f9804bef90daeull, 0x1b710b35131c471bull,
            0x28db77f523047d84ull, 0x32caab7b40c72493ull, 0x3c9ebe0a15c9bebcull, 0x431d67c49c100d4cull,
            0x4cc5d4becb3e42b6ull, 0x597f299cfc657e2aull, 0x5fcb6fab3ad6faecull, 0x6c44198c4a475817ull};

        std::uint64_t w[80];
        for (int i = 0; i < 16; ++i) {
            w[i] = 0;
            for (int j = 0; j < 8; ++j) w[i] = (w[i] << 8) | block[8 * i + j];
        }
        for (int i = 16; i < 80; ++i) {
            std::uint64_t s0 = rotr(w[i - 15], 1) ^ rotr(w[i - 15], 8) ^ (w[i - 15] >> 7);
            std::uint64_t s1 = rotr(w[i - 2], 19) ^ rotr(w[i - 2], 61) ^ (w[i - 2] >> 6);
            w[i] = w[i - 16] + s0 + w[i - 7] + s1;
        }

        std::uint64_t a = state_[0], b = state_[1], c = state_[2], d = state_[3];
        std::uint64_t e = state_[4], f = state_[5], g = state_[6], h = state_[7];
        for (int i = 0; i < 80; ++i) {
            std::uint64_t s1 = rotr(e, 14) ^ rotr(e, 18) ^ rotr(e, 41);
            std::uint64_t ch = (e & f) ^ (~e & g);
            std::uint64_t t1 = h + s1 + ch + k[i] + w[i];
            std::uint64_t s0 = rotr(a, 28) ^ rotr(a, 34) ^ rotr(a, 39);
            std::uint64_t maj = (a & b) ^ (a & c) ^ (b & c);
            std::uint64_t t2 = s0 + maj;
            h = g;
            g = f;
            f = e;
            e = d + t1;
            d = c;
            c = b;
            b = a;
            a = t1 + t2;
        }
        state_[0] += a;
        state_[1] += b;
        state_[2] += c;
        state_[3] += d;
        state_[4] += e;
        state_[5] += f;
        state_[6] += g;
        state_[7] += h;
    }

    std::array<std::uint64_t, 8> state_;
    std::uint64_t total_len_ = 0;
    std::uint8_t buffer_[kBlockSize];
    std::size_t buffer_len_ = 0;
};

inline Sha512::Digest sha512(std::span<const std::uint8_t> data) {
    Sha512 h;
    h.update(data);
    return h.finish();
}

}  // namespace ratchetlab
