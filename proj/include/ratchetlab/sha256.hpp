#pragma once

#include <cstdint>
#include <cstring>
#include <span>

#include "ratchetlab/bytes.hpp"
#include "ratchetlab/errors.hpp"

namespace ratchetlab {

// Incremental SHA-256 (FIPS 180-4).
class Sha256 {
  public:
    static constexpr std::size_t kDigestSize = 32;
    static constexpr std::size_t kBlockSize = 64;

    Sha256() { reset(); }

    void reset() {
        state_ = {0x6a09e667u, 0xbb67ae85u, 0x3c6ef372u, 0xa54ff53au,
                  0x510e527fu, 0x9b05688cu, 0x1f83d9abu, 0x5be0cd19u};
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

    Key32 finish() {
        std::uint64_t bit_len = total_len_ * 8;
        std::uint8_t pad = 0x80;
        update({&pad, 1});
        std::uint8_t zero = 0;
        while (buffer_len_ != 56) update({&zero, 1});
        std::uint8_t len_be[8];
        for (int i = 0; i < 8; ++i) len_be[i] = static_cast<std::uint8_t>(bit_len >> (56 - 8 * i));
        update({len_be, 8});
        Key32 out;
        for (int i = 0; i < 8; ++i) {
            out[4 * i] = static_cast<std::uint8_t>(state_[i] >> 24);
            out[4 * i + 1] = static_cast<std::uint8_t>(state_[i] >> 16);
            out[4 * i + 2] = static_cast<std::uint8_t>(state_[i] >> 8);
            out[4 * i + 3] = static_cast<std::uint8_t>(state_[i]);
        }
        return out;
    }

  private:
    static std::uint32_t rotr(std::uint32_t x, int n) { return (x >> n) | (x << (32 - n)); }

    void compress(const std::uint8_t* block) {
        static constexpr std::uint32_t k[64] = {
            0x428a2f98u, 0x71374491u, 0xb5c0fbcfu, 0xe9b5dba5u, 0x3956c25bu, 0x59f111f1u,
            0x923f82a4u, 0xab1c5ed5u, 0xd807aa98u, 0x12835b01u, 0x243185beu, 0x550c7dc3u,
            0x72be5d74u, 0x80deb1feu, 0x9bdc06a7u, 0xc19bf174u, 0xe49b69c1u, 0xefbe4786u,
            0x0fc19dc6u, 0x240ca1ccu, 0x2de92c6fu, 0x4a7484aau, 0x5cb0a9dcu, 0x76f988dau,
            0x983e5152u, 0xa831c66du, 0xb00327c8u, 0xbf597fc7u, 0xc6e00bf3u, 0xd5a79147u,
            0x06ca6351u, 0x14292967u, 0x27b70a85u, 0x2e1b2138u, 0x4d2c6dfcu, 0x53380d13u,
            0x650a7354u, 0x766a0abbu, 0x81c2c92eu, 0x92722c85u, 0xa2bfe8a1u, 0xa81a664bu,
            0xc24b8b70u, 0xc76c51a3u, 0xd192e819u, 0xd6990624u, 0xf40e3585u, 0x106aa070u,
            0x19a4c116u, 0x1e376c08u, 0x2748774cu, 0x34b0bcb5u, 0x391c0cb3u, 0x4ed8aa4au,
            0x5b9cca4fu, 0x682e6ff3u, 0x748f82eeu, 0x78a5636fu, 0x84c87814u, 0x8cc70208u,
            0x90befffau, 0xa4506cebu, 0xbef9a3f7u, 0xc67178f2u};

        std::uint32_t w[64];
        for (int i = 0; i < 16; ++i) {
            w[i] = (static_cast<std::uint32_t>(block[4 * i]) << 24) |
                   (static_cast<std::uint32_t>(block[4 * i + 1]) << 16) |
                   (static_cast<std::uint32_t>(block[4 * i + 2]) << 8) |
                   static_cast<std::uint32_t>(block[4 * i + 3]);
        }
        for (int i = 16; i < 64; ++i) {
            std::uint32_t s0 = rotr(w[i - 15], 7) ^ rotr(w[i - 15], 18) ^ (w[i - 15] >> 3);
            std::uint32_t s1 = rotr(w[i - 2], 17) ^ rotr(w[i - 2], 19) ^ (w[i - 2] >> 10);
            w[i] = w[i - 16] + s0 + w[i - 7] + s1;
        }

        std::uint32_t a = state_[0], b = state_[1], c = state_[2], d = state_[3];
        std::uint32_t e = state_[4], f = state_[5], g = state_[6], h = state_[7];
        for (int i = 0; i < 64; ++i) {
            std::uint32_t s1 = rotr(e, 6) ^ rotr(e, 11) ^ rotr(e, 25);
            std::uint32_t ch = (e & f) ^ (~e & g);
            std::uint32_t t1 = h + s1 + ch + k[i] + w[i];
            std::uint32_t s0 = rotr(a, 2) ^ rotr(a, 13) ^ rotr(a, 22);
            std::uint32_t maj = (a & b) ^ (a & c) ^ (b & c);
            std::uint32_t t2 = s0 + maj;
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

    std::array<std::uint32_t, 8> state_;
    std::uint64_t total_len_ = 0;
    std::uint8_t buffer_[kBlockSize];
    std::size_t buffer_len_ = 0;
};

inline Key32 sha256(std::span<const std::uint8_t> data) {
    Sha256 h;
    h.update(data);
    return h.finish();
}

// HMAC-SHA256 (RFC 2104).
inline Key32 hmac_sha256(std::span<const std::uint8_t> key, std::span<const std::uint8_t> message) {
    std::uint8_t block_key[Sha256::kBlockSize] = {};
    if (key.size() > Sha256::kBlockSize) {
        Key32 digest = sha256(key);
        std::memcpy(block_key, digest.data(), digest.size());
    } else if (!key.empty()) {
        std::memcpy(block_key, key.data(), key.size());
    }

    std::uint8_t ipad[Sha256::kBlockSize];
    std::uint8_t opad[Sha256::kBlockSize];
    for (std::size_t i = 0; i < Sha256::kBlockSize; ++i) {
        ipad[i] = block_key[i] ^ 0x36;
        opad[i] = block_key[i] ^ 0x5c;
    }

    Sha256 inner;
    inner.update({ipad, sizeof(ipad)});
    inner.update(message);
    Key32 inner_digest = inner.finish();

    Sha256 outer;
    outer.update({opad, sizeof(opad)});
    outer.update(inner_digest);
    Key32 out = outer.finish();

    secure_wipe(block_key, sizeof(block_key));
    secure_wipe(ipad, sizeof(ipad));
    secure_wipe(opad, sizeof(opad));
    return out;
}

inline constexpr std::size_t kHkdfMaxOutput = 255 * Sha256::kDigestSize;  // 8160

// HKDF extract-then-expand over HMAC-SHA256 (RFC 5869).
inline Bytes hkdf(std::span<const std::uint8_t> input_key_material, std::span<const std::uint8_t> salt,
                  std::span<const std::uint8_t> info, std::size_t out_len) {
    if (out_len > kHkdfMaxOutput)
        throw ValidationError("hkdf: requested " + std::to_string(out_len) + " bytes, limit is " +
                              std::to_string(kHkdfMaxOutput));
    Key32 prk = hmac_sha256(salt, input_key_material);

    Bytes out;
    out.reserve(out_len);
    Key32 block{};
    std::uint8_t counter = 1;
    std::size_t block_len = 0;
    while (out.size() < out_len) {
        Bytes t;
        t.reserve(block_len + info.size() + 1);
        t.insert(t.end(), block.begin(), block.begin() + block_len);
        t.insert(t.end(), info.begin(), info.end());
        t.push_back(counter++);
        block = hmac_sha256(prk, t);
        block_len = block.size();
        std::size_t take = std::min(block_len, out_len - out.size());
        out.insert(out.end(), block.begin(), block.begin() + take);
    }
    secure_wipe(prk);
    secure_wipe(block);
    return out;
}

}  // namespace ratchetlab
