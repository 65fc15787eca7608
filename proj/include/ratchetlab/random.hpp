#pragma once

#include <cstdint>
#include <cstdio>
#include <memory>
#include <span>

#include "ratchetlab/bytes.hpp"
#include "ratchetlab/errors.hpp"
#include "ratchetlab/sha256.hpp"

namespace ratchetlab {

// Byte source contract. Production code always goes through SystemRandom;
// the deterministic variant exists for tests and seeded simulations only.
class RandomSource {
  public:
    virtual ~RandomSource() = default;
    virtual void fill(std::span<std::uint8_t> out) = 0;

    Bytes bytes(std::size_t n) {
        Bytes out(n);
        if (n > 0) fill(out);
        return out;
    }

    Key32 key32() {
        Key32 out;
        fill(out);
        return out;
    }

    // Uniform draw in [0, bound) via rejection sampling; bound > 0.
    std::uint64_t uniform(std::uint64_t bound) {
        if (bound == 0) throw ValidationError("uniform: bound must be positive");
        std::uint64_t limit = ~std::uint64_t(0) - ~std::uint64_t(0) % bound;
        for (;;) {
            std::uint8_t raw[8];
            fill(raw);
            std::uint64_t v = 0;
            for (int i = 0; i < 8; ++i) v = (v << 8) | raw[i];
            if (v < limit) return v % bound;
        }
    }
};

// OS entropy via /dev/urandom. Failure to read is fatal by contract.
class SystemRandom final : public RandomSource {
  public:
    void fill(std::span<std::uint8_t> out) override {
        if (out.empty()) return;
        std::FILE* f = std::fopen("/dev/urandom", "rb");
        if (!f) throw IoError("system entropy source unavailable");
        std::size_t got = std::fread(out.data(), 1, out.size(), f);
        std::fclose(f);
        if (got != out.size()) throw IoError("short read from system entropy source");
    }
};

// TEST/SIMULATION ONLY: reproducible HMAC-SHA256 counter stream. Never use
// for real key material; the seed fully determines every byte.
class DeterministicRandom final : public RandomSource {
  public:
    explicit DeterministicRandom(std::uint64_t seed) {
        Bytes seed_bytes;
        append_u64_be(seed_bytes, seed);
        key_ = sha256(seed_bytes);
    }

    void fill(std::span<std::uint8_t> out) override {
        std::size_t off = 0;
        while (off < out.size()) {
            if (block_used_ == 32) {
                Bytes counter_be;
                append_u64_be(counter_be, counter_++);
                block_ = hmac_sha256(key_, counter_be);
                block_used_ = 0;
            }
            std::size_t take = std::min<std::size_t>(32 - block_used_, out.size() - off);
            std::copy(block_.begin() + block_used_, block_.begin() + block_used_ + take,
                      out.begin() + off);
            block_used_ += take;
            off += take;
        }
    }

  private:
    Key32 key_;
    Key32 block_{};
    std::size_t block_used_ = 32;
    std::uint64_t counter_ = 0;
};

}  // namespace ratchetlab
