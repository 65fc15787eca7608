#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <span>

#include "ratchetlab/bytes.hpp"
#include "ratchetlab/errors.hpp"

namespace ratchetlab {

// AES-256 block cipher plus CBC mode with PKCS#7 padding (FIPS 197,
// SP 800-38A). Table-free key schedule; S-boxes generated at first use.
class Aes256 {
  public:
    static constexpr std::size_t kKeySize = 32;
    static constexpr std::size_t kBlockSize = 16;
    static constexpr int kRounds = 14;

    explicit Aes256(std::span<const std::uint8_t> key) {
        if (key.size() != kKeySize) throw ValidationError("aes256: key must be 32 bytes");
        expand_key(key.data());
    }

    ~Aes256() { secure_wipe(round_keys_.data(), round_keys_.size()); }

    void encrypt_block(const std::uint8_t in[16], std::uint8_t out[16]) const {
        std::uint8_t state[16];
        std::memcpy(state, in, 16);
        add_round_key(state, 0);
        for (int round = 1; round < kRounds; ++round) {
            sub_bytes(state);
            shift_rows(state);
            mix_columns(state);
            add_round_key(state, round);
        }
        sub_bytes(state);
        shift_rows(state);
        add_round_key(state, kRounds);
        std::memcpy(out, state, 16);
    }

    void decrypt_block(const std::uint8_t in[16], std::uint8_t out[16]) const {
        std::uint8_t state[16];
        std::memcpy(state, in, 16);
        add_round_key(state, kRounds);
        for (int round = kRounds - 1; round > 0; --round) {
            inv_shift_rows(state);
            inv_sub_bytes(state);
            add_round_key(state, round);
            inv_mix_columns(state);
        }
        inv_shift_rows(state);
        inv_sub_bytes(state);
        add_round_key(state, 0);
        std::memcpy(out, state, 16);
    }

  private:
    struct Tables {
        std::uint8_t sbox[256];
        std::uint8_t inv_sbox[256];
    };

    // S-box from the GF(2^8) inverse + affine map, walking the generator 3.
    static const Tables& tables() {
        static const Tables t = [] {
            Tables tbl{};
            auto rotl8 = [](std::uint8_t x, int n) -> std::uint8_t {
                return static_cast<std::uint8_t>((x << n) | (x >> (8 - n)));
            };
            std::uint8_t p = 1, q = 1;
            do {
                p = static_cast<std::uint8_t>(p ^ (p << 1) ^ ((p & 0x80) ? 0x1b : 0));
                q ^= static_cast<std::uint8_t>(q << 1);
                q ^= static_cast<std::uint8_t>(q << 2);
                q ^= static_cast<std::uint8_t>(q << 4);
                if (q & 0x80) q ^= 0x09;
                tbl.sbox[p] =
                    static_cast<std::uint8_t>(q ^ rotl8(q, 1) ^ rotl8(q, 2) ^ rotl8(q, 3) ^ rotl8(q, 4) ^ 0x63);
            } while (p != 1);
            tbl.sbox[0] = 0x63;
            for (int i = 0; i < 256; ++i) tbl.inv_sbox[tbl.sbox[i]] = static_cast<std::uint8_t>(i);
            return tbl;
        }();
        return t;
    }

    static std::uint8_t xtime(std::uint8_t x) {
        return static_cast<std::uint8_t>((x << 1) ^ ((x & 0x80) ? 0x1b : 0));
    }

    static std::uint8_t gf_mul(std::uint8_t a, std::uint8_t b) {
        std::uint8_t r = 0;
        while (b) {
            if (b & 1) r ^= a;
            a = xtime(a);
            b >>= 1;
        }
        return r;
    }

    void expand_key(const std::uint8_t* key) {
        constexpr int nk = 8;                       // 256-bit key words
        constexpr int total_words = 4 * (kRounds + 1);  // 60
        const auto& sbox = tables().sbox;
        std::memcpy(round_keys_.data(), key, kKeySize);
        std::uint8_t rcon = 1;
        for (int i = nk; i < total_words; ++i) {
            std::uint8_t tmp[4];
            std::memcpy(tmp, &round_keys_[4 * (i - 1)], 4);
            if (i % nk == 0) {
                std::uint8_t first = tmp[0];
                tmp[0] = static_cast<std::uint8_t>(sbox[tmp[1]] ^ rcon);
                tmp[1] = sbox[tmp[2]];
                tmp[2] = sbox[tmp[3]];
                tmp[3] = sbox[first];
                rcon = xtime(rcon);
            } else if (i % nk == 4) {
                for (int j = 0; j < 4; ++j) tmp[j] = sbox[tmp[j]];
            }
            for (int j = 0; j < 4; ++j)
                round_keys_[4 * i + j] = round_keys_[4 * (i - nk) + j] ^ tmp[j];
        }
    }

    void add_round_key(std::uint8_t state[16], int round) const {
        for (int i = 0; i < 16; ++i) state[i] ^= round_keys_[16 * round + i];
    }

    static void sub_bytes(std::uint8_t state[16]) {
        const auto& sbox = tables().sbox;
        for (int i = 0; i < 16; ++i) state[i] = sbox[state[i]];
    }

    static void inv_sub_bytes(std::uint8_t state[16]) {
        const auto& inv = tables().inv_sbox;
        for (int i = 0; i < 16; ++i) state[i] = inv[state[i]];
    }

    // State is column-major: state[4*col + row].
    static void shift_rows(std::uint8_t s[16]) {
        std::uint8_t t[16];
        for (int col = 0; col < 4; ++col)
            for (int row = 0; row < 4; ++row) t[4 * col + row] = s[4 * ((col + row) % 4) + row];
        std::memcpy(s, t, 16);
    }

    static void inv_shift_rows(std::uint8_t s[16]) {
        std::uint8_t t[16];
        for (int col = 0; col < 4; ++col)
            for (int row = 0; row < 4; ++row) t[4 * ((col + row) % 4) + row] = s[4 * col + row];
        std::memcpy(s, t, 16);
    }

    static void mix_columns(std::uint8_t s[16]) {
        for (int col = 0; col < 4; ++col) {
            std::uint8_t* c = s + 4 * col;
            std::uint8_t a0 = c[0], a1 = c[1], a2 = c[2], a3 = c[3];
            c[0] = static_cast<std::uint8_t>(xtime(a0) ^ (xtime(a1) ^ a1) ^ a2 ^ a3);
            c[1] = static_cast<std::uint8_t>(a0 ^ xtime(a1) ^ (xtime(a2) ^ a2) ^ a3);
            c[2] = static_cast<std::uint8_t>(a0 ^ a1 ^ xtime(a2) ^ (xtime(a3) ^ a3));
            c[3] = static_cast<std::uint8_t>((xtime(a0) ^ a0) ^ a1 ^ a2 ^ xtime(a3));
        }
    }

    static void inv_mix_columns(std::uint8_t s[16]) {
        for (int col = 0; col < 4; ++col) {
            std::uint8_t* c = s + 4 * col;
            std::uint8_t a0 = c[0], a1 = c[1], a2 = c[2], a3 = c[3];
            c[0] = gf_mul(a0, 14) ^ gf_mul(a1, 11) ^ gf_mul(a2, 13) ^ gf_mul(a3, 9);
            c[1] = gf_mul(a0, 9) ^ gf_mul(a1, 14) ^ gf_mul(a2, 11) ^ gf_mul(a3, 13);
            c[2] = gf_mul(a0, 13) ^ gf_mul(a1, 9) ^ gf_mul(a2, 14) ^ gf_mul(a3, 11);
            c[3] = gf_mul(a0, 11) ^ gf_mul(a1, 13) ^ gf_mul(a2, 9) ^ gf_mul(a3, 14);
        }
    }

    std::array<std::uint8_t, 16 * (kRounds + 1)> round_keys_;
};

inline Bytes aes256_cbc_encrypt(std::span<const std::uint8_t> key, std::span<const std::uint8_t> iv,
                                std::span<const std::uint8_t> plaintext) {
    if (iv.size() != Aes256::kBlockSize) throw ValidationError("aes256-cbc: IV must be 16 bytes");
    Aes256 cipher(key);

    std::size_t pad = Aes256::kBlockSize - plaintext.size() % Aes256::kBlockSize;
    Bytes padded(plaintext.begin(), plaintext.end());
    padded.insert(padded.end(), pad, static_cast<std::uint8_t>(pad));

    Bytes out(padded.size());
    std::uint8_t chain[16];
    std::memcpy(chain, iv.data(), 16);
    for (std::size_t off = 0; off < padded.size(); off += 16) {
        std::uint8_t block[16];
        for (int i = 0; i < 16; ++i) block[i] = padded[off + i] ^ chain[i];
        cipher.encrypt_block(block, out.data() + off);
        std::memcpy(chain, out.data() + off, 16);
    }
    secure_wipe(padded);
    return out;
}

inline Bytes aes256_cbc_decrypt(std::span<const std::uint8_t> key, std::span<const std::uint8_t> iv,
                                std::span<const std::uint8_t> ciphertext) {
    if (iv.size() != Aes256::kBlockSize) throw ValidationError("aes256-cbc: IV must be 16 bytes");
    if (ciphertext.empty() || ciphertext.size() % Aes256::kBlockSize != 0)
        throw IntegrityError("aes256-cbc: ciphertext not a positive multiple of the block size");
    Aes256 cipher(key);

    Bytes out(ciphertext.size());
    std::uint8_t chain[16];
    std::memcpy(chain, iv.data(), 16);
    for (std::size_t off = 0; off < ciphertext.size(); off += 16) {
        std::uint8_t block[16];
        cipher.decrypt_block(ciphertext.data() + off, block);
        for (int i = 0; i < 16; ++i) out[off + i] = block[i] ^ chain[i];
        std::memcpy(chain, ciphertext.data() + off, 16);
    }

    std::uint8_t pad = out.back();
    if (pad == 0 || pad > Aes256::kBlockSize) throw IntegrityError("aes256-cbc: bad padding");
    for (std::size_t i = out.size() - pad; i < out.size(); ++i)
        if (out[i] != pad) throw IntegrityError("aes256-cbc: bad padding");
    out.resize(out.size() - pad);
    return out;
}

}  // namespace ratchetlab
