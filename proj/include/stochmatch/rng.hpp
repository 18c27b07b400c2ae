#pragma once

#include <cmath>
#include <cstdint>

namespace stochmatch {

/// Counter-based generator (Philox 4x32-10). Each stream is addressed by
/// (seed, replication, domain); successive draws only advance a 64-bit
/// counter, so any draw in any replication can be regenerated independently.
/// Disjoint domains give statistically independent streams for the same
/// (seed, replication), e.g. arrival sampling vs policy coins.
class CounterRng {
public:
    enum Domain : uint32_t {
        kArrivals = 0,
        kPolicy = 1,
        kRelabel = 2,
    };

    CounterRng(uint64_t seed, uint64_t replication, uint32_t domain)
        : key0_(static_cast<uint32_t>(seed)),
          key1_(static_cast<uint32_t>(seed >> 32)),
          ctr2_(static_cast<uint32_t>(replication)),
          ctr3_(domain ^ static_cast<uint32_t>(replication >> 32)) {}

    uint64_t next_u64() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        uint32_t out[4];
        block(block_index_++, out);
        spare_ = (static_cast<uint64_t>(out[3]) << 32) | out[2];
        have_spare_ = true;
        return (static_cast<uint64_t>(out[1]) << 32) | out[0];
    }

    /// Uniform draw in the open interval (0, 1).
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Exponential inter-arrival gap with the given rate (> 0).
    double exponential(double rate) { return -std::log(uniform()) / rate; }

    bool coin() { return (next_u64() & 1u) != 0; }

    /// The raw keyed permutation on a 128-bit counter, exposed so the
    /// implementation can be checked against published test vectors.
    static void permute(const uint32_t ctr[4], const uint32_t key[2],
                        uint32_t out[4]) {
        uint32_t x0 = ctr[0];
        uint32_t x1 = ctr[1];
        uint32_t x2 = ctr[2];
        uint32_t x3 = ctr[3];
        uint32_t k0 = key[0];
        uint32_t k1 = key[1];
        for (int round = 0; round < 10; ++round) {
            const uint64_t p0 = static_cast<uint64_t>(0xD2511F53u) * x0;
            const uint64_t p1 = static_cast<uint64_t>(0xCD9E8D57u) * x2;
            const uint32_t lo0 = static_cast<uint32_t>(p0);
            const uint32_t hi0 = static_cast<uint32_t>(p0 >> 32);
            const uint32_t lo1 = static_cast<uint32_t>(p1);
            const uint32_t hi1 = static_cast<uint32_t>(p1 >> 32);
            x0 = hi1 ^ x1 ^ k0;
            x1 = lo1;
            x2 = hi0 ^ x3 ^ k1;
            x3 = lo0;
            k0 += 0x9E3779B9u;
            k1 += 0xBB67AE85u;
        }
        out[0] = x0;
        out[1] = x1;
        out[2] = x2;
        out[3] = x3;
    }

private:
    void block(uint64_t index, uint32_t out[4]) const {
        const uint32_t ctr[4] = {static_cast<uint32_t>(index),
                                 static_cast<uint32_t>(index >> 32), ctr2_,
                                 ctr3_};
        const uint32_t key[2] = {key0_, key1_};
        permute(ctr, key, out);
    }

    uint32_t key0_, key1_, ctr2_, ctr3_;
    uint64_t block_index_ = 0;
    uint64_t spare_ = 0;
    bool have_spare_ = false;
};

} // namespace stochmatch
