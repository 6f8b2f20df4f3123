#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <random>

namespace vpe {

/// Source of randomness for all key material and protocol nonces.
/// Seedable for reproducible tests; default-constructed instances seed
/// from the OS entropy pool.
class RandomSource {
public:
    RandomSource() : state_(gmp_randinit_mt) {
        std::random_device rd;
        uint64_t seed = (uint64_t(rd()) << 32) | rd();
        state_.seed(static_cast<unsigned long>(seed));
    }

    explicit RandomSource(uint64_t seed) : state_(gmp_randinit_mt) {
        state_.seed(static_cast<unsigned long>(seed));
    }

    /// Uniform integer in [0, bound).
    mpz_class below(const mpz_class& bound) { return state_.get_z_range(bound); }

    /// Uniform integer with exactly `bits` random bits.
    mpz_class bits(unsigned long bits) { return state_.get_z_bits(bits); }

    gmp_randclass& raw() { return state_; }

private:
    gmp_randclass state_;
};

}  // namespace vpe
