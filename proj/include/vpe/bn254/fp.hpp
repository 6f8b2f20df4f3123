#pragma once

#include <gmpxx.h>

#include <array>
#include <cstdint>
#include <cstring>
#include <stdexcept>

#include "vpe/bytes.hpp"

namespace vpe::bn254 {

// Base field of the 254-bit Barreto-Naehrig curve y^2 = x^3 + 3
// (the curve of EIP-196/197, often called alt_bn128 or BN254).
inline constexpr const char* kBasePrimeDec =
    "21888242871839275222246405745257275088696311157297823662689037894645226208583";
inline constexpr const char* kGroupOrderDec =
    "21888242871839275222246405745257275088548364400416034343698204186575808495617";
inline constexpr uint64_t kCurveParamU = 4965661367192848881ULL;

using Limbs = std::array<uint64_t, 4>;

namespace detail {

struct FpParams {
    Limbs p;          // modulus limbs, little-endian
    uint64_t inv;     // -p^{-1} mod 2^64
    Limbs r1;         // 2^256 mod p (Montgomery one)
    Limbs r2;         // 2^512 mod p
    mpz_class p_mpz;
    mpz_class order_mpz;

    static Limbs limbs_from_mpz(const mpz_class& v) {
        Limbs out{0, 0, 0, 0};
        size_t count = 0;
        mpz_export(out.data(), &count, -1, 8, 0, 0, v.get_mpz_t());
        return out;
    }

    FpParams() {
        p_mpz = mpz_class(kBasePrimeDec);
        order_mpz = mpz_class(kGroupOrderDec);
        p = limbs_from_mpz(p_mpz);

        // inv = -p^{-1} mod 2^64 by Newton iteration
        uint64_t x = p[0];
        uint64_t i = x;
        for (int k = 0; k < 5; ++k) i *= 2 - x * i;  // i = p^{-1} mod 2^64
        inv = ~i + 1;

        mpz_class R = mpz_class(1) << 256;
        r1 = limbs_from_mpz(R % p_mpz);
        r2 = limbs_from_mpz((R * R) % p_mpz);

        // Sanity: the BN parametrization ties u, p and the group order.
        mpz_class u(kCurveParamU);
        mpz_class u2 = u * u, u3 = u2 * u, u4 = u2 * u2;
        if (36 * u4 + 36 * u3 + 24 * u2 + 6 * u + 1 != p_mpz ||
            36 * u4 + 36 * u3 + 18 * u2 + 6 * u + 1 != order_mpz)
            throw std::logic_error("bn254: inconsistent curve constants");
    }
};

inline const FpParams& fp_params() {
    static const FpParams params;
    return params;
}

}  // namespace detail

/// Base-field element in Montgomery form (4 x 64-bit limbs).
struct Fp {
    Limbs l{0, 0, 0, 0};

    bool operator==(const Fp& o) const { return l == o.l; }
    bool is_zero() const { return l[0] == 0 && l[1] == 0 && l[2] == 0 && l[3] == 0; }
};

namespace detail {

inline bool limbs_geq(const Limbs& a, const Limbs& b) {
    for (int i = 3; i >= 0; --i) {
        if (a[i] != b[i]) return a[i] > b[i];
    }
    return true;
}

// a -= b, returns borrow
inline uint64_t limbs_sub(Limbs& a, const Limbs& b) {
    unsigned __int128 borrow = 0;
    for (int i = 0; i < 4; ++i) {
        unsigned __int128 cur = (unsigned __int128)a[i] - b[i] - (uint64_t)borrow;
        a[i] = (uint64_t)cur;
        borrow = (cur >> 64) ? 1 : 0;
    }
    return (uint64_t)borrow;
}

// a += b, returns carry
inline uint64_t limbs_add(Limbs& a, const Limbs& b) {
    unsigned __int128 carry = 0;
    for (int i = 0; i < 4; ++i) {
        unsigned __int128 cur = (unsigned __int128)a[i] + b[i] + (uint64_t)carry;
        a[i] = (uint64_t)cur;
        carry = cur >> 64;
    }
    return (uint64_t)carry;
}

}  // namespace detail

inline Fp fp_add(const Fp& a, const Fp& b) {
    Fp r = a;
    detail::limbs_add(r.l, b.l);
    if (detail::limbs_geq(r.l, detail::fp_params().p)) detail::limbs_sub(r.l, detail::fp_params().p);
    return r;
}

inline Fp fp_sub(const Fp& a, const Fp& b) {
    Fp r = a;
    if (detail::limbs_sub(r.l, b.l)) detail::limbs_add(r.l, detail::fp_params().p);
    return r;
}

inline Fp fp_neg(const Fp& a) {
    if (a.is_zero()) return a;
    Fp r;
    r.l = detail::fp_params().p;
    detail::limbs_sub(r.l, a.l);
    return r;
}

inline Fp fp_dbl(const Fp& a) { return fp_add(a, a); }

namespace detail {

// a + b*c + carry, updating carry
inline uint64_t mac(uint64_t a, uint64_t b, uint64_t c, uint64_t& carry) {
    unsigned __int128 t = (unsigned __int128)b * c + a + carry;
    carry = (uint64_t)(t >> 64);
    return (uint64_t)t;
}

}  // namespace detail

/// Montgomery multiplication, unrolled no-carry CIOS (valid because the
/// modulus leaves the two top bits of the fourth limb clear).
inline Fp fp_mul(const Fp& a, const Fp& b) {
    const auto& P = detail::fp_params().p;
    const uint64_t inv = detail::fp_params().inv;
    using detail::mac;

    uint64_t r0 = 0, r1 = 0, r2 = 0, r3 = 0;
    for (int i = 0; i < 4; ++i) {
        const uint64_t ai = a.l[i];
        uint64_t carry = 0;
        r0 = mac(r0, ai, b.l[0], carry);
        r1 = mac(r1, ai, b.l[1], carry);
        r2 = mac(r2, ai, b.l[2], carry);
        r3 = mac(r3, ai, b.l[3], carry);
        const uint64_t r4 = carry;

        const uint64_t m = r0 * inv;
        carry = 0;
        (void)mac(r0, m, P[0], carry);
        r0 = mac(r1, m, P[1], carry);
        r1 = mac(r2, m, P[2], carry);
        r2 = mac(r3, m, P[3], carry);
        r3 = r4 + carry;
    }
    Fp r;
    r.l = {r0, r1, r2, r3};
    if (detail::limbs_geq(r.l, P)) detail::limbs_sub(r.l, P);
    return r;
}

inline Fp fp_sqr(const Fp& a) { return fp_mul(a, a); }

inline Fp fp_zero() { return Fp{}; }

inline Fp fp_one() {
    Fp r;
    r.l = detail::fp_params().r1;
    return r;
}

inline Fp fp_from_mpz(const mpz_class& v) {
    mpz_class red = v % detail::fp_params().p_mpz;
    if (red < 0) red += detail::fp_params().p_mpz;
    Fp r;
    r.l = detail::FpParams::limbs_from_mpz(red);
    Fp r2;
    r2.l = detail::fp_params().r2;
    return fp_mul(r, r2);  // into Montgomery form
}

inline Fp fp_from_u64(uint64_t v) { return fp_from_mpz(mpz_class(v)); }

inline mpz_class fp_to_mpz(const Fp& a) {
    // Montgomery reduce by multiplying with 1
    Fp one_raw;
    one_raw.l = {1, 0, 0, 0};
    Fp red = fp_mul(a, one_raw);
    mpz_class v;
    mpz_import(v.get_mpz_t(), 4, -1, 8, 0, 0, red.l.data());
    return v;
}

/// a^e for an arbitrary non-negative exponent.
inline Fp fp_pow(const Fp& a, const mpz_class& e) {
    Fp acc = fp_one();
    size_t nbits = mpz_sizeinbase(e.get_mpz_t(), 2);
    if (e == 0) return acc;
    for (size_t i = nbits; i-- > 0;) {
        acc = fp_sqr(acc);
        if (mpz_tstbit(e.get_mpz_t(), i)) acc = fp_mul(acc, a);
    }
    return acc;
}

inline Fp fp_inv(const Fp& a) {
    if (a.is_zero()) throw std::domain_error("fp inverse of zero");
    return fp_pow(a, detail::fp_params().p_mpz - 2);
}

/// Square root for p = 3 mod 4; returns false when a is not a square.
inline bool fp_sqrt(Fp& out, const Fp& a) {
    static const mpz_class e = (detail::fp_params().p_mpz + 1) / 4;
    Fp cand = fp_pow(a, e);
    if (fp_sqr(cand) == a) {
        out = cand;
        return true;
    }
    return false;
}

/// Canonical (non-Montgomery) value parity, for point compression.
inline bool fp_is_odd(const Fp& a) { return mpz_odd_p(fp_to_mpz(a).get_mpz_t()); }

inline Bytes fp_to_bytes(const Fp& a) {
    mpz_class v = fp_to_mpz(a);
    Bytes out(32, 0);
    size_t count = 0;
    mpz_export(out.data(), &count, 1, 1, 1, 0, v.get_mpz_t());
    if (count < 32) {
        std::memmove(out.data() + (32 - count), out.data(), count);
        std::memset(out.data(), 0, 32 - count);
    }
    return out;
}

inline Fp fp_from_bytes(BytesView b) {
    if (b.size() != 32) throw std::runtime_error("fp encoding must be 32 bytes");
    mpz_class v;
    mpz_import(v.get_mpz_t(), 32, 1, 1, 1, 0, b.data());
    if (v >= detail::fp_params().p_mpz) throw std::runtime_error("fp encoding out of range");
    return fp_from_mpz(v);
}

}  // namespace vpe::bn254
