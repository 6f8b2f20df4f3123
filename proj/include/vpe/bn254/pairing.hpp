#pragma once

#include "vpe/bn254/curve.hpp"

namespace vpe::bn254 {

namespace detail {

// Optimal ate Miller loop, twist coordinates, homogeneous projective
// accumulator. Lines are scaled by nonzero Fp2 factors, which the final
// exponentiation's easy part cancels.

struct MillerState {
    Fp2 X, Y, Z;
};

inline void miller_double_step(Fp12& f, MillerState& T, const Fp& xP, const Fp& yP) {
    Fp2 XX = fp2_sqr(T.X);
    Fp2 YY = fp2_sqr(T.Y);
    Fp2 ZZ = fp2_sqr(T.Z);
    Fp2 H2 = fp2_sub(fp2_sub(fp2_sqr(fp2_add(T.Y, T.Z)), YY), ZZ);  // 2YZ
    Fp2 XX3 = fp2_add(fp2_dbl(XX), XX);                             // 3X^2

    // line (scaled by 2YZ^2): -2YZ^2*yP + 3X^2 Z xP w + (2Y^2 Z - 3X^3) w^3
    Fp2 A = fp2_neg(fp2_mul_fp(fp2_mul(H2, T.Z), yP));
    Fp2 B = fp2_mul_fp(fp2_mul(XX3, T.Z), xP);
    Fp2 C = fp2_sub(fp2_mul(fp2_dbl(YY), T.Z), fp2_mul(XX3, T.X));

    // point doubling: W = 3X^2, S = YZ, B0 = X*Y*S, H = W^2 - 8 B0
    Fp2 S = fp2_mul(T.Y, T.Z);
    Fp2 B0 = fp2_mul(fp2_mul(T.X, T.Y), S);
    Fp2 W2 = fp2_sqr(XX3);
    Fp2 eightB = fp2_dbl(fp2_dbl(fp2_dbl(B0)));
    Fp2 H = fp2_sub(W2, eightB);
    Fp2 SS = fp2_sqr(S);
    Fp2 X3 = fp2_dbl(fp2_mul(H, S));
    Fp2 fourB = fp2_dbl(fp2_dbl(B0));
    Fp2 Y3 = fp2_sub(fp2_mul(XX3, fp2_sub(fourB, H)),
                     fp2_dbl(fp2_dbl(fp2_dbl(fp2_mul(YY, SS)))));
    Fp2 Z3 = fp2_dbl(fp2_dbl(fp2_dbl(fp2_mul(S, SS))));

    T = {X3, Y3, Z3};
    f = fp12_mul_line(f, A, B, C);
}

inline void miller_add_step(Fp12& f, MillerState& T, const G2& Q, const Fp& xP, const Fp& yP) {
    // u = y2 Z - Y, v = x2 Z - X  (slope u/v through T and Q)
    Fp2 u = fp2_sub(fp2_mul(Q.y, T.Z), T.Y);
    Fp2 v = fp2_sub(fp2_mul(Q.x, T.Z), T.X);

    // line (scaled by v): -v yP + u xP w + (v y2 - u x2) w^3
    Fp2 A = fp2_neg(fp2_mul_fp(v, yP));
    Fp2 B = fp2_mul_fp(u, xP);
    Fp2 C = fp2_sub(fp2_mul(v, Q.y), fp2_mul(u, Q.x));

    // mixed projective addition
    Fp2 uu = fp2_sqr(u);
    Fp2 vv = fp2_sqr(v);
    Fp2 vvv = fp2_mul(v, vv);
    Fp2 R = fp2_mul(vv, T.X);
    Fp2 Aq = fp2_sub(fp2_sub(fp2_mul(uu, T.Z), vvv), fp2_dbl(R));
    Fp2 X3 = fp2_mul(v, Aq);
    Fp2 Y3 = fp2_sub(fp2_mul(u, fp2_sub(R, Aq)), fp2_mul(vvv, T.Y));
    Fp2 Z3 = fp2_mul(vvv, T.Z);

    T = {X3, Y3, Z3};
    f = fp12_mul_line(f, A, B, C);
}

/// Frobenius endomorphism on twist coordinates.
inline G2 g2_frobenius(const G2& q) {
    const auto& tp = tower_params();
    return {fp2_mul(fp2_conj(q.x), tp.twist_frob_x),
            fp2_mul(fp2_conj(q.y), tp.twist_frob_y), q.inf};
}

inline G2 g2_frobenius2(const G2& q) {
    const auto& tp = tower_params();
    return {fp2_mul(q.x, tp.twist_frob2_x), fp2_mul(q.y, tp.twist_frob2_y), q.inf};
}

}  // namespace detail

/// Miller loop without the final exponentiation. Products of these
/// accumulate across pairs; apply final_exponentiation once at the end.
inline Fp12 miller_loop(const G1& P, const G2& Q) {
    if (P.inf || Q.inf) return fp12_one();

    const mpz_class& loop = detail::tower_params().ate_loop;
    detail::MillerState T{Q.x, Q.y, fp2_one()};
    Fp12 f = fp12_one();

    for (size_t i = mpz_sizeinbase(loop.get_mpz_t(), 2) - 1; i-- > 0;) {
        f = fp12_sqr(f);
        detail::miller_double_step(f, T, P.x, P.y);
        if (mpz_tstbit(loop.get_mpz_t(), i))
            detail::miller_add_step(f, T, Q, P.x, P.y);
    }

    G2 Q1 = detail::g2_frobenius(Q);
    G2 Q2 = g2_neg(detail::g2_frobenius2(Q));
    detail::miller_add_step(f, T, Q1, P.x, P.y);
    detail::miller_add_step(f, T, Q2, P.x, P.y);
    return f;
}

inline Fp12 final_exponentiation(const Fp12& f) {
    // easy part: f^{(p^6 - 1)(p^2 + 1)}
    Fp12 t = fp12_mul(fp12_conj(f), fp12_inv(f));
    t = fp12_mul(fp12_frobenius2(t), t);
    // hard part: t^{(p^4 - p^2 + 1)/r}, now inside the cyclotomic subgroup
    return fp12_pow(t, detail::tower_params().hard_exp, /*cyclotomic=*/true);
}

inline Fp12 pairing(const G1& P, const G2& Q) { return final_exponentiation(miller_loop(P, Q)); }

inline Fp12 gt_generator() {
    static const Fp12 g = pairing(g1_generator(), g2_generator());
    return g;
}

/// GT inverse: pairing outputs are unitary, so conjugation inverts.
inline Fp12 gt_inv(const Fp12& a) { return fp12_conj(a); }

inline Fp12 gt_pow(const Fp12& a, const mpz_class& e) {
    if (e < 0) return fp12_pow(fp12_conj(a), -e, true);
    return fp12_pow(a, e, true);
}

/// Membership in the order-r subgroup of Fp12*.
inline bool gt_valid(const Fp12& a) {
    return fp12_is_one(fp12_pow(a, detail::fp_params().order_mpz, false));
}

// -- serialization ----------------------------------------------------------
// G1: 32 bytes, big-endian x with flag bits in the top byte
// (0x80 infinity, 0x40 odd y). G2: same layout over 64 bytes. GT: 384
// bytes of tower coefficients.

inline constexpr uint8_t kFlagInf = 0x80;
inline constexpr uint8_t kFlagOdd = 0x40;

inline Bytes g1_to_bytes(const G1& p) {
    if (p.inf) {
        Bytes out(32, 0);
        out[0] = kFlagInf;
        return out;
    }
    Bytes out = fp_to_bytes(p.x);
    if (fp_is_odd(p.y)) out[0] |= kFlagOdd;
    return out;
}

inline G1 g1_from_bytes(BytesView b) {
    if (b.size() != 32) throw std::runtime_error("g1 encoding must be 32 bytes");
    Bytes x(b.begin(), b.end());
    uint8_t flags = x[0] & 0xc0;
    x[0] &= 0x3f;
    if (flags & kFlagInf) {
        for (uint8_t c : x)
            if (c) throw std::runtime_error("invalid g1 infinity encoding");
        return g1_infinity();
    }
    G1 p;
    p.x = fp_from_bytes(x);
    Fp rhs = fp_add(fp_mul(fp_sqr(p.x), p.x), fp_from_u64(3));
    if (!fp_sqrt(p.y, rhs)) throw std::runtime_error("g1 x-coordinate not on curve");
    if (fp_is_odd(p.y) != bool(flags & kFlagOdd)) p.y = fp_neg(p.y);
    p.inf = false;
    return p;
}

inline Bytes g2_to_bytes(const G2& p) {
    if (p.inf) {
        Bytes out(64, 0);
        out[0] = kFlagInf;
        return out;
    }
    Bytes out = fp2_to_bytes(p.x);
    if (fp_is_odd(p.y.c0) || (p.y.c0.is_zero() && fp_is_odd(p.y.c1))) out[0] |= kFlagOdd;
    return out;
}

inline G2 g2_from_bytes(BytesView b) {
    if (b.size() != 64) throw std::runtime_error("g2 encoding must be 64 bytes");
    Bytes x(b.begin(), b.end());
    uint8_t flags = x[0] & 0xc0;
    x[0] &= 0x3f;
    if (flags & kFlagInf) {
        for (uint8_t c : x)
            if (c) throw std::runtime_error("invalid g2 infinity encoding");
        return g2_infinity();
    }
    G2 p;
    p.x = fp2_from_bytes(x);
    Fp2 rhs = fp2_add(fp2_mul(fp2_sqr(p.x), p.x), detail::tower_params().twist_b);
    if (!fp2_sqrt(p.y, rhs)) throw std::runtime_error("g2 x-coordinate not on twist");
    bool odd = fp_is_odd(p.y.c0) || (p.y.c0.is_zero() && fp_is_odd(p.y.c1));
    if (odd != bool(flags & kFlagOdd)) p.y = fp2_neg(p.y);
    p.inf = false;
    if (!g2_valid(p)) throw std::runtime_error("g2 point outside the prime-order subgroup");
    return p;
}

/// Compressed encoding for cyclotomic-subgroup elements (every GT value):
/// the four Fp2 coordinates (z2, z3, z4, z5) of the Granger-Scott
/// decomposition; (z0, z1) are recovered rationally on decompression.
inline Bytes gt_to_bytes_compressed(const Fp12& a) {
    Bytes out;
    out.reserve(256);
    append_bytes(out, fp2_to_bytes(a.c1.c0));  // z2
    append_bytes(out, fp2_to_bytes(a.c0.c2));  // z3
    append_bytes(out, fp2_to_bytes(a.c0.c1));  // z4
    append_bytes(out, fp2_to_bytes(a.c1.c2));  // z5
    return out;
}

inline Fp12 gt_from_bytes_compressed(BytesView b) {
    if (b.size() != 256) throw std::runtime_error("compressed gt encoding must be 256 bytes");
    Fp2 z2 = fp2_from_bytes(b.subspan(0, 64));
    Fp2 z3 = fp2_from_bytes(b.subspan(64, 64));
    Fp2 z4 = fp2_from_bytes(b.subspan(128, 64));
    Fp2 z5 = fp2_from_bytes(b.subspan(192, 64));

    Fp12 a;
    a.c1.c0 = z2;
    a.c0.c2 = z3;
    a.c0.c1 = z4;
    a.c1.c2 = z5;
    Fp2 z0, z1;
    if (!z2.is_zero()) {
        Fp2 num = fp2_add(fp2_mul_xi(fp2_sqr(z5)),
                          fp2_sub(fp2_mul_fp(fp2_sqr(z4), fp_from_u64(3)), fp2_dbl(z3)));
        z1 = fp2_mul(num, fp2_inv(fp2_dbl(fp2_dbl(z2))));
        Fp2 t = fp2_sub(fp2_add(fp2_dbl(fp2_sqr(z1)), fp2_mul(z2, z5)),
                        fp2_mul_fp(fp2_mul(z3, z4), fp_from_u64(3)));
        z0 = fp2_add(fp2_mul_xi(t), fp2_one());
    } else if (!z3.is_zero()) {
        z1 = fp2_mul(fp2_dbl(fp2_mul(z4, z5)), fp2_inv(z3));
        Fp2 t = fp2_sub(fp2_dbl(fp2_sqr(z1)), fp2_mul_fp(fp2_mul(z3, z4), fp_from_u64(3)));
        z0 = fp2_add(fp2_mul_xi(t), fp2_one());
    } else if (z4.is_zero() && z5.is_zero()) {
        z0 = fp2_one();  // the identity
        z1 = fp2_zero();
    } else {
        throw std::runtime_error("invalid compressed gt element");
    }
    a.c0.c0 = z0;
    a.c1.c1 = z1;
    if (!gt_valid(a)) throw std::runtime_error("gt element outside the prime-order subgroup");
    return a;
}

inline Bytes gt_to_bytes(const Fp12& a) {
    Bytes out;
    out.reserve(384);
    for (const Fp2* c : {&a.c0.c0, &a.c0.c1, &a.c0.c2, &a.c1.c0, &a.c1.c1, &a.c1.c2})
        append_bytes(out, fp2_to_bytes(*c));
    return out;
}

inline Fp12 gt_from_bytes(BytesView b) {
    if (b.size() != 384) throw std::runtime_error("gt encoding must be 384 bytes");
    Fp12 a;
    Fp2* cs[6] = {&a.c0.c0, &a.c0.c1, &a.c0.c2, &a.c1.c0, &a.c1.c1, &a.c1.c2};
    for (int i = 0; i < 6; ++i) *cs[i] = fp2_from_bytes(b.subspan(64 * i, 64));
    if (!gt_valid(a)) throw std::runtime_error("gt element outside the prime-order subgroup");
    return a;
}

}  // namespace vpe::bn254
