#pragma once

#include "vpe/bn254/fp.hpp"

namespace vpe::bn254 {

// Tower: Fp2 = Fp[i]/(i^2 + 1); Fp6 = Fp2[v]/(v^3 - xi) with xi = 9 + i;
// Fp12 = Fp6[w]/(w^2 - v). An Fp12 element sum c_k w^k maps to coefficients
// (c0, c2, c4) in the first Fp6 component and (c1, c3, c5) in the second.

struct Fp2 {
    Fp c0, c1;

    bool operator==(const Fp2& o) const { return c0 == o.c0 && c1 == o.c1; }
    bool is_zero() const { return c0.is_zero() && c1.is_zero(); }
};

inline Fp2 fp2_zero() { return {fp_zero(), fp_zero()}; }
inline Fp2 fp2_one() { return {fp_one(), fp_zero()}; }
inline Fp2 fp2_xi() { return {fp_from_u64(9), fp_one()}; }

inline Fp2 fp2_add(const Fp2& a, const Fp2& b) { return {fp_add(a.c0, b.c0), fp_add(a.c1, b.c1)}; }
inline Fp2 fp2_sub(const Fp2& a, const Fp2& b) { return {fp_sub(a.c0, b.c0), fp_sub(a.c1, b.c1)}; }
inline Fp2 fp2_neg(const Fp2& a) { return {fp_neg(a.c0), fp_neg(a.c1)}; }
inline Fp2 fp2_dbl(const Fp2& a) { return {fp_dbl(a.c0), fp_dbl(a.c1)}; }
inline Fp2 fp2_conj(const Fp2& a) { return {a.c0, fp_neg(a.c1)}; }

inline Fp2 fp2_mul(const Fp2& a, const Fp2& b) {
    Fp v0 = fp_mul(a.c0, b.c0);
    Fp v1 = fp_mul(a.c1, b.c1);
    Fp s = fp_mul(fp_add(a.c0, a.c1), fp_add(b.c0, b.c1));
    return {fp_sub(v0, v1), fp_sub(fp_sub(s, v0), v1)};
}

inline Fp2 fp2_sqr(const Fp2& a) {
    Fp t0 = fp_mul(fp_add(a.c0, a.c1), fp_sub(a.c0, a.c1));
    Fp t1 = fp_dbl(fp_mul(a.c0, a.c1));
    return {t0, t1};
}

inline Fp2 fp2_mul_fp(const Fp2& a, const Fp& k) { return {fp_mul(a.c0, k), fp_mul(a.c1, k)}; }

/// Multiplication by the Fp6 non-residue xi = 9 + i.
inline Fp2 fp2_mul_xi(const Fp2& a) {
    // (9 c0 - c1) + (9 c1 + c0) i
    Fp t0 = fp_dbl(fp_dbl(fp_dbl(a.c0)));  // 8 c0
    t0 = fp_add(t0, a.c0);
    Fp t1 = fp_dbl(fp_dbl(fp_dbl(a.c1)));
    t1 = fp_add(t1, a.c1);
    return {fp_sub(t0, a.c1), fp_add(t1, a.c0)};
}

inline Fp2 fp2_inv(const Fp2& a) {
    Fp norm = fp_add(fp_sqr(a.c0), fp_sqr(a.c1));
    Fp ninv = fp_inv(norm);
    return {fp_mul(a.c0, ninv), fp_neg(fp_mul(a.c1, ninv))};
}

inline Fp2 fp2_pow(const Fp2& a, const mpz_class& e) {
    Fp2 acc = fp2_one();
    if (e == 0) return acc;
    size_t nbits = mpz_sizeinbase(e.get_mpz_t(), 2);
    for (size_t i = nbits; i-- > 0;) {
        acc = fp2_sqr(acc);
        if (mpz_tstbit(e.get_mpz_t(), i)) acc = fp2_mul(acc, a);
    }
    return acc;
}

/// Square root in Fp2 (complex method for p = 3 mod 4); false when a is
/// not a square.
inline bool fp2_sqrt(Fp2& out, const Fp2& a) {
    if (a.c1.is_zero()) {
        Fp r;
        if (fp_sqrt(r, a.c0)) {
            out = {r, fp_zero()};
        } else {
            bool ok = fp_sqrt(r, fp_neg(a.c0));
            if (!ok) return false;  // cannot happen for prime p = 3 mod 4
            out = {fp_zero(), r};
        }
        return true;
    }
    Fp norm = fp_add(fp_sqr(a.c0), fp_sqr(a.c1));
    Fp lambda;
    if (!fp_sqrt(lambda, norm)) return false;
    static const Fp half = fp_inv(fp_from_u64(2));
    Fp delta = fp_mul(fp_add(a.c0, lambda), half);
    Fp x0;
    if (!fp_sqrt(x0, delta)) {
        delta = fp_mul(fp_sub(a.c0, lambda), half);
        if (!fp_sqrt(x0, delta)) return false;
    }
    Fp x1 = fp_mul(a.c1, fp_inv(fp_dbl(x0)));
    Fp2 cand{x0, x1};
    if (!(fp2_sqr(cand) == a)) return false;
    out = cand;
    return true;
}

struct Fp6 {
    Fp2 c0, c1, c2;

    bool operator==(const Fp6& o) const { return c0 == o.c0 && c1 == o.c1 && c2 == o.c2; }
    bool is_zero() const { return c0.is_zero() && c1.is_zero() && c2.is_zero(); }
};

inline Fp6 fp6_zero() { return {fp2_zero(), fp2_zero(), fp2_zero()}; }
inline Fp6 fp6_one() { return {fp2_one(), fp2_zero(), fp2_zero()}; }

inline Fp6 fp6_add(const Fp6& a, const Fp6& b) {
    return {fp2_add(a.c0, b.c0), fp2_add(a.c1, b.c1), fp2_add(a.c2, b.c2)};
}
inline Fp6 fp6_sub(const Fp6& a, const Fp6& b) {
    return {fp2_sub(a.c0, b.c0), fp2_sub(a.c1, b.c1), fp2_sub(a.c2, b.c2)};
}
inline Fp6 fp6_neg(const Fp6& a) { return {fp2_neg(a.c0), fp2_neg(a.c1), fp2_neg(a.c2)}; }

inline Fp6 fp6_mul(const Fp6& a, const Fp6& b) {
    Fp2 v0 = fp2_mul(a.c0, b.c0);
    Fp2 v1 = fp2_mul(a.c1, b.c1);
    Fp2 v2 = fp2_mul(a.c2, b.c2);
    Fp2 t0 = fp2_mul(fp2_add(a.c1, a.c2), fp2_add(b.c1, b.c2));
    t0 = fp2_sub(fp2_sub(t0, v1), v2);
    Fp2 t1 = fp2_mul(fp2_add(a.c0, a.c1), fp2_add(b.c0, b.c1));
    t1 = fp2_sub(fp2_sub(t1, v0), v1);
    Fp2 t2 = fp2_mul(fp2_add(a.c0, a.c2), fp2_add(b.c0, b.c2));
    t2 = fp2_add(fp2_sub(fp2_sub(t2, v0), v2), v1);
    return {fp2_add(v0, fp2_mul_xi(t0)), fp2_add(t1, fp2_mul_xi(v2)), t2};
}

inline Fp6 fp6_sqr(const Fp6& a) { return fp6_mul(a, a); }

/// Multiply by v (the cubic tower variable): (c0, c1, c2) -> (xi*c2, c0, c1).
inline Fp6 fp6_mul_by_v(const Fp6& a) { return {fp2_mul_xi(a.c2), a.c0, a.c1}; }

inline Fp6 fp6_mul_fp2(const Fp6& a, const Fp2& k) {
    return {fp2_mul(a.c0, k), fp2_mul(a.c1, k), fp2_mul(a.c2, k)};
}

inline Fp6 fp6_inv(const Fp6& a) {
    Fp2 t0 = fp2_sub(fp2_sqr(a.c0), fp2_mul_xi(fp2_mul(a.c1, a.c2)));
    Fp2 t1 = fp2_sub(fp2_mul_xi(fp2_sqr(a.c2)), fp2_mul(a.c0, a.c1));
    Fp2 t2 = fp2_sub(fp2_sqr(a.c1), fp2_mul(a.c0, a.c2));
    Fp2 f = fp2_add(fp2_mul(a.c0, t0),
                    fp2_mul_xi(fp2_add(fp2_mul(a.c2, t1), fp2_mul(a.c1, t2))));
    Fp2 finv = fp2_inv(f);
    return {fp2_mul(t0, finv), fp2_mul(t1, finv), fp2_mul(t2, finv)};
}

struct Fp12 {
    Fp6 c0, c1;

    bool operator==(const Fp12& o) const { return c0 == o.c0 && c1 == o.c1; }
};

inline Fp12 fp12_one() { return {fp6_one(), fp6_zero()}; }
inline bool fp12_is_one(const Fp12& a) { return a == fp12_one(); }

inline Fp12 fp12_mul(const Fp12& a, const Fp12& b) {
    Fp6 v0 = fp6_mul(a.c0, b.c0);
    Fp6 v1 = fp6_mul(a.c1, b.c1);
    Fp6 t = fp6_mul(fp6_add(a.c0, a.c1), fp6_add(b.c0, b.c1));
    return {fp6_add(v0, fp6_mul_by_v(v1)), fp6_sub(fp6_sub(t, v0), v1)};
}

inline Fp12 fp12_sqr(const Fp12& a) {
    Fp6 v0 = fp6_mul(a.c0, a.c1);
    Fp6 t = fp6_mul(fp6_add(a.c0, a.c1), fp6_add(a.c0, fp6_mul_by_v(a.c1)));
    t = fp6_sub(fp6_sub(t, v0), fp6_mul_by_v(v0));
    return {t, fp6_add(v0, v0)};
}

/// Conjugate over Fp6; equals the inverse for unitary (cyclotomic) elements.
inline Fp12 fp12_conj(const Fp12& a) { return {a.c0, fp6_neg(a.c1)}; }

inline Fp12 fp12_inv(const Fp12& a) {
    Fp6 norm = fp6_sub(fp6_sqr(a.c0), fp6_mul_by_v(fp6_sqr(a.c1)));
    Fp6 ninv = fp6_inv(norm);
    return {fp6_mul(a.c0, ninv), fp6_neg(fp6_mul(a.c1, ninv))};
}

namespace detail {

/// Frobenius constants gamma_{n,k} = xi^{k (p^n - 1)/6} for n = 1..3,
/// plus the twist-endomorphism constants. Computed once from the curve
/// parameters rather than transcribed.
struct TowerParams {
    Fp2 frob1[6];  // for x -> x^p
    Fp2 frob2[6];  // for x -> x^{p^2}
    Fp2 frob3[6];  // for x -> x^{p^3}
    Fp2 twist_frob_x, twist_frob_y;    // pi(x, y) on the twist
    Fp2 twist_frob2_x, twist_frob2_y;  // pi^2(x, y)
    Fp2 twist_b;                       // 3 / xi
    mpz_class hard_exp;                // (p^4 - p^2 + 1) / r
    mpz_class ate_loop;                // 6u + 2

    TowerParams() {
        const mpz_class& p = fp_params().p_mpz;
        mpz_class p2 = p * p;
        mpz_class p3 = p2 * p;
        Fp2 xi = fp2_xi();
        for (int k = 0; k < 6; ++k) {
            frob1[k] = fp2_pow(xi, mpz_class(k) * (p - 1) / 6);
            frob2[k] = fp2_pow(xi, mpz_class(k) * (p2 - 1) / 6);
            frob3[k] = fp2_pow(xi, mpz_class(k) * (p3 - 1) / 6);
        }
        twist_frob_x = fp2_pow(xi, (p - 1) / 3);
        twist_frob_y = fp2_pow(xi, (p - 1) / 2);
        twist_frob2_x = fp2_pow(xi, (p2 - 1) / 3);
        twist_frob2_y = fp2_pow(xi, (p2 - 1) / 2);
        twist_b = fp2_mul_fp(fp2_inv(xi), fp_from_u64(3));

        mpz_class p4 = p2 * p2;
        mpz_class num = p4 - p2 + 1;
        mpz_class rem;
        mpz_class q;
        mpz_fdiv_qr(q.get_mpz_t(), rem.get_mpz_t(), num.get_mpz_t(),
                    fp_params().order_mpz.get_mpz_t());
        if (rem != 0) throw std::logic_error("bn254: r does not divide p^4 - p^2 + 1");
        hard_exp = q;
        ate_loop = 6 * mpz_class(kCurveParamU) + 2;
    }
};

inline const TowerParams& tower_params() {
    static const TowerParams params;
    return params;
}

}  // namespace detail

/// x -> x^p (coefficient-wise conjugation + twist constants).
inline Fp12 fp12_frobenius(const Fp12& a) {
    const auto& tp = detail::tower_params();
    // coefficient of w^k: c_k -> conj(c_k) * gamma_{1,k}
    return {{fp2_conj(a.c0.c0),
             fp2_mul(fp2_conj(a.c0.c1), tp.frob1[2]),
             fp2_mul(fp2_conj(a.c0.c2), tp.frob1[4])},
            {fp2_mul(fp2_conj(a.c1.c0), tp.frob1[1]),
             fp2_mul(fp2_conj(a.c1.c1), tp.frob1[3]),
             fp2_mul(fp2_conj(a.c1.c2), tp.frob1[5])}};
}

inline Fp12 fp12_frobenius2(const Fp12& a) {
    const auto& tp = detail::tower_params();
    return {{a.c0.c0,
             fp2_mul(a.c0.c1, tp.frob2[2]),
             fp2_mul(a.c0.c2, tp.frob2[4])},
            {fp2_mul(a.c1.c0, tp.frob2[1]),
             fp2_mul(a.c1.c1, tp.frob2[3]),
             fp2_mul(a.c1.c2, tp.frob2[5])}};
}

inline Fp12 fp12_frobenius3(const Fp12& a) {
    const auto& tp = detail::tower_params();
    return {{fp2_conj(a.c0.c0),
             fp2_mul(fp2_conj(a.c0.c1), tp.frob3[2]),
             fp2_mul(fp2_conj(a.c0.c2), tp.frob3[4])},
            {fp2_mul(fp2_conj(a.c1.c0), tp.frob3[1]),
             fp2_mul(fp2_conj(a.c1.c1), tp.frob3[3]),
             fp2_mul(fp2_conj(a.c1.c2), tp.frob3[5])}};
}

/// Squaring specialized to the cyclotomic subgroup (Granger-Scott).
/// Pairing outputs land there after the easy part of the final
/// exponentiation, so GT arithmetic can use this throughout.
inline Fp12 fp12_cyclotomic_sqr(const Fp12& a) {
    const Fp2& z0 = a.c0.c0;
    const Fp2& z4 = a.c0.c1;
    const Fp2& z3 = a.c0.c2;
    const Fp2& z2 = a.c1.c0;
    const Fp2& z1 = a.c1.c1;
    const Fp2& z5 = a.c1.c2;

    auto fp4_sqr = [](const Fp2& x, const Fp2& y, Fp2& t0, Fp2& t1) {
        Fp2 xy = fp2_mul(x, y);
        t0 = fp2_sub(fp2_sub(fp2_mul(fp2_add(x, y), fp2_add(x, fp2_mul_xi(y))), xy),
                     fp2_mul_xi(xy));
        t1 = fp2_dbl(xy);
    };

    Fp2 t0, t1, t2, t3, t4, t5;
    fp4_sqr(z0, z1, t0, t1);
    fp4_sqr(z2, z3, t2, t3);
    fp4_sqr(z4, z5, t4, t5);

    auto three_minus_two = [](const Fp2& t, const Fp2& z) {
        Fp2 r = fp2_sub(t, z);
        return fp2_add(fp2_dbl(r), t);  // 3t - 2z
    };
    auto three_plus_two = [](const Fp2& t, const Fp2& z) {
        Fp2 r = fp2_add(t, z);
        return fp2_add(fp2_dbl(r), t);  // 3t + 2z
    };

    Fp12 out;
    out.c0.c0 = three_minus_two(t0, z0);
    out.c1.c1 = three_plus_two(t1, z1);
    out.c1.c0 = three_plus_two(fp2_mul_xi(t5), z2);
    out.c0.c2 = three_minus_two(t4, z3);
    out.c0.c1 = three_minus_two(t2, z4);
    out.c1.c2 = three_plus_two(t3, z5);
    return out;
}

/// a^e using plain square-and-multiply; `cyclotomic` selects the fast
/// squaring (valid only inside the cyclotomic subgroup).
inline Fp12 fp12_pow(const Fp12& a, const mpz_class& e, bool cyclotomic = false) {
    Fp12 acc = fp12_one();
    if (e == 0) return acc;
    size_t nbits = mpz_sizeinbase(e.get_mpz_t(), 2);
    for (size_t i = nbits; i-- > 0;) {
        acc = cyclotomic ? fp12_cyclotomic_sqr(acc) : fp12_sqr(acc);
        if (mpz_tstbit(e.get_mpz_t(), i)) acc = fp12_mul(acc, a);
    }
    return acc;
}

/// Sparse multiplication by a Miller-loop line with coefficients
/// A + B w + C w^3 (A, B, C in Fp2).
inline Fp12 fp12_mul_line(const Fp12& f, const Fp2& A, const Fp2& B, const Fp2& C) {
    // (a0 + a1 v + a2 v^2) + (b0 + b1 v + b2 v^2) w, line = A + (B + C v) w
    const Fp2& a0 = f.c0.c0;
    const Fp2& a1 = f.c0.c1;
    const Fp2& a2 = f.c0.c2;
    const Fp2& b0 = f.c1.c0;
    const Fp2& b1 = f.c1.c1;
    const Fp2& b2 = f.c1.c2;

    // f * A
    Fp12 out{{fp2_mul(a0, A), fp2_mul(a1, A), fp2_mul(a2, A)},
             {fp2_mul(b0, A), fp2_mul(b1, A), fp2_mul(b2, A)}};

    // f * (B + C v) w: (c0 + c1 w)(L w) = (c1 L v) + (c0 L) w for L in Fp6
    Fp6 L{B, C, fp2_zero()};
    Fp6 t = fp6_mul_by_v(fp6_mul(f.c1, L));
    out.c0 = fp6_add(out.c0, t);
    out.c1 = fp6_add(out.c1, fp6_mul(f.c0, L));
    return out;
}

inline Bytes fp2_to_bytes(const Fp2& a) {
    Bytes out = fp_to_bytes(a.c0);
    append_bytes(out, fp_to_bytes(a.c1));
    return out;
}

inline Fp2 fp2_from_bytes(BytesView b) {
    if (b.size() != 64) throw std::runtime_error("fp2 encoding must be 64 bytes");
    return {fp_from_bytes(b.subspan(0, 32)), fp_from_bytes(b.subspan(32, 32))};
}

}  // namespace vpe::bn254
