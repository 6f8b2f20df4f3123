#pragma once

#include <vector>

#include "vpe/bn254/fp_tower.hpp"

namespace vpe::bn254 {

// Affine points; the point at infinity carries inf = true and zeroed
// coordinates. Group law internals use Jacobian coordinates.

struct G1 {
    Fp x, y;
    bool inf = true;

    bool operator==(const G1& o) const {
        if (inf || o.inf) return inf == o.inf;
        return x == o.x && y == o.y;
    }
};

struct G2 {
    Fp2 x, y;
    bool inf = true;

    bool operator==(const G2& o) const {
        if (inf || o.inf) return inf == o.inf;
        return x == o.x && y == o.y;
    }
};

namespace detail {

// Generic Jacobian arithmetic over a coordinate field F. The curve
// coefficient `a` is zero for both the base curve and its twist.
template <typename F, typename Ops>
struct Jac {
    F X, Y, Z;
    bool inf = true;

    static Jac from_affine(const F& x, const F& y, bool is_inf) {
        if (is_inf) return Jac{};
        return Jac{x, y, Ops::one(), false};
    }

    Jac dbl() const {
        if (inf) return *this;
        F A = Ops::sqr(X);
        F B = Ops::sqr(Y);
        F C = Ops::sqr(B);
        F D = Ops::sub(Ops::sqr(Ops::add(X, B)), Ops::add(A, C));
        D = Ops::dbl(D);
        F E = Ops::add(Ops::dbl(A), A);
        F Fv = Ops::sqr(E);
        F X3 = Ops::sub(Fv, Ops::dbl(D));
        F eight_c = Ops::dbl(Ops::dbl(Ops::dbl(C)));
        F Y3 = Ops::sub(Ops::mul(E, Ops::sub(D, X3)), eight_c);
        F Z3 = Ops::mul(Ops::dbl(Y), Z);
        return Jac{X3, Y3, Z3, false};
    }

    Jac add(const Jac& o) const {
        if (inf) return o;
        if (o.inf) return *this;
        F Z1Z1 = Ops::sqr(Z);
        F Z2Z2 = Ops::sqr(o.Z);
        F U1 = Ops::mul(X, Z2Z2);
        F U2 = Ops::mul(o.X, Z1Z1);
        F S1 = Ops::mul(Ops::mul(Y, o.Z), Z2Z2);
        F S2 = Ops::mul(Ops::mul(o.Y, Z), Z1Z1);
        if (U1 == U2) {
            if (S1 == S2) return dbl();
            return Jac{};
        }
        F H = Ops::sub(U2, U1);
        F I = Ops::sqr(Ops::dbl(H));
        F J = Ops::mul(H, I);
        F r = Ops::dbl(Ops::sub(S2, S1));
        F V = Ops::mul(U1, I);
        F X3 = Ops::sub(Ops::sub(Ops::sqr(r), J), Ops::dbl(V));
        F Y3 = Ops::sub(Ops::mul(r, Ops::sub(V, X3)), Ops::dbl(Ops::mul(S1, J)));
        F Z3 = Ops::mul(Ops::sub(Ops::sub(Ops::sqr(Ops::add(Z, o.Z)), Z1Z1), Z2Z2), H);
        return Jac{X3, Y3, Z3, false};
    }

    Jac neg() const {
        if (inf) return *this;
        return Jac{X, Ops::neg(Y), Z, false};
    }
};

struct FpOps {
    static Fp one() { return fp_one(); }
    static Fp add(const Fp& a, const Fp& b) { return fp_add(a, b); }
    static Fp sub(const Fp& a, const Fp& b) { return fp_sub(a, b); }
    static Fp mul(const Fp& a, const Fp& b) { return fp_mul(a, b); }
    static Fp sqr(const Fp& a) { return fp_sqr(a); }
    static Fp dbl(const Fp& a) { return fp_dbl(a); }
    static Fp neg(const Fp& a) { return fp_neg(a); }
    static Fp inv(const Fp& a) { return fp_inv(a); }
};

struct Fp2Ops {
    static Fp2 one() { return fp2_one(); }
    static Fp2 add(const Fp2& a, const Fp2& b) { return fp2_add(a, b); }
    static Fp2 sub(const Fp2& a, const Fp2& b) { return fp2_sub(a, b); }
    static Fp2 mul(const Fp2& a, const Fp2& b) { return fp2_mul(a, b); }
    static Fp2 sqr(const Fp2& a) { return fp2_sqr(a); }
    static Fp2 dbl(const Fp2& a) { return fp2_dbl(a); }
    static Fp2 neg(const Fp2& a) { return fp2_neg(a); }
    static Fp2 inv(const Fp2& a) { return fp2_inv(a); }
};

using JacG1 = Jac<Fp, FpOps>;
using JacG2 = Jac<Fp2, Fp2Ops>;

template <typename F, typename Ops, typename Affine>
Affine to_affine(const Jac<F, Ops>& p) {
    Affine out;
    if (p.inf) return out;
    F zinv = Ops::inv(p.Z);
    F zinv2 = Ops::sqr(zinv);
    out.x = Ops::mul(p.X, zinv2);
    out.y = Ops::mul(p.Y, Ops::mul(zinv2, zinv));
    out.inf = false;
    return out;
}

// Window NAF scalar multiplication (window 4).
template <typename JacT>
JacT wnaf_mul(const JacT& base, const mpz_class& k) {
    if (k == 0 || base.inf) return JacT{};
    mpz_class n = k;
    bool negate = false;
    if (n < 0) {
        n = -n;
        negate = true;
    }

    // Precompute odd multiples 1P, 3P, ..., 15P
    JacT twoP = base.dbl();
    std::array<JacT, 8> tab;
    tab[0] = base;
    for (int i = 1; i < 8; ++i) tab[i] = tab[i - 1].add(twoP);

    // Build NAF digits
    std::vector<int8_t> naf;
    naf.reserve(mpz_sizeinbase(n.get_mpz_t(), 2) + 1);
    mpz_class t = n;
    while (t > 0) {
        if (mpz_odd_p(t.get_mpz_t())) {
            long d = mpz_class(t % 32).get_si();
            if (d >= 16) d -= 32;
            naf.push_back(int8_t(d));
            t -= d;
        } else {
            naf.push_back(0);
        }
        t >>= 1;
    }

    JacT acc;
    for (size_t i = naf.size(); i-- > 0;) {
        acc = acc.dbl();
        int8_t d = naf[i];
        if (d > 0) acc = acc.add(tab[(d - 1) / 2]);
        if (d < 0) acc = acc.add(tab[(-d - 1) / 2].neg());
    }
    return negate ? acc.neg() : acc;
}

}  // namespace detail

inline G1 g1_infinity() { return G1{}; }
inline G2 g2_infinity() { return G2{}; }

inline G1 g1_generator() { return G1{fp_one(), fp_from_u64(2), false}; }

inline G2 g2_generator() {
    static const G2 gen = [] {
        G2 g;
        g.x = {fp_from_mpz(mpz_class(
                   "10857046999023057135944570762232829481370756359578518086990519993285655852781")),
               fp_from_mpz(mpz_class(
                   "11559732032986387107991004021392285783925812861821192530917403151452391805634"))};
        g.y = {fp_from_mpz(mpz_class(
                   "8495653923123431417604973247489272438418190587263600148770280649306958101930")),
               fp_from_mpz(mpz_class(
                   "4082367875863433681332203403145435568316851327593401208105741076214120093531"))};
        g.inf = false;
        return g;
    }();
    return gen;
}

inline bool g1_on_curve(const G1& p) {
    if (p.inf) return true;
    Fp rhs = fp_add(fp_mul(fp_sqr(p.x), p.x), fp_from_u64(3));
    return fp_sqr(p.y) == rhs;
}

inline bool g2_on_curve(const G2& p) {
    if (p.inf) return true;
    Fp2 rhs = fp2_add(fp2_mul(fp2_sqr(p.x), p.x), detail::tower_params().twist_b);
    return fp2_sqr(p.y) == rhs;
}

inline G1 g1_add(const G1& a, const G1& b) {
    auto ja = detail::JacG1::from_affine(a.x, a.y, a.inf);
    auto jb = detail::JacG1::from_affine(b.x, b.y, b.inf);
    return detail::to_affine<Fp, detail::FpOps, G1>(ja.add(jb));
}

inline G2 g2_add(const G2& a, const G2& b) {
    auto ja = detail::JacG2::from_affine(a.x, a.y, a.inf);
    auto jb = detail::JacG2::from_affine(b.x, b.y, b.inf);
    return detail::to_affine<Fp2, detail::Fp2Ops, G2>(ja.add(jb));
}

inline G1 g1_neg(const G1& a) { return a.inf ? a : G1{a.x, fp_neg(a.y), false}; }
inline G2 g2_neg(const G2& a) { return a.inf ? a : G2{a.x, fp2_neg(a.y), false}; }

inline G1 g1_mul(const G1& p, const mpz_class& k) {
    auto j = detail::JacG1::from_affine(p.x, p.y, p.inf);
    return detail::to_affine<Fp, detail::FpOps, G1>(detail::wnaf_mul(j, k));
}

inline G2 g2_mul(const G2& p, const mpz_class& k) {
    auto j = detail::JacG2::from_affine(p.x, p.y, p.inf);
    return detail::to_affine<Fp2, detail::Fp2Ops, G2>(detail::wnaf_mul(j, k));
}

/// G1 membership: the curve has cofactor one, so on-curve suffices.
inline bool g1_valid(const G1& p) { return g1_on_curve(p); }

/// G2 membership: on the twist and in the order-r subgroup.
inline bool g2_valid(const G2& p) {
    if (!g2_on_curve(p)) return false;
    if (p.inf) return true;
    return g2_mul(p, detail::fp_params().order_mpz).inf;
}

// -- fixed-base tables ------------------------------------------------------

/// Precomputed 8-bit windows for repeated exponentiation of one base point.
template <typename JacT, typename AffineT>
class FixedBaseTable {
public:
    FixedBaseTable() = default;

    FixedBaseTable(const JacT& base, size_t scalar_bits) {
        size_t windows = (scalar_bits + 7) / 8;
        table_.resize(windows);
        JacT cur = base;
        for (size_t w = 0; w < windows; ++w) {
            table_[w][0] = JacT{};
            for (int j = 1; j < 256; ++j) table_[w][j] = table_[w][j - 1].add(cur);
            cur = table_[w][255].add(cur);  // 256 * cur
        }
    }

    bool empty() const { return table_.empty(); }

    JacT mul(const mpz_class& k) const {
        JacT acc;
        size_t limbs = mpz_size(k.get_mpz_t());
        const mp_limb_t* d = mpz_limbs_read(k.get_mpz_t());
        size_t total = limbs * sizeof(mp_limb_t);
        for (size_t byte = 0; byte < total && byte < table_.size(); ++byte) {
            uint8_t digit = uint8_t(d[byte / sizeof(mp_limb_t)] >> (8 * (byte % sizeof(mp_limb_t))));
            if (digit) acc = acc.add(table_[byte][digit]);
        }
        return acc;
    }

private:
    std::vector<std::array<JacT, 256>> table_;
};

}  // namespace vpe::bn254
