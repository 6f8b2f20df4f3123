#pragma once

#include <stdexcept>
#include <thread>
#include <vector>

#include "vpe/field.hpp"

namespace vpe {

/// 2x2 matrix over Z_p, row-major.
struct Matrix2 {
    Scalar a, b, c, d;

    static Matrix2 identity(const PrimeField& f) {
        return {f.one(), f.zero(), f.zero(), f.one()};
    }

    static Matrix2 random(const PrimeField& f, RandomSource& rng) {
        return {f.random(rng), f.random(rng), f.random(rng), f.random(rng)};
    }

    Scalar det() const { return a * d - b * c; }

    Matrix2 scaled(const Scalar& k) const { return {a * k, b * k, c * k, d * k}; }

    Matrix2 operator-(const Matrix2& o) const {
        return {a - o.a, b - o.b, c - o.c, d - o.d};
    }

    bool operator==(const Matrix2& o) const {
        return a == o.a && b == o.b && c == o.c && d == o.d;
    }
};

struct Vector2 {
    Scalar x, y;

    static Vector2 random(const PrimeField& f, RandomSource& rng) {
        return {f.random(rng), f.random(rng)};
    }

    static Vector2 random_nonzero(const PrimeField& f, RandomSource& rng) {
        Vector2 v{f.random(rng), f.random(rng)};
        while (v.x.is_zero() && v.y.is_zero()) v = {f.random(rng), f.random(rng)};
        return v;
    }

    Vector2 operator+(const Vector2& o) const { return {x + o.x, y + o.y}; }
    Vector2 scaled(const Scalar& k) const { return {x * k, y * k}; }
    bool operator==(const Vector2& o) const { return x == o.x && y == o.y; }
};

inline Vector2 operator*(const Matrix2& m, const Vector2& v) {
    return {m.a * v.x + m.b * v.y, m.c * v.x + m.d * v.y};
}

inline Matrix2 operator*(const Matrix2& m, const Matrix2& n) {
    return {m.a * n.a + m.b * n.c, m.a * n.b + m.b * n.d,
            m.c * n.a + m.d * n.c, m.c * n.b + m.d * n.d};
}

/// p0 + p1*Z + Z^2 (leading coefficient implicitly one).
struct MonicQuadratic {
    Scalar p0, p1;
};

/// Characteristic polynomial of A: (ad - bc) - (a + d)Z + Z^2.
inline MonicQuadratic char_poly(const Matrix2& A) {
    return {A.det(), -(A.a + A.d)};
}

/// Degree-2 modular monomial powers: coefficients (f0, f1) of
/// Z^d mod P(Z), computed by recursive square-and-multiply. Requires d >= 1;
/// callers handle Z^0 = 1 themselves.
inline std::pair<Scalar, Scalar> mmp2(uint64_t d, const MonicQuadratic& P) {
    if (d == 0) throw std::invalid_argument("mmp2: exponent must be >= 1");
    const PrimeField& f = P.p0.field();
    if (d == 1) return {f.zero(), f.one()};

    auto [t0, t1] = mmp2(d / 2, P);
    // T(Z)^2 mod P(Z)
    Scalar t1sq = t1 * t1;
    Scalar s0 = t0 * t0 - t1sq * P.p0;
    Scalar s1 = (t0 + t0) * t1 - t1sq * P.p1;
    if (d % 2 == 0) return {std::move(s0), std::move(s1)};
    // Z * S(Z) mod P(Z)
    return {-(s1 * P.p0), s0 - s1 * P.p1};
}

struct SingularMatrix : std::runtime_error {
    SingularMatrix() : std::runtime_error("matrix geometric sum: A - I is singular") {}
};

/// Projected matrix geometric sum: sum_{i=0}^{k} A^i * beta, in O(log k)
/// field operations via the characteristic polynomial of A.
/// Throws SingularMatrix when A - I_2 is not invertible; callers re-draw
/// their random scalar in that case.
inline Vector2 pmgs(uint64_t k, const Matrix2& A, const Vector2& beta) {
    const PrimeField& f = A.a.field();
    Matrix2 AmI = A - Matrix2::identity(f);
    Scalar det = AmI.det();
    if (det.is_zero()) throw SingularMatrix();

    // w = (A - I)^{-1} beta
    Scalar idet = det.inverse();
    Vector2 w{(AmI.d * beta.x - AmI.b * beta.y) * idet,
              (AmI.a * beta.y - AmI.c * beta.x) * idet};

    // A^{k+1} = f1*A + f0*I by Cayley-Hamilton
    auto [f0, f1] = mmp2(k + 1, char_poly(A));

    // (A^{k+1} - I) w
    Scalar f0m1 = f0 - f.one();
    Matrix2 M{A.a * f1 + f0m1, A.b * f1, A.c * f1, A.d * f1 + f0m1};
    return M * w;
}

/// [r^0, r^1, ..., r^d]. The parallel schedule doubles the known prefix
/// each round; output is identical to sequential accumulation.
inline std::vector<Scalar> scalar_powers(const Scalar& r, uint64_t d, unsigned workers = 1) {
    const PrimeField& f = r.field();
    std::vector<Scalar> out;
    out.reserve(d + 1);
    out.push_back(f.one());
    if (d == 0) return out;
    out.push_back(r);

    if (workers <= 1) {
        for (uint64_t i = 2; i <= d; ++i) out.push_back(out.back() * r);
        return out;
    }

    out.resize(d + 1);
    uint64_t have = 1;  // powers 0..have are known
    while (have < d) {
        uint64_t todo = std::min(have, d - have);
        uint64_t per = (todo + workers - 1) / workers;
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers && uint64_t(w) * per < todo; ++w) {
            uint64_t lo = uint64_t(w) * per + 1, hi = std::min(todo, lo + per - 1);
            pool.emplace_back([&, lo, hi] {
                for (uint64_t k = lo; k <= hi; ++k) out[have + k] = out[have] * out[k];
            });
        }
        for (auto& t : pool) t.join();
        have += todo;
    }
    return out;
}

}  // namespace vpe
