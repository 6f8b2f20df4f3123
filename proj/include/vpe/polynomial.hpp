#pragma once

#include <stdexcept>
#include <vector>

#include "vpe/algebra.hpp"
#include "vpe/field.hpp"

namespace vpe {

/// Dense univariate polynomial over Z_p: p_0 + p_1 X + ... + p_d X^d.
class Polynomial {
public:
    Polynomial(std::vector<Scalar> coeffs, const PrimeField* f)
        : coeffs_(std::move(coeffs)), field_(f) {
        if (coeffs_.empty()) throw std::invalid_argument("polynomial needs >= 1 coefficient");
    }

    static Polynomial random(uint64_t degree, const PrimeField& f, RandomSource& rng) {
        std::vector<Scalar> c;
        c.reserve(degree + 1);
        for (uint64_t i = 0; i <= degree; ++i) c.push_back(f.random(rng));
        return Polynomial(std::move(c), &f);
    }

    uint64_t degree() const { return coeffs_.size() - 1; }
    const PrimeField& field() const { return *field_; }
    const Scalar& operator[](size_t i) const { return coeffs_[i]; }
    Scalar& operator[](size_t i) { return coeffs_[i]; }
    const std::vector<Scalar>& coeffs() const { return coeffs_; }

    bool operator==(const Polynomial& o) const { return coeffs_ == o.coeffs_; }

private:
    std::vector<Scalar> coeffs_;
    const PrimeField* field_;
};

/// P(r) by Horner's rule.
inline Scalar horner_eval(const Polynomial& P, const Scalar& r) {
    Scalar acc = P[P.degree()];
    for (size_t i = P.degree(); i > 0; --i) acc = acc * r + P[i - 1];
    return acc;
}

/// Difference-polynomial evaluation Q_P(s, r) = (P(s) - P(r)) / (s - r),
/// the quotient certifying an evaluation: P(s) = P(r) + (s - r) Q_P(s, r).
inline Scalar diff_poly_eval(const Polynomial& P, const Scalar& s, const Scalar& r) {
    if (s == r) throw std::invalid_argument("diff_poly_eval: points must differ");
    return (horner_eval(P, s) - horner_eval(P, r)) * (s - r).inverse();
}

/// Subset (tail) polynomial T_{k,P}(X) = sum_{i=k+1}^{d} p_i X^{i-k-1},
/// evaluated at x.
inline Scalar subset_poly_eval(const Polynomial& P, uint64_t k, const Scalar& x) {
    const PrimeField& f = P.field();
    if (k + 1 > P.degree()) return f.zero();
    Scalar acc = P[P.degree()];
    for (uint64_t i = P.degree(); i > k + 1; --i) acc = acc * x + P[i - 1];
    return acc;
}

/// All tail evaluations [T_{0,P}(x), ..., T_{d-1,P}(x)] in O(d), using
/// T_{k-1,P}(x) = p_k + x * T_{k,P}(x).
inline std::vector<Scalar> subset_poly_tails(const Polynomial& P, const Scalar& x) {
    uint64_t d = P.degree();
    std::vector<Scalar> tails(d, P.field().zero());
    if (d == 0) return tails;
    tails[d - 1] = P[d];
    for (uint64_t k = d - 1; k > 0; --k) tails[k - 1] = P[k] + x * tails[k];
    return tails;
}

}  // namespace vpe
