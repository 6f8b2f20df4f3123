#pragma once

#include <memory>
#include <string>
#include <vector>

#include "vpe/bn254/pairing.hpp"
#include "vpe/field.hpp"
#include "vpe/opcount.hpp"

namespace vpe {

// Pairing engines share one shape: three group handles (g1, g2, gt), a
// bilinear map, and a Miller/final-exponentiation split so products of
// pairings can share the final exponentiation. Protocol code is templated
// on the engine; Bn254Engine is the production backend and MockEngine is
// an exponent-tracking model used by oracle tests and the complexity
// counters.

/// Bilinear groups over the 254-bit BN curve (EIP-196/197 parameters).
class Bn254Engine {
public:
    Bn254Engine() : field_(bn254::kGroupOrderDec) {
        auto g1j = bn254::detail::JacG1::from_affine(bn254::g1_generator().x,
                                                     bn254::g1_generator().y, false);
        auto g2j = bn254::detail::JacG2::from_affine(bn254::g2_generator().x,
                                                     bn254::g2_generator().y, false);
        g1_table_ = std::make_shared<G1Table>(g1j, 254);
        g2_table_ = std::make_shared<G2Table>(g2j, 254);
        g1.eng = this;
        g2.eng = this;
        gt.eng = this;
    }

    static constexpr const char* kCurveId = "bn254";
    std::string curve_id() const { return kCurveId; }
    const PrimeField& field() const { return field_; }

    struct G1Group {
        using Elem = bn254::G1;
        const Bn254Engine* eng;

        Elem generator() const { return bn254::g1_generator(); }
        Elem identity() const { return bn254::g1_infinity(); }
        Elem op(const Elem& a, const Elem& b) const {
            ++op_counts.group_mul;
            return bn254::g1_add(a, b);
        }
        Elem inverse(const Elem& a) const { return bn254::g1_neg(a); }
        Elem exp(const Elem& a, const Scalar& k) const {
            ++op_counts.group_exp;
            return bn254::g1_mul(a, k.value());
        }
        Elem exp_gen(const Scalar& k) const {
            ++op_counts.group_exp;
            return bn254::detail::to_affine<bn254::Fp, bn254::detail::FpOps, Elem>(
                eng->g1_table_->mul(k.value()));
        }
        bool eq(const Elem& a, const Elem& b) const { return a == b; }
        bool valid(const Elem& a) const { return bn254::g1_valid(a); }
        Bytes to_bytes(const Elem& a) const { return bn254::g1_to_bytes(a); }
        Elem from_bytes(BytesView b) const { return bn254::g1_from_bytes(b); }
        size_t byte_width() const { return 32; }
    };

    struct G2Group {
        using Elem = bn254::G2;
        const Bn254Engine* eng;

        Elem generator() const { return bn254::g2_generator(); }
        Elem identity() const { return bn254::g2_infinity(); }
        Elem op(const Elem& a, const Elem& b) const {
            ++op_counts.group_mul;
            return bn254::g2_add(a, b);
        }
        Elem inverse(const Elem& a) const { return bn254::g2_neg(a); }
        Elem exp(const Elem& a, const Scalar& k) const {
            ++op_counts.group_exp;
            return bn254::g2_mul(a, k.value());
        }
        Elem exp_gen(const Scalar& k) const {
            ++op_counts.group_exp;
            return bn254::detail::to_affine<bn254::Fp2, bn254::detail::Fp2Ops, Elem>(
                eng->g2_table_->mul(k.value()));
        }
        bool eq(const Elem& a, const Elem& b) const { return a == b; }
        bool valid(const Elem& a) const { return bn254::g2_valid(a); }
        Bytes to_bytes(const Elem& a) const { return bn254::g2_to_bytes(a); }
        Elem from_bytes(BytesView b) const { return bn254::g2_from_bytes(b); }
        size_t byte_width() const { return 64; }
    };

    struct GTGroup {
        using Elem = bn254::Fp12;
        const Bn254Engine* eng;

        Elem generator() const { return bn254::gt_generator(); }
        Elem identity() const { return bn254::fp12_one(); }
        Elem op(const Elem& a, const Elem& b) const {
            ++op_counts.group_mul;
            return bn254::fp12_mul(a, b);
        }
        Elem inverse(const Elem& a) const { return bn254::gt_inv(a); }
        Elem exp(const Elem& a, const Scalar& k) const {
            ++op_counts.group_exp;
            return bn254::gt_pow(a, k.value());
        }
        Elem exp_gen(const Scalar& k) const { return exp(generator(), k); }
        bool eq(const Elem& a, const Elem& b) const { return a == b; }
        bool valid(const Elem& a) const { return bn254::gt_valid(a); }
        Bytes to_bytes(const Elem& a) const { return bn254::gt_to_bytes(a); }
        Elem from_bytes(BytesView b) const { return bn254::gt_from_bytes(b); }
        size_t byte_width() const { return 384; }
        // Karabina compression, for size-sensitive persistent state
        Bytes to_bytes_compact(const Elem& a) const { return bn254::gt_to_bytes_compressed(a); }
        Elem from_bytes_compact(BytesView b) const { return bn254::gt_from_bytes_compressed(b); }
        size_t compact_byte_width() const { return 256; }
    };

    using G1Elem = G1Group::Elem;
    using G2Elem = G2Group::Elem;
    using GTElem = GTGroup::Elem;

    G1Group g1;
    G2Group g2;
    GTGroup gt;

    GTElem pair(const G1Elem& a, const G2Elem& b) const {
        ++op_counts.pairing;
        return bn254::pairing(a, b);
    }

    /// Miller-loop half of a pairing; combine with gt.op and close with
    /// pair_finish. Product semantics match products of full pairings.
    GTElem pair_accumulate(const G1Elem& a, const G2Elem& b) const {
        ++op_counts.pairing;
        return bn254::miller_loop(a, b);
    }
    GTElem pair_finish(const GTElem& acc) const { return bn254::final_exponentiation(acc); }

private:
    using G1Table = bn254::FixedBaseTable<bn254::detail::JacG1, bn254::G1>;
    using G2Table = bn254::FixedBaseTable<bn254::detail::JacG2, bn254::G2>;

    PrimeField field_;
    std::shared_ptr<G1Table> g1_table_;
    std::shared_ptr<G2Table> g2_table_;
};

/// Exponent-tracking model of a bilinear group: every element is its
/// discrete log. Satisfies all the algebraic identities of a pairing over
/// any prime field, so protocol equations can be checked clear-side.
class MockEngine {
public:
    explicit MockEngine(mpz_class order = mpz_class(bn254::kGroupOrderDec))
        : field_(std::move(order)) {
        g1.eng = this;
        g2.eng = this;
        gt.eng = this;
    }

    std::string curve_id() const { return "mock-" + field_.modulus().get_str(); }
    const PrimeField& field() const { return field_; }

    template <int Tag>
    struct Elem {
        mpz_class log;
        bool operator==(const Elem& o) const { return log == o.log; }
    };

    template <int Tag>
    struct Group {
        using Elem = MockEngine::Elem<Tag>;
        const MockEngine* eng;

        Elem generator() const { return {1}; }
        Elem identity() const { return {0}; }
        Elem op(const Elem& a, const Elem& b) const {
            ++op_counts.group_mul;
            mpz_class s = a.log + b.log;
            if (s >= eng->field_.modulus()) s -= eng->field_.modulus();
            return {s};
        }
        Elem inverse(const Elem& a) const {
            return {a.log == 0 ? mpz_class(0) : eng->field_.modulus() - a.log};
        }
        Elem exp(const Elem& a, const Scalar& k) const {
            ++op_counts.group_exp;
            return {a.log * k.value() % eng->field_.modulus()};
        }
        Elem exp_gen(const Scalar& k) const { return exp(generator(), k); }
        bool eq(const Elem& a, const Elem& b) const { return a.log == b.log; }
        bool valid(const Elem&) const { return true; }
        Bytes to_bytes(const Elem& a) const {
            return Scalar(a.log, &eng->field_).to_bytes();
        }
        Elem from_bytes(BytesView b) const { return {eng->field_.from_bytes(b).value()}; }
        size_t byte_width() const { return eng->field_.byte_width(); }
        Bytes to_bytes_compact(const Elem& a) const { return to_bytes(a); }
        Elem from_bytes_compact(BytesView b) const { return from_bytes(b); }
        size_t compact_byte_width() const { return byte_width(); }
    };

    using G1Group = Group<1>;
    using G2Group = Group<2>;
    using GTGroup = Group<3>;
    using G1Elem = G1Group::Elem;
    using G2Elem = G2Group::Elem;
    using GTElem = GTGroup::Elem;

    G1Group g1;
    G2Group g2;
    GTGroup gt;

    GTElem pair(const G1Elem& a, const G2Elem& b) const {
        ++op_counts.pairing;
        return {a.log * b.log % field_.modulus()};
    }
    GTElem pair_accumulate(const G1Elem& a, const G2Elem& b) const { return pair(a, b); }
    GTElem pair_finish(const GTElem& acc) const { return acc; }

private:
    PrimeField field_;
};

/// Symmetric-pairing adapter: carries every element in both source groups
/// (S-duplication), which gives the single-group interface the public
/// dynamic protocol is stated over while running on an asymmetric curve.
template <typename E>
class SymmetricEngine {
public:
    explicit SymmetricEngine(const E& base) : base_(&base) { g.eng = this; }

    const E& base() const { return *base_; }
    const PrimeField& field() const { return base_->field(); }
    std::string curve_id() const { return base_->curve_id() + "+symmetric"; }

    struct Dual {
        typename E::G1Elem a;
        typename E::G2Elem b;
    };

    struct Group {
        using Elem = Dual;
        const SymmetricEngine* eng;

        Elem generator() const {
            return {eng->base_->g1.generator(), eng->base_->g2.generator()};
        }
        Elem identity() const { return {eng->base_->g1.identity(), eng->base_->g2.identity()}; }
        Elem op(const Elem& x, const Elem& y) const {
            return {eng->base_->g1.op(x.a, y.a), eng->base_->g2.op(x.b, y.b)};
        }
        Elem inverse(const Elem& x) const {
            return {eng->base_->g1.inverse(x.a), eng->base_->g2.inverse(x.b)};
        }
        Elem exp(const Elem& x, const Scalar& k) const {
            return {eng->base_->g1.exp(x.a, k), eng->base_->g2.exp(x.b, k)};
        }
        Elem exp_gen(const Scalar& k) const {
            return {eng->base_->g1.exp_gen(k), eng->base_->g2.exp_gen(k)};
        }
        bool eq(const Elem& x, const Elem& y) const {
            return eng->base_->g1.eq(x.a, y.a) && eng->base_->g2.eq(x.b, y.b);
        }
        bool valid(const Elem& x) const {
            // both representations must encode the same exponent
            return eng->base_->g1.valid(x.a) && eng->base_->g2.valid(x.b) &&
                   eng->base_->pair(x.a, eng->base_->g2.generator()) ==
                       eng->base_->pair(eng->base_->g1.generator(), x.b);
        }
        Bytes to_bytes(const Elem& x) const {
            Bytes out = eng->base_->g1.to_bytes(x.a);
            append_bytes(out, eng->base_->g2.to_bytes(x.b));
            return out;
        }
        Elem from_bytes(BytesView bytes) const {
            size_t w1 = eng->base_->g1.byte_width();
            if (bytes.size() != w1 + eng->base_->g2.byte_width())
                throw std::runtime_error("bad dual element encoding");
            Elem x{eng->base_->g1.from_bytes(bytes.subspan(0, w1)),
                   eng->base_->g2.from_bytes(bytes.subspan(w1))};
            if (!valid(x)) throw std::runtime_error("inconsistent dual element");
            return x;
        }
        size_t byte_width() const {
            return eng->base_->g1.byte_width() + eng->base_->g2.byte_width();
        }
    };

    using GElem = Dual;
    using GTGroup = typename E::GTGroup;
    using GTElem = typename E::GTElem;

    Group g;
    const typename E::GTGroup& gt() const { return base_->gt; }

    GTElem pair(const Dual& x, const Dual& y) const { return base_->pair(x.a, y.b); }
    GTElem pair_accumulate(const Dual& x, const Dual& y) const {
        return base_->pair_accumulate(x.a, y.b);
    }
    GTElem pair_finish(const GTElem& acc) const { return base_->pair_finish(acc); }

private:
    const E* base_;
};

/// Dot-product in the exponents: prod h_i^{x_i}. Plain fold of
/// exponentiations; group elements have canonical representations, so any
/// evaluation order yields identical bytes.
template <typename Group>
typename Group::Elem dot_in_exponent(const Group& g,
                                     const std::vector<typename Group::Elem>& h,
                                     const std::vector<Scalar>& x) {
    if (h.size() != x.size())
        throw std::invalid_argument("dot_in_exponent: length mismatch");
    typename Group::Elem acc = g.identity();
    for (size_t i = 0; i < h.size(); ++i) acc = g.op(acc, g.exp(h[i], x[i]));
    return acc;
}

}  // namespace vpe
