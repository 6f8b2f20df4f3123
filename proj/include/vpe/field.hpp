#pragma once

#include <gmpxx.h>

#include <cassert>
#include <cstddef>
#include <stdexcept>
#include <string>

#include "vpe/bytes.hpp"
#include "vpe/opcount.hpp"
#include "vpe/rng.hpp"

namespace vpe {

class Scalar;

/// Prime field Z_p with a runtime modulus. All protocol scalars live in the
/// pairing-group order; toy moduli (e.g. 101) are used by algebra-only tests.
class PrimeField {
public:
    explicit PrimeField(mpz_class p) : p_(std::move(p)) {
        if (p_ < 2 || mpz_probab_prime_p(p_.get_mpz_t(), 30) == 0)
            throw std::invalid_argument("field modulus must be prime");
        byte_width_ = (mpz_sizeinbase(p_.get_mpz_t(), 2) + 7) / 8;
    }

    explicit PrimeField(const std::string& p_dec) : PrimeField(mpz_class(p_dec)) {}

    const mpz_class& modulus() const { return p_; }
    size_t bit_width() const { return mpz_sizeinbase(p_.get_mpz_t(), 2); }

    /// Canonical encoding width: ceil(log2 p / 8) bytes, big-endian.
    size_t byte_width() const { return byte_width_; }

    bool operator==(const PrimeField& o) const { return p_ == o.p_; }
    bool operator!=(const PrimeField& o) const { return p_ != o.p_; }

    Scalar make(mpz_class v) const;
    Scalar make(long v) const;
    Scalar zero() const;
    Scalar one() const;
    Scalar random(RandomSource& rng) const;

    /// Uniform nonzero element.
    Scalar random_nonzero(RandomSource& rng) const;

    Scalar from_bytes(BytesView b) const;

private:
    mpz_class p_;
    size_t byte_width_;
};

/// An element of Z_p. Keeps a pointer to its field; arithmetic between
/// elements of different fields is a programming error.
class Scalar {
public:
    Scalar() : f_(nullptr) {}
    Scalar(mpz_class v, const PrimeField* f) : v_(std::move(v)), f_(f) {
        mpz_fdiv_r(v_.get_mpz_t(), v_.get_mpz_t(), f->modulus().get_mpz_t());
    }

    const mpz_class& value() const { return v_; }
    const PrimeField& field() const { return *f_; }
    bool is_zero() const { return v_ == 0; }

    Scalar operator+(const Scalar& o) const {
        check(o);
        mpz_class r = v_ + o.v_;
        if (r >= f_->modulus()) r -= f_->modulus();
        return raw(std::move(r), f_);
    }

    Scalar operator-(const Scalar& o) const {
        check(o);
        mpz_class r = v_ - o.v_;
        if (r < 0) r += f_->modulus();
        return raw(std::move(r), f_);
    }

    Scalar operator-() const {
        if (v_ == 0) return *this;
        return raw(f_->modulus() - v_, f_);
    }

    Scalar operator*(const Scalar& o) const {
        check(o);
        ++op_counts.field_mul;
        mpz_class r = v_ * o.v_;
        mpz_fdiv_r(r.get_mpz_t(), r.get_mpz_t(), f_->modulus().get_mpz_t());
        return raw(std::move(r), f_);
    }

    Scalar& operator+=(const Scalar& o) { return *this = *this + o; }
    Scalar& operator-=(const Scalar& o) { return *this = *this - o; }
    Scalar& operator*=(const Scalar& o) { return *this = *this * o; }

    /// Multiplicative inverse; throws on zero.
    Scalar inverse() const {
        if (v_ == 0) throw std::domain_error("inverse of zero");
        ++op_counts.field_mul;
        mpz_class r;
        mpz_invert(r.get_mpz_t(), v_.get_mpz_t(), f_->modulus().get_mpz_t());
        return raw(std::move(r), f_);
    }

    Scalar pow(const mpz_class& e) const {
        mpz_class r;
        mpz_powm(r.get_mpz_t(), v_.get_mpz_t(), e.get_mpz_t(), f_->modulus().get_mpz_t());
        op_counts.field_mul += mpz_sizeinbase(e.get_mpz_t(), 2);
        return raw(std::move(r), f_);
    }

    Scalar pow(unsigned long e) const { return pow(mpz_class(e)); }

    bool operator==(const Scalar& o) const { return f_ == o.f_ ? v_ == o.v_ : (check(o), v_ == o.v_); }
    bool operator!=(const Scalar& o) const { return !(*this == o); }

    /// Fixed-width big-endian encoding (field byte width).
    Bytes to_bytes() const {
        Bytes out(f_->byte_width(), 0);
        size_t count = 0;
        mpz_export(out.data(), &count, 1, 1, 1, 0, v_.get_mpz_t());
        if (count < out.size()) {
            // mpz_export writes from the front; shift right for fixed width
            std::memmove(out.data() + (out.size() - count), out.data(), count);
            std::memset(out.data(), 0, out.size() - count);
        }
        return out;
    }

    static Scalar raw(mpz_class v, const PrimeField* f) {
        Scalar s;
        s.v_ = std::move(v);
        s.f_ = f;
        return s;
    }

private:
    void check(const Scalar& o) const {
        if (f_ != o.f_ && *f_ != *o.f_)
            throw std::logic_error("scalar arithmetic across distinct fields");
    }

    mpz_class v_;
    const PrimeField* f_;
};

inline Scalar PrimeField::make(mpz_class v) const { return Scalar(std::move(v), this); }
inline Scalar PrimeField::make(long v) const { return Scalar(mpz_class(v), this); }
inline Scalar PrimeField::zero() const { return Scalar::raw(0, this); }
inline Scalar PrimeField::one() const { return make(1); }

inline Scalar PrimeField::random(RandomSource& rng) const {
    return Scalar::raw(rng.below(p_), this);
}

inline Scalar PrimeField::random_nonzero(RandomSource& rng) const {
    mpz_class v;
    do {
        v = rng.below(p_);
    } while (v == 0);
    return Scalar::raw(std::move(v), this);
}

inline Scalar PrimeField::from_bytes(BytesView b) const {
    if (b.size() != byte_width_) throw std::runtime_error("scalar encoding has wrong width");
    mpz_class v;
    mpz_import(v.get_mpz_t(), b.size(), 1, 1, 1, 0, b.data());
    if (v >= p_) throw std::runtime_error("scalar encoding out of range");
    return Scalar::raw(std::move(v), this);
}

}  // namespace vpe
