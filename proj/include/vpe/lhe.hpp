#pragma once

#include <gmpxx.h>

#include <cstdlib>
#include <memory>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "vpe/bytes.hpp"
#include "vpe/field.hpp"
#include "vpe/opcount.hpp"
#include "vpe/rng.hpp"

namespace vpe::lhe {

/// Raised when a configuration violates the homomorphic dot-product
/// capacity precondition (d+1)(m-1)^2 < N.
struct CapacityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr const char* kSchemeTag = "paillier-v1";
inline constexpr unsigned kProductionMinBits = 2048;

inline bool test_mode() {
    const char* v = std::getenv("VESPO_TEST_MODE");
    return v != nullptr && *v != '\0' && std::string(v) != "0";
}

namespace detail {

struct KeyData {
    mpz_class n;        // modulus
    mpz_class n2;       // n^2
    unsigned bits = 0;  // requested modulus size

    // secret half (empty for public keys)
    mpz_class p, q;
    mpz_class p2, q2;          // p^2, q^2
    mpz_class hp, hq;          // decryption helpers
    mpz_class q2_inv_p2;       // q^2^{-1} mod p^2 (CRT for ciphertext ops)
    mpz_class q_inv_p;         // q^{-1} mod p
    bool has_secret = false;
};

inline mpz_class powm(const mpz_class& b, const mpz_class& e, const mpz_class& m) {
    mpz_class r;
    mpz_powm(r.get_mpz_t(), b.get_mpz_t(), e.get_mpz_t(), m.get_mpz_t());
    return r;
}

/// rho^n mod n^2, via CRT when the factorization is known.
inline mpz_class pow_n(const KeyData& k, const mpz_class& rho) {
    if (!k.has_secret) return powm(rho, k.n, k.n2);
    mpz_class ep = k.n % (k.p2 - k.p);  // reduce mod ord(Z_{p^2}^*) = p(p-1)
    mpz_class eq = k.n % (k.q2 - k.q);
    mpz_class rp = powm(rho % k.p2, ep, k.p2);
    mpz_class rq = powm(rho % k.q2, eq, k.q2);
    mpz_class r = rq + k.q2 * (((rp - rq) * k.q2_inv_p2) % k.p2);
    r %= k.n2;
    if (r < 0) r += k.n2;
    return r;
}

}  // namespace detail

class Ciphertext;

class PublicKey {
public:
    PublicKey() = default;
    explicit PublicKey(std::shared_ptr<const detail::KeyData> d) : data_(std::move(d)) {}

    const mpz_class& modulus() const { return data_->n; }
    const mpz_class& modulus_squared() const { return data_->n2; }
    unsigned bits() const { return data_->bits; }
    bool valid() const { return data_ != nullptr; }

    Ciphertext encrypt(const mpz_class& m, RandomSource& rng) const;

    /// Throws CapacityError unless (count)(plain_mod - 1)^2 < N.
    void check_dot_capacity(uint64_t count, const mpz_class& plain_mod) const {
        mpz_class bound = (plain_mod - 1) * (plain_mod - 1) * count;
        if (bound >= data_->n)
            throw CapacityError(
                "homomorphic dot-product capacity violated: need (d+1)(m-1)^2 < N "
                "(d+1=" + std::to_string(count) + ", N bits=" + std::to_string(bits()) + ")");
    }

    Bytes to_bytes() const {
        Bytes out;
        append_u32(out, data_->bits);
        mpz_class n = data_->n;
        append_mpz(out, n);
        return out;
    }

    static PublicKey from_bytes(BytesView b) {
        ByteReader r(b);
        auto d = std::make_shared<detail::KeyData>();
        d->bits = r.u32();
        d->n = read_mpz(r);
        d->n2 = d->n * d->n;
        if (!r.done()) throw std::runtime_error("trailing bytes in public key");
        return PublicKey(std::move(d));
    }

    bool same_key(const PublicKey& o) const { return data_->n == o.data_->n; }

    const detail::KeyData& data() const { return *data_; }

    static void append_mpz(Bytes& out, const mpz_class& v) {
        size_t words = (mpz_sizeinbase(v.get_mpz_t(), 2) + 7) / 8;
        Bytes buf(words ? words : 1, 0);
        size_t count = 0;
        mpz_export(buf.data(), &count, 1, 1, 1, 0, v.get_mpz_t());
        append_u32(out, uint32_t(count));
        out.insert(out.end(), buf.begin(), buf.begin() + count);
    }

    static mpz_class read_mpz(ByteReader& r) {
        uint32_t len = r.u32();
        auto bytes = r.take(len);
        mpz_class v;
        if (len) mpz_import(v.get_mpz_t(), len, 1, 1, 1, 0, bytes.data());
        return v;
    }

protected:
    std::shared_ptr<const detail::KeyData> data_;
    friend class Ciphertext;
};

class SecretKey : public PublicKey {
public:
    SecretKey() = default;
    explicit SecretKey(std::shared_ptr<const detail::KeyData> d) : PublicKey(std::move(d)) {}

    mpz_class decrypt(const Ciphertext& c) const;

    Bytes to_bytes() const {
        Bytes out;
        append_u32(out, data_->bits);
        append_mpz(out, data_->n);
        append_mpz(out, data_->p);
        append_mpz(out, data_->q);
        return out;
    }

    static SecretKey from_bytes(BytesView b);
};

/// Paillier ciphertext: a residue modulo N^2 tagged with its key.
class Ciphertext {
public:
    Ciphertext() = default;
    Ciphertext(mpz_class v, PublicKey key) : v_(std::move(v)), key_(std::move(key)) {}

    const mpz_class& value() const { return v_; }
    const PublicKey& key() const { return key_; }

    /// Homomorphic addition of plaintexts: D(a*b) = D(a) + D(b) mod N.
    Ciphertext add(const Ciphertext& o) const {
        if (!key_.same_key(o.key_)) throw std::invalid_argument("ciphertext key mismatch");
        ++op_counts.group_mul;
        return Ciphertext(v_ * o.v_ % key_.modulus_squared(), key_);
    }

    /// Plaintext scaling: D(c^k) = k * D(c) mod N. Requires k >= 0.
    Ciphertext scale(const mpz_class& k) const {
        if (k < 0) throw std::invalid_argument("ciphertext scale factor must be >= 0");
        ++op_counts.group_exp;
        return Ciphertext(detail::powm(v_, k, key_.modulus_squared()), key_);
    }

    bool operator==(const Ciphertext& o) const { return v_ == o.v_; }

    Bytes to_bytes() const {
        Bytes out;
        PublicKey::append_mpz(out, v_);
        return out;
    }

    static Ciphertext from_bytes(ByteReader& r, const PublicKey& key) {
        mpz_class v = PublicKey::read_mpz(r);
        if (v <= 0 || v >= key.modulus_squared())
            throw std::runtime_error("ciphertext out of range");
        return Ciphertext(std::move(v), key);
    }

private:
    mpz_class v_;
    PublicKey key_;
};

inline Ciphertext PublicKey::encrypt(const mpz_class& m, RandomSource& rng) const {
    if (m < 0 || m >= data_->n) throw std::invalid_argument("plaintext out of range");
    mpz_class rho;
    do {
        rho = rng.below(data_->n);
    } while (rho == 0 || gcd(rho, data_->n) != 1);
    mpz_class c = (1 + m * data_->n) % data_->n2;
    c = c * detail::pow_n(*data_, rho) % data_->n2;
    return Ciphertext(std::move(c), *this);
}

inline mpz_class SecretKey::decrypt(const Ciphertext& c) const {
    if (!c.key().same_key(*this)) throw std::invalid_argument("ciphertext key mismatch");
    if (!data_->has_secret) throw std::logic_error("decrypt requires the secret key");
    const auto& k = *data_;
    // CRT decryption: dp = L_p(c^{p-1} mod p^2) * hp mod p, same for q
    mpz_class cp = detail::powm(c.value() % k.p2, k.p - 1, k.p2);
    mpz_class dp = ((cp - 1) / k.p) * k.hp % k.p;
    mpz_class cq = detail::powm(c.value() % k.q2, k.q - 1, k.q2);
    mpz_class dq = ((cq - 1) / k.q) * k.hq % k.q;
    mpz_class m = dq + k.q * (((dp - dq) * k.q_inv_p) % k.p);
    m %= k.n;
    if (m < 0) m += k.n;
    return m;
}

namespace detail {

inline mpz_class random_prime(unsigned bits, RandomSource& rng) {
    mpz_class cand;
    do {
        cand = rng.bits(bits);
        mpz_setbit(cand.get_mpz_t(), bits - 1);  // keep the width
        mpz_setbit(cand.get_mpz_t(), 0);
        mpz_class next;
        mpz_nextprime(next.get_mpz_t(), cand.get_mpz_t());
        cand = next;
    } while (mpz_sizeinbase(cand.get_mpz_t(), 2) != bits);
    return cand;
}

inline void finish_secret(KeyData& d) {
    d.n = d.p * d.q;
    d.n2 = d.n * d.n;
    d.p2 = d.p * d.p;
    d.q2 = d.q * d.q;
    d.has_secret = true;
    // hp = L_p((1+N)^{p-1} mod p^2)^{-1} mod p; (1+N)^{p-1} = 1 + (p-1)N mod p^2
    mpz_class gp = (1 + (d.p - 1) * d.n) % d.p2;
    mpz_class lp = (gp - 1) / d.p;
    mpz_invert(d.hp.get_mpz_t(), lp.get_mpz_t(), d.p.get_mpz_t());
    mpz_class gq = (1 + (d.q - 1) * d.n) % d.q2;
    mpz_class lq = (gq - 1) / d.q;
    mpz_invert(d.hq.get_mpz_t(), lq.get_mpz_t(), d.q.get_mpz_t());
    mpz_invert(d.q2_inv_p2.get_mpz_t(), d.q2.get_mpz_t(), d.p2.get_mpz_t());
    mpz_invert(d.q_inv_p.get_mpz_t(), d.q.get_mpz_t(), d.p.get_mpz_t());
}

}  // namespace detail

/// Key generation. Production mode requires bits >= 2048; set
/// VESPO_TEST_MODE to relax the floor for fast test keys.
inline std::pair<PublicKey, SecretKey> keygen(unsigned bits, RandomSource& rng) {
    if (bits < kProductionMinBits && !test_mode())
        throw std::invalid_argument("paillier modulus below 2048 bits requires VESPO_TEST_MODE");
    if (bits < 16) throw std::invalid_argument("paillier modulus unreasonably small");

    auto d = std::make_shared<detail::KeyData>();
    d->bits = bits;
    do {
        d->p = detail::random_prime(bits / 2, rng);
        do {
            d->q = detail::random_prime(bits - bits / 2, rng);
        } while (d->q == d->p);
        d->n = d->p * d->q;
    } while (mpz_sizeinbase(d->n.get_mpz_t(), 2) != bits);
    detail::finish_secret(*d);

    auto pub = std::make_shared<detail::KeyData>();
    pub->n = d->n;
    pub->n2 = d->n2;
    pub->bits = bits;
    return {PublicKey(std::move(pub)), SecretKey(std::move(d))};
}

inline SecretKey SecretKey::from_bytes(BytesView b) {
    ByteReader r(b);
    auto d = std::make_shared<detail::KeyData>();
    d->bits = r.u32();
    mpz_class n = PublicKey::read_mpz(r);
    d->p = PublicKey::read_mpz(r);
    d->q = PublicKey::read_mpz(r);
    if (!r.done()) throw std::runtime_error("trailing bytes in secret key");
    detail::finish_secret(*d);
    if (d->n != n) throw std::runtime_error("secret key factors do not match modulus");
    return SecretKey(std::move(d));
}

/// Coefficient-wise encryption of a scalar vector (the outsourced W).
inline std::vector<Ciphertext> encrypt_vector(const PublicKey& pk,
                                              const std::vector<Scalar>& values,
                                              RandomSource& rng, unsigned workers = 1) {
    std::vector<Ciphertext> out(values.size());
    if (workers <= 1 || values.size() < 8) {
        for (size_t i = 0; i < values.size(); ++i) out[i] = pk.encrypt(values[i].value(), rng);
        return out;
    }
    // Pre-draw randomness sequentially so output is independent of the split.
    std::vector<mpz_class> noise(values.size());
    for (auto& rho : noise) {
        do {
            rho = rng.below(pk.modulus());
        } while (rho == 0 || gcd(rho, pk.modulus()) != 1);
    }
    size_t per = (values.size() + workers - 1) / workers;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        size_t lo = w * per, hi = std::min(values.size(), lo + per);
        if (lo >= hi) break;
        pool.emplace_back([&, lo, hi] {
            for (size_t i = lo; i < hi; ++i) {
                mpz_class c = (1 + values[i].value() * pk.modulus()) % pk.modulus_squared();
                c = c * detail::pow_n(pk.data(), noise[i]) % pk.modulus_squared();
                out[i] = Ciphertext(std::move(c), pk);
            }
        });
    }
    for (auto& t : pool) t.join();
    return out;
}

/// Homomorphic modular polynomial evaluation with a plaintext modulus m
/// that differs from N: returns c with D(c) mod m = sum p_i r^i mod m.
/// Exponents are reduced mod m at every step so the integer accumulator
/// stays below N; the capacity precondition (d+1)(m-1)^2 < N is enforced
/// up front.
inline Ciphertext ho_dotproduct(const std::vector<Ciphertext>& W, const Scalar& r,
                                unsigned workers = 1) {
    if (W.empty()) throw std::invalid_argument("ho_dotproduct: empty ciphertext vector");
    const PublicKey& pk = W.front().key();
    const mpz_class& m = r.field().modulus();
    pk.check_dot_capacity(W.size(), m);

    const mpz_class& n2 = pk.modulus_squared();
    size_t d = W.size() - 1;

    auto block = [&](size_t lo, size_t hi, const mpz_class& x_lo) {
        // partial product over [lo, hi): W[lo]^{x_lo} * ... with x_{i} = x_{i-1} r mod m
        mpz_class x = x_lo;
        mpz_class acc = detail::powm(W[lo].value(), x, n2);
        for (size_t i = lo + 1; i < hi; ++i) {
            x = x * r.value() % m;
            acc = acc * detail::powm(W[i].value(), x, n2) % n2;
        }
        op_counts.group_exp += hi - lo;
        op_counts.group_mul += hi - lo;
        return acc;
    };

    mpz_class total;
    if (workers <= 1 || W.size() < 16) {
        total = block(0, d + 1, mpz_class(1));
    } else {
        size_t q = std::min<size_t>(workers, d + 1);
        size_t base = (d + 1) / q, rem = (d + 1) % q;
        std::vector<size_t> bounds(q + 1, 0);
        for (size_t k = 1; k <= q; ++k) bounds[k] = bounds[k - 1] + base + (k <= rem ? 1 : 0);
        // seed exponents r^{b_k} mod m
        std::vector<mpz_class> seeds(q);
        seeds[0] = 1;
        mpz_class rpow;
        for (size_t k = 1; k < q; ++k) {
            mpz_powm_ui(rpow.get_mpz_t(), r.value().get_mpz_t(),
                        (unsigned long)bounds[k], m.get_mpz_t());
            seeds[k] = rpow;
        }
        std::vector<mpz_class> partial(q);
        std::vector<std::thread> pool;
        std::vector<OpCounts> worker_counts(q);
        for (size_t k = 0; k < q; ++k) {
            pool.emplace_back([&, k] {
                partial[k] = block(bounds[k], bounds[k + 1], seeds[k]);
                worker_counts[k] = op_counts;  // thread-local: only this block's cost
            });
        }
        for (auto& t : pool) t.join();
        for (const auto& wc : worker_counts) op_counts += wc;
        total = partial[0];
        for (size_t k = 1; k < q; ++k) total = total * partial[k] % n2;
    }
    return Ciphertext(std::move(total), pk);
}

}  // namespace vpe::lhe
