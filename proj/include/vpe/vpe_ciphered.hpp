#pragma once

#include <optional>

#include "vpe/polyeval.hpp"

namespace vpe::ckzg {

// Static ciphered verifiable polynomial evaluation: the client keeps the
// secret evaluation point s and K = gT^{P(s)}; the server keeps the
// coefficient-wise encryption W = E(P) and the tail exponents
// H_k = g1^{T_{k,P}(s)}. One round: the server returns the homomorphic
// value and a group certificate, and the client checks one pairing
// equation.

template <typename E>
struct ClientState {
    lhe::PublicKey pk;
    lhe::SecretKey sk;
    Scalar secret_point;       // s
    typename E::GTElem key;    // K = gT^{P(s)}
    uint64_t degree = 0;
};

template <typename E>
struct ServerState {
    lhe::PublicKey pk;
    std::vector<lhe::Ciphertext> cipher_coeffs;       // W, length d+1
    std::vector<typename E::G1Elem> tail_exponents;   // H, length d
};

template <typename E>
struct Evaluation {
    lhe::Ciphertext value_cipher;        // zeta = E(P(r))
    typename E::G1Elem certificate;      // xi = g1^{Q_P(s, r)}
};

template <typename E>
std::pair<ClientState<E>, ServerState<E>> setup(const E& eng, const Polynomial& P,
                                                unsigned lhe_bits, RandomSource& rng,
                                                unsigned workers = 1) {
    if (P.degree() < 1) throw std::invalid_argument("ciphered VPE requires degree >= 1");
    const PrimeField& f = eng.field();
    if (P.field() != f) throw std::invalid_argument("polynomial field does not match engine");

    auto [pk, sk] = lhe::keygen(lhe_bits, rng);
    pk.check_dot_capacity(P.degree() + 1, f.modulus());

    ClientState<E> client;
    client.pk = pk;
    client.sk = sk;
    client.secret_point = f.random(rng);
    client.degree = P.degree();
    client.key = eng.gt.exp_gen(horner_eval(P, client.secret_point));

    ServerState<E> server;
    server.pk = pk;
    server.cipher_coeffs = lhe::encrypt_vector(pk, P.coeffs(), rng, workers);
    std::vector<Scalar> tails = subset_poly_tails(P, client.secret_point);
    server.tail_exponents.resize(tails.size());
    auto bounds = block_bounds(tails.size(), workers);
    detail::parallel_blocks(bounds.size() - 1, [&](size_t b) {
        for (size_t k = bounds[b]; k < bounds[b + 1]; ++k)
            server.tail_exponents[k] = eng.g1.exp_gen(tails[k]);
    });
    return {std::move(client), std::move(server)};
}

template <typename E>
Evaluation<E> eval(const E& eng, const ServerState<E>& server, const Scalar& r,
                   unsigned workers = 1) {
    Evaluation<E> out;
    out.value_cipher = lhe::ho_dotproduct(server.cipher_coeffs, r, workers);
    std::vector<Scalar> x = scalar_powers(r, server.tail_exponents.size() - 1);
    out.certificate = dot_in_exponent(eng.g1, server.tail_exponents, x);
    return out;
}

/// Accepts iff e(xi; g2^{s-r}) * gT^{D(zeta)} == K; returns P(r) on accept.
template <typename E>
std::optional<Scalar> verify(const E& eng, const ClientState<E>& client, const Scalar& r,
                             const Evaluation<E>& ev) {
    const PrimeField& f = eng.field();
    Scalar z = Scalar(client.sk.decrypt(ev.value_cipher) % f.modulus(), &f);
    auto lhs = eng.gt.op(eng.pair(ev.certificate, eng.g2.exp_gen(client.secret_point - r)),
                         eng.gt.exp_gen(z));
    if (!eng.gt.eq(lhs, client.key)) return std::nullopt;
    return z;
}

}  // namespace vpe::ckzg
