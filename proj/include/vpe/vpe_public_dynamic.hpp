#pragma once

#include <optional>

#include "vpe/merkle.hpp"
#include "vpe/polyeval.hpp"

namespace vpe::pubdyn {

// Publicly verifiable dynamic evaluation of an unciphered polynomial.
// The server stores P in clear under a Merkle tree plus the published
// powers S = [g^{s^k}]; anyone holding the bulletin pair (K1, K2) can
// check evaluations, and single-coefficient updates cost O(log d) for the
// client. Stated over a symmetric pairing, realized here by the dual
// adapter of SymmetricEngine.

template <typename E>
using Sym = SymmetricEngine<E>;

/// Public bulletin state: no secrets, safe to hand to any reader.
template <typename E>
struct VerifierState {
    typename E::GTElem key_value;       // K1 = e(g^{P(s)}; g)
    typename Sym<E>::GElem key_point;   // K2 = g^s
    uint64_t version = 0;
};

template <typename E>
struct ClientState {
    Scalar secret_point;     // s
    merkle::Hash coeff_root; // r_P
    uint64_t degree = 0;
};

template <typename E>
struct ServerState {
    std::vector<Scalar> coeffs;                      // P, length d+1
    merkle::MerkleTree tree;                         // T_P
    std::vector<typename Sym<E>::GElem> secret_powers;  // S, length d
};

template <typename E>
struct Evaluation {
    Scalar value;                       // zeta = P(r)
    typename Sym<E>::GElem certificate; // xi = g^{Q_P(s, r)}
};

template <typename E>
struct UpdateResponse {
    Scalar old_coeff;       // p_i before the update
    merkle::LeafPath path;  // L_i
};

inline std::vector<Bytes> coeff_leaves(const std::vector<Scalar>& coeffs) {
    std::vector<Bytes> leaves;
    leaves.reserve(coeffs.size());
    for (const auto& c : coeffs) leaves.push_back(c.to_bytes());
    return leaves;
}

template <typename E>
std::tuple<ClientState<E>, VerifierState<E>, ServerState<E>> setup(const Sym<E>& sym,
                                                                   const Polynomial& P,
                                                                   RandomSource& rng) {
    const PrimeField& f = sym.field();
    if (P.field() != f) throw std::invalid_argument("polynomial field does not match engine");

    ClientState<E> client;
    client.secret_point = f.random(rng);
    client.degree = P.degree();

    ServerState<E> server;
    server.coeffs = P.coeffs();
    server.tree = merkle::MerkleTree(coeff_leaves(server.coeffs));
    client.coeff_root = server.tree.root();

    std::vector<Scalar> pows = scalar_powers(client.secret_point, P.degree());
    server.secret_powers.reserve(P.degree());
    for (uint64_t k = 0; k + 1 <= P.degree(); ++k)
        server.secret_powers.push_back(sym.g.exp_gen(pows[k]));

    VerifierState<E> verifier;
    verifier.key_value = sym.pair(sym.g.exp_gen(horner_eval(P, client.secret_point)),
                                  sym.g.generator());
    verifier.key_point = sym.g.exp_gen(client.secret_point);
    verifier.version = 0;
    return {std::move(client), std::move(verifier), std::move(server)};
}

/// Server half of an update: reveal the old coefficient with its uncles,
/// then apply p_i += delta.
template <typename E>
UpdateResponse<E> server_update(ServerState<E>& server, uint64_t i, const Scalar& delta) {
    if (i >= server.coeffs.size()) throw std::out_of_range("coefficient index out of range");
    UpdateResponse<E> resp{server.coeffs[i], server.tree.leaf_path(i)};
    server.coeffs[i] += delta;
    server.tree.update_leaf(i, server.coeffs[i].to_bytes());
    return resp;
}

/// Client half: checks the revealed leaf against the stored root, rolls the
/// root forward and re-publishes K1. Returns false (client state untouched)
/// when the Merkle check fails.
template <typename E>
bool client_update(const Sym<E>& sym, ClientState<E>& client, VerifierState<E>& verifier,
                   uint64_t i, const Scalar& delta, const UpdateResponse<E>& resp) {
    if (merkle::mt_path_root(i, resp.old_coeff.to_bytes(), resp.path) != client.coeff_root)
        return false;
    client.coeff_root = merkle::mt_path_root(i, (resp.old_coeff + delta).to_bytes(), resp.path);
    // K1 <- K1 * e(g^{s^i * delta}; g)
    Scalar si = client.secret_point.pow(i);
    verifier.key_value = sym.gt().op(
        verifier.key_value, sym.pair(sym.g.exp_gen(si * delta), sym.g.generator()));
    ++verifier.version;
    return true;
}

template <typename E>
Evaluation<E> eval(const Sym<E>& sym, const ServerState<E>& server, const Scalar& r,
                   unsigned workers = 1) {
    Evaluation<E> out{horner_eval(Polynomial(server.coeffs, &sym.field()), r),
                      sym.g.identity()};
    std::vector<Scalar> tail(server.coeffs.begin() + 1, server.coeffs.end());
    out.certificate = prefix_xi(sym.g, r, server.secret_powers, tail, workers);
    return out;
}

/// Public verification: e(xi; K2 / g^r) * e(g^zeta; g) == K1. Consumes
/// only the bulletin state; the client secret never appears.
template <typename E>
std::optional<Scalar> verify(const Sym<E>& sym, const VerifierState<E>& verifier,
                             const Scalar& r, const Evaluation<E>& ev) {
    auto shifted = sym.g.op(verifier.key_point, sym.g.inverse(sym.g.exp_gen(r)));
    auto lhs = sym.gt().op(sym.pair(ev.certificate, shifted),
                           sym.pair(sym.g.exp_gen(ev.value), sym.g.generator()));
    if (!sym.gt().eq(lhs, verifier.key_value)) return std::nullopt;
    return ev.value;
}

}  // namespace vpe::pubdyn
