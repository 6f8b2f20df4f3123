#pragma once

#include <array>
#include <optional>

#include "vpe/merkle.hpp"
#include "vpe/polyeval.hpp"

namespace vpe::vespo {

// Private, dynamic, ciphered polynomial evaluation. Coefficients live on
// the server both encrypted (W, under a Merkle tree) and masked in the
// exponent as p_i * alpha + Phi^i * beta, which the DLM assumption makes
// indistinguishable from random. The client's audit work is logarithmic:
// one projected matrix geometric sum plus two pairing-equation checks.

inline constexpr int kMaxRedraws = 16;

template <typename E>
struct ClientState {
    lhe::PublicKey pk;
    lhe::SecretKey sk;
    Scalar secret_point;                              // s
    Vector2 mask_scale;                               // alpha, != (0,0)
    Vector2 mask_shift;                               // beta
    Matrix2 mask_matrix;                              // Phi, with sPhi - I invertible
    std::array<typename E::GTElem, 2> verification_key;  // K_bar
    merkle::Hash cipher_root;                         // r_W
    uint64_t degree = 0;
};

template <typename E>
struct ServerState {
    lhe::PublicKey pk;
    std::vector<lhe::Ciphertext> cipher_coeffs;                    // W, length d+1
    merkle::MerkleTree cipher_tree;                                // T_W
    std::vector<std::array<typename E::G1Elem, 2>> masked_coeffs;  // H_bar for X^1..X^d
    std::vector<typename E::G2Elem> secret_powers;                 // S = [g2^{s^k}], k < d
};

template <typename E>
struct Evaluation {
    lhe::Ciphertext value_cipher;                 // zeta
    std::array<typename E::GTElem, 2> certificate;  // xi_bar
};

/// Client challenge: the evaluation point plus the masked geometric sum
/// c = sum_{k=0}^{d} (r Phi)^k beta, computed in O(log d).
struct Challenge {
    Scalar point;  // r
    Vector2 mask_sum;  // c
};

struct UpdateRequest {
    uint64_t index;
    lhe::Ciphertext delta_cipher;  // E(delta)
};

template <typename E>
struct UpdateMask {
    std::array<typename E::G1Elem, 2> delta_mask;  // Delta = g1^{delta * alpha}
};

template <typename E>
struct UpdateResponse {
    lhe::Ciphertext old_cipher;  // w_i before the update
    merkle::LeafPath path;       // L_i
};

inline std::vector<Bytes> cipher_leaves(const std::vector<lhe::Ciphertext>& W) {
    std::vector<Bytes> leaves;
    leaves.reserve(W.size());
    for (const auto& w : W) leaves.push_back(w.to_bytes());
    return leaves;
}

/// Draw s (outside {0,1}) and Phi with s*Phi - I invertible; bounded
/// retries, then error.
inline std::pair<Scalar, Matrix2> draw_secret_and_mask(const PrimeField& f, RandomSource& rng) {
    for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
        Scalar s = f.random(rng);
        if (s.is_zero() || s == f.one()) continue;
        Matrix2 phi = Matrix2::random(f, rng);
        Matrix2 shifted = phi.scaled(s) - Matrix2::identity(f);
        if (!shifted.det().is_zero()) return {std::move(s), std::move(phi)};
    }
    throw std::runtime_error("could not draw an invertible masked secret after 16 tries");
}

/// Masked coefficient vector p_bar_i = p_i * alpha + Phi^i * beta for
/// i = 0..d.
inline std::vector<Vector2> mask_polynomial(const Polynomial& P, const Vector2& alpha,
                                            const Vector2& beta, const Matrix2& phi) {
    std::vector<Vector2> out;
    out.reserve(P.degree() + 1);
    Vector2 phi_pow = beta;  // Phi^i beta, starting at i = 0
    out.push_back(alpha.scaled(P[0]) + phi_pow);
    for (uint64_t i = 1; i <= P.degree(); ++i) {
        phi_pow = phi * phi_pow;
        out.push_back(alpha.scaled(P[i]) + phi_pow);
    }
    return out;
}

template <typename E>
std::pair<ClientState<E>, ServerState<E>> setup(const E& eng, const Polynomial& P,
                                                unsigned lhe_bits, RandomSource& rng,
                                                unsigned workers = 1) {
    if (P.degree() < 1) throw std::invalid_argument("vespo requires degree >= 1");
    const PrimeField& f = eng.field();
    if (P.field() != f) throw std::invalid_argument("polynomial field does not match engine");

    auto [pk, sk] = lhe::keygen(lhe_bits, rng);
    pk.check_dot_capacity(P.degree() + 1, f.modulus());

    ClientState<E> client;
    client.pk = pk;
    client.sk = sk;
    client.degree = P.degree();
    std::tie(client.secret_point, client.mask_matrix) = draw_secret_and_mask(f, rng);
    client.mask_scale = Vector2::random_nonzero(f, rng);
    client.mask_shift = Vector2::random(f, rng);

    // K_bar = gT^{P_bar(s)} with P_bar(s) = P(s) alpha + G(s Phi) beta
    Vector2 geo = pmgs(P.degree(), client.mask_matrix.scaled(client.secret_point),
                       client.mask_shift);
    Vector2 masked_eval = client.mask_scale.scaled(horner_eval(P, client.secret_point)) + geo;
    client.verification_key = {eng.gt.exp_gen(masked_eval.x), eng.gt.exp_gen(masked_eval.y)};

    ServerState<E> server;
    server.pk = pk;
    server.cipher_coeffs = lhe::encrypt_vector(pk, P.coeffs(), rng, workers);
    server.cipher_tree = merkle::MerkleTree(cipher_leaves(server.cipher_coeffs));
    client.cipher_root = server.cipher_tree.root();

    std::vector<Vector2> masked =
        mask_polynomial(P, client.mask_scale, client.mask_shift, client.mask_matrix);
    server.masked_coeffs.resize(P.degree());
    auto bounds = block_bounds(P.degree(), workers);
    detail::parallel_blocks(bounds.size() - 1, [&](size_t b) {
        for (size_t i = bounds[b]; i < bounds[b + 1]; ++i)
            server.masked_coeffs[i] = {eng.g1.exp_gen(masked[i + 1].x),
                                       eng.g1.exp_gen(masked[i + 1].y)};
    });

    std::vector<Scalar> pows = scalar_powers(client.secret_point, P.degree() - 1);
    server.secret_powers.resize(P.degree());
    detail::parallel_blocks(bounds.size() - 1, [&](size_t b) {
        for (size_t k = bounds[b]; k < bounds[b + 1]; ++k)
            server.secret_powers[k] = eng.g2.exp_gen(pows[k]);
    });
    return {std::move(client), std::move(server)};
}

/// Client side of Update(i, delta): delta must be nonzero (a zero update
/// leaks timing for no state change).
template <typename E>
std::pair<UpdateRequest, UpdateMask<E>> client_update_request(const E& eng,
                                                              const ClientState<E>& client,
                                                              uint64_t i, const Scalar& delta,
                                                              RandomSource& rng) {
    if (delta.is_zero()) throw std::invalid_argument("update delta must be nonzero");
    if (i > client.degree) throw std::out_of_range("coefficient index out of range");
    UpdateRequest req{i, client.pk.encrypt(delta.value(), rng)};
    UpdateMask<E> mask{{eng.g1.exp_gen(delta * client.mask_scale.x),
                        eng.g1.exp_gen(delta * client.mask_scale.y)}};
    return {std::move(req), std::move(mask)};
}

/// Server side of Update: reveal the old ciphertext and its uncles, then
/// fold E(delta) into W and Delta into the masked exponents.
template <typename E>
UpdateResponse<E> server_update(ServerState<E>& server, const UpdateRequest& req,
                                const UpdateMask<E>& mask, const E& eng) {
    if (req.index >= server.cipher_coeffs.size())
        throw std::out_of_range("coefficient index out of range");
    UpdateResponse<E> resp{server.cipher_coeffs[req.index],
                           server.cipher_tree.leaf_path(req.index)};
    server.cipher_coeffs[req.index] = server.cipher_coeffs[req.index].add(req.delta_cipher);
    server.cipher_tree.update_leaf(req.index, server.cipher_coeffs[req.index].to_bytes());
    if (req.index >= 1) {
        auto& h = server.masked_coeffs[req.index - 1];
        h = {eng.g1.op(h[0], mask.delta_mask[0]), eng.g1.op(h[1], mask.delta_mask[1])};
    }
    return resp;
}

/// Client finish: Merkle-check the revealed leaf, then roll r_W and
/// K_bar[j] *= e(Delta[j]^{s^i}; g2). Returns false and leaves the state
/// untouched when the stored root does not match the received element and
/// uncles.
template <typename E>
bool client_update_finish(const E& eng, ClientState<E>& client, uint64_t i,
                          const UpdateRequest& req, const UpdateMask<E>& mask,
                          const UpdateResponse<E>& resp) {
    if (merkle::mt_path_root(i, resp.old_cipher.to_bytes(), resp.path) != client.cipher_root)
        return false;
    lhe::Ciphertext updated = resp.old_cipher.add(req.delta_cipher);
    client.cipher_root = merkle::mt_path_root(i, updated.to_bytes(), resp.path);
    Scalar si = client.secret_point.pow(i);
    for (int j = 0; j < 2; ++j)
        client.verification_key[j] =
            eng.gt.op(eng.pair(eng.g1.exp(mask.delta_mask[j], si), eng.g2.generator()),
                      client.verification_key[j]);
    return true;
}

/// Audit challenge: r with r*Phi - I invertible (redrawn, bounded), and
/// the geometric mask sum c = G(r Phi) beta via PMGS.
template <typename E>
Challenge client_challenge(const ClientState<E>& client, RandomSource& rng) {
    const PrimeField& f = client.secret_point.field();
    for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
        Scalar r = f.random(rng);
        try {
            Vector2 c = pmgs(client.degree, client.mask_matrix.scaled(r), client.mask_shift);
            return {std::move(r), std::move(c)};
        } catch (const SingularMatrix&) {
            continue;  // r*Phi has eigenvalue 1; redraw
        }
    }
    throw std::runtime_error("could not draw an invertible challenge after 16 tries");
}

template <typename E>
Evaluation<E> server_eval(const E& eng, const ServerState<E>& server, const Scalar& r,
                          unsigned workers = 1) {
    auto [zeta, xi] = server_eval_ciphered(eng, server.cipher_coeffs, server.masked_coeffs,
                                           server.secret_powers, r, workers);
    return {std::move(zeta), std::move(xi)};
}

/// Accepts iff xi_bar[j]^{s-r} * gT^{z*alpha[j] + c[j]} == K_bar[j] for
/// both components; returns z = P(r) on accept.
template <typename E>
std::optional<Scalar> client_verify(const E& eng, const ClientState<E>& client,
                                    const Challenge& ch, const Evaluation<E>& ev) {
    const PrimeField& f = eng.field();
    Scalar z = Scalar(client.sk.decrypt(ev.value_cipher) % f.modulus(), &f);
    Scalar shift = client.secret_point - ch.point;
    const Scalar* c[2] = {&ch.mask_sum.x, &ch.mask_sum.y};
    const Scalar* alpha[2] = {&client.mask_scale.x, &client.mask_scale.y};
    for (int j = 0; j < 2; ++j) {
        auto lhs = eng.gt.op(eng.gt.exp(ev.certificate[j], shift),
                             eng.gt.exp_gen(z * *alpha[j] + *c[j]));
        if (!eng.gt.eq(lhs, client.verification_key[j])) return std::nullopt;
    }
    return z;
}

}  // namespace vpe::vespo
