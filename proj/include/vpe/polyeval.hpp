#pragma once

#include <array>
#include <thread>
#include <vector>

#include "vpe/algebra.hpp"
#include "vpe/lhe.hpp"
#include "vpe/pairing.hpp"
#include "vpe/polynomial.hpp"

namespace vpe {

/// Block boundaries for n items over q blocks: the first (n mod q) blocks
/// get one extra item. Returns q+1 offsets with bounds[0] = 0,
/// bounds[q] = n.
inline std::vector<size_t> block_bounds(size_t n, size_t q) {
    q = std::max<size_t>(1, std::min(q, n ? n : 1));
    size_t base = n / q, rem = n % q;
    std::vector<size_t> bounds(q + 1, 0);
    for (size_t k = 1; k <= q; ++k) bounds[k] = bounds[k - 1] + base + (k <= rem ? 1 : 0);
    return bounds;
}

namespace detail {

/// Runs fn(k) for k = 0..nblocks-1 on one thread per block, then folds the
/// workers' operation counters back into the caller's.
template <typename Fn>
void parallel_blocks(size_t nblocks, Fn&& fn) {
    if (nblocks <= 1) {
        if (nblocks == 1) fn(0);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<OpCounts> counts(nblocks);
    pool.reserve(nblocks);
    for (size_t k = 0; k < nblocks; ++k) {
        pool.emplace_back([&fn, &counts, k] {
            fn(k);
            counts[k] = op_counts;
        });
    }
    for (auto& t : pool) t.join();
    for (const auto& c : counts) op_counts += c;
}

}  // namespace detail

/// Prefix chain u_i = prod_{k=0}^{i} S_{i-k}^{r^k} for i = 0..|S|-1
/// (PHASE C of the parallel server evaluation). With q > 1, block seeds
/// are computed by giant steps u_{b_k} = u_{b_{k-1}}^{r^{b_k - b_{k-1}}} *
/// prod S_i^{r^{b_k - i}}, then blocks advance independently. Values are
/// identical for every q.
template <typename Group>
std::vector<typename Group::Elem> prefix_chain(const Group& g, const Scalar& r,
                                               const std::vector<typename Group::Elem>& S,
                                               size_t q = 1) {
    using Elem = typename Group::Elem;
    size_t n = S.size();
    std::vector<Elem> u(n);
    if (n == 0) return u;
    u[0] = S[0];

    if (q <= 1 || n < 4) {
        for (size_t i = 1; i < n; ++i) u[i] = g.op(S[i], g.exp(u[i - 1], r));
        return u;
    }

    auto bounds = block_bounds(n, q);
    size_t nblocks = bounds.size() - 1;
    std::vector<Scalar> rho = scalar_powers(r, n - 1);

    // giant-step seeds at block starts: the inner products
    // prod_{i=b_{k-1}+1}^{b_k} S_i^{r^{b_k - i}} do not depend on u, so they
    // run in parallel; stitching in u_{b_{k-1}}^{r^{b_k - b_{k-1}}} is a
    // short sequential pass.
    std::vector<Elem> seed_prod(nblocks, g.identity());
    detail::parallel_blocks(nblocks - 1, [&](size_t j) {
        size_t k = j + 1;
        size_t prev = bounds[k - 1], cur = bounds[k];
        Elem acc = g.identity();
        for (size_t i = prev + 1; i <= cur; ++i)
            acc = g.op(acc, g.exp(S[i], rho[cur - i]));
        seed_prod[k] = acc;
    });
    for (size_t k = 1; k < nblocks; ++k) {
        size_t prev = bounds[k - 1], cur = bounds[k];
        u[cur] = g.op(g.exp(u[prev], rho[cur - prev]), seed_prod[k]);
    }

    detail::parallel_blocks(nblocks, [&](size_t k) {
        for (size_t i = bounds[k] + 1; i < bounds[k + 1]; ++i)
            u[i] = g.op(S[i], g.exp(u[i - 1], r));
    });
    return u;
}

/// Homomorphic linear prefix evaluation of the difference polynomial:
/// xi = prod_{i=1}^{d} t_i^{c_i} with t_i = prod_{k=0}^{i-1} S_{i-k-1}^{r^k},
/// where c_i are the polynomial coefficients p_1..p_d (passed with index 0
/// holding p_1). Sequential mode runs the Horner-like recurrence with
/// exactly 2d exponentiations and 2d multiplications.
template <typename Group>
typename Group::Elem prefix_xi(const Group& g, const Scalar& r,
                               const std::vector<typename Group::Elem>& S,
                               const std::vector<Scalar>& coeffs, size_t q = 1) {
    if (S.size() != coeffs.size())
        throw std::invalid_argument("prefix_xi: |S| and |coeffs| must match");
    using Elem = typename Group::Elem;
    size_t d = S.size();
    if (d == 0) return g.identity();

    if (q <= 1 || d < 4) {
        Elem xi = g.identity();
        Elem t = g.identity();
        for (size_t i = 0; i < d; ++i) {
            t = g.op(S[i], g.exp(t, r));
            xi = g.op(xi, g.exp(t, coeffs[i]));
        }
        return xi;
    }

    std::vector<Elem> u = prefix_chain(g, r, S, q);
    auto bounds = block_bounds(d, q);
    size_t nblocks = bounds.size() - 1;
    std::vector<Elem> partial(nblocks, g.identity());
    detail::parallel_blocks(nblocks, [&](size_t k) {
        Elem acc = g.identity();
        for (size_t i = bounds[k]; i < bounds[k + 1]; ++i)
            acc = g.op(acc, g.exp(u[i], coeffs[i]));
        partial[k] = acc;
    });
    Elem xi = partial[0];
    for (size_t k = 1; k < nblocks; ++k) xi = g.op(xi, partial[k]);
    return xi;
}

/// PHASE D with masked exponents: xi_bar[j] = prod_i e(H_i[j]; t_i) for
/// j = 0,1, accumulated as Miller products with a single final
/// exponentiation. H holds the group-encoded masked coefficients for
/// X^1..X^d; u is the prefix chain over S.
template <typename E>
std::array<typename E::GTElem, 2> masked_pair_xi(
    const E& eng, const std::vector<std::array<typename E::G1Elem, 2>>& H,
    const std::vector<typename E::G2Elem>& u, size_t q = 1) {
    if (H.size() != u.size())
        throw std::invalid_argument("masked_pair_xi: |H| and |u| must match");
    size_t d = u.size();
    std::array<typename E::GTElem, 2> out{eng.gt.identity(), eng.gt.identity()};
    if (d == 0) return out;

    auto bounds = block_bounds(d, q);
    size_t nblocks = bounds.size() - 1;
    for (int j = 0; j < 2; ++j) {
        std::vector<typename E::GTElem> partial(nblocks, eng.gt.identity());
        detail::parallel_blocks(nblocks, [&](size_t k) {
            auto acc = eng.gt.identity();
            for (size_t i = bounds[k]; i < bounds[k + 1]; ++i)
                acc = eng.gt.op(acc, eng.pair_accumulate(H[i][j], u[i]));
            partial[k] = acc;
        });
        auto acc = partial[0];
        for (size_t k = 1; k < nblocks; ++k) acc = eng.gt.op(acc, partial[k]);
        out[j] = eng.pair_finish(acc);
    }
    return out;
}

/// Full ciphered server evaluation (PHASES A-D): homomorphic value
/// zeta = W dot [r^i] and the two-component certificate
/// xi_bar[j] = prod_i e(H_i[j]; t_i). Output is bit-identical for every
/// worker count q; q = 1 degenerates to the sequential loop.
template <typename E>
std::pair<lhe::Ciphertext, std::array<typename E::GTElem, 2>> server_eval_ciphered(
    const E& eng, const std::vector<lhe::Ciphertext>& W,
    const std::vector<std::array<typename E::G1Elem, 2>>& H,
    const std::vector<typename E::G2Elem>& S, const Scalar& r, size_t q = 1) {
    if (q < 1) q = 1;
    lhe::Ciphertext zeta = lhe::ho_dotproduct(W, r, unsigned(q));  // PHASES A+B
    std::vector<typename E::G2Elem> u = prefix_chain(eng.g2, r, S, q);  // PHASE C
    auto xi = masked_pair_xi(eng, H, u, q);  // PHASE D
    return {std::move(zeta), std::move(xi)};
}

}  // namespace vpe
