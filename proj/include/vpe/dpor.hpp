#pragma once

#include <array>
#include <cmath>
#include <optional>

#include "vpe/merkle.hpp"
#include "vpe/polyeval.hpp"

namespace vpe::dpor {

// Low-server-storage dynamic proof of retrievability. The raw database is
// viewed in place as a matrix M over Z_p (fixed-width chunks, decoded on
// demand); the client's control vector u = [gamma^i] is never stored, and
// the audit outsources the dot-product v^T x = P(r) to the ciphered
// polynomial-evaluation machinery over w = E(v), H_bar and S.

inline constexpr int kMaxRedraws = 16;

enum class ShapeKind { kSquare, kRect, kExplicit };

struct ShapePolicy {
    ShapeKind kind = ShapeKind::kSquare;
    uint64_t rows = 0, cols = 0;  // used when kind == kExplicit
};

/// Matrix dimensions for a database of `entries` chunks. The square preset
/// balances both dimensions; the rectangular preset keeps the row count
/// (communication) growing only logarithmically while columns absorb the
/// rest, following the shapes of the reference experiments.
inline std::pair<uint64_t, uint64_t> resolve_shape(uint64_t entries, const ShapePolicy& policy) {
    if (entries == 0) throw std::invalid_argument("empty database");
    uint64_t m, n;
    switch (policy.kind) {
        case ShapeKind::kSquare:
            m = uint64_t(std::ceil(std::sqrt(double(entries))));
            break;
        case ShapeKind::kRect:
            m = uint64_t(std::llround(200.0 * std::log2(double(entries)) + 1587.0));
            break;
        case ShapeKind::kExplicit:
            if (policy.rows == 0 || policy.cols == 0)
                throw std::invalid_argument("explicit shape needs rows and cols");
            if (policy.rows * policy.cols < entries)
                throw std::invalid_argument("explicit shape too small for database");
            return {policy.rows, policy.cols};
    }
    m = std::min<uint64_t>(std::max<uint64_t>(m, 1), entries);
    n = (entries + m - 1) / m;
    return {m, n};
}

/// The raw database with an m x n matrix view over Z_p. Entry (i, k) is
/// decoded on demand from chunk i*n + k; the byte buffer is padded with
/// zeros to fill the matrix, and the true byte length is kept for export.
class DataMatrixView {
public:
    DataMatrixView() = default;

    /// `byte_length` is the database's true length; it defaults to the
    /// buffer size and is preserved separately when the buffer arrives
    /// already padded (e.g. from a database file).
    DataMatrixView(Bytes raw_bytes, uint64_t m, uint64_t n, size_t chunk,
                   const PrimeField* field, uint64_t byte_length = 0)
        : byte_length_(byte_length ? byte_length : raw_bytes.size()),
          raw_(std::move(raw_bytes)), m_(m), n_(n), chunk_(chunk), field_(field) {
        if (chunk_ == 0 || field_->bit_width() <= 8 * chunk_)
            throw std::invalid_argument("chunk width must leave entries below the modulus");
        if (m_ * n_ * chunk_ < raw_.size()) throw std::invalid_argument("matrix too small");
        raw_.resize(m_ * n_ * chunk_, 0);
    }

    static size_t chunk_for(const PrimeField& f) {
        size_t bits = f.bit_width();
        if (bits <= 8) throw std::invalid_argument("field too small for byte chunking");
        return (bits - 1) / 8;
    }

    uint64_t rows() const { return m_; }
    uint64_t cols() const { return n_; }
    size_t chunk() const { return chunk_; }
    uint64_t byte_length() const { return byte_length_; }
    const Bytes& raw() const { return raw_; }
    const PrimeField& field() const { return *field_; }

    BytesView entry_bytes(uint64_t i, uint64_t k) const {
        return BytesView(raw_.data() + (i * n_ + k) * chunk_, chunk_);
    }

    Scalar entry(uint64_t i, uint64_t k) const {
        auto b = entry_bytes(i, k);
        mpz_class v;
        mpz_import(v.get_mpz_t(), b.size(), 1, 1, 1, 0, b.data());
        return Scalar::raw(std::move(v), field_);
    }

    void set_entry(uint64_t i, uint64_t k, BytesView chunk_bytes) {
        if (chunk_bytes.size() != chunk_) throw std::invalid_argument("bad chunk width");
        std::memcpy(raw_.data() + (i * n_ + k) * chunk_, chunk_bytes.data(), chunk_);
    }

    /// Fixed-width chunk encoding of a value; rejects values that do not
    /// fit the chunk.
    Bytes encode_entry(const Scalar& v) const {
        if (mpz_sizeinbase(v.value().get_mpz_t(), 2) > 8 * chunk_ || v.value() < 0)
            throw std::invalid_argument("entry value does not fit the chunk width");
        Bytes out(chunk_, 0);
        size_t count = 0;
        mpz_export(out.data(), &count, 1, 1, 1, 0, v.value().get_mpz_t());
        if (count < chunk_) {
            std::memmove(out.data() + (chunk_ - count), out.data(), count);
            std::memset(out.data(), 0, chunk_ - count);
        }
        return out;
    }

    std::vector<Bytes> leaves() const {
        std::vector<Bytes> out;
        out.reserve(m_ * n_);
        for (uint64_t idx = 0; idx < m_ * n_; ++idx)
            out.emplace_back(raw_.begin() + idx * chunk_, raw_.begin() + (idx + 1) * chunk_);
        return out;
    }

    /// v^T = u^T M with u = [gamma^i], streamed over the raw bytes.
    std::vector<Scalar> control_product(const Scalar& gamma, unsigned workers = 1) const {
        const mpz_class& p = field_->modulus();
        std::vector<mpz_class> acc(n_, 0);
        std::vector<Scalar> upow = scalar_powers(gamma, m_ - 1);
        auto bounds = block_bounds(n_, workers);
        detail::parallel_blocks(bounds.size() - 1, [&](size_t blk) {
            mpz_class v, t;
            for (uint64_t i = 0; i < m_; ++i) {
                const mpz_class& g = upow[i].value();
                for (uint64_t k = bounds[blk]; k < bounds[blk + 1]; ++k) {
                    auto b = entry_bytes(i, k);
                    mpz_import(v.get_mpz_t(), b.size(), 1, 1, 1, 0, b.data());
                    t = v * g;
                    acc[k] = (acc[k] + t) % p;
                }
            }
            op_counts.field_mul += m_ * (bounds[blk + 1] - bounds[blk]);
        });
        std::vector<Scalar> out;
        out.reserve(n_);
        for (auto& a : acc) out.push_back(Scalar::raw(std::move(a), field_));
        return out;
    }

    /// y = M x, rows processed independently.
    std::vector<Scalar> mat_vec(const std::vector<Scalar>& x, unsigned workers = 1) const {
        if (x.size() != n_) throw std::invalid_argument("vector length must equal cols");
        const mpz_class& p = field_->modulus();
        std::vector<Scalar> y(m_, field_->zero());
        auto bounds = block_bounds(m_, workers);
        detail::parallel_blocks(bounds.size() - 1, [&](size_t blk) {
            mpz_class v, acc;
            for (uint64_t i = bounds[blk]; i < bounds[blk + 1]; ++i) {
                acc = 0;
                for (uint64_t k = 0; k < n_; ++k) {
                    auto b = entry_bytes(i, k);
                    mpz_import(v.get_mpz_t(), b.size(), 1, 1, 1, 0, b.data());
                    acc += v * x[k].value();
                }
                y[i] = Scalar(acc % p, field_);
            }
            op_counts.field_mul += n_ * (bounds[blk + 1] - bounds[blk]);
        });
        return y;
    }

private:
    uint64_t byte_length_ = 0;
    Bytes raw_;
    uint64_t m_ = 0, n_ = 0;
    size_t chunk_ = 0;
    const PrimeField* field_ = nullptr;
};

template <typename E>
struct ClientState {
    lhe::PublicKey pk;
    lhe::SecretKey sk;
    Scalar control_base;  // gamma
    Scalar secret_point;  // s
    Vector2 mask_scale;   // alpha
    Vector2 mask_shift;   // beta
    Matrix2 mask_matrix;  // Phi
    std::array<typename E::GTElem, 2> verification_key;  // K_bar
    merkle::Hash data_root;    // r_M
    merkle::Hash cipher_root;  // r_w
    uint64_t rows = 0, cols = 0;
};

template <typename E>
struct ServerState {
    lhe::PublicKey pk;
    DataMatrixView data;                                           // M
    merkle::MerkleTree data_tree;                                  // T_M
    std::vector<lhe::Ciphertext> cipher_control;                   // w = E(v), length n
    merkle::MerkleTree cipher_tree;                                // T_w
    std::vector<std::array<typename E::G1Elem, 2>> masked_control; // H_bar, length n
    std::vector<typename E::G2Elem> secret_powers;                 // S, length n
};

template <typename E>
struct AuditResponse {
    std::vector<Scalar> row_image;                  // y = M x
    lhe::Ciphertext value_cipher;                   // zeta
    std::array<typename E::GTElem, 2> certificate;  // xi_bar
};

template <typename E>
std::pair<ClientState<E>, ServerState<E>> init(const E& eng, Bytes raw_bytes,
                                               const ShapePolicy& policy, unsigned lhe_bits,
                                               RandomSource& rng, unsigned workers = 1) {
    const PrimeField& f = eng.field();
    if (raw_bytes.empty()) throw std::invalid_argument("empty database");
    size_t chunk = DataMatrixView::chunk_for(f);
    uint64_t entries = (raw_bytes.size() + chunk - 1) / chunk;
    auto [m, n] = resolve_shape(entries, policy);

    auto [pk, sk] = lhe::keygen(lhe_bits, rng);
    pk.check_dot_capacity(n, f.modulus());

    ClientState<E> client;
    client.pk = pk;
    client.sk = sk;
    client.rows = m;
    client.cols = n;
    client.control_base = f.random_nonzero(rng);
    client.mask_scale = {f.random_nonzero(rng), f.random_nonzero(rng)};
    client.mask_shift = {f.random_nonzero(rng), f.random_nonzero(rng)};
    std::tie(client.secret_point, client.mask_matrix) = [&] {
        for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
            Scalar s = f.random_nonzero(rng);
            if (s == f.one()) continue;
            Matrix2 phi = Matrix2::random(f, rng);
            if (!(phi.scaled(s) - Matrix2::identity(f)).det().is_zero())
                return std::pair<Scalar, Matrix2>{std::move(s), std::move(phi)};
        }
        throw std::runtime_error("could not draw an invertible masked secret after 16 tries");
    }();

    ServerState<E> server;
    server.pk = pk;
    server.data = DataMatrixView(std::move(raw_bytes), m, n, chunk, &f);
    server.data_tree = merkle::MerkleTree(server.data.leaves());
    client.data_root = server.data_tree.root();

    // v^T = u^T M, then the polynomial machinery over v as coefficients
    std::vector<Scalar> v = server.data.control_product(client.control_base, workers);
    server.cipher_control = lhe::encrypt_vector(pk, v, rng, workers);
    std::vector<Bytes> wleaves;
    wleaves.reserve(n);
    for (const auto& w : server.cipher_control) wleaves.push_back(w.to_bytes());
    server.cipher_tree = merkle::MerkleTree(wleaves);
    client.cipher_root = server.cipher_tree.root();

    // v_bar_k = v_k alpha + Phi^k beta; K_bar = gT^{v_bar sigma}
    std::vector<Vector2> masked;
    masked.reserve(n);
    Vector2 phi_pow = client.mask_shift;
    masked.push_back(client.mask_scale.scaled(v[0]) + phi_pow);
    for (uint64_t k = 1; k < n; ++k) {
        phi_pow = client.mask_matrix * phi_pow;
        masked.push_back(client.mask_scale.scaled(v[k]) + phi_pow);
    }
    server.masked_control.resize(n);
    auto bounds = block_bounds(n, workers);
    detail::parallel_blocks(bounds.size() - 1, [&](size_t blk) {
        for (size_t k = bounds[blk]; k < bounds[blk + 1]; ++k)
            server.masked_control[k] = {eng.g1.exp_gen(masked[k].x), eng.g1.exp_gen(masked[k].y)};
    });

    std::vector<Scalar> spow = scalar_powers(client.secret_point, n - 1);
    server.secret_powers.resize(n);
    detail::parallel_blocks(bounds.size() - 1, [&](size_t blk) {
        for (size_t k = bounds[blk]; k < bounds[blk + 1]; ++k)
            server.secret_powers[k] = eng.g2.exp_gen(spow[k]);
    });

    Vector2 key_exp{f.zero(), f.zero()};
    for (uint64_t k = 0; k < n; ++k) key_exp = key_exp + masked[k].scaled(spow[k]);
    client.verification_key = {eng.gt.exp_gen(key_exp.x), eng.gt.exp_gen(key_exp.y)};
    return {std::move(client), std::move(server)};
}

// -- update (two rounds, per the audit-protocol table) -----------------------

struct UpdateFetch {
    uint64_t row, col;
};

template <typename E>
struct UpdateReveal {
    Bytes old_entry;            // M_ik chunk bytes
    merkle::LeafPath data_path; // L_M
    lhe::Ciphertext old_cipher; // w_k
    merkle::LeafPath cipher_path;  // L_w
};

template <typename E>
struct UpdateApply {
    uint64_t row, col;
    Bytes new_entry;               // M'_ik chunk bytes
    lhe::Ciphertext delta_cipher;  // E(delta), delta = gamma^i (M' - M)
    std::array<typename E::G1Elem, 2> delta_mask;  // Delta = g1^{delta alpha}
};

template <typename E>
UpdateReveal<E> server_update_fetch(const ServerState<E>& server, const UpdateFetch& req) {
    if (req.row >= server.data.rows() || req.col >= server.data.cols())
        throw std::out_of_range("matrix index out of range");
    uint64_t leaf = req.row * server.data.cols() + req.col;
    auto eb = server.data.entry_bytes(req.row, req.col);
    return {Bytes(eb.begin(), eb.end()), server.data_tree.leaf_path(leaf),
            server.cipher_control[req.col], server.cipher_tree.leaf_path(req.col)};
}

template <typename E>
struct UpdateOutcome {
    bool accepted = false;                 // false: Merkle check failed, state untouched
    std::optional<UpdateApply<E>> apply;   // empty on the unchanged-value fast path
};

/// Client side: verifies both Merkle paths, then builds the apply message
/// and rolls its own roots/keys forward. Rewriting an entry to its current
/// value is a no-op fast path (accepted, nothing to apply).
template <typename E>
UpdateOutcome<E> client_update(const E& eng, ClientState<E>& client, const UpdateFetch& where,
                               const Scalar& new_value, const UpdateReveal<E>& reveal,
                               RandomSource& rng) {
    uint64_t leaf = where.row * client.cols + where.col;
    if (merkle::mt_path_root(leaf, reveal.old_entry, reveal.data_path) != client.data_root)
        return {};
    if (merkle::mt_path_root(where.col, reveal.old_cipher.to_bytes(), reveal.cipher_path) !=
        client.cipher_root)
        return {};

    const PrimeField& f = client.secret_point.field();
    mpz_class old_v;
    mpz_import(old_v.get_mpz_t(), reveal.old_entry.size(), 1, 1, 1, 0, reveal.old_entry.data());
    Scalar old_entry = Scalar::raw(std::move(old_v), &f);
    if (old_entry == new_value) return {true, std::nullopt};

    Scalar delta = client.control_base.pow(where.row) * (new_value - old_entry);
    UpdateApply<E> apply;
    apply.row = where.row;
    apply.col = where.col;
    // encode via a throwaway view configured like the server's
    apply.new_entry = [&] {
        Bytes out(reveal.old_entry.size(), 0);
        size_t count = 0;
        if (mpz_sizeinbase(new_value.value().get_mpz_t(), 2) > 8 * out.size())
            throw std::invalid_argument("entry value does not fit the chunk width");
        mpz_export(out.data(), &count, 1, 1, 1, 0, new_value.value().get_mpz_t());
        if (count < out.size()) {
            std::memmove(out.data() + (out.size() - count), out.data(), count);
            std::memset(out.data(), 0, out.size() - count);
        }
        return out;
    }();
    apply.delta_cipher = client.pk.encrypt(delta.value(), rng);
    apply.delta_mask = {eng.g1.exp_gen(delta * client.mask_scale.x),
                        eng.g1.exp_gen(delta * client.mask_scale.y)};

    // roll keys and roots
    Scalar sk_pow = client.secret_point.pow(where.col);
    for (int j = 0; j < 2; ++j)
        client.verification_key[j] =
            eng.gt.op(eng.pair(eng.g1.exp(apply.delta_mask[j], sk_pow), eng.g2.generator()),
                      client.verification_key[j]);
    client.data_root = merkle::mt_path_root(leaf, apply.new_entry, reveal.data_path);
    client.cipher_root = merkle::mt_path_root(
        where.col, reveal.old_cipher.add(apply.delta_cipher).to_bytes(), reveal.cipher_path);
    return {true, std::move(apply)};
}

template <typename E>
void server_update_apply(ServerState<E>& server, const UpdateApply<E>& apply, const E& eng) {
    uint64_t leaf = apply.row * server.data.cols() + apply.col;
    server.data.set_entry(apply.row, apply.col, apply.new_entry);
    server.data_tree.update_leaf(leaf, apply.new_entry);
    server.cipher_control[apply.col] = server.cipher_control[apply.col].add(apply.delta_cipher);
    server.cipher_tree.update_leaf(apply.col, server.cipher_control[apply.col].to_bytes());
    auto& h = server.masked_control[apply.col];
    h = {eng.g1.op(h[0], apply.delta_mask[0]), eng.g1.op(h[1], apply.delta_mask[1])};
}

// -- audit -------------------------------------------------------------------

struct Challenge {
    Scalar point;      // r
    Vector2 mask_sum;  // c = G(r Phi) beta over degree n-1
};

template <typename E>
Challenge client_audit_challenge(const ClientState<E>& client, RandomSource& rng) {
    const PrimeField& f = client.secret_point.field();
    for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
        Scalar r = f.random_nonzero(rng);
        try {
            Vector2 c = pmgs(client.cols - 1, client.mask_matrix.scaled(r), client.mask_shift);
            return {std::move(r), std::move(c)};
        } catch (const SingularMatrix&) {
            continue;
        }
    }
    throw std::runtime_error("could not draw an invertible challenge after 16 tries");
}

template <typename E>
AuditResponse<E> server_audit(const E& eng, const ServerState<E>& server, const Scalar& r,
                              unsigned workers = 1) {
    std::vector<Scalar> x = scalar_powers(r, server.data.cols() - 1, workers);
    AuditResponse<E> out;
    out.row_image = server.data.mat_vec(x, workers);
    out.value_cipher = lhe::ho_dotproduct(server.cipher_control, r, workers);
    std::vector<typename E::G2Elem> S_head(server.secret_powers.begin(),
                                           server.secret_powers.end() - 1);
    std::vector<typename E::G2Elem> u = prefix_chain(eng.g2, r, S_head, workers);
    std::vector<std::array<typename E::G1Elem, 2>> H_tail(server.masked_control.begin() + 1,
                                                          server.masked_control.end());
    out.certificate = masked_pair_xi(eng, H_tail, u, workers);
    return out;
}

enum class AuditReject { kPairing, kDot };

/// Accept iff BOTH the two-component pairing equation and the control
/// dot-product u^T y == D(zeta) hold. u is rebuilt incrementally from
/// gamma; it is never stored.
template <typename E>
std::optional<AuditReject> client_audit_verify(const E& eng, const ClientState<E>& client,
                                               const Challenge& ch,
                                               const AuditResponse<E>& resp) {
    const PrimeField& f = eng.field();
    if (resp.row_image.size() != client.rows) return AuditReject::kDot;
    Scalar z = Scalar(client.sk.decrypt(resp.value_cipher) % f.modulus(), &f);

    Scalar shift = client.secret_point - ch.point;
    const Scalar* c[2] = {&ch.mask_sum.x, &ch.mask_sum.y};
    const Scalar* alpha[2] = {&client.mask_scale.x, &client.mask_scale.y};
    for (int j = 0; j < 2; ++j) {
        auto lhs = eng.gt.op(eng.gt.exp(resp.certificate[j], shift),
                             eng.gt.exp_gen(z * *alpha[j] + *c[j]));
        if (!eng.gt.eq(lhs, client.verification_key[j])) return AuditReject::kPairing;
    }

    Scalar dot = f.zero();
    Scalar gpow = f.one();
    for (uint64_t i = 0; i < client.rows; ++i) {
        dot += gpow * resp.row_image[i];
        gpow = gpow * client.control_base;
    }
    if (dot != z) return AuditReject::kDot;
    return std::nullopt;
}

}  // namespace vpe::dpor
