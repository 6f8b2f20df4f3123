#pragma once

#include <fstream>

#include "vpe/dpor.hpp"
#include "vpe/vespo_protocol.hpp"
#include "vpe/vpe_ciphered.hpp"
#include "vpe/vpe_public_dynamic.hpp"

namespace vpe::state {

// State container: magic + format version + protocol/role tags + curve id
// + LHE scheme tag + payload. Deserialization rejects tag or curve
// mismatches and unknown versions.

inline constexpr uint32_t kMagic = 0x56504553;  // "VPES"
inline constexpr uint16_t kVersion = 1;

enum class Protocol : uint8_t { kCkzg = 1, kPubdyn = 2, kVespo = 3, kDpor = 4 };
enum class Role : uint8_t { kClient = 1, kVerifier = 2, kServer = 3 };

inline const char* protocol_name(Protocol p) {
    switch (p) {
        case Protocol::kCkzg: return "ckzg";
        case Protocol::kPubdyn: return "pubdyn";
        case Protocol::kVespo: return "vespo";
        case Protocol::kDpor: return "dpor";
    }
    return "?";
}

inline Protocol protocol_from_name(const std::string& s) {
    if (s == "ckzg") return Protocol::kCkzg;
    if (s == "pubdyn") return Protocol::kPubdyn;
    if (s == "vespo") return Protocol::kVespo;
    if (s == "dpor") return Protocol::kDpor;
    throw std::invalid_argument("unknown protocol tag: " + s);
}

struct ContainerInfo {
    Protocol protocol;
    Role role;
    std::string curve_id;
    std::string lhe_tag;
};

inline void append_string(Bytes& out, const std::string& s) {
    if (s.size() > 255) throw std::invalid_argument("tag string too long");
    append_u8(out, uint8_t(s.size()));
    out.insert(out.end(), s.begin(), s.end());
}

inline std::string read_string(ByteReader& r) {
    uint8_t len = r.u8();
    auto b = r.take(len);
    return std::string(b.begin(), b.end());
}

inline Bytes pack_container(const ContainerInfo& info, BytesView payload) {
    Bytes out;
    append_u32(out, kMagic);
    append_u16(out, kVersion);
    append_u8(out, uint8_t(info.protocol));
    append_u8(out, uint8_t(info.role));
    append_string(out, info.curve_id);
    append_string(out, info.lhe_tag);
    append_u32(out, uint32_t(payload.size()));
    append_bytes(out, payload);
    return out;
}

inline std::pair<ContainerInfo, Bytes> unpack_container(BytesView data) {
    ByteReader r(data);
    if (r.u32() != kMagic) throw std::runtime_error("not a state container");
    uint16_t ver = r.u16();
    if (ver != kVersion)
        throw std::runtime_error("unsupported state version " + std::to_string(ver));
    ContainerInfo info;
    info.protocol = Protocol(r.u8());
    info.role = Role(r.u8());
    info.curve_id = read_string(r);
    info.lhe_tag = read_string(r);
    uint32_t len = r.u32();
    Bytes payload = r.take_vec(len);
    if (!r.done()) throw std::runtime_error("trailing bytes in state container");
    return {std::move(info), std::move(payload)};
}

// -- low-level field helpers --------------------------------------------------

inline void append_scalar(Bytes& out, const Scalar& s) { append_bytes(out, s.to_bytes()); }

inline Scalar read_scalar(ByteReader& r, const PrimeField& f) {
    return f.from_bytes(r.take(f.byte_width()));
}

inline void append_vector2(Bytes& out, const Vector2& v) {
    append_scalar(out, v.x);
    append_scalar(out, v.y);
}

inline Vector2 read_vector2(ByteReader& r, const PrimeField& f) {
    Scalar x = read_scalar(r, f);
    Scalar y = read_scalar(r, f);
    return {std::move(x), std::move(y)};
}

inline void append_matrix2(Bytes& out, const Matrix2& m) {
    append_scalar(out, m.a);
    append_scalar(out, m.b);
    append_scalar(out, m.c);
    append_scalar(out, m.d);
}

inline Matrix2 read_matrix2(ByteReader& r, const PrimeField& f) {
    Scalar a = read_scalar(r, f);
    Scalar b = read_scalar(r, f);
    Scalar c = read_scalar(r, f);
    Scalar d = read_scalar(r, f);
    return {std::move(a), std::move(b), std::move(c), std::move(d)};
}

inline void append_hash(Bytes& out, const merkle::Hash& h) {
    append_bytes(out, BytesView(h.data(), 32));
}

inline merkle::Hash read_hash(ByteReader& r) {
    merkle::Hash h;
    std::memcpy(h.data(), r.take(32).data(), 32);
    return h;
}

inline void append_block(Bytes& out, const Bytes& b) {
    append_u32(out, uint32_t(b.size()));
    append_bytes(out, b);
}

inline Bytes read_block(ByteReader& r) { return r.take_vec(r.u32()); }

template <typename Group>
void append_elem(Bytes& out, const Group& g, const typename Group::Elem& e) {
    append_bytes(out, g.to_bytes(e));
}

template <typename Group>
typename Group::Elem read_elem(ByteReader& r, const Group& g) {
    return g.from_bytes(r.take(g.byte_width()));
}

template <typename Group>
void append_elems(Bytes& out, const Group& g, const std::vector<typename Group::Elem>& v) {
    append_u32(out, uint32_t(v.size()));
    for (const auto& e : v) append_elem(out, g, e);
}

template <typename Group>
std::vector<typename Group::Elem> read_elems(ByteReader& r, const Group& g) {
    uint32_t n = r.u32();
    std::vector<typename Group::Elem> v;
    v.reserve(n);
    for (uint32_t i = 0; i < n; ++i) v.push_back(read_elem(r, g));
    return v;
}

inline void append_ciphertexts(Bytes& out, const std::vector<lhe::Ciphertext>& v) {
    append_u32(out, uint32_t(v.size()));
    for (const auto& c : v) append_bytes(out, c.to_bytes());
}

inline std::vector<lhe::Ciphertext> read_ciphertexts(ByteReader& r, const lhe::PublicKey& pk) {
    uint32_t n = r.u32();
    std::vector<lhe::Ciphertext> v;
    v.reserve(n);
    for (uint32_t i = 0; i < n; ++i) v.push_back(lhe::Ciphertext::from_bytes(r, pk));
    return v;
}

// -- ckzg ---------------------------------------------------------------------

template <typename E>
Bytes encode(const E& eng, const ckzg::ClientState<E>& st) {
    Bytes out;
    append_block(out, st.sk.to_bytes());
    append_scalar(out, st.secret_point);
    append_elem(out, eng.gt, st.key);
    append_u64(out, st.degree);
    return out;
}

template <typename E>
ckzg::ClientState<E> decode_ckzg_client(const E& eng, BytesView payload) {
    ByteReader r(payload);
    ckzg::ClientState<E> st;
    st.sk = lhe::SecretKey::from_bytes(read_block(r));
    st.pk = st.sk;
    st.secret_point = read_scalar(r, eng.field());
    st.key = read_elem(r, eng.gt);
    st.degree = r.u64();
    return st;
}

template <typename E>
Bytes encode(const E& eng, const ckzg::ServerState<E>& st) {
    Bytes out;
    append_block(out, st.pk.to_bytes());
    append_ciphertexts(out, st.cipher_coeffs);
    append_elems(out, eng.g1, st.tail_exponents);
    return out;
}

template <typename E>
ckzg::ServerState<E> decode_ckzg_server(const E& eng, BytesView payload) {
    ByteReader r(payload);
    ckzg::ServerState<E> st;
    st.pk = lhe::PublicKey::from_bytes(read_block(r));
    st.cipher_coeffs = read_ciphertexts(r, st.pk);
    st.tail_exponents = read_elems(r, eng.g1);
    return st;
}

// -- pubdyn -------------------------------------------------------------------

template <typename E>
Bytes encode(const SymmetricEngine<E>&, const pubdyn::ClientState<E>& st) {
    Bytes out;
    append_scalar(out, st.secret_point);
    append_hash(out, st.coeff_root);
    append_u64(out, st.degree);
    return out;
}

template <typename E>
pubdyn::ClientState<E> decode_pubdyn_client(const SymmetricEngine<E>& sym, BytesView payload) {
    ByteReader r(payload);
    pubdyn::ClientState<E> st;
    st.secret_point = read_scalar(r, sym.field());
    st.coeff_root = read_hash(r);
    st.degree = r.u64();
    return st;
}

/// Bulletin format: version counter + serialized (K1, K2).
template <typename E>
Bytes encode(const SymmetricEngine<E>& sym, const pubdyn::VerifierState<E>& st) {
    Bytes out;
    append_u64(out, st.version);
    append_elem(out, sym.gt(), st.key_value);
    append_elem(out, sym.g, st.key_point);
    return out;
}

template <typename E>
pubdyn::VerifierState<E> decode_pubdyn_verifier(const SymmetricEngine<E>& sym,
                                                BytesView payload) {
    ByteReader r(payload);
    pubdyn::VerifierState<E> st;
    st.version = r.u64();
    st.key_value = read_elem(r, sym.gt());
    st.key_point = read_elem(r, sym.g);
    return st;
}

template <typename E>
Bytes encode(const SymmetricEngine<E>& sym, const pubdyn::ServerState<E>& st) {
    Bytes out;
    append_u32(out, uint32_t(st.coeffs.size()));
    for (const auto& c : st.coeffs) append_scalar(out, c);
    append_block(out, st.tree.to_bytes());
    append_elems(out, sym.g, st.secret_powers);
    return out;
}

template <typename E>
pubdyn::ServerState<E> decode_pubdyn_server(const SymmetricEngine<E>& sym, BytesView payload) {
    ByteReader r(payload);
    pubdyn::ServerState<E> st;
    uint32_t n = r.u32();
    st.coeffs.reserve(n);
    for (uint32_t i = 0; i < n; ++i) st.coeffs.push_back(read_scalar(r, sym.field()));
    Bytes tree = read_block(r);
    ByteReader tr(tree);
    st.tree = merkle::MerkleTree::from_bytes(tr);
    st.secret_powers = read_elems(r, sym.g);
    return st;
}

// -- vespo --------------------------------------------------------------------

template <typename E>
Bytes encode(const E& eng, const vespo::ClientState<E>& st) {
    Bytes out;
    append_block(out, st.sk.to_bytes());
    append_scalar(out, st.secret_point);
    append_vector2(out, st.mask_scale);
    append_vector2(out, st.mask_shift);
    append_matrix2(out, st.mask_matrix);
    append_bytes(out, eng.gt.to_bytes_compact(st.verification_key[0]));
    append_bytes(out, eng.gt.to_bytes_compact(st.verification_key[1]));
    append_hash(out, st.cipher_root);
    append_u64(out, st.degree);
    return out;
}

template <typename E>
vespo::ClientState<E> decode_vespo_client(const E& eng, BytesView payload) {
    ByteReader r(payload);
    vespo::ClientState<E> st;
    st.sk = lhe::SecretKey::from_bytes(read_block(r));
    st.pk = st.sk;
    const PrimeField& f = eng.field();
    st.secret_point = read_scalar(r, f);
    st.mask_scale = read_vector2(r, f);
    st.mask_shift = read_vector2(r, f);
    st.mask_matrix = read_matrix2(r, f);
    st.verification_key = {eng.gt.from_bytes_compact(r.take(eng.gt.compact_byte_width())),
                           eng.gt.from_bytes_compact(r.take(eng.gt.compact_byte_width()))};
    st.cipher_root = read_hash(r);
    st.degree = r.u64();
    return st;
}

template <typename E>
void append_masked_pairs(Bytes& out, const E& eng,
                         const std::vector<std::array<typename E::G1Elem, 2>>& v) {
    append_u32(out, uint32_t(v.size()));
    for (const auto& pair : v) {
        append_elem(out, eng.g1, pair[0]);
        append_elem(out, eng.g1, pair[1]);
    }
}

template <typename E>
std::vector<std::array<typename E::G1Elem, 2>> read_masked_pairs(ByteReader& r, const E& eng) {
    uint32_t n = r.u32();
    std::vector<std::array<typename E::G1Elem, 2>> v;
    v.reserve(n);
    for (uint32_t i = 0; i < n; ++i) {
        auto a = read_elem(r, eng.g1);
        auto b = read_elem(r, eng.g1);
        v.push_back({std::move(a), std::move(b)});
    }
    return v;
}

template <typename E>
Bytes encode(const E& eng, const vespo::ServerState<E>& st) {
    Bytes out;
    append_block(out, st.pk.to_bytes());
    append_ciphertexts(out, st.cipher_coeffs);
    append_block(out, st.cipher_tree.to_bytes());
    append_masked_pairs(out, eng, st.masked_coeffs);
    append_elems(out, eng.g2, st.secret_powers);
    return out;
}

template <typename E>
vespo::ServerState<E> decode_vespo_server(const E& eng, BytesView payload) {
    ByteReader r(payload);
    vespo::ServerState<E> st;
    st.pk = lhe::PublicKey::from_bytes(read_block(r));
    st.cipher_coeffs = read_ciphertexts(r, st.pk);
    Bytes tree = read_block(r);
    ByteReader tr(tree);
    st.cipher_tree = merkle::MerkleTree::from_bytes(tr);
    st.masked_coeffs = read_masked_pairs(r, eng);
    st.secret_powers = read_elems(r, eng.g2);
    return st;
}

// -- dpor ---------------------------------------------------------------------

template <typename E>
Bytes encode(const E& eng, const dpor::ClientState<E>& st) {
    Bytes out;
    append_block(out, st.sk.to_bytes());
    append_scalar(out, st.control_base);
    append_scalar(out, st.secret_point);
    append_vector2(out, st.mask_scale);
    append_vector2(out, st.mask_shift);
    append_matrix2(out, st.mask_matrix);
    append_bytes(out, eng.gt.to_bytes_compact(st.verification_key[0]));
    append_bytes(out, eng.gt.to_bytes_compact(st.verification_key[1]));
    append_hash(out, st.data_root);
    append_hash(out, st.cipher_root);
    append_u64(out, st.rows);
    append_u64(out, st.cols);
    return out;
}

template <typename E>
dpor::ClientState<E> decode_dpor_client(const E& eng, BytesView payload) {
    ByteReader r(payload);
    dpor::ClientState<E> st;
    st.sk = lhe::SecretKey::from_bytes(read_block(r));
    st.pk = st.sk;
    const PrimeField& f = eng.field();
    st.control_base = read_scalar(r, f);
    st.secret_point = read_scalar(r, f);
    st.mask_scale = read_vector2(r, f);
    st.mask_shift = read_vector2(r, f);
    st.mask_matrix = read_matrix2(r, f);
    st.verification_key = {eng.gt.from_bytes_compact(r.take(eng.gt.compact_byte_width())),
                           eng.gt.from_bytes_compact(r.take(eng.gt.compact_byte_width()))};
    st.data_root = read_hash(r);
    st.cipher_root = read_hash(r);
    st.rows = r.u64();
    st.cols = r.u64();
    return st;
}

/// The DPoR server state splits across two files: this payload carries the
/// protocol extras (w, T_w, H_bar, S, T_M), while the raw matrix lives in
/// the database file with its own header.
template <typename E>
Bytes encode(const E& eng, const dpor::ServerState<E>& st) {
    Bytes out;
    append_block(out, st.pk.to_bytes());
    append_ciphertexts(out, st.cipher_control);
    append_block(out, st.cipher_tree.to_bytes());
    append_masked_pairs(out, eng, st.masked_control);
    append_elems(out, eng.g2, st.secret_powers);
    append_block(out, st.data_tree.to_bytes());
    return out;
}

template <typename E>
dpor::ServerState<E> decode_dpor_server(const E& eng, BytesView payload,
                                        dpor::DataMatrixView data) {
    ByteReader r(payload);
    dpor::ServerState<E> st;
    st.pk = lhe::PublicKey::from_bytes(read_block(r));
    st.cipher_control = read_ciphertexts(r, st.pk);
    Bytes wtree = read_block(r);
    ByteReader wr(wtree);
    st.cipher_tree = merkle::MerkleTree::from_bytes(wr);
    st.masked_control = read_masked_pairs(r, eng);
    st.secret_powers = read_elems(r, eng.g2);
    Bytes dtree = read_block(r);
    ByteReader dr(dtree);
    st.data_tree = merkle::MerkleTree::from_bytes(dr);
    st.data = std::move(data);
    if (st.data_tree.leaf_count() != st.data.rows() * st.data.cols())
        throw std::runtime_error("data tree does not match database dimensions");
    return st;
}

// -- database file ------------------------------------------------------------
// magic, version, true byte length, rows, cols, chunk size, raw bytes.

inline constexpr uint32_t kDbMagic = 0x56504442;  // "VPDB"

inline Bytes encode_database(const dpor::DataMatrixView& v) {
    Bytes out;
    append_u32(out, kDbMagic);
    append_u16(out, kVersion);
    append_u64(out, v.byte_length());
    append_u64(out, v.rows());
    append_u64(out, v.cols());
    append_u16(out, uint16_t(v.chunk()));
    append_bytes(out, v.raw());
    return out;
}

inline dpor::DataMatrixView decode_database(BytesView data, const PrimeField& f) {
    ByteReader r(data);
    if (r.u32() != kDbMagic) throw std::runtime_error("not a database file");
    if (r.u16() != kVersion) throw std::runtime_error("unsupported database version");
    uint64_t byte_length = r.u64();
    uint64_t rows = r.u64();
    uint64_t cols = r.u64();
    uint16_t chunk = r.u16();
    Bytes raw = r.take_vec(rows * cols * chunk);
    return dpor::DataMatrixView(std::move(raw), rows, cols, chunk, &f, byte_length);
}

// -- files --------------------------------------------------------------------

inline void write_file(const std::string& path, BytesView data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out.write(reinterpret_cast<const char*>(data.data()), std::streamsize(data.size()));
    if (!out) throw std::runtime_error("short write to " + path);
}

inline Bytes read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::streamsize size = in.tellg();
    in.seekg(0);
    Bytes data(static_cast<size_t>(size), 0);
    in.read(reinterpret_cast<char*>(data.data()), size);
    if (!in) throw std::runtime_error("short read from " + path);
    return data;
}

}  // namespace vpe::state
