#pragma once

#include "vpe/serialize.hpp"

namespace vpe::wire {

// Wire framing: 4-byte big-endian length, 1-byte message type, payload of
// canonical encodings. The length covers type + payload.

enum class MsgType : uint8_t {
    kEvalReq = 1,       // (r)
    kEvalResp = 2,      // protocol-specific (zeta, xi)
    kUpdateReq = 3,     // pubdyn: (i, delta); vespo: (i, e_delta, Delta)
    kUpdateResp = 4,    // (leaf, uncle path)
    kAuditReq = 5,      // (r)
    kAuditResp = 6,     // (y, zeta, xi_bar)
    kUpdateFetch = 7,   // dpor round 1: (i, k)
    kUpdateReveal = 8,  // dpor: (M_ik, L_M, w_k, L_w)
    kUpdateApply = 9,   // dpor round 2: (i, k, M', e_delta, Delta)
    kOk = 10,
    kError = 11,
};

inline Bytes pack_frame(MsgType type, BytesView payload) {
    Bytes out;
    append_u32(out, uint32_t(payload.size() + 1));
    append_u8(out, uint8_t(type));
    append_bytes(out, payload);
    return out;
}

inline std::pair<MsgType, Bytes> unpack_frame(BytesView frame) {
    ByteReader r(frame);
    uint32_t len = r.u32();
    if (len < 1 || r.remaining() != len) throw std::runtime_error("bad frame length");
    uint8_t type = r.u8();
    if (type < 1 || type > 11) throw std::runtime_error("unknown message type");
    return {MsgType(type), r.take_vec(len - 1)};
}

inline Bytes error_frame(const std::string& code, const std::string& msg) {
    Bytes payload;
    state::append_string(payload, code);
    state::append_string(payload, msg);
    return pack_frame(MsgType::kError, payload);
}

// -- message payload codecs ---------------------------------------------------

inline Bytes encode_eval_req(const Scalar& r) { return r.to_bytes(); }

inline Scalar decode_eval_req(BytesView payload, const PrimeField& f) {
    return f.from_bytes(payload);
}

inline void append_path(Bytes& out, const merkle::LeafPath& path) {
    state::append_block(out, path.to_bytes());
}

inline merkle::LeafPath read_path(ByteReader& r) {
    Bytes b = state::read_block(r);
    ByteReader pr(b);
    return merkle::LeafPath::from_bytes(pr);
}

// ckzg / vespo EVAL_RESP: (zeta) or (zeta, xi_bar)

template <typename E>
Bytes encode_eval_resp(const E& eng, const ckzg::Evaluation<E>& ev) {
    Bytes out;
    state::append_block(out, ev.value_cipher.to_bytes());
    state::append_elem(out, eng.g1, ev.certificate);
    return out;
}

template <typename E>
ckzg::Evaluation<E> decode_ckzg_eval_resp(const E& eng, BytesView payload,
                                          const lhe::PublicKey& pk) {
    ByteReader r(payload);
    Bytes c = state::read_block(r);
    ByteReader cr(c);
    ckzg::Evaluation<E> ev{lhe::Ciphertext::from_bytes(cr, pk), eng.g1.identity()};
    ev.certificate = state::read_elem(r, eng.g1);
    return ev;
}

template <typename E>
Bytes encode_eval_resp(const E& eng, const vespo::Evaluation<E>& ev) {
    Bytes out;
    state::append_block(out, ev.value_cipher.to_bytes());
    state::append_elem(out, eng.gt, ev.certificate[0]);
    state::append_elem(out, eng.gt, ev.certificate[1]);
    return out;
}

template <typename E>
vespo::Evaluation<E> decode_vespo_eval_resp(const E& eng, BytesView payload,
                                            const lhe::PublicKey& pk) {
    ByteReader r(payload);
    Bytes c = state::read_block(r);
    ByteReader cr(c);
    vespo::Evaluation<E> ev;
    ev.value_cipher = lhe::Ciphertext::from_bytes(cr, pk);
    ev.certificate = {state::read_elem(r, eng.gt), state::read_elem(r, eng.gt)};
    return ev;
}

template <typename E>
Bytes encode_eval_resp(const SymmetricEngine<E>& sym, const pubdyn::Evaluation<E>& ev) {
    Bytes out;
    state::append_scalar(out, ev.value);
    state::append_elem(out, sym.g, ev.certificate);
    return out;
}

template <typename E>
pubdyn::Evaluation<E> decode_pubdyn_eval_resp(const SymmetricEngine<E>& sym,
                                              BytesView payload) {
    ByteReader r(payload);
    pubdyn::Evaluation<E> ev{state::read_scalar(r, sym.field()), sym.g.identity()};
    ev.certificate = state::read_elem(r, sym.g);
    return ev;
}

// UPDATE_REQ / UPDATE_RESP

inline Bytes encode_pubdyn_update_req(uint64_t i, const Scalar& delta) {
    Bytes out;
    append_u64(out, i);
    state::append_scalar(out, delta);
    return out;
}

inline std::pair<uint64_t, Scalar> decode_pubdyn_update_req(BytesView payload,
                                                            const PrimeField& f) {
    ByteReader r(payload);
    uint64_t i = r.u64();
    return {i, state::read_scalar(r, f)};
}

template <typename E>
Bytes encode_pubdyn_update_resp(const SymmetricEngine<E>&, const pubdyn::UpdateResponse<E>& u) {
    Bytes out;
    state::append_scalar(out, u.old_coeff);
    append_path(out, u.path);
    return out;
}

template <typename E>
pubdyn::UpdateResponse<E> decode_pubdyn_update_resp(const SymmetricEngine<E>& sym,
                                                    BytesView payload) {
    ByteReader r(payload);
    pubdyn::UpdateResponse<E> u{state::read_scalar(r, sym.field()), {}};
    u.path = read_path(r);
    return u;
}

template <typename E>
Bytes encode_vespo_update_req(const E& eng, const vespo::UpdateRequest& req,
                              const vespo::UpdateMask<E>& mask) {
    Bytes out;
    append_u64(out, req.index);
    state::append_block(out, req.delta_cipher.to_bytes());
    state::append_elem(out, eng.g1, mask.delta_mask[0]);
    state::append_elem(out, eng.g1, mask.delta_mask[1]);
    return out;
}

template <typename E>
std::pair<vespo::UpdateRequest, vespo::UpdateMask<E>> decode_vespo_update_req(
    const E& eng, BytesView payload, const lhe::PublicKey& pk) {
    ByteReader r(payload);
    uint64_t i = r.u64();
    Bytes c = state::read_block(r);
    ByteReader cr(c);
    vespo::UpdateRequest req{i, lhe::Ciphertext::from_bytes(cr, pk)};
    vespo::UpdateMask<E> mask;
    mask.delta_mask = {state::read_elem(r, eng.g1), state::read_elem(r, eng.g1)};
    return {std::move(req), std::move(mask)};
}

template <typename E>
Bytes encode_vespo_update_resp(const E&, const vespo::UpdateResponse<E>& u) {
    Bytes out;
    state::append_block(out, u.old_cipher.to_bytes());
    append_path(out, u.path);
    return out;
}

template <typename E>
vespo::UpdateResponse<E> decode_vespo_update_resp(const E&, BytesView payload,
                                                  const lhe::PublicKey& pk) {
    ByteReader r(payload);
    Bytes c = state::read_block(r);
    ByteReader cr(c);
    vespo::UpdateResponse<E> u{lhe::Ciphertext::from_bytes(cr, pk), {}};
    u.path = read_path(r);
    return u;
}

// dpor AUDIT_REQ / AUDIT_RESP / UPDATE_FETCH / UPDATE_REVEAL / UPDATE_APPLY

template <typename E>
Bytes encode_audit_resp(const E& eng, const dpor::AuditResponse<E>& a) {
    Bytes out;
    append_u32(out, uint32_t(a.row_image.size()));
    for (const auto& y : a.row_image) state::append_scalar(out, y);
    state::append_block(out, a.value_cipher.to_bytes());
    state::append_elem(out, eng.gt, a.certificate[0]);
    state::append_elem(out, eng.gt, a.certificate[1]);
    return out;
}

template <typename E>
dpor::AuditResponse<E> decode_audit_resp(const E& eng, BytesView payload,
                                         const lhe::PublicKey& pk) {
    ByteReader r(payload);
    dpor::AuditResponse<E> a;
    uint32_t m = r.u32();
    a.row_image.reserve(m);
    for (uint32_t i = 0; i < m; ++i) a.row_image.push_back(state::read_scalar(r, eng.field()));
    Bytes c = state::read_block(r);
    ByteReader cr(c);
    a.value_cipher = lhe::Ciphertext::from_bytes(cr, pk);
    a.certificate = {state::read_elem(r, eng.gt), state::read_elem(r, eng.gt)};
    return a;
}

inline Bytes encode_update_fetch(const dpor::UpdateFetch& f) {
    Bytes out;
    append_u64(out, f.row);
    append_u64(out, f.col);
    return out;
}

inline dpor::UpdateFetch decode_update_fetch(BytesView payload) {
    ByteReader r(payload);
    dpor::UpdateFetch f{};
    f.row = r.u64();
    f.col = r.u64();
    return f;
}

template <typename E>
Bytes encode_update_reveal(const E&, const dpor::UpdateReveal<E>& rev) {
    Bytes out;
    state::append_block(out, rev.old_entry);
    append_path(out, rev.data_path);
    state::append_block(out, rev.old_cipher.to_bytes());
    append_path(out, rev.cipher_path);
    return out;
}

template <typename E>
dpor::UpdateReveal<E> decode_update_reveal(const E&, BytesView payload,
                                           const lhe::PublicKey& pk) {
    ByteReader r(payload);
    dpor::UpdateReveal<E> rev;
    rev.old_entry = state::read_block(r);
    rev.data_path = read_path(r);
    Bytes c = state::read_block(r);
    ByteReader cr(c);
    rev.old_cipher = lhe::Ciphertext::from_bytes(cr, pk);
    rev.cipher_path = read_path(r);
    return rev;
}

template <typename E>
Bytes encode_update_apply(const E& eng, const dpor::UpdateApply<E>& a) {
    Bytes out;
    append_u64(out, a.row);
    append_u64(out, a.col);
    state::append_block(out, a.new_entry);
    state::append_block(out, a.delta_cipher.to_bytes());
    state::append_elem(out, eng.g1, a.delta_mask[0]);
    state::append_elem(out, eng.g1, a.delta_mask[1]);
    return out;
}

template <typename E>
dpor::UpdateApply<E> decode_update_apply(const E& eng, BytesView payload,
                                         const lhe::PublicKey& pk) {
    ByteReader r(payload);
    dpor::UpdateApply<E> a;
    a.row = r.u64();
    a.col = r.u64();
    a.new_entry = state::read_block(r);
    Bytes c = state::read_block(r);
    ByteReader cr(c);
    a.delta_cipher = lhe::Ciphertext::from_bytes(cr, pk);
    a.delta_mask = {state::read_elem(r, eng.g1), state::read_elem(r, eng.g1)};
    return a;
}

}  // namespace vpe::wire
