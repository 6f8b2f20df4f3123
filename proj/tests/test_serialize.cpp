#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>

#include "vpe/wire.hpp"

using namespace vpe;

namespace {

struct TestModeGuard {
    TestModeGuard() { setenv("VESPO_TEST_MODE", "1", 1); }
};
const TestModeGuard guard;

constexpr unsigned kBits = 768;

template <typename E, typename St, typename Decode>
void roundtrip_state(const E& eng, state::Protocol proto, state::Role role, const St& st,
                     Decode decode) {
    Bytes payload = state::encode(eng, st);
    state::ContainerInfo info{proto, role, "bn254", lhe::kSchemeTag};
    Bytes packed = state::pack_container(info, payload);
    auto [info2, payload2] = state::unpack_container(packed);
    REQUIRE(info2.protocol == proto);
    REQUIRE(info2.role == role);
    REQUIRE(info2.curve_id == "bn254");
    St st2 = decode(payload2);
    // save -> load -> save is byte-identical
    Bytes repacked = state::pack_container(info2, state::encode(eng, st2));
    REQUIRE(repacked == packed);
}

}  // namespace

TEST_CASE("container header validation") {
    state::ContainerInfo info{state::Protocol::kVespo, state::Role::kClient, "bn254",
                              "paillier-v1"};
    Bytes packed = state::pack_container(info, Bytes{1, 2, 3});
    auto [got, payload] = state::unpack_container(packed);
    CHECK(payload == Bytes{1, 2, 3});

    Bytes bad = packed;
    bad[0] ^= 0xff;  // magic
    CHECK_THROWS_AS((void)state::unpack_container(bad), std::runtime_error);
    bad = packed;
    bad[5] = 99;  // version
    CHECK_THROWS_AS((void)state::unpack_container(bad), std::runtime_error);
    bad = packed;
    bad.push_back(0);  // trailing garbage
    CHECK_THROWS_AS((void)state::unpack_container(bad), std::runtime_error);
}

TEST_CASE("all protocol states round-trip byte-identically") {
    Bn254Engine eng;
    SymmetricEngine<Bn254Engine> sym(eng);
    const PrimeField& f = eng.field();
    RandomSource rng(1);

    Polynomial P = Polynomial::random(6, f, rng);
    {
        auto [client, server] = ckzg::setup(eng, P, kBits, rng);
        roundtrip_state(eng, state::Protocol::kCkzg, state::Role::kClient, client,
                        [&](BytesView p) { return state::decode_ckzg_client(eng, p); });
        roundtrip_state(eng, state::Protocol::kCkzg, state::Role::kServer, server,
                        [&](BytesView p) { return state::decode_ckzg_server(eng, p); });
    }
    {
        auto [client, verifier, server] = pubdyn::setup(sym, P, rng);
        Bytes payload = state::encode(sym, client);
        auto client2 = state::decode_pubdyn_client(sym, payload);
        CHECK(state::encode(sym, client2) == payload);
        payload = state::encode(sym, verifier);
        auto verifier2 = state::decode_pubdyn_verifier(sym, payload);
        CHECK(state::encode(sym, verifier2) == payload);
        payload = state::encode(sym, server);
        auto server2 = state::decode_pubdyn_server(sym, payload);
        CHECK(state::encode(sym, server2) == payload);

        // decoded states still interoperate
        Scalar r = f.random(rng);
        auto ev = pubdyn::eval(sym, server2, r);
        CHECK(pubdyn::verify(sym, verifier2, r, ev).has_value());
    }
    {
        auto [client, server] = vespo::setup(eng, P, kBits, rng);
        roundtrip_state(eng, state::Protocol::kVespo, state::Role::kClient, client,
                        [&](BytesView p) { return state::decode_vespo_client(eng, p); });
        roundtrip_state(eng, state::Protocol::kVespo, state::Role::kServer, server,
                        [&](BytesView p) { return state::decode_vespo_server(eng, p); });

        // decoded pair still runs the protocol
        auto c2 = state::decode_vespo_client(eng, state::encode(eng, client));
        auto s2 = state::decode_vespo_server(eng, state::encode(eng, server));
        auto ch = vespo::client_challenge(c2, rng);
        auto ev = vespo::server_eval(eng, s2, ch.point);
        auto z = vespo::client_verify(eng, c2, ch, ev);
        REQUIRE(z.has_value());
        CHECK(*z == horner_eval(P, ch.point));
    }
    {
        Bytes raw(400);
        for (auto& b : raw) b = uint8_t(rng.below(256).get_ui());
        auto [client, server] = dpor::init(eng, raw, {dpor::ShapeKind::kSquare}, kBits, rng);
        roundtrip_state(eng, state::Protocol::kDpor, state::Role::kClient, client,
                        [&](BytesView p) { return state::decode_dpor_client(eng, p); });

        Bytes db = state::encode_database(server.data);
        auto view = state::decode_database(db, f);
        CHECK(state::encode_database(view) == db);
        CHECK(view.byte_length() == 400);
        CHECK(view.rows() == server.data.rows());

        Bytes payload = state::encode(eng, server);
        auto server2 = state::decode_dpor_server(eng, payload, std::move(view));
        CHECK(state::encode(eng, server2) == payload);

        auto ch = dpor::client_audit_challenge(client, rng);
        auto resp = dpor::server_audit(eng, server2, ch.point);
        CHECK(!dpor::client_audit_verify(eng, client, ch, resp).has_value());
    }
}

TEST_CASE("mock-engine states round-trip too") {
    MockEngine eng(mpz_class(vpe::bn254::kGroupOrderDec));
    const PrimeField& f = eng.field();
    RandomSource rng(2);
    Polynomial P = Polynomial::random(5, f, rng);
    auto [client, server] = vespo::setup(eng, P, kBits, rng);
    Bytes payload = state::encode(eng, server);
    auto server2 = state::decode_vespo_server(eng, payload);
    CHECK(state::encode(eng, server2) == payload);
}

TEST_CASE("wire frames") {
    Bytes payload{9, 8, 7};
    Bytes frame = wire::pack_frame(wire::MsgType::kEvalReq, payload);
    auto [type, got] = wire::unpack_frame(frame);
    CHECK(type == wire::MsgType::kEvalReq);
    CHECK(got == payload);

    Bytes bad = frame;
    bad[3] += 1;  // wrong length
    CHECK_THROWS_AS((void)wire::unpack_frame(bad), std::runtime_error);
    bad = frame;
    bad[4] = 0x7f;  // unknown type
    CHECK_THROWS_AS((void)wire::unpack_frame(bad), std::runtime_error);
}

TEST_CASE("protocol messages round-trip") {
    Bn254Engine eng;
    const PrimeField& f = eng.field();
    RandomSource rng(3);
    Polynomial P = Polynomial::random(4, f, rng);
    auto [client, server] = vespo::setup(eng, P, kBits, rng);

    Scalar r = f.random(rng);
    CHECK(wire::decode_eval_req(wire::encode_eval_req(r), f) == r);

    auto ev = vespo::server_eval(eng, server, r);
    Bytes eb = wire::encode_eval_resp(eng, ev);
    auto ev2 = wire::decode_vespo_eval_resp(eng, eb, client.pk);
    CHECK(ev2.value_cipher == ev.value_cipher);
    CHECK(eng.gt.eq(ev2.certificate[0], ev.certificate[0]));

    auto [req, mask] = vespo::client_update_request(eng, client, 2, f.make(5), rng);
    Bytes ub = wire::encode_vespo_update_req(eng, req, mask);
    auto [req2, mask2] = wire::decode_vespo_update_req(eng, ub, client.pk);
    CHECK(req2.index == 2);
    CHECK(req2.delta_cipher == req.delta_cipher);
    CHECK(eng.g1.eq(mask2.delta_mask[0], mask.delta_mask[0]));

    auto resp = vespo::server_update(server, req, mask, eng);
    Bytes rb = wire::encode_vespo_update_resp(eng, resp);
    auto resp2 = wire::decode_vespo_update_resp(eng, rb, client.pk);
    CHECK(resp2.old_cipher == resp.old_cipher);
    REQUIRE(vespo::client_update_finish(eng, client, 2, req2, mask2, resp2));
}

TEST_CASE("tampered group elements in messages are rejected at decode") {
    Bn254Engine eng;
    const PrimeField& f = eng.field();
    RandomSource rng(4);
    Polynomial P = Polynomial::random(3, f, rng);
    auto [client, server] = vespo::setup(eng, P, kBits, rng);
    auto ev = vespo::server_eval(eng, server, f.random(rng));
    Bytes eb = wire::encode_eval_resp(eng, ev);
    // flip one byte inside the GT certificate; either the tower coordinate
    // leaves the field/subgroup (decode throws) or verification later fails
    Bytes bad = eb;
    bad[bad.size() - 10] ^= 0x5a;
    bool threw = false;
    try {
        (void)wire::decode_vespo_eval_resp(eng, bad, client.pk);
    } catch (const std::runtime_error&) {
        threw = true;
    }
    CHECK(threw);  // GT subgroup check rejects with overwhelming probability
}
