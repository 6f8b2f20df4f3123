#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>

#include "vpe/dpor.hpp"

using namespace vpe;

namespace {

struct TestModeGuard {
    TestModeGuard() { setenv("VESPO_TEST_MODE", "1", 1); }
};
const TestModeGuard guard;

constexpr unsigned kBits = 768;

Bytes random_bytes(RandomSource& rng, size_t len) {
    Bytes out(len);
    for (auto& b : out) b = uint8_t(rng.below(256).get_ui());
    return out;
}

template <typename E>
bool audit_once(const E& eng, const dpor::ClientState<E>& client,
                const dpor::ServerState<E>& server, RandomSource& rng,
                unsigned workers = 1) {
    auto ch = dpor::client_audit_challenge(client, rng);
    auto resp = dpor::server_audit(eng, server, ch.point, workers);
    return !dpor::client_audit_verify(eng, client, ch, resp).has_value();
}

}  // namespace

TEST_CASE("shape policies") {
    auto [m1, n1] = dpor::resolve_shape(100, {dpor::ShapeKind::kSquare});
    CHECK(m1 == 10);
    CHECK(n1 == 10);
    auto [m2, n2] = dpor::resolve_shape(101, {dpor::ShapeKind::kSquare});
    CHECK(m2 == 11);
    CHECK(m2 * n2 >= 101);

    // rectangular: rows grow with log2(entries)
    auto [mr1, nr1] = dpor::resolve_shape(1u << 20, {dpor::ShapeKind::kRect});
    auto [mr2, nr2] = dpor::resolve_shape(1u << 24, {dpor::ShapeKind::kRect});
    CHECK(mr1 == 200 * 20 + 1587);
    CHECK(mr2 == 200 * 24 + 1587);
    CHECK(mr1 * nr1 >= (1u << 20));

    dpor::ShapePolicy exp{dpor::ShapeKind::kExplicit, 4, 5};
    auto [me, ne] = dpor::resolve_shape(18, exp);
    CHECK(me == 4);
    CHECK(ne == 5);
    CHECK_THROWS_AS((void)dpor::resolve_shape(100, exp), std::invalid_argument);
}

TEST_CASE("matrix view decodes and streams the raw bytes") {
    MockEngine eng;
    const PrimeField& f = eng.field();
    RandomSource rng(1);
    size_t chunk = dpor::DataMatrixView::chunk_for(f);
    CHECK(chunk == 31);

    Bytes raw = random_bytes(rng, 4 * 5 * chunk - 7);  // pad the tail
    dpor::DataMatrixView view(raw, 4, 5, chunk, &f);
    CHECK(view.byte_length() == raw.size());
    for (uint64_t i = 0; i < 4; ++i)
        for (uint64_t k = 0; k < 5; ++k) {
            Scalar v = view.entry(i, k);
            CHECK(v.value() < f.modulus());
            CHECK(view.entry_bytes(i, k).size() == chunk);
        }
    // padded region decodes to zero
    CHECK(view.entry(3, 4).value() < (mpz_class(1) << (8 * chunk)));

    // commutativity of matrix-vector products: u^T (M x) == (u^T M) x
    Scalar gamma = f.random_nonzero(rng);
    std::vector<Scalar> v = view.control_product(gamma);
    Scalar r = f.random(rng);
    std::vector<Scalar> x = scalar_powers(r, 4);
    std::vector<Scalar> y = view.mat_vec(x);
    Scalar lhs = f.zero(), gpow = f.one();
    for (uint64_t i = 0; i < 4; ++i) {
        lhs += gpow * y[i];
        gpow = gpow * gamma;
    }
    Scalar rhs = f.zero();
    for (uint64_t k = 0; k < 5; ++k) rhs += v[k] * x[k];
    CHECK(lhs == rhs);

    // parallel products identical
    CHECK(view.control_product(gamma, 4) == v);
    CHECK(view.mat_vec(x, 4) == y);
}

TEST_CASE("init invariants") {
    MockEngine eng;
    const PrimeField& f = eng.field();
    RandomSource rng(2);

    // single-entry database
    Bytes one = random_bytes(rng, 16);
    auto [c1, s1] = dpor::init(eng, one, {dpor::ShapeKind::kSquare}, kBits, rng);
    CHECK(c1.rows == 1);
    CHECK(c1.cols == 1);
    CHECK(c1.sk.decrypt(s1.cipher_control[0]) == s1.data.entry(0, 0).value());

    // random 4x5 matrix: decrypt(w) == u^T M
    size_t chunk = dpor::DataMatrixView::chunk_for(f);
    Bytes raw = random_bytes(rng, 4 * 5 * chunk);
    dpor::ShapePolicy shape{dpor::ShapeKind::kExplicit, 4, 5};
    auto [client, server] = dpor::init(eng, raw, shape, kBits, rng);
    std::vector<Scalar> v = server.data.control_product(client.control_base);
    for (uint64_t k = 0; k < 5; ++k)
        CHECK(client.sk.decrypt(server.cipher_control[k]) == v[k].value());

    // K_bar matches the exponent-side recomputation
    std::vector<Scalar> spow = scalar_powers(client.secret_point, 4);
    for (int j = 0; j < 2; ++j) {
        Scalar acc = f.zero();
        Vector2 phi_pow = client.mask_shift;
        for (uint64_t k = 0; k < 5; ++k) {
            if (k > 0) phi_pow = client.mask_matrix * phi_pow;
            Vector2 masked = client.mask_scale.scaled(v[k]) + phi_pow;
            acc += (j == 0 ? masked.x : masked.y) * spow[k];
        }
        CHECK(client.verification_key[j].log == acc.value());
    }

    // roots match independent rebuilds
    CHECK(client.data_root == server.data_tree.root());
    CHECK(client.cipher_root == server.cipher_tree.root());

    CHECK_THROWS_AS((void)dpor::init(eng, Bytes{}, {dpor::ShapeKind::kSquare}, kBits, rng),
                    std::invalid_argument);
}

TEST_CASE("capacity violation rejected at init") {
    MockEngine eng;  // 254-bit field
    RandomSource rng(3);
    Bytes raw = random_bytes(rng, 31 * 12);
    // 256-bit modulus cannot hold even one 254-bit product
    CHECK_THROWS_AS(
        (void)dpor::init(eng, raw, {dpor::ShapeKind::kSquare}, 256, rng),
        lhe::CapacityError);
}

TEST_CASE("audits accept on intact data") {
    MockEngine eng;
    RandomSource rng(4);
    Bytes raw = random_bytes(rng, 6000);
    for (auto kind : {dpor::ShapeKind::kSquare, dpor::ShapeKind::kRect}) {
        auto [client, server] = dpor::init(eng, raw, {kind}, kBits, rng);
        for (int t = 0; t < 10; ++t) REQUIRE(audit_once(eng, client, server, rng));
    }
}

TEST_CASE("audit server response invariants") {
    MockEngine eng;
    const PrimeField& f = eng.field();
    RandomSource rng(5);
    Bytes raw = random_bytes(rng, 31 * 7 * 3);
    dpor::ShapePolicy shape{dpor::ShapeKind::kExplicit, 3, 7};
    auto [client, server] = dpor::init(eng, raw, shape, kBits, rng);

    // r = 0: y is the first column of M
    auto resp0 = dpor::server_audit(eng, server, f.zero());
    for (uint64_t i = 0; i < 3; ++i) REQUIRE(resp0.row_image[i] == server.data.entry(i, 0));

    // D(zeta) == v^T x clear-side
    Scalar r = f.random(rng);
    auto resp = dpor::server_audit(eng, server, r);
    std::vector<Scalar> v = server.data.control_product(client.control_base);
    std::vector<Scalar> x = scalar_powers(r, 6);
    Scalar expect = f.zero();
    for (int k = 0; k < 7; ++k) expect += v[k] * x[k];
    CHECK(Scalar(client.sk.decrypt(resp.value_cipher) % f.modulus(), &f) == expect);

    // y matches the naive matrix-vector oracle
    for (uint64_t i = 0; i < 3; ++i) {
        Scalar acc = f.zero();
        for (uint64_t k = 0; k < 7; ++k) acc += server.data.entry(i, k) * x[k];
        REQUIRE(resp.row_image[i] == acc);
    }

    // parallel audit path identical
    auto resp2 = dpor::server_audit(eng, server, r, 4);
    CHECK(resp2.row_image == resp.row_image);
    CHECK(resp2.value_cipher == resp.value_cipher);
    CHECK(eng.gt.eq(resp2.certificate[0], resp.certificate[0]));
    CHECK(eng.gt.eq(resp2.certificate[1], resp.certificate[1]));
}

TEST_CASE("out-of-band corruption is detected") {
    MockEngine eng;
    RandomSource rng(6);
    Bytes raw = random_bytes(rng, 5000);
    auto [client, server] = dpor::init(eng, raw, {dpor::ShapeKind::kSquare}, kBits, rng);

    for (int t = 0; t < 60; ++t) {
        auto corrupted = server;  // the server's protocol state is built; flip raw data
        uint64_t i = rng.below(corrupted.data.rows()).get_ui();
        uint64_t k = rng.below(corrupted.data.cols()).get_ui();
        Bytes chunk(corrupted.data.entry_bytes(i, k).begin(),
                    corrupted.data.entry_bytes(i, k).end());
        chunk[rng.below(chunk.size()).get_ui()] ^= uint8_t(1 + rng.below(255).get_ui());
        corrupted.data.set_entry(i, k, chunk);

        auto ch = dpor::client_audit_challenge(client, rng);
        auto resp = dpor::server_audit(eng, corrupted, ch.point);
        auto rej = dpor::client_audit_verify(eng, client, ch, resp);
        REQUIRE(rej.has_value());
        REQUIRE(*rej == dpor::AuditReject::kDot);
    }

    // forged y with matching dot-product but inconsistent zeta: the pairing
    // (polynomial) check has to catch the lie about v^T x
    auto ch = dpor::client_audit_challenge(client, rng);
    auto resp = dpor::server_audit(eng, server, ch.point);
    auto forged = resp;
    forged.value_cipher = forged.value_cipher.add(client.pk.encrypt(1, rng));
    // adjust y[0] so u^T y == D(zeta') still holds (u[0] = 1)
    forged.row_image[0] += eng.field().one();
    auto rej = dpor::client_audit_verify(eng, client, ch, forged);
    REQUIRE(rej.has_value());
    CHECK(*rej == dpor::AuditReject::kPairing);
}

TEST_CASE("updates: fast path, composition, mirror equivalence, forgery") {
    MockEngine eng;
    const PrimeField& f = eng.field();
    RandomSource rng(7);
    Bytes raw = random_bytes(rng, 31 * 64);
    auto [client, server] = dpor::init(eng, raw, {dpor::ShapeKind::kSquare}, kBits, rng);

    // rewriting an entry to its own value is a no-op
    dpor::UpdateFetch at{2, 3};
    auto reveal = dpor::server_update_fetch(server, at);
    Scalar same = server.data.entry(2, 3);
    auto root_before = client.data_root;
    auto out = dpor::client_update(eng, client, at, same, reveal, rng);
    REQUIRE(out.accepted);
    CHECK(!out.apply.has_value());
    CHECK(client.data_root == root_before);

    // a run of random updates, audited along the way
    for (int step = 0; step < 30; ++step) {
        dpor::UpdateFetch where{rng.below(server.data.rows()).get_ui(),
                                rng.below(server.data.cols()).get_ui()};
        Scalar value = Scalar(rng.bits(8 * 31 - 1), &f);
        auto rev = dpor::server_update_fetch(server, where);
        auto outcome = dpor::client_update(eng, client, where, value, rev, rng);
        REQUIRE(outcome.accepted);
        if (outcome.apply) dpor::server_update_apply(server, *outcome.apply, eng);
        REQUIRE(server.data.entry(where.row, where.col) == value);
        if (step % 5 == 4) REQUIRE(audit_once(eng, client, server, rng));
    }

    // mirror equivalence: a fresh init over the updated raw bytes produces
    // a state pair whose audits also accept
    dpor::ShapePolicy shape{dpor::ShapeKind::kExplicit, server.data.rows(),
                            server.data.cols()};
    auto [client2, server2] = dpor::init(eng, server.data.raw(), shape, kBits, rng);
    for (int t = 0; t < 5; ++t) REQUIRE(audit_once(eng, client2, server2, rng));

    // forged old-entry in the reveal is rejected
    dpor::UpdateFetch where{1, 1};
    auto rev = dpor::server_update_fetch(server, where);
    auto bad = rev;
    bad.old_entry[5] ^= 0x40;
    auto client_copy = client;
    CHECK(!dpor::client_update(eng, client_copy, where, f.make(99), bad, rng).accepted);
    bad = rev;
    bad.cipher_path.steps[0].sibling[0] ^= 1;
    CHECK(!dpor::client_update(eng, client_copy, where, f.make(99), bad, rng).accepted);
}

TEST_CASE("end-to-end on the real curve") {
    Bn254Engine eng;
    const PrimeField& f = eng.field();
    RandomSource rng(8);
    Bytes raw = random_bytes(rng, 3100);
    auto [client, server] = dpor::init(eng, raw, {dpor::ShapeKind::kSquare}, kBits, rng, 2);

    REQUIRE(audit_once(eng, client, server, rng, 2));

    // update then audit
    dpor::UpdateFetch where{0, 1};
    Scalar value = Scalar(rng.bits(200), &f);
    auto rev = dpor::server_update_fetch(server, where);
    auto outcome = dpor::client_update(eng, client, where, value, rev, rng);
    REQUIRE(outcome.accepted);
    REQUIRE(outcome.apply.has_value());
    dpor::server_update_apply(server, *outcome.apply, eng);
    REQUIRE(audit_once(eng, client, server, rng, 2));

    // corruption detected
    Bytes chunk(server.data.entry_bytes(1, 0).begin(), server.data.entry_bytes(1, 0).end());
    chunk[0] ^= 1;
    server.data.set_entry(1, 0, chunk);
    auto ch = dpor::client_audit_challenge(client, rng);
    auto resp = dpor::server_audit(eng, server, ch.point, 2);
    CHECK(dpor::client_audit_verify(eng, client, ch, resp).has_value());
}
