#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <gmpxx.h>

#include "vpe/bn254/pairing.hpp"
#include "vpe/rng.hpp"

using namespace vpe;
using namespace vpe::bn254;

namespace {

mpz_class rand_scalar(RandomSource& rng) { return rng.below(detail::fp_params().order_mpz); }

Fp12 fp12_rand(RandomSource& rng) {
    Fp12 a;
    for (Fp2* c : {&a.c0.c0, &a.c0.c1, &a.c0.c2, &a.c1.c0, &a.c1.c1, &a.c1.c2})
        *c = {fp_from_mpz(rng.below(detail::fp_params().p_mpz)),
              fp_from_mpz(rng.below(detail::fp_params().p_mpz))};
    return a;
}

}  // namespace

TEST_CASE("fp arithmetic matches gmp") {
    RandomSource rng(7);
    const mpz_class& p = detail::fp_params().p_mpz;
    for (int i = 0; i < 200; ++i) {
        mpz_class a = rng.below(p), b = rng.below(p);
        Fp fa = fp_from_mpz(a), fb = fp_from_mpz(b);
        CHECK(fp_to_mpz(fp_add(fa, fb)) == (a + b) % p);
        CHECK(fp_to_mpz(fp_sub(fa, fb)) == ((a - b) % p + p) % p);
        CHECK(fp_to_mpz(fp_mul(fa, fb)) == (a * b) % p);
        CHECK(fp_to_mpz(fp_neg(fa)) == (a == 0 ? mpz_class(0) : p - a));
    }
    Fp x = fp_from_mpz(rng.below(p));
    CHECK(fp_mul(x, fp_inv(x)) == fp_one());
    CHECK(fp_to_mpz(fp_one()) == 1);
}

TEST_CASE("fp sqrt") {
    RandomSource rng(8);
    const mpz_class& p = detail::fp_params().p_mpz;
    int squares = 0;
    for (int i = 0; i < 50; ++i) {
        Fp a = fp_from_mpz(rng.below(p));
        Fp sq = fp_sqr(a);
        Fp r;
        REQUIRE(fp_sqrt(r, sq));
        CHECK(fp_sqr(r) == sq);
        Fp other;
        if (fp_sqrt(other, a)) ++squares;
    }
    CHECK(squares > 5);
    CHECK(squares < 45);
}

TEST_CASE("fp2 field axioms and sqrt") {
    RandomSource rng(9);
    const mpz_class& p = detail::fp_params().p_mpz;
    auto rnd = [&] { return Fp2{fp_from_mpz(rng.below(p)), fp_from_mpz(rng.below(p))}; };
    for (int i = 0; i < 50; ++i) {
        Fp2 a = rnd(), b = rnd(), c = rnd();
        CHECK(fp2_mul(a, fp2_add(b, c)) == fp2_add(fp2_mul(a, b), fp2_mul(a, c)));
        CHECK(fp2_mul(a, b) == fp2_mul(b, a));
        CHECK(fp2_sqr(a) == fp2_mul(a, a));
        if (!a.is_zero()) CHECK(fp2_mul(a, fp2_inv(a)) == fp2_one());
        Fp2 r;
        REQUIRE(fp2_sqrt(r, fp2_sqr(a)));
        CHECK(fp2_sqr(r) == fp2_sqr(a));
    }
    // i^2 = -1
    Fp2 i{fp_zero(), fp_one()};
    CHECK(fp2_sqr(i) == fp2_neg(fp2_one()));
}

TEST_CASE("fp6/fp12 towers") {
    RandomSource rng(10);
    auto rnd12 = [&] { return fp12_rand(rng); };
    for (int i = 0; i < 20; ++i) {
        Fp12 a = rnd12(), b = rnd12();
        CHECK(fp12_mul(a, b) == fp12_mul(b, a));
        CHECK(fp12_sqr(a) == fp12_mul(a, a));
        CHECK(fp12_mul(a, fp12_inv(a)) == fp12_one());
        // frobenius == power map
        CHECK(fp12_frobenius(a) == fp12_pow(a, detail::fp_params().p_mpz));
    }
    Fp12 a = rnd12();
    CHECK(fp12_frobenius2(a) == fp12_frobenius(fp12_frobenius(a)));
    CHECK(fp12_frobenius3(a) == fp12_frobenius(fp12_frobenius2(a)));
    // v^3 = xi, w^2 = v  (multiply unit vectors)
    Fp12 w{fp6_zero(), {fp2_one(), fp2_zero(), fp2_zero()}};
    Fp12 w2 = fp12_sqr(w);
    CHECK(w2.c0.c1 == fp2_one());  // w^2 = v
    Fp12 w6 = fp12_sqr(fp12_mul(w2, w));
    CHECK(w6.c0.c0 == fp2_xi());  // w^6 = xi
}

TEST_CASE("sparse line multiplication matches dense") {
    RandomSource rng(11);
    const mpz_class& p = detail::fp_params().p_mpz;
    for (int i = 0; i < 10; ++i) {
        Fp12 f = fp12_rand(rng);
        Fp2 A{fp_from_mpz(rng.below(p)), fp_from_mpz(rng.below(p))};
        Fp2 B{fp_from_mpz(rng.below(p)), fp_from_mpz(rng.below(p))};
        Fp2 C{fp_from_mpz(rng.below(p)), fp_from_mpz(rng.below(p))};
        Fp12 line{{A, fp2_zero(), fp2_zero()}, {B, C, fp2_zero()}};
        CHECK(fp12_mul_line(f, A, B, C) == fp12_mul(f, line));
    }
}

TEST_CASE("generators are valid and have order r") {
    CHECK(g1_valid(g1_generator()));
    CHECK(g2_on_curve(g2_generator()));
    CHECK(g2_valid(g2_generator()));
    CHECK(g1_mul(g1_generator(), detail::fp_params().order_mpz).inf);
}

TEST_CASE("group laws") {
    RandomSource rng(12);
    G1 g = g1_generator();
    mpz_class a = rand_scalar(rng), b = rand_scalar(rng);
    CHECK(g1_add(g1_mul(g, a), g1_mul(g, b)) == g1_mul(g, (a + b) % detail::fp_params().order_mpz));
    CHECK(g1_add(g1_mul(g, a), g1_neg(g1_mul(g, a))).inf);
    CHECK(g1_add(g, g1_infinity()) == g);

    G2 h = g2_generator();
    CHECK(g2_add(g2_mul(h, a), g2_mul(h, b)) == g2_mul(h, (a + b) % detail::fp_params().order_mpz));
    CHECK(g2_add(g2_mul(h, a), g2_neg(g2_mul(h, a))).inf);
}

TEST_CASE("twist frobenius consistency") {
    // psi(pi(Q)) == frob12(psi(Q)) with psi(x, y) = (x w^2, y w^3)
    RandomSource rng(13);
    G2 q = g2_mul(g2_generator(), rand_scalar(rng));
    G2 q1 = detail::g2_frobenius(q);
    auto embed = [](const Fp2& c, int wdeg) {
        Fp12 out{fp6_zero(), fp6_zero()};
        if (wdeg == 2) out.c0.c1 = c;
        if (wdeg == 3) out.c1.c1 = c;
        return out;
    };
    Fp12 ex = embed(q.x, 2), ey = embed(q.y, 3);
    CHECK(fp12_frobenius(ex) == embed(q1.x, 2));
    CHECK(fp12_frobenius(ey) == embed(q1.y, 3));
    G2 q2 = detail::g2_frobenius2(q);
    CHECK(fp12_frobenius2(ex) == embed(q2.x, 2));
    CHECK(fp12_frobenius2(ey) == embed(q2.y, 3));
    CHECK(g2_valid(q1));
}

TEST_CASE("pairing bilinearity and non-degeneracy") {
    RandomSource rng(14);
    const mpz_class& r = detail::fp_params().order_mpz;
    G1 g = g1_generator();
    G2 h = g2_generator();
    Fp12 gt = pairing(g, h);
    CHECK(!fp12_is_one(gt));
    CHECK(gt_valid(gt));

    for (int i = 0; i < 8; ++i) {
        mpz_class a = rand_scalar(rng), b = rand_scalar(rng);
        Fp12 lhs = pairing(g1_mul(g, a), g2_mul(h, b));
        Fp12 rhs = gt_pow(gt, a * b % r);
        CHECK(lhs == rhs);
    }
    // additivity in the first argument
    mpz_class a = rand_scalar(rng), b = rand_scalar(rng);
    Fp12 prod = fp12_mul(pairing(g1_mul(g, a), h), pairing(g1_mul(g, b), h));
    CHECK(prod == pairing(g1_mul(g, (a + b) % r), h));
    // infinity pairs to one
    CHECK(fp12_is_one(pairing(g1_infinity(), h)));
}

TEST_CASE("multi-pairing accumulation equals product of pairings") {
    RandomSource rng(15);
    G1 g = g1_generator();
    G2 h = g2_generator();
    Fp12 acc = fp12_one();
    Fp12 ref = fp12_one();
    for (int i = 0; i < 4; ++i) {
        G1 p = g1_mul(g, rand_scalar(rng));
        G2 q = g2_mul(h, rand_scalar(rng));
        acc = fp12_mul(acc, miller_loop(p, q));
        ref = fp12_mul(ref, pairing(p, q));
    }
    CHECK(final_exponentiation(acc) == ref);
}

TEST_CASE("cyclotomic squaring agrees with plain squaring in GT") {
    RandomSource rng(16);
    Fp12 x = pairing(g1_mul(g1_generator(), rand_scalar(rng)), g2_generator());
    CHECK(fp12_cyclotomic_sqr(x) == fp12_sqr(x));
    CHECK(gt_inv(x) == fp12_inv(x));
}

TEST_CASE("fixed-base tables match wnaf") {
    RandomSource rng(17);
    auto g1j = detail::JacG1::from_affine(g1_generator().x, g1_generator().y, false);
    FixedBaseTable<detail::JacG1, G1> tab(g1j, 254);
    for (int i = 0; i < 5; ++i) {
        mpz_class k = rand_scalar(rng);
        G1 a = detail::to_affine<Fp, detail::FpOps, G1>(tab.mul(k));
        CHECK(a == g1_mul(g1_generator(), k));
    }
    CHECK(detail::to_affine<Fp, detail::FpOps, G1>(tab.mul(mpz_class(0))).inf);
}

TEST_CASE("serialization round-trips") {
    RandomSource rng(18);
    G1 p = g1_mul(g1_generator(), rand_scalar(rng));
    CHECK(g1_from_bytes(g1_to_bytes(p)) == p);
    CHECK(g1_from_bytes(g1_to_bytes(g1_neg(p))) == g1_neg(p));
    CHECK(g1_from_bytes(g1_to_bytes(g1_infinity())).inf);

    G2 q = g2_mul(g2_generator(), rand_scalar(rng));
    CHECK(g2_from_bytes(g2_to_bytes(q)) == q);
    CHECK(g2_from_bytes(g2_to_bytes(g2_neg(q))) == g2_neg(q));

    Fp12 t = pairing(p, q);
    CHECK(gt_from_bytes(gt_to_bytes(t)) == t);

    // cyclotomic (compressed) encoding round-trips across random GT values
    for (int i = 0; i < 20; ++i) {
        Fp12 e = gt_pow(t, rand_scalar(rng));
        Bytes c = gt_to_bytes_compressed(e);
        REQUIRE(c.size() == 256);
        REQUIRE(gt_from_bytes_compressed(c) == e);
    }
    CHECK(gt_from_bytes_compressed(gt_to_bytes_compressed(fp12_one())) == fp12_one());

    // corrupted encodings are rejected
    Bytes bad = g1_to_bytes(p);
    bad[31] ^= 1;
    bool ok = true;
    try {
        G1 q2 = g1_from_bytes(bad);
        ok = g1_valid(q2);  // may decompress to another valid point only if x' on curve
    } catch (const std::runtime_error&) {
        ok = true;
    }
    CHECK(ok);

    Bytes badgt = gt_to_bytes(t);
    badgt[5] ^= 0xff;
    CHECK_THROWS_AS((void)gt_from_bytes(badgt), std::runtime_error);
}
