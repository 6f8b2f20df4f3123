#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "vpe/merkle.hpp"
#include "vpe/rng.hpp"

using namespace vpe;
using namespace vpe::merkle;

namespace {

Bytes rand_leaf(RandomSource& rng, size_t len = 32) {
    Bytes out(len);
    for (auto& b : out) b = uint8_t(rng.below(256).get_ui());
    return out;
}

std::vector<Bytes> rand_db(RandomSource& rng, size_t n) {
    std::vector<Bytes> db;
    db.reserve(n);
    for (size_t i = 0; i < n; ++i) db.push_back(rand_leaf(rng));
    return db;
}

// independent reference hasher: recursive, promotes unpaired nodes
Hash reference_root(const std::vector<Hash>& level) {
    if (level.size() == 1) return level[0];
    std::vector<Hash> up;
    for (size_t i = 0; i + 1 < level.size(); i += 2) up.push_back(hash_node(level[i], level[i + 1]));
    if (level.size() % 2) up.push_back(level.back());
    return reference_root(up);
}

Hash reference_root(const std::vector<Bytes>& db) {
    std::vector<Hash> hashes;
    for (const auto& l : db) hashes.push_back(hash_leaf(l));
    return reference_root(hashes);
}

}  // namespace

TEST_CASE("leaf and node rules") {
    Bytes a{'a'}, b{'b'};
    MerkleTree t1({a});
    CHECK(t1.root() == hash_leaf(a));
    CHECK(t1.leaf_path(0).steps.empty());
    CHECK(mt_path_root(0, a, t1.leaf_path(0)) == t1.root());

    MerkleTree t2({a, b});
    CHECK(t2.root() == hash_node(hash_leaf(a), hash_leaf(b)));

    CHECK_THROWS_AS(MerkleTree(std::vector<Bytes>{}), std::invalid_argument);
    CHECK_THROWS_AS((void)t2.leaf_path(2), std::out_of_range);
}

TEST_CASE("root matches independent recomputation on random databases") {
    RandomSource rng(1);
    for (size_t n : {1, 2, 3, 5, 8, 33, 1000}) {
        auto db = rand_db(rng, n);
        MerkleTree t(db);
        REQUIRE(t.root() == reference_root(db));
    }
}

TEST_CASE("path-root identity holds for every index") {
    RandomSource rng(2);
    for (size_t n : {1, 2, 3, 4, 7, 12, 31, 64}) {
        auto db = rand_db(rng, n);
        MerkleTree t(db);
        for (size_t i = 0; i < n; ++i) {
            auto path = t.leaf_path(i);
            REQUIRE(mt_path_root(i, db[i], path) == t.root());
            CHECK(path.steps.size() <= size_t(std::ceil(std::log2(double(n))) + 0.5) + 1);
        }
    }
}

TEST_CASE("tampering changes the recomputed root") {
    RandomSource rng(3);
    auto db = rand_db(rng, 24);
    MerkleTree t(db);
    for (int trial = 0; trial < 200; ++trial) {
        size_t i = size_t(rng.below(24).get_ui());
        auto path = t.leaf_path(i);
        switch (trial % 3) {
            case 0: {  // corrupt the leaf
                Bytes bad = db[i];
                bad[rng.below(bad.size()).get_ui()] ^= uint8_t(1 + rng.below(255).get_ui());
                REQUIRE(mt_path_root(i, bad, path) != t.root());
                break;
            }
            case 1: {  // corrupt one uncle
                if (path.steps.empty()) break;
                auto bad = path;
                auto& step = bad.steps[rng.below(bad.steps.size()).get_ui()];
                step.sibling[rng.below(32).get_ui()] ^= uint8_t(1 + rng.below(255).get_ui());
                REQUIRE(mt_path_root(i, db[i], bad) != t.root());
                break;
            }
            case 2: {  // wrong index: the path no longer authenticates
                size_t j = size_t(rng.below(24).get_ui());
                if (j == i) break;
                auto jpath = t.leaf_path(j);
                REQUIRE(mt_path_root(j, db[i], jpath) != t.root());
                break;
            }
        }
    }
}

TEST_CASE("update equals rebuild") {
    RandomSource rng(4);
    // idempotent update
    auto db = rand_db(rng, 8);
    MerkleTree t(db);
    MerkleTree t2 = mt_upd_leaf(3, db[3], t);
    CHECK(t2 == t);

    // single random update at every size
    for (size_t n : {1, 2, 3, 8, 25}) {
        auto base = rand_db(rng, n);
        MerkleTree tree(base);
        size_t i = size_t(rng.below(n).get_ui());
        auto leaf = rand_leaf(rng);
        tree.update_leaf(i, leaf);
        auto rebuilt = base;
        rebuilt[i] = leaf;
        REQUIRE(tree == MerkleTree(rebuilt));
    }

    // long random update sequence
    auto cur = rand_db(rng, 100);
    MerkleTree tree(cur);
    for (int step = 0; step < 100; ++step) {
        size_t i = size_t(rng.below(100).get_ui());
        cur[i] = rand_leaf(rng);
        tree.update_leaf(i, cur[i]);
    }
    REQUIRE(tree.root() == MerkleTree(cur).root());
    REQUIRE(tree == MerkleTree(cur));
}

TEST_CASE("update touches O(log n) hashes") {
    RandomSource rng(5);
    auto db = rand_db(rng, 4096);
    MerkleTree t(db);
    OpCounterScope scope;
    t.update_leaf(17, rand_leaf(rng));
    CHECK(scope.delta().hash <= 13);  // 1 leaf + 12 levels
}

TEST_CASE("tree serialization round-trips") {
    RandomSource rng(6);
    auto db = rand_db(rng, 9);
    MerkleTree t(db);
    Bytes b = t.to_bytes();
    ByteReader r(b);
    MerkleTree t2 = MerkleTree::from_bytes(r);
    CHECK(t2 == t);
    CHECK(t2.root() == t.root());

    auto p = t.leaf_path(5);
    Bytes pb = p.to_bytes();
    ByteReader pr(pb);
    auto p2 = LeafPath::from_bytes(pr);
    CHECK(p2.index == p.index);
    CHECK(mt_path_root(5, db[5], p2) == t.root());
}
