#pragma once

#include <openssl/sha.h>

#include <array>
#include <cstring>
#include <stdexcept>
#include <vector>

#include "vpe/bytes.hpp"
#include "vpe/opcount.hpp"

namespace vpe::merkle {

using Hash = std::array<uint8_t, 32>;

inline Hash hash_leaf(BytesView data) {
    ++op_counts.hash;
    Hash out;
    SHA256_CTX ctx;
    SHA256_Init(&ctx);
    uint8_t tag = 0x00;
    SHA256_Update(&ctx, &tag, 1);
    SHA256_Update(&ctx, data.data(), data.size());
    SHA256_Final(out.data(), &ctx);
    return out;
}

inline Hash hash_node(const Hash& left, const Hash& right) {
    ++op_counts.hash;
    Hash out;
    SHA256_CTX ctx;
    SHA256_Init(&ctx);
    uint8_t tag = 0x01;
    SHA256_Update(&ctx, &tag, 1);
    SHA256_Update(&ctx, left.data(), 32);
    SHA256_Update(&ctx, right.data(), 32);
    SHA256_Final(out.data(), &ctx);
    return out;
}

/// One step of an authentication path: the sibling hash and which side it
/// sits on.
struct PathStep {
    Hash sibling;
    bool sibling_on_left;
};

/// Authentication path for one leaf (the list of "uncles").
struct LeafPath {
    uint64_t index = 0;
    std::vector<PathStep> steps;

    Bytes to_bytes() const {
        Bytes out;
        append_u64(out, index);
        append_u32(out, uint32_t(steps.size()));
        for (const auto& s : steps) {
            append_u8(out, s.sibling_on_left ? 1 : 0);
            append_bytes(out, BytesView(s.sibling.data(), 32));
        }
        return out;
    }

    static LeafPath from_bytes(ByteReader& r) {
        LeafPath p;
        p.index = r.u64();
        uint32_t n = r.u32();
        p.steps.resize(n);
        for (auto& s : p.steps) {
            s.sibling_on_left = r.u8() != 0;
            auto h = r.take(32);
            std::memcpy(s.sibling.data(), h.data(), 32);
        }
        return p;
    }
};

/// Merkle hash tree over byte-string leaves. Leaves hash under a 0x00
/// prefix and internal nodes under 0x01; a level with an odd node count
/// promotes its last node unchanged. The tree never interprets leaf
/// content.
class MerkleTree {
public:
    MerkleTree() = default;

    explicit MerkleTree(const std::vector<Bytes>& leaves) {
        if (leaves.empty()) throw std::invalid_argument("merkle tree needs >= 1 leaf");
        levels_.emplace_back();
        levels_[0].reserve(leaves.size());
        for (const auto& l : leaves) levels_[0].push_back(hash_leaf(l));
        build_upper_levels();
    }

    uint64_t leaf_count() const { return levels_.empty() ? 0 : levels_[0].size(); }

    const Hash& root() const {
        if (levels_.empty()) throw std::logic_error("empty merkle tree");
        return levels_.back()[0];
    }

    /// Path of sibling hashes from leaf i to the root.
    LeafPath leaf_path(uint64_t i) const {
        if (i >= leaf_count()) throw std::out_of_range("merkle leaf index out of range");
        LeafPath path;
        path.index = i;
        uint64_t pos = i;
        for (size_t lvl = 0; lvl + 1 < levels_.size(); ++lvl) {
            uint64_t sib = pos ^ 1;
            if (sib < levels_[lvl].size()) {
                path.steps.push_back({levels_[lvl][sib], sib < pos});
            }
            // promoted node: no sibling at this level, index carries upward
            pos >>= 1;
        }
        return path;
    }

    /// Recompute the path to the root after changing leaf i. Only the
    /// nodes along the path are rehashed.
    void update_leaf(uint64_t i, BytesView new_leaf) {
        if (i >= leaf_count()) throw std::out_of_range("merkle leaf index out of range");
        levels_[0][i] = hash_leaf(new_leaf);
        uint64_t pos = i;
        for (size_t lvl = 0; lvl + 1 < levels_.size(); ++lvl) {
            uint64_t parent = pos >> 1;
            uint64_t left = parent << 1, right = left + 1;
            if (right < levels_[lvl].size())
                levels_[lvl + 1][parent] = hash_node(levels_[lvl][left], levels_[lvl][right]);
            else
                levels_[lvl + 1][parent] = levels_[lvl][left];
            pos = parent;
        }
    }

    bool operator==(const MerkleTree& o) const { return levels_ == o.levels_; }

    /// Persistent form: leaf count + the flat node array, bottom level
    /// first.
    Bytes to_bytes() const {
        Bytes out;
        append_u64(out, leaf_count());
        for (const auto& level : levels_)
            for (const auto& h : level) append_bytes(out, BytesView(h.data(), 32));
        return out;
    }

    static MerkleTree from_bytes(ByteReader& r) {
        uint64_t n = r.u64();
        if (n == 0) throw std::runtime_error("merkle tree encoding has zero leaves");
        MerkleTree t;
        uint64_t width = n;
        while (true) {
            auto& level = t.levels_.emplace_back();
            level.resize(width);
            for (auto& h : level) std::memcpy(h.data(), r.take(32).data(), 32);
            if (width == 1) break;
            width = (width + 1) / 2;
        }
        return t;
    }

private:
    void build_upper_levels() {
        while (levels_.back().size() > 1) {
            const auto& below = levels_.back();
            std::vector<Hash> up;
            up.reserve((below.size() + 1) / 2);
            for (size_t i = 0; i + 1 < below.size(); i += 2)
                up.push_back(hash_node(below[i], below[i + 1]));
            if (below.size() % 2) up.push_back(below.back());
            levels_.push_back(std::move(up));
        }
    }

    std::vector<std::vector<Hash>> levels_;  // levels_[0] = leaf hashes
};

/// Root of the tree over X, built from scratch.
inline Hash mt_root(const std::vector<Bytes>& X) { return MerkleTree(X).root(); }

/// Root recomputed from one leaf value and its path of uncles.
inline Hash mt_path_root(uint64_t i, BytesView leaf, const LeafPath& path) {
    if (path.index != i) throw std::invalid_argument("path belongs to a different index");
    Hash acc = hash_leaf(leaf);
    for (const auto& s : path.steps)
        acc = s.sibling_on_left ? hash_node(s.sibling, acc) : hash_node(acc, s.sibling);
    return acc;
}

/// Functional update: a copy of T with leaf i set to a.
inline MerkleTree mt_upd_leaf(uint64_t i, BytesView a, const MerkleTree& T) {
    MerkleTree t = T;
    t.update_leaf(i, a);
    return t;
}

}  // namespace vpe::merkle
