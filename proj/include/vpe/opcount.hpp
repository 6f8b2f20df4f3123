#pragma once

#include <cstdint>

namespace vpe {

/// Thread-local operation counters used by the complexity tests and the
/// bench harness. Increments are coarse-grained (one per field/group/hash
/// call), so they stay on in all builds.
struct OpCounts {
    uint64_t field_mul = 0;   // modular multiplications / inversions in Z_p
    uint64_t group_exp = 0;   // group exponentiations (any of G1/G2/GT)
    uint64_t group_mul = 0;   // group multiplications
    uint64_t pairing = 0;     // pairing evaluations (Miller loops)
    uint64_t hash = 0;        // compression-function calls in Merkle trees

    OpCounts& operator+=(const OpCounts& o) {
        field_mul += o.field_mul;
        group_exp += o.group_exp;
        group_mul += o.group_mul;
        pairing += o.pairing;
        hash += o.hash;
        return *this;
    }
};

inline thread_local OpCounts op_counts;

/// Snapshot-and-subtract helper: counts operations inside a scope.
class OpCounterScope {
public:
    OpCounterScope() : start_(op_counts) {}

    OpCounts delta() const {
        OpCounts d = op_counts;
        d.field_mul -= start_.field_mul;
        d.group_exp -= start_.group_exp;
        d.group_mul -= start_.group_mul;
        d.pairing -= start_.pairing;
        d.hash -= start_.hash;
        return d;
    }

private:
    OpCounts start_;
};

}  // namespace vpe
