#pragma once

// Free-end trees of projectionless towers, the #Y_n^p invariant, tower
// comparison, and the census of bisection labels.

#include "nccw/tower.hpp"

#include <map>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

namespace nccw {

struct EndsLevel {
    int level = 0;
    std::vector<int> nodes;     // y in the grave block with b_1 undefined
    std::vector<int> parent;    // index into the previous level's nodes; empty at level 1
    std::vector<int> children;  // per node, number of nodes above it
    long formula = 0;           // predicted node count
};

struct EndsTree {
    std::vector<EndsLevel> levels;
    int min_branching = 0;  // over all nodes below the top level
    bool parent_total = true, parent_surjective = true;
    std::string error;

    bool cantor_branching() const { return error.empty() && min_branching >= 2 && parent_total && parent_surjective; }
    std::string verdict() const { return cantor_branching() ? "Cantor-branching" : "not Cantor-branching"; }
    bool counts_match() const {
        for (auto& l : levels)
            if (static_cast<long>(l.nodes.size()) != l.formula) return false;
        return true;
    }
};

struct EndsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Sum over target blocks of the entries that carry the free end upwards.
inline long free_end_multiplier(const Stage& lower, const LevelSpec& spec) {
    long m = 0;
    for (int q = 0; q < spec.nq(); ++q)
        for (Kind k : kAllKinds)
            if (!is_constant(k) && through_value(k, 1) == 1) m += spec.count(q, lower.grave, k);
    return m;
}

inline EndsTree ends_tree(const Tower& t, int depth) {
    if (t.stages.empty() || t.stages[0].flavor != Flavor::Projectionless)
        throw EndsError("ends tree needs a projectionless tower; unital towers have no free ends");
    depth = std::min(depth, t.depth());
    EndsTree tree;
    long formula = 0;
    for (int n = 1; n <= depth; ++n) {
        const Stage& st = t.level(n);
        EndsLevel lv;
        lv.level = n;
        for (int y = 0; y < st.ny(); ++y)
            if (st.d.b[1][y] < 0) lv.nodes.push_back(y);
        if (n == 1) {
            formula = static_cast<long>(lv.nodes.size());
        } else {
            formula *= free_end_multiplier(t.level(n - 1), t.specs[n - 2]);
            auto& prev = tree.levels.back();
            std::unordered_map<int, int> pos;
            for (int k = 0; k < static_cast<int>(prev.nodes.size()); ++k) pos[prev.nodes[k]] = k;
            prev.children.assign(prev.nodes.size(), 0);
            for (int y : lv.nodes) {
                const auto& o = st.slot_origin[y];
                int par = -1;
                if (o.src == SlotSource::Affine && through_value(o.kind, 1) == 1) {
                    auto it = pos.find(o.ref);
                    if (it != pos.end()) par = it->second;
                }
                lv.parent.push_back(par);
                if (par < 0)
                    tree.parent_total = false;
                else
                    prev.children[par]++;
            }
            for (int c : prev.children) {
                if (c == 0) tree.parent_surjective = false;
                tree.min_branching = tree.min_branching == 0 ? c : std::min(tree.min_branching, c);
            }
        }
        lv.formula = formula;
        tree.levels.push_back(std::move(lv));
    }
    return tree;
}

// #Y_n^p for n = 1..depth.
inline std::vector<std::vector<int>> invariant_sequence(const Tower& t, int depth) {
    std::vector<std::vector<int>> out;
    for (int n = 1; n <= std::min(depth, t.depth()); ++n) out.push_back(block_sizes(t.level(n)));
    return out;
}

// #Y_{n+1}^q > #Y_n^p for all q, p.
inline bool strictly_growing(const std::vector<std::vector<int>>& seq) {
    for (std::size_t n = 0; n + 1 < seq.size(); ++n)
        if (*std::min_element(seq[n + 1].begin(), seq[n + 1].end()) <= *std::max_element(seq[n].begin(), seq[n].end()))
            return false;
    return true;
}

struct Distinguished {
    int level = 0;   // first n with different m_n
    int value = 0;   // min_p #Y_N^p of the tower with the smaller m_N
    int smaller = 0; // 0 or 1: which tower has it
};
struct IndistinguishableToDepth {
    int depth = 0;
};
using Comparison = std::variant<Distinguished, IndistinguishableToDepth>;

// First differing entry of the identity-copy sequences decides; the value is
// certified by checking it is absent from the other tower's counts.
inline Comparison compare_towers(const Tower& t1, const Tower& t2, int depth) {
    auto m_at = [](const Tower& t, int n) {
        const auto& m = t.family.m_seq;
        return n - 1 < static_cast<int>(m.size()) ? m[n - 1] : 0;
    };
    depth = std::min({depth, t1.depth(), t2.depth()});
    auto s1 = invariant_sequence(t1, depth), s2 = invariant_sequence(t2, depth);
    for (int n = 1; n <= depth; ++n) {
        int a = m_at(t1, n), b = m_at(t2, n);
        if (a == b) continue;
        int smaller = a < b ? 0 : 1;
        const auto& mine = smaller == 0 ? s1 : s2;
        const auto& other = smaller == 0 ? s2 : s1;
        int v = *std::min_element(mine[n - 1].begin(), mine[n - 1].end());
        for (auto& lvl : other)
            for (int c : lvl)
                if (c == v) return IndistinguishableToDepth{depth};
        return Distinguished{n, v, smaller};
    }
    return IndistinguishableToDepth{depth};
}

struct CensusEntry {
    int level = 0;
    int block = 0;
    long count = 0;   // ordered pairs (y, y') outside both arrow domains
    int degree = 0;   // #Y_n^p
    std::vector<std::pair<int, int>> examples;
};

// Pairs y != y' in one block whose ends sit in different slot-blocks at both
// ends of the interval: the labels of the bisection components.
inline std::vector<CensusEntry> bisection_census(const Tower& t, int depth, int examples = 3) {
    std::vector<CensusEntry> out;
    for (int n = 1; n <= std::min(depth, t.depth()); ++n) {
        const DualData& d = t.level(n).d;
        for (int p = 0; p < d.np(); ++p) {
            auto key = [&](int r, int y) -> long {
                int x = d.b[r][y];
                if (x < 0) return -1 - y;  // undefined: a class of its own
                return long(d.i_of(x)) * (1L << 32) + d.slot[r][y];
            };
            std::map<long, long> c0, c1;
            std::map<std::pair<long, long>, long> c01;
            for (int y = d.y_off[p]; y < d.y_off[p + 1]; ++y) {
                long k0 = key(0, y), k1 = key(1, y);
                c0[k0]++;
                c1[k1]++;
                c01[{k0, k1}]++;
            }
            auto pairs = [](long c) { return c * (c - 1); };
            long N = d.p_size(p), a0 = 0, a1 = 0, a01 = 0;
            for (auto& [k, c] : c0) a0 += pairs(c);
            for (auto& [k, c] : c1) a1 += pairs(c);
            for (auto& [k, c] : c01) a01 += pairs(c);
            CensusEntry e;
            e.level = n;
            e.block = p;
            e.degree = d.p_size(p);
            e.count = pairs(N) - a0 - a1 + a01;
            for (int y = d.y_off[p]; y < d.y_off[p + 1] && static_cast<int>(e.examples.size()) < examples; ++y)
                for (int z = d.y_off[p]; z < d.y_off[p + 1] && static_cast<int>(e.examples.size()) < examples; ++z)
                    if (y != z && key(0, y) != key(0, z) && key(1, y) != key(1, z)) e.examples.push_back({y, z});
            out.push_back(std::move(e));
        }
    }
    return out;
}

}  // namespace nccw
