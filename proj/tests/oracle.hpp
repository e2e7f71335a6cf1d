#pragma once

// Brute-force conjugacy oracle and random instance generators shared by the
// GTest suites and the acceptance binary.  Deliberately naive: it enumerates
// every (rho, kappa, o, Xi) and either every Theta or, equivalently, checks
// that the end-pair multisets of matched blocks agree.

#include "nccw/classify.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <random>
#include <vector>

namespace oracle {

using namespace nccw;

// Calls f on every permutation of {0..n-1} that maps each index to one with
// the same size.
inline bool for_each_size_perm(const std::vector<int>& sizes, const std::function<bool(const std::vector<int>&)>& f) {
    std::vector<int> perm(sizes.size());
    std::iota(perm.begin(), perm.end(), 0);
    do {
        bool ok = true;
        for (std::size_t k = 0; k < perm.size() && ok; ++k) ok = sizes[perm[k]] == sizes[k];
        if (ok && f(perm)) return true;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return false;
}

// Every bijection of [0,n) preserving the partition given by offsets, with
// block k sent onto block target[k].
inline bool for_each_block_bijection(const std::vector<int>& off, const std::vector<int>& target,
                                     const std::function<bool(const std::vector<int>&)>& f) {
    int blocks = static_cast<int>(off.size()) - 1;
    std::vector<int> map(off.back(), -1);
    std::vector<std::vector<int>> local(blocks);
    for (int k = 0; k < blocks; ++k) {
        local[k].resize(off[k + 1] - off[k]);
        std::iota(local[k].begin(), local[k].end(), 0);
    }
    std::function<bool(int)> rec = [&](int k) -> bool {
        if (k == blocks) return f(map);
        auto& l = local[k];
        std::sort(l.begin(), l.end());
        do {
            for (std::size_t a = 0; a < l.size(); ++a) map[off[k] + a] = off[target[k]] + l[a];
            if (rec(k + 1)) return true;
        } while (std::next_permutation(l.begin(), l.end()));
        return false;
    };
    return rec(0);
}

// Ends of edge y in the twisted graph of tw.
inline std::pair<int, int> ends(const DualData& d, const TwistPerm& tw, int y) { return {d.b[0][y], d.b[1][tw(y)]}; }

// Does some (rho, kappa, o, Theta, Xi) conjugate sigma to tau on d?  With
// literal_theta every Theta is enumerated; otherwise Theta is found by
// comparing end-pair multisets block by block, which is the same condition.
inline bool brute_conjugate(const DualData& d, const TwistPerm& s, const TwistPerm& t, bool literal_theta) {
    int P = d.np(), I = d.ni();
    std::vector<int> psz(P), isz(I);
    for (int p = 0; p < P; ++p) psz[p] = d.p_size(p);
    for (int i = 0; i < I; ++i) isz[i] = d.i_size(i);
    auto img = [](const std::vector<int>& xi, int x) { return x < 0 ? -1 : xi[x]; };
    return for_each_size_perm(psz, [&](const std::vector<int>& rho) {
        return for_each_size_perm(isz, [&](const std::vector<int>& kappa) {
            return for_each_block_bijection(d.x_off, kappa, [&](const std::vector<int>& xi) {
                for (int omask = 0; omask < (1 << P); ++omask) {
                    auto pair_of = [&](int p, int y) {
                        auto [a, b] = ends(d, s, y);
                        std::pair<int, int> e{img(xi, a), img(xi, b)};
                        if (omask >> p & 1) std::swap(e.first, e.second);
                        return e;
                    };
                    if (literal_theta) {
                        bool found = for_each_block_bijection(d.y_off, rho, [&](const std::vector<int>& theta) {
                            for (int p = 0; p < P; ++p)
                                for (int y = d.y_off[p]; y < d.y_off[p + 1]; ++y)
                                    if (pair_of(p, y) != ends(d, t, theta[y])) return false;
                            return true;
                        });
                        if (found) return true;
                    } else {
                        bool all = true;
                        for (int p = 0; p < P && all; ++p) {
                            std::vector<std::pair<int, int>> a, b;
                            for (int y = d.y_off[p]; y < d.y_off[p + 1]; ++y) a.push_back(pair_of(p, y));
                            for (int z = d.y_off[rho[p]]; z < d.y_off[rho[p] + 1]; ++z) b.push_back(ends(d, t, z));
                            std::sort(a.begin(), a.end());
                            std::sort(b.begin(), b.end());
                            all = a == b;
                        }
                        if (all) return true;
                    }
                }
                return false;
            });
        });
    });
}

// Reduced data first, as in the classification criterion.
inline bool brute_decide(const DualData& d, const TwistPerm& s, const TwistPerm& t, bool literal_theta) {
    auto red = reduce(d, {s, t});
    return brute_conjugate(red.dual, red.twists[0], red.twists[1], literal_theta);
}

inline TwistPerm random_twist(const DualData& d, std::mt19937_64& rng) {
    TwistPerm t = TwistPerm::identity(d.ny());
    for (int p = 0; p < d.np(); ++p) std::shuffle(t.map.begin() + d.y_off[p], t.map.begin() + d.y_off[p + 1], rng);
    return t;
}

// All block-preserving twists of d.
inline std::vector<TwistPerm> all_twists(const DualData& d) {
    std::vector<TwistPerm> out;
    std::vector<int> same(d.np());
    std::iota(same.begin(), same.end(), 0);
    for_each_block_bijection(d.y_off, same, [&](const std::vector<int>& m) {
        out.push_back(TwistPerm{m});
        return false;
    });
    return out;
}

// Random valid data with at most max_y slots in E and max_x in F.
inline NccwData random_data(std::mt19937_64& rng, int max_y, int max_x) {
    auto uni = [&](int a, int b) { return std::uniform_int_distribution<int>(a, b)(rng); };
    for (;;) {
        int P = uni(1, 3), I = uni(1, 3);
        std::vector<int> ps(P), is(I);
        int ty = 0, tx = 0;
        for (auto& s : ps) ty += s = uni(1, 4);
        for (auto& s : is) tx += s = uni(1, 3);
        if (ty > max_y || tx > max_x) continue;
        NccwData d = NccwData::make(ps, is);
        for (int r = 0; r < 2; ++r)
            for (int p = 0; p < P; ++p) {
                int left = ps[p];
                std::vector<int> order(I);
                std::iota(order.begin(), order.end(), 0);
                std::shuffle(order.begin(), order.end(), rng);
                for (int i : order) {
                    int c = uni(0, left / is[i]);
                    d.mult[r][p][i] = c;
                    left -= c * is[i];
                }
            }
        if (validate_nccw(d).ok) return d;
    }
}

// Stabilized dimension drop: one p-block of size m*n, b_0 through m-points
// n times, b_1 through n-points m times.
inline NccwData dimension_drop(int m, int n) {
    NccwData d = NccwData::make({m * n}, {m, n});
    d.mult[0][0] = {n, 0};
    d.mult[1][0] = {0, m};
    return d;
}

// Every valid data set with #Y <= max_y and #X <= max_x, block sizes taken
// as ordered compositions.
inline std::vector<NccwData> all_small_data(int max_y, int max_x) {
    std::vector<std::vector<int>> ycomp, xcomp;
    std::function<void(int, std::vector<int>&, std::vector<std::vector<int>>&)> comps =
        [&](int left, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
            if (!cur.empty()) out.push_back(cur);
            for (int s = 1; s <= left; ++s) {
                cur.push_back(s);
                comps(left - s, cur, out);
                cur.pop_back();
            }
        };
    std::vector<int> cur;
    comps(max_y, cur, ycomp);
    comps(max_x, cur, xcomp);
    std::vector<NccwData> out;
    for (auto& ps : ycomp)
        for (auto& is : xcomp) {
            NccwData d = NccwData::make(ps, is);
            int P = d.np(), I = d.ni();
            std::function<void(int)> fill = [&](int k) {
                if (k == 2 * P * I) {
                    if (validate_nccw(d).ok) out.push_back(d);
                    return;
                }
                int r = k / (P * I), p = (k / I) % P, i = k % I;
                for (int c = 0; c * is[i] <= ps[p]; ++c) {
                    d.mult[r][p][i] = c;
                    if (d.used(r, p) <= ps[p]) fill(k + 1);
                }
                d.mult[r][p][i] = 0;
            };
            fill(0);
        }
    return out;
}

}  // namespace oracle
