#pragma once

// Inductive towers of dual data: one stage per level, built from the previous
// stage and a block table of the connecting map.  Every slot and vertex of a
// stage remembers where it came from one level down, which is all the
// connector (spectrum projection) needs.

#include "nccw/dyadic.hpp"
#include "nccw/model.hpp"
#include "nccw/spectrum.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace nccw {

// ------------------------------------------------------------------ kinds

// Block diagonal entry types of the C-part of a connecting map.  The first six
// are f o lambda with lambda affine; C0/C1 evaluate at 1/2 and re-enter through
// the embedded copy j0 resp. j1.
enum class Kind : std::uint8_t { Id, Rev, Up, Lo, Dn, Ld, C0, C1 };
inline constexpr int kKinds = 8;
inline constexpr std::array<Kind, kKinds> kAllKinds{Kind::Id, Kind::Rev, Kind::Up, Kind::Lo,
                                                    Kind::Dn, Kind::Ld,  Kind::C0, Kind::C1};
using KindCounts = std::array<int, kKinds>;

inline int idx(Kind k) { return static_cast<int>(k); }

inline const char* kind_name(Kind k) {
    static const char* names[] = {"id", "rev", "up", "lo", "dn", "ld", "c0", "c1"};
    return names[idx(k)];
}

inline std::optional<Kind> parse_kind(std::string_view s) {
    for (Kind k : kAllKinds)
        if (s == kind_name(k)) return k;
    return std::nullopt;
}

inline bool is_constant(Kind k) { return k == Kind::C0 || k == Kind::C1; }

inline Dyadic lambda(Kind k, const Dyadic& t) {
    switch (k) {
        case Kind::Id: return t;
        case Kind::Rev: return kOne - t;
        case Kind::Up: return kHalf + t / 2;
        case Kind::Lo: return t / 2;
        case Kind::Dn: return kOne - t / 2;
        case Kind::Ld: return kHalf - t / 2;
        default: return kHalf;
    }
}

// Preimage of v under lambda_k, if v is in the image (constants have none).
inline std::optional<Dyadic> lambda_inv(Kind k, const Dyadic& v) {
    if (v < kZero || v > kOne) return std::nullopt;
    switch (k) {
        case Kind::Id: return v;
        case Kind::Rev: return kOne - v;
        case Kind::Up: return v >= kHalf ? std::optional<Dyadic>(2 * v - 1) : std::nullopt;
        case Kind::Lo: return v <= kHalf ? std::optional<Dyadic>(2 * v) : std::nullopt;
        case Kind::Dn: return v >= kHalf ? std::optional<Dyadic>(2 - 2 * v) : std::nullopt;
        case Kind::Ld: return v <= kHalf ? std::optional<Dyadic>(1 - 2 * v) : std::nullopt;
        default: return std::nullopt;
    }
}

// 0 or 1 when the end r of lambda_k lands on an end of the lower edge, -1 when
// it lands at 1/2.
inline int through_value(Kind k, int r) {
    Dyadic v = lambda(k, r ? kOne : kZero);
    if (v == kZero) return 0;
    if (v == kOne) return 1;
    return -1;
}

// Embedded copy (0 = j0, 1 = j1) receiving a half end.
inline int half_role(Kind k, [[maybe_unused]] int r) {
    switch (k) {
        case Kind::Up: return 0;  // r = 0
        case Kind::Lo: return 1;  // r = 1
        case Kind::Dn: return 0;  // r = 1
        case Kind::Ld: return 1;  // r = 0
        case Kind::C0: return 0;
        case Kind::C1: return 1;
        default: return -1;
    }
}

inline bool uses_half_end(Kind k) { return through_value(k, 0) < 0 || through_value(k, 1) < 0; }

enum class Flavor { Unital, Projectionless };
enum class Modification { Conn, Path };

inline const char* flavor_name(Flavor f) { return f == Flavor::Unital ? "unital" : "projectionless"; }
inline const char* modification_name(Modification m) { return m == Modification::Conn ? "conn" : "path"; }

struct BuildError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// --------------------------------------------------------------- specs

// Exchanges two placed elements (column, position) of the layout at (r, q, i).
struct ColumnSwap {
    int r = 0, q = 0, i = 0;
    int col_a = 0, pos_a = 0, col_b = 0, pos_b = 0;
};

// Block table of one connecting map.
struct LevelSpec {
    std::vector<std::string> q_labels;
    std::vector<std::vector<KindCounts>> mult;  // [q][p]
    int frak = 0;                               // block carrying the F-copy, -1 none
    int grave = -1;                             // upper grave block
    int sccb = -1;                              // block receiving the self-gluing copies
    int min_f = 0;                              // lower bound for F-factor multiplicities
    std::vector<int> g;                         // per lower i, 0 = planner
    std::vector<std::vector<int>> f;            // [q][i], -1 = planner; empty = planner
    bool separate_ffactor = false;              // F-factor ends in their own j
    std::vector<ColumnSwap> swaps;
    std::vector<std::vector<bool>> theta;       // [q][i] F-factor entries start at the base point

    int nq() const { return static_cast<int>(mult.size()); }
    int count(int q, int p, Kind k) const { return mult[q][p][idx(k)]; }
};

// ------------------------------------------------------------- lineage

enum class SlotSource : std::uint8_t { Seed, Affine, FFactor, FCopy, Sccb, Ident };

struct SlotOrigin {
    SlotSource src = SlotSource::Seed;
    Kind kind = Kind::Id;
    int mu = 0;    // copy index of the block entry, F-factor index, or sccb tag
    int ref = -1;  // lower y (affine), lower x (F-factor), own vertex (constant slots)
};

struct VertexOrigin {
    bool embedded = false;
    int role = 0;  // j0 / j1 for embedded vertices
    int col = 0;   // copy index within its j for copy vertices
    int ref = -1;  // lower y (embedded) or lower x (copy); -1 at the seed
};

// Per lower index i: how the copies of X_n^i inside X_{n+1} are filled.
struct ColumnPlan {
    int g = 0;
    std::vector<int> F;                                          // per q
    std::array<std::vector<int>, 2> c;                           // per q
    std::array<std::vector<std::vector<std::pair<int, int>>>, 2> place;  // [r][q][element]
    std::array<std::vector<std::map<std::tuple<int, int, int>, int>>, 2> run_off;  // (p,kind,mu)
    std::array<std::vector<int>, 2> f_off;                       // [r][q] first F element
};

struct Stage {
    int level = 1;
    Flavor flavor = Flavor::Unital;
    Modification mod = Modification::Path;
    DualData d;
    std::vector<SlotOrigin> slot_origin;
    std::vector<VertexOrigin> vertex_origin;

    int frak = -1;   // block with the twisted X-copy
    int grave = -1;  // block with non-total b_1
    int zcell = -1;  // distinguished index carrying the Z-cell
    int sccb = -1;
    std::vector<std::array<int, 2>> embed_j;  // lower p -> (j0, j1), -1 absent
    std::vector<int> copy_j;                  // lower i -> j
    std::vector<int> sep_j;                   // lower i -> separate F-factor j, -1 none
    std::vector<ColumnPlan> plan;             // per lower i
    int ident_j = -1;                         // j receiving the identity copies
    int ident_count = 0;

    int ny() const { return d.ny(); }
    int nx() const { return d.nx(); }
};

// ------------------------------------------------------------ building

namespace detail {

struct SlotRec {
    int b0 = -1, b1 = -1, l0 = -1, l1 = -1;
    SlotOrigin o;
};

// Collects slots block by block and assigns labels for constant slots.
struct StageAssembler {
    std::vector<std::vector<SlotRec>> blocks;
    std::array<std::vector<std::vector<int>>, 2> count;  // [r][q][j]: labels used so far

    StageAssembler(int nq, int nj) : blocks(nq) {
        for (int r = 0; r < 2; ++r) count[r].assign(nq, std::vector<int>(nj, 0));
    }

    DualData finish(const std::vector<std::string>& q_labels, const std::vector<std::string>& j_labels,
                    const std::vector<int>& j_sizes, std::vector<SlotOrigin>& origins) const {
        DualData d;
        d.p_labels = q_labels;
        d.i_labels = j_labels;
        for (int s : j_sizes) d.x_off.push_back(d.x_off.back() + s);
        std::size_t total = 0;
        for (auto& b : blocks) total += b.size();
        for (int r = 0; r < 2; ++r) {
            d.b[r].reserve(total);
            d.slot[r].reserve(total);
        }
        origins.clear();
        origins.reserve(total);
        for (auto& b : blocks) {
            d.y_off.push_back(d.y_off.back() + static_cast<int>(b.size()));
            for (auto& s : b) {
                d.b[0].push_back(s.b0);
                d.b[1].push_back(s.b1);
                d.slot[0].push_back(s.b0 >= 0 ? s.l0 : -1);
                d.slot[1].push_back(s.b1 >= 0 ? s.l1 : -1);
                origins.push_back(s.o);
            }
        }
        return d;
    }
};

struct Run {
    int p;
    Kind kind;
    int mu;
    int len;
};

inline int ceil_div(int a, int b) { return (a + b - 1) / b; }

}  // namespace detail

// Chooses the number of copies g of X_n^i and the F-factor multiplicities.
// Every (r, q) column family must be filled to a common height: runs of
// length m_s(p,i) go whole into their own column, F-factor singles fill the
// rest.  Minimises g first, then F per block.
inline ColumnPlan plan_columns(const Stage& lower, const LevelSpec& spec, int i,
                               const std::array<std::vector<std::vector<int>>, 2>& m) {
    int nq = spec.nq(), np = lower.d.np();
    std::array<std::vector<std::vector<detail::Run>>, 2> runs;
    for (int r = 0; r < 2; ++r) {
        runs[r].resize(nq);
        for (int q = 0; q < nq; ++q)
            for (int p = 0; p < np; ++p)
                for (Kind k : kAllKinds) {
                    int s = through_value(k, r);
                    if (is_constant(k) || s < 0) continue;
                    int len = m[s][p][i];
                    if (len == 0) continue;
                    for (int mu = 0; mu < spec.count(q, p, k); ++mu) runs[r][q].push_back({p, k, mu, len});
                }
    }
    std::array<std::vector<int>, 2> S, R, L;
    int g_lo = 1;
    for (int r = 0; r < 2; ++r) {
        S[r].assign(nq, 0);
        R[r].assign(nq, 0);
        L[r].assign(nq, 0);
        for (int q = 0; q < nq; ++q) {
            for (auto& run : runs[r][q]) {
                S[r][q] += run.len;
                L[r][q] = std::max(L[r][q], run.len);
            }
            R[r][q] = static_cast<int>(runs[r][q].size());
            g_lo = std::max(g_lo, R[r][q]);
        }
    }
    auto f_fixed = [&](int q) -> int {
        if (spec.f.empty() || spec.f[q].empty()) return -1;
        return spec.f[q][i];
    };
    int g_given = i < static_cast<int>(spec.g.size()) ? spec.g[i] : 0;
    int g_hi = g_given > 0 ? g_given : g_lo + 256;
    for (int g = g_given > 0 ? g_given : g_lo; g <= g_hi; ++g) {
        if (g < g_lo) break;
        std::vector<int> F(nq, -1);
        bool ok = true;
        for (int q = 0; q < nq && ok; ++q) {
            int fixed = f_fixed(q);
            if (spec.separate_ffactor) {
                // F-factor ends live elsewhere; the runs alone must tile.
                for (int r = 0; r < 2; ++r)
                    if (S[r][q] % g != 0 || S[r][q] / g < L[r][q]) ok = false;
                F[q] = fixed >= 0 ? fixed : spec.min_f;
                continue;
            }
            int lo = fixed >= 0 ? fixed : spec.min_f;
            int hi = fixed >= 0 ? fixed : lo + g * (std::max(L[0][q], L[1][q]) + 2);
            for (int f = lo; f <= hi && F[q] < 0; ++f) {
                bool good = true;
                for (int r = 0; r < 2; ++r)
                    if ((S[r][q] + f) % g != 0 || (S[r][q] + f) / g < L[r][q]) good = false;
                if (good) F[q] = f;
            }
            if (F[q] < 0) ok = false;
        }
        if (!ok) continue;
        ColumnPlan plan;
        plan.g = g;
        plan.F = F;
        for (int r = 0; r < 2; ++r) {
            plan.c[r].assign(nq, 0);
            plan.place[r].resize(nq);
            plan.run_off[r].resize(nq);
            plan.f_off[r].assign(nq, 0);
            for (int q = 0; q < nq; ++q) {
                int singles = spec.separate_ffactor ? 0 : F[q];
                int c = (S[r][q] + singles) / g;
                plan.c[r][q] = c;
                std::vector<int> fill(g, 0);
                auto col_of = [&](int k) { return r == 0 ? k : g - 1 - k; };
                auto& pl = plan.place[r][q];
                int rho = 0;
                for (auto& run : runs[r][q]) {
                    plan.run_off[r][q][{run.p, idx(run.kind), run.mu}] = static_cast<int>(pl.size());
                    int col = col_of(rho++);
                    for (int k = 0; k < run.len; ++k) pl.push_back({col, fill[col]++});
                }
                plan.f_off[r][q] = static_cast<int>(pl.size());
                int k = 0;
                for (int f = 0; f < singles; ++f) {
                    while (fill[col_of(k)] >= c) ++k;
                    int col = col_of(k);
                    pl.push_back({col, fill[col]++});
                }
            }
        }
        for (auto& sw : spec.swaps) {
            if (sw.i != i) continue;
            auto& pl = plan.place[sw.r][sw.q];
            auto a = std::find(pl.begin(), pl.end(), std::pair<int, int>{sw.col_a, sw.pos_a});
            auto b = std::find(pl.begin(), pl.end(), std::pair<int, int>{sw.col_b, sw.pos_b});
            if (a == pl.end() || b == pl.end()) throw BuildError("column swap names an empty position");
            std::iter_swap(a, b);
        }
        return plan;
    }
    throw BuildError("no column layout for index " + lower.d.i_labels[i] + " (runs do not tile a common height)");
}

namespace detail {

inline void require(bool ok, const std::string& msg) {
    if (!ok) throw BuildError(msg);
}

// (m>1): the four affine kinds are present, with the relaxation at the grave block.
inline std::optional<std::string> check_m_gt_1(const Stage& lower, const LevelSpec& spec) {
    if (lower.mod == Modification::Conn) return std::nullopt;
    for (int q = 0; q < spec.nq(); ++q)
        for (int p = 0; p < lower.d.np(); ++p) {
            auto c = [&](Kind k) { return spec.count(q, p, k); };
            bool graves = lower.flavor == Flavor::Projectionless && q == spec.grave && p == lower.grave;
            if (graves) {
                if (c(Kind::Up) < 1) return "m+(" + std::to_string(q) + "," + std::to_string(p) + ") = 0 at the grave block";
                if (c(Kind::Lo) < 1 && c(Kind::Ld) < 1)
                    return "m_+ and m_- vanish at the grave block (" + std::to_string(q) + "," + std::to_string(p) + ")";
                continue;
            }
            for (Kind k : {Kind::Up, Kind::Lo, Kind::Dn, Kind::Ld})
                if (c(k) < 1)
                    return std::string("m_") + kind_name(k) + "(" + std::to_string(q) + "," + std::to_string(p) + ") = 0";
        }
    return std::nullopt;
}

}  // namespace detail

// Builds level n+1 from level n.
inline Stage build_stage(const Stage& lower, const LevelSpec& spec) {
    const DualData& L = lower.d;
    const int np = L.np(), ni = L.ni(), nq = spec.nq();
    detail::require(nq > 0, "connector needs at least one target block");
    for (auto& row : spec.mult) detail::require(static_cast<int>(row.size()) == np, "block table has wrong width");
    if (auto why = detail::check_m_gt_1(lower, spec)) throw BuildError("(m>1) violated: " + *why);
    if (lower.flavor == Flavor::Projectionless) {
        detail::require(spec.grave >= 0 && spec.grave < nq, "projectionless tower needs an upper grave block");
        // b_0 must stay total; only the upper grave block may read the lower b_1 at its 1-end.
        for (int q = 0; q < nq; ++q)
            for (Kind k : kAllKinds) {
                if (spec.count(q, lower.grave, k) == 0) continue;
                if (through_value(k, 0) == 1)
                    throw BuildError(std::string("entry ") + kind_name(k) + " reads the partial b_1 at its 0-end");
                if (q != spec.grave && through_value(k, 1) == 1)
                    throw BuildError("non-grave block reads the partial b_1: a second grave block would appear");
            }
    }
    auto m = L.multiplicities();

    Stage up;
    up.level = lower.level + 1;
    up.flavor = lower.flavor;
    up.mod = lower.mod;
    up.frak = spec.frak;
    up.grave = lower.flavor == Flavor::Projectionless ? spec.grave : -1;
    up.sccb = spec.sccb;

    // Index set J: embedded copies first, then copy columns.
    std::vector<std::string> jl;
    std::vector<int> js;
    std::vector<bool> j_embedded;
    up.embed_j.assign(np, {-1, -1});
    for (int p = 0; p < np; ++p) {
        std::array<bool, 2> need{false, false};
        for (int q = 0; q < nq; ++q)
            for (Kind k : kAllKinds) {
                if (spec.count(q, p, k) == 0) continue;
                for (int r = 0; r < 2; ++r)
                    if (through_value(k, r) < 0) need[half_role(k, r)] = true;
            }
        if (p == lower.grave) {
            // The grave block has no second embedded copy; its j1-ends use j0.
            if (need[1]) need[0] = true;
            need[1] = false;
        }
        for (int role = 0; role < 2; ++role) {
            if (!need[role]) continue;
            up.embed_j[p][role] = static_cast<int>(jl.size());
            jl.push_back(std::string(role ? "e1." : "e0.") + L.p_labels[p]);
            js.push_back(L.p_size(p));
            j_embedded.push_back(true);
        }
    }
    up.plan.resize(ni);
    up.copy_j.assign(ni, -1);
    up.sep_j.assign(ni, -1);
    for (int i = 0; i < ni; ++i) {
        up.plan[i] = plan_columns(lower, spec, i, m);
        up.copy_j[i] = static_cast<int>(jl.size());
        jl.push_back("f." + L.i_labels[i]);
        js.push_back(up.plan[i].g * L.i_size(i));
        j_embedded.push_back(false);
    }
    if (spec.separate_ffactor)
        for (int i = 0; i < ni; ++i) {
            up.sep_j[i] = static_cast<int>(jl.size());
            jl.push_back("s." + L.i_labels[i]);
            js.push_back(L.i_size(i));
            j_embedded.push_back(false);
        }
    const int nj = static_cast<int>(jl.size());
    std::vector<int> x_off{0};
    for (int s : js) x_off.push_back(x_off.back() + s);

    // Vertex lineage.
    up.vertex_origin.resize(x_off.back());
    for (int p = 0; p < np; ++p)
        for (int role = 0; role < 2; ++role) {
            int j = up.embed_j[p][role];
            if (j < 0) continue;
            for (int k = 0; k < L.p_size(p); ++k) up.vertex_origin[x_off[j] + k] = {true, role, 0, L.y_off[p] + k};
        }
    for (int i = 0; i < ni; ++i) {
        int j = up.copy_j[i], w = L.i_size(i);
        for (int col = 0; col < up.plan[i].g; ++col)
            for (int k = 0; k < w; ++k) up.vertex_origin[x_off[j] + col * w + k] = {false, 0, col, L.x_off[i] + k};
        if (up.sep_j[i] >= 0)
            for (int k = 0; k < w; ++k) up.vertex_origin[x_off[up.sep_j[i]] + k] = {false, 0, 0, L.x_off[i] + k};
    }
    auto copy_vertex = [&](int i, int col, int x) { return x_off[up.copy_j[i]] + col * L.i_size(i) + (x - L.x_off[i]); };
    auto embed_vertex = [&](int p, int role, int y) {
        int j = up.embed_j[p][role];
        if (j < 0) j = up.embed_j[p][0];
        return std::pair<int, int>{x_off[j] + (y - L.y_off[p]), j};
    };

    detail::StageAssembler as(nq, nj);
    for (int q = 0; q < nq; ++q)
        for (int i = 0; i < ni; ++i)
            for (int r = 0; r < 2; ++r) {
                as.count[r][q][up.copy_j[i]] = up.plan[i].c[r][q];
                if (up.sep_j[i] >= 0) as.count[r][q][up.sep_j[i]] = up.plan[i].F[q];
            }

    // 1. affine and constant entries
    for (int q = 0; q < nq; ++q)
        for (int p = 0; p < np; ++p)
            for (Kind k : kAllKinds)
                for (int mu = 0; mu < spec.count(q, p, k); ++mu) {
                    std::array<int, 2> half_label{-1, -1};
                    std::array<int, 2> half_j{-1, -1};
                    std::array<std::vector<int>, 2> run_base;
                    for (int r = 0; r < 2; ++r) {
                        int s = through_value(k, r);
                        if (s < 0) {
                            auto [v, j] = embed_vertex(p, half_role(k, r), L.y_off[p]);
                            (void)v;
                            half_j[r] = j;
                            half_label[r] = as.count[r][q][j]++;
                        } else {
                            run_base[r].assign(ni, -1);
                            for (int i = 0; i < ni; ++i) {
                                auto& ro = up.plan[i].run_off[r][q];
                                auto it = ro.find({p, idx(k), mu});
                                if (it != ro.end()) run_base[r][i] = it->second;
                            }
                        }
                    }
                    for (int y = L.y_off[p]; y < L.y_off[p + 1]; ++y) {
                        detail::SlotRec rec;
                        rec.o = {SlotSource::Affine, k, mu, y};
                        for (int r = 0; r < 2; ++r) {
                            int s = through_value(k, r), v = -1, lab = -1;
                            if (s < 0) {
                                v = embed_vertex(p, half_role(k, r), y).first;
                                lab = half_label[r];
                            } else if (int x = L.b[s][y]; x >= 0) {
                                int i = L.i_of(x);
                                auto [col, pos] = up.plan[i].place[r][q][run_base[r][i] + L.slot[s][y]];
                                v = copy_vertex(i, col, x);
                                lab = pos;
                            }
                            (r ? rec.b1 : rec.b0) = v;
                            (r ? rec.l1 : rec.l0) = lab;
                        }
                        as.blocks[q].push_back(rec);
                    }
                }

    // 2. F-factor entries
    for (int q = 0; q < nq; ++q)
        for (int i = 0; i < ni; ++i)
            for (int nu = 0; nu < up.plan[i].F[q]; ++nu)
                for (int x = L.x_off[i]; x < L.x_off[i + 1]; ++x) {
                    detail::SlotRec rec;
                    rec.o = {SlotSource::FFactor, Kind::Id, nu, x};
                    for (int r = 0; r < 2; ++r) {
                        int v, lab;
                        if (up.sep_j[i] >= 0) {
                            v = x_off[up.sep_j[i]] + (x - L.x_off[i]);
                            lab = nu;
                        } else {
                            auto [col, pos] = up.plan[i].place[r][q][up.plan[i].f_off[r][q] + nu];
                            v = copy_vertex(i, col, x);
                            lab = pos;
                        }
                        (r ? rec.b1 : rec.b0) = v;
                        (r ? rec.l1 : rec.l0) = lab;
                    }
                    as.blocks[q].push_back(rec);
                }

    // Copy locations of each lower i in (j, col) order, for the cyclic twist.
    const int X1 = x_off.back();
    std::vector<int> jof(X1);
    for (int j = 0; j < nj; ++j)
        for (int x = x_off[j]; x < x_off[j + 1]; ++x) jof[x] = j;
    std::vector<int> twist(X1);
    for (int x = 0; x < X1; ++x) {
        const auto& vo = up.vertex_origin[x];
        if (vo.embedded) {
            int p = L.p_of(vo.ref);
            int other = up.embed_j[p][1 - vo.role];
            twist[x] = other >= 0 ? x_off[other] + (vo.ref - L.y_off[p]) : x;
        } else {
            int i = L.i_of(vo.ref);
            std::vector<int> locs;
            for (int col = 0; col < up.plan[i].g; ++col) locs.push_back(copy_vertex(i, col, vo.ref));
            if (up.sep_j[i] >= 0) locs.push_back(x_off[up.sep_j[i]] + (vo.ref - L.x_off[i]));
            auto at = std::find(locs.begin(), locs.end(), x) - locs.begin();
            int n = static_cast<int>(locs.size());
            twist[x] = locs[(at + n - 1) % n];
        }
    }

    // Constant slots over the vertices `verts` with b_0 = id and b_1 = w.  One
    // label per (r, j) touched, so each bijection counts as one copy per j.
    auto add_constant = [&](int q, const std::vector<int>& verts, auto w, SlotOrigin o) {
        std::array<std::map<int, int>, 2> lab;
        auto label = [&](int r, int x) {
            int j = jof[x];
            auto it = lab[r].find(j);
            if (it == lab[r].end()) it = lab[r].emplace(j, as.count[r][q][j]++).first;
            return it->second;
        };
        for (int x : verts) {
            int t = w(x);
            o.ref = x;
            as.blocks[q].push_back({x, t, label(0, x), label(1, t), o});
        }
    };

    // 3. the F-copy of X_{n+1} with the flip / cyclic twist
    if (spec.frak >= 0) {
        detail::require(spec.frak < nq, "F-copy block out of range");
        std::vector<int> all(X1);
        std::iota(all.begin(), all.end(), 0);
        add_constant(spec.frak, all, [&](int x) { return twist[x]; }, {SlotSource::FCopy, Kind::Id, 0, -1});
    }

    // 4. self-gluing copies: per copy d of i inside X^j, fix d and cycle the rest
    if (spec.sccb >= 0) {
        detail::require(spec.sccb < nq, "sccb block out of range");
        int tag = 0;
        for (int i = 0; i < ni; ++i) {
            int j = up.copy_j[i], w = L.i_size(i), g = up.plan[i].g;
            for (int dd = 0; dd < g; ++dd, ++tag) {
                auto perm = [&, dd](int x) {
                    int loc = x - x_off[j], col = loc / w, k = loc % w;
                    if (col == dd || g <= 2) return x;
                    int nxt = (col + 1) % g;
                    if (nxt == dd) nxt = (nxt + 1) % g;
                    return x_off[j] + nxt * w + k;
                };
                std::vector<int> verts(x_off[j + 1] - x_off[j]);
                std::iota(verts.begin(), verts.end(), x_off[j]);
                add_constant(spec.sccb, verts, perm, {SlotSource::Sccb, Kind::Id, tag, -1});
            }
        }
    }

    std::vector<std::string> ql = spec.q_labels;
    if (static_cast<int>(ql.size()) != nq) {
        ql.clear();
        for (int q = 0; q < nq; ++q) ql.push_back("q" + std::to_string(q + 1));
    }
    up.d = as.finish(ql, jl, js, up.slot_origin);
    up.zcell = lower.zcell >= 0 ? up.copy_j[lower.zcell] : -1;

    // Every (r, q, j) must hit all of X^j equally often.
    auto errs = check_dual(up.d);
    if (!errs.empty()) throw BuildError("stage " + std::to_string(up.level) + " is not valid dual data: " + errs.front());
    return up;
}

// Appends `copies` identity copies of X^j to every block (b_0 = b_1 = id).
inline void add_identity_copies(Stage& st, int j, int copies) {
    if (copies <= 0) return;
    DualData& d = st.d;
    if (j < 0 || j >= d.ni()) throw BuildError("identity copies: index out of range");
    auto m = d.multiplicities();
    DualData out;
    out.p_labels = d.p_labels;
    out.i_labels = d.i_labels;
    out.x_off = d.x_off;
    std::vector<SlotOrigin> org;
    for (int p = 0; p < d.np(); ++p) {
        for (int y = d.y_off[p]; y < d.y_off[p + 1]; ++y) {
            for (int r = 0; r < 2; ++r) {
                out.b[r].push_back(d.b[r][y]);
                out.slot[r].push_back(d.slot[r][y]);
            }
            org.push_back(y < static_cast<int>(st.slot_origin.size()) ? st.slot_origin[y] : SlotOrigin{});
        }
        for (int c = 0; c < copies; ++c)
            for (int x = d.x_off[j]; x < d.x_off[j + 1]; ++x) {
                for (int r = 0; r < 2; ++r) {
                    out.b[r].push_back(x);
                    out.slot[r].push_back(m[r][p][j] + c);
                }
                org.push_back({SlotSource::Ident, Kind::Id, c, x});
            }
        out.y_off.push_back(static_cast<int>(out.b[0].size()));
    }
    st.d = std::move(out);
    st.slot_origin = std::move(org);
    st.ident_j = j;
    st.ident_count += copies;
}

// ---------------------------------------------------------------- seeds

// Level-1 stage from boundary data.  With `twist_block` >= 0 that block also
// receives a copy of X_1 with b_0 = id and b_1 the cyclic predecessor
// x_l -> x_{l-1} over all of X_1.
inline Stage seed_stage(const NccwData& data, Flavor flavor, Modification mod, int twist_block = -1, int zcell = -1) {
    auto rep = validate_nccw(data);
    if (!rep.ok) throw BuildError("invalid seed: " + rep.errors.front());
    Stage st;
    st.level = 1;
    st.flavor = flavor;
    st.mod = mod;
    st.zcell = zcell;
    DualData base = dualize(data);
    if (flavor == Flavor::Projectionless) {
        if (!rep.grave) throw BuildError("projectionless seed needs exactly one grave block");
        st.grave = *rep.grave;
    } else {
        for (int r = 0; r < 2; ++r)
            for (int p = 0; p < data.np(); ++p)
                if (!rep.unital[r][p]) throw BuildError("unital seed has a non-unital boundary map");
    }
    if (twist_block < 0) {
        st.d = base;
        st.slot_origin.assign(base.ny(), {});
    } else {
        auto m = base.multiplicities();
        int X = base.nx();
        std::vector<int> xs(X);
        std::iota(xs.begin(), xs.end(), 0);
        DualData d;
        d.p_labels = base.p_labels;
        d.i_labels = base.i_labels;
        d.x_off = base.x_off;
        for (int p = 0; p < base.np(); ++p) {
            for (int y = base.y_off[p]; y < base.y_off[p + 1]; ++y) {
                for (int r = 0; r < 2; ++r) {
                    d.b[r].push_back(base.b[r][y]);
                    d.slot[r].push_back(base.slot[r][y]);
                }
                st.slot_origin.push_back({});
            }
            if (p == twist_block)
                for (int x = 0; x < X; ++x) {
                    int t = (x + X - 1) % X;
                    d.b[0].push_back(x);
                    d.b[1].push_back(t);
                    d.slot[0].push_back(m[0][p][base.i_of(x)]);
                    d.slot[1].push_back(m[1][p][base.i_of(t)]);
                    st.slot_origin.push_back({SlotSource::FCopy, Kind::Id, 0, x});
                }
            d.y_off.push_back(static_cast<int>(d.b[0].size()));
        }
        st.d = std::move(d);
        st.frak = twist_block;
    }
    st.vertex_origin.assign(st.d.nx(), {});
    auto errs = check_dual(st.d);
    if (!errs.empty()) throw BuildError("seed: " + errs.front());
    return st;
}

// ---------------------------------------------------------------- towers

enum Toggle : unsigned {
    kNlc1 = 1u << 0,
    kNlc2 = 1u << 1,
    kNop1 = 1u << 2,
    kNop2 = 1u << 3,
    kClsg = 1u << 4,
    kNp4ni = 1u << 5,
    kSccb = 1u << 6,
};

inline const std::vector<std::pair<std::string, unsigned>>& toggle_names() {
    static const std::vector<std::pair<std::string, unsigned>> t{{"nlc1", kNlc1}, {"nlc2", kNlc2}, {"nop1", kNop1},
                                                                 {"nop2", kNop2}, {"clsg", kClsg}, {"np4ni", kNp4ni},
                                                                 {"sccb", kSccb}};
    return t;
}

inline std::string toggles_to_string(unsigned t) {
    std::string s;
    for (auto& [n, b] : toggle_names())
        if (t & b) s += (s.empty() ? "" : ",") + n;
    return s.empty() ? "none" : s;
}

// Uniform block table: every (q,p) gets `base`; the grave pair gets `grave`.
struct LevelRule {
    int nq = 1;
    KindCounts base{};
    std::optional<KindCounts> grave_counts;
    int frak = 0;
    int grave = -1;
    bool sccb = false;
};

struct FamilySpec {
    Modification mod = Modification::Path;
    Flavor flavor = Flavor::Unital;
    unsigned toggles = 0;
    LevelRule rule;
    std::vector<int> m_seq;  // identity copies added after stage n (index n-1)
    std::vector<int> j_sel;  // optional index per level for those copies
};

inline LevelSpec make_level_spec(const Stage& lower, const FamilySpec& fam) {
    const LevelRule& rule = fam.rule;
    LevelSpec s;
    s.mult.assign(rule.nq, std::vector<KindCounts>(lower.d.np(), rule.base));
    if (lower.flavor == Flavor::Projectionless) {
        s.grave = rule.grave >= 0 ? rule.grave : 0;
        if (rule.grave_counts) s.mult[s.grave][lower.grave] = *rule.grave_counts;
    }
    s.frak = rule.frak;
    s.sccb = (fam.toggles & kSccb) && rule.sccb ? rule.nq - 1 : -1;
    s.min_f = (fam.toggles & kNlc1) ? 2 : 0;
    return s;
}

struct Tower {
    FamilySpec family;
    std::vector<Stage> stages;     // stages[n-1] is level n
    std::vector<LevelSpec> specs;  // specs[n-1] connects level n to n+1

    const Stage& level(int n) const { return stages.at(n - 1); }
    int depth() const { return static_cast<int>(stages.size()); }
};

inline int default_ident_j(const Stage& st) {
    if (st.level == 1 || st.copy_j.empty()) return 0;
    return st.copy_j[0];
}

inline void apply_family_copies(Stage& st, const FamilySpec& fam) {
    int n = st.level;
    if (n - 1 >= static_cast<int>(fam.m_seq.size())) return;
    int count = fam.m_seq[n - 1];
    if (count <= 0) return;
    int j = (n - 1 < static_cast<int>(fam.j_sel.size()) && fam.j_sel[n - 1] >= 0) ? fam.j_sel[n - 1] : default_ident_j(st);
    add_identity_copies(st, j, count);
}

// Builds levels 1..depth.  `hook` may adjust each level's block table.
template <class Hook>
inline Tower build_tower(Stage seed, const FamilySpec& fam, int depth, Hook hook) {
    Tower t;
    t.family = fam;
    apply_family_copies(seed, fam);
    t.stages.push_back(std::move(seed));
    while (t.depth() < depth) {
        LevelSpec spec = make_level_spec(t.stages.back(), fam);
        hook(t.stages.back(), spec);
        Stage next = build_stage(t.stages.back(), spec);
        apply_family_copies(next, fam);
        t.specs.push_back(std::move(spec));
        t.stages.push_back(std::move(next));
    }
    return t;
}

inline Tower build_tower(Stage seed, const FamilySpec& fam, int depth) {
    return build_tower(std::move(seed), fam, depth, [](const Stage&, LevelSpec&) {});
}

inline KindCounts kinds(std::initializer_list<std::pair<Kind, int>> l) {
    KindCounts c{};
    for (auto [k, v] : l) c[idx(k)] = v;
    return c;
}

// Two independent summands joined only through the twisted X-copy in p1.
inline Stage conn_seed(bool with_twist = true) {
    NccwData d = NccwData::make({2, 3}, {1, 1});
    d.p_labels = {"p1", "p2"};
    d.i_labels = {"i1", "i2"};
    for (int r = 0; r < 2; ++r) {
        d.mult[r][0][0] = 2;
        d.mult[r][1][1] = 3;
    }
    return seed_stage(d, Flavor::Unital, Modification::Conn, with_twist ? 0 : -1, 0);
}

inline FamilySpec conn_family() {
    FamilySpec f;
    f.mod = Modification::Conn;
    f.rule.nq = 2;
    f.rule.base = kinds({{Kind::Id, 1}, {Kind::Rev, 1}});
    f.rule.frak = 0;
    return f;
}

inline NccwData single_block_seed(int p_size, int m0, int m1) {
    NccwData d = NccwData::make({p_size}, {1});
    d.p_labels = {"p"};
    d.i_labels = {"i"};
    d.mult[0][0][0] = m0;
    d.mult[1][0][0] = m1;
    return d;
}

inline unsigned all_path_toggles() { return kNlc1 | kNlc2 | kNop1 | kNop2 | kClsg | kNp4ni; }

// Unital path tower satisfying every path condition.
inline Stage nop_seed() { return seed_stage(single_block_seed(5, 5, 5), Flavor::Unital, Modification::Path); }

inline FamilySpec nop_family() {
    FamilySpec f;
    f.mod = Modification::Path;
    f.toggles = all_path_toggles();
    f.rule.base = kinds({{Kind::Up, 3}, {Kind::Lo, 3}, {Kind::Dn, 3}, {Kind::Ld, 3}, {Kind::C0, 9}});
    return f;
}

// Stably projectionless tower: one grave block whose b_1 misses one slot.
inline Stage spl_seed() {
    return seed_stage(single_block_seed(3, 3, 2), Flavor::Projectionless, Modification::Path);
}

inline FamilySpec spl_family() {
    FamilySpec f;
    f.mod = Modification::Path;
    f.flavor = Flavor::Projectionless;
    f.toggles = kNlc1;
    f.rule.grave = 0;
    f.rule.grave_counts = kinds({{Kind::Up, 2}, {Kind::Lo, 2}, {Kind::C0, 2}});
    return f;
}

// Family used for the invariant sequence and its separation.
inline Stage sccb_seed() { return seed_stage(single_block_seed(5, 5, 5), Flavor::Unital, Modification::Path); }

inline FamilySpec sccb_family(std::vector<int> m_seq) {
    FamilySpec f;
    f.mod = Modification::Path;
    f.toggles = kClsg | kNp4ni | kSccb;
    f.rule.base = kinds({{Kind::Up, 2}, {Kind::Lo, 2}, {Kind::Dn, 2}, {Kind::Ld, 2}, {Kind::C0, 1}, {Kind::C1, 1}});
    f.rule.sccb = true;
    f.m_seq = std::move(m_seq);
    return f;
}

// ------------------------------------------------------ spectrum points

// A point of the spectrum of a stage: a vertex or an interior point of an edge.
struct SPoint {
    bool vertex = true;
    int id = -1;
    Dyadic t = kZero;

    static SPoint at_vertex(int x) { return {true, x, kZero}; }
    static SPoint interior(int y, Dyadic t) { return {false, y, t}; }
    bool operator==(const SPoint& o) const { return vertex == o.vertex && id == o.id && (vertex || t == o.t); }
    bool operator!=(const SPoint& o) const { return !(*this == o); }
};

inline std::string to_string(const SPoint& p) {
    if (p.vertex) return "x" + std::to_string(p.id);
    return "[" + to_string(p.t) + ",y" + std::to_string(p.id) + "]";
}

// [t, y] as a point; empty at a free end.
inline std::optional<SPoint> edge_point(const DualData& d, int y, const Dyadic& t) {
    if (t == kZero || t == kOne) {
        int x = d.b[t == kOne][y];
        if (x < 0) return std::nullopt;
        return SPoint::at_vertex(x);
    }
    return SPoint::interior(y, t);
}

inline SPoint project_vertex(const Stage& upper, const Stage& lower, int x) {
    const auto& vo = upper.vertex_origin.at(x);
    (void)lower;
    if (vo.embedded) return SPoint::interior(vo.ref, kHalf);
    return SPoint::at_vertex(vo.ref);
}

// The connecting map on spectra: upper point -> lower point.
inline std::optional<SPoint> project(const Stage& upper, const Stage& lower, const SPoint& pt) {
    if (pt.vertex) return project_vertex(upper, lower, pt.id);
    const auto& o = upper.slot_origin.at(pt.id);
    switch (o.src) {
        case SlotSource::Affine: return edge_point(lower.d, o.ref, lambda(o.kind, pt.t));
        case SlotSource::FFactor: return SPoint::at_vertex(o.ref);
        case SlotSource::Seed: return std::nullopt;
        default: return project_vertex(upper, lower, o.ref);
    }
}

inline std::optional<SPoint> project_edge_point(const Stage& upper, const Stage& lower, int y, const Dyadic& t) {
    auto p = edge_point(upper.d, y, t);
    if (!p) return std::nullopt;
    return project(upper, lower, *p);
}

// ---------------------------------------------------------- connector index

struct Csr {
    std::vector<int> off{0}, val;
    int size(int k) const { return off[k + 1] - off[k]; }
    const int* begin(int k) const { return val.data() + off[k]; }
    const int* end(int k) const { return val.data() + off[k + 1]; }
};

namespace detail {
template <class Key>
inline Csr make_csr(int n, int m, Key key) {
    Csr c;
    c.off.assign(n + 1, 0);
    for (int e = 0; e < m; ++e)
        if (int k = key(e); k >= 0) c.off[k + 1]++;
    for (int k = 0; k < n; ++k) c.off[k + 1] += c.off[k];
    c.val.assign(c.off[n], 0);
    std::vector<int> pos(c.off.begin(), c.off.end() - 1);
    for (int e = 0; e < m; ++e)
        if (int k = key(e); k >= 0) c.val[pos[k]++] = e;
    return c;
}
}  // namespace detail

// Fibres of the connecting map, by lower cell.
struct ConnectorIndex {
    Csr edge_slots;      // lower y  -> upper affine/constant-entry slots over y
    Csr edge_embedded;   // lower y  -> upper embedded vertices over y
    Csr vertex_copies;   // lower x  -> upper copy vertices over x
    Csr vertex_ffactor;  // lower x  -> upper F-factor slots over x
    Csr const_slots;     // upper x' -> upper F-copy / sccb / identity slots over x'
};

inline ConnectorIndex build_connector(const Stage& lower, const Stage& upper) {
    ConnectorIndex c;
    int Yu = upper.ny(), Xu = upper.nx(), Yl = lower.ny(), Xl = lower.nx();
    const auto& so = upper.slot_origin;
    const auto& vo = upper.vertex_origin;
    c.edge_slots = detail::make_csr(Yl, Yu, [&](int e) { return so[e].src == SlotSource::Affine ? so[e].ref : -1; });
    c.edge_embedded = detail::make_csr(Yl, Xu, [&](int x) { return vo[x].embedded ? vo[x].ref : -1; });
    c.vertex_copies = detail::make_csr(Xl, Xu, [&](int x) { return !vo[x].embedded ? vo[x].ref : -1; });
    c.vertex_ffactor = detail::make_csr(Xl, Yu, [&](int e) { return so[e].src == SlotSource::FFactor ? so[e].ref : -1; });
    c.const_slots = detail::make_csr(Xu, Yu, [&](int e) {
        auto s = so[e].src;
        return (s == SlotSource::FCopy || s == SlotSource::Sccb || s == SlotSource::Ident) ? so[e].ref : -1;
    });
    return c;
}

// ------------------------------------------------------------- spectra

// Spectrum of a stage; the Z-cell index's vertices are marked as cells.
inline TopGraph spec_b_gen(const Stage& st, bool labels = true) {
    TopGraph g;
    const DualData& d = st.d;
    g.vertices.reserve(d.nx());
    g.edges.reserve(d.ny());
    for (int i = 0; i < d.ni(); ++i)
        for (int x = d.x_off[i]; x < d.x_off[i + 1]; ++x)
            g.vertices.push_back({i == st.zcell ? VertexKind::ZCell : VertexKind::X,
                                  labels ? d.i_labels[i] + ":" + std::to_string(x - d.x_off[i] + 1) : std::string(), x});
    for (int p = 0; p < d.np(); ++p)
        for (int y = d.y_off[p]; y < d.y_off[p + 1]; ++y)
            g.edges.push_back({d.b[0][y], d.b[1][y],
                               labels ? d.p_labels[p] + ":" + std::to_string(y - d.y_off[p] + 1) : std::string(), p});
    return g;
}

// Number of path components, without materialising a TopGraph.
inline int stage_components(const Stage& st) {
    const DualData& d = st.d;
    std::vector<int> par(d.nx());
    std::iota(par.begin(), par.end(), 0);
    auto find = [&](int x) {
        while (par[x] != x) x = par[x] = par[par[x]];
        return x;
    };
    int open = 0;
    for (int y = 0; y < d.ny(); ++y) {
        int u = d.b[0][y], v = d.b[1][y];
        if (u >= 0 && v >= 0)
            par[find(u)] = find(v);
        else if (u < 0 && v < 0)
            open++;
    }
    int comps = 0;
    for (int x = 0; x < d.nx(); ++x) comps += find(x) == x;
    return comps + open;
}

inline std::vector<int> block_sizes(const Stage& st) {
    std::vector<int> s;
    for (int p = 0; p < st.d.np(); ++p) s.push_back(st.d.p_size(p));
    return s;
}

}  // namespace nccw
