#pragma once

// Paths in the spectrum of a stage as exact token lists, lifting along the
// connecting map, and the K_{3,3} certificates built from lifted paths.

#include "nccw/spectrum.hpp"
#include "nccw/tower.hpp"

#include <deque>
#include <random>
#include <set>
#include <string>
#include <vector>

namespace nccw {

// One piece of itinerary on an edge: a monotone move from a to b, or a stay
// when a == b.  `base` records which base token a lifted token covers.
struct PathToken {
    int edge = -1;
    Dyadic a = kZero, b = kZero;
    int base = -1;

    bool stay() const { return a == b; }
};

struct DyadicPath {
    std::vector<PathToken> tokens;
    bool p3a_start = false;  // first token may leave a key value without stopping there
    bool p3a_end = false;    // same for arriving at the last value
};

// A point named by an edge and a coordinate on it.
struct EdgePoint {
    int edge = -1;
    Dyadic t = kZero;
};

inline std::string to_string(const PathToken& k) {
    std::string s = k.stay() ? "stay(" + to_string(k.a) : "move(" + to_string(k.a) + "->" + to_string(k.b);
    return s + ", y" + std::to_string(k.edge) + ")";
}

inline std::string to_string(const DyadicPath& p) {
    std::string s;
    for (auto& k : p.tokens) s += (s.empty() ? "" : " ") + to_string(k);
    return s;
}

struct PathCheck {
    bool ok = true;
    std::string why;
};

// Continuity, (P1) with stops at every key value a move touches, (P2), and no
// free ends.
inline PathCheck validate_path(const DualData& d, const DyadicPath& p) {
    auto bad = [](std::string m) { return PathCheck{false, std::move(m)}; };
    const auto& ts = p.tokens;
    if (ts.empty()) return bad("empty path");
    bool p2 = false;
    for (std::size_t k = 0; k < ts.size(); ++k) {
        const auto& t = ts[k];
        if (t.edge < 0 || t.edge >= d.ny()) return bad("token " + std::to_string(k) + ": edge out of range");
        for (const Dyadic* v : {&t.a, &t.b})
            if (*v < kZero || *v > kOne || !is_dyadic(*v)) return bad("token " + std::to_string(k) + ": value not dyadic in [0,1]");
        auto pa = edge_point(d, t.edge, t.a), pb = edge_point(d, t.edge, t.b);
        if (!pa || !pb) return bad("token " + std::to_string(k) + " touches a free end");
        if (t.stay()) {
            p2 = p2 || is_key(t.a);
        } else {
            Dyadic lo = std::min(t.a, t.b), hi = std::max(t.a, t.b);
            if (lo < kHalf && kHalf < hi) return bad("token " + std::to_string(k) + ": move passes 1/2 without stopping");
            bool first = k == 0, last = k + 1 == ts.size();
            if (is_key(t.a) && !(first && p.p3a_start)) {
                if (first || !ts[k - 1].stay()) return bad("token " + std::to_string(k) + ": move leaves a key value without a stop");
            }
            if (is_key(t.b) && !(last && p.p3a_end)) {
                if (last || !ts[k + 1].stay()) return bad("token " + std::to_string(k) + ": move reaches a key value without a stop");
            }
        }
        if (k > 0) {
            auto prev = edge_point(d, ts[k - 1].edge, ts[k - 1].b);
            if (*prev != *pa) return bad("tokens " + std::to_string(k - 1) + "," + std::to_string(k) + " do not meet");
        }
    }
    if (!p2) return bad("no stop at 0, 1/2 or 1");
    return {};
}

inline SPoint path_start(const DualData& d, const DyadicPath& p) {
    return *edge_point(d, p.tokens.front().edge, p.tokens.front().a);
}
inline SPoint path_end(const DualData& d, const DyadicPath& p) {
    return *edge_point(d, p.tokens.back().edge, p.tokens.back().b);
}

namespace detail {

// Appends a walk along one edge, split at 1/2 with a stop.
inline void walk(std::vector<PathToken>& out, int e, Dyadic from, Dyadic to, int base) {
    if (from == to) return;
    Dyadic lo = std::min(from, to), hi = std::max(from, to);
    if (lo < kHalf && kHalf < hi) {
        out.push_back({e, from, kHalf, base});
        out.push_back({e, kHalf, kHalf, base});
        out.push_back({e, kHalf, to, base});
    } else {
        out.push_back({e, from, to, base});
    }
}

// Inserts stops next to moves that touch a key value.
inline void add_key_stops(const DualData& d, DyadicPath& p) {
    std::vector<PathToken> out;
    const auto& ts = p.tokens;
    for (std::size_t k = 0; k < ts.size(); ++k) {
        const auto& t = ts[k];
        bool first = k == 0, last = k + 1 == ts.size();
        if (!t.stay() && is_key(t.a) && !(first && p.p3a_start) && (out.empty() || !out.back().stay()))
            out.push_back({t.edge, t.a, t.a, t.base});
        out.push_back(t);
        if (!t.stay() && is_key(t.b) && !(last && p.p3a_end) && (last || !ts[k + 1].stay()))
            out.push_back({t.edge, t.b, t.b, t.base});
    }
    // Drop repeated stops at the same point with the same base token.
    std::vector<PathToken> clean;
    for (auto& t : out) {
        if (!clean.empty() && t.stay() && clean.back().stay() && t.base == clean.back().base &&
            *edge_point(d, t.edge, t.a) == *edge_point(d, clean.back().edge, clean.back().a))
            continue;
        clean.push_back(t);
    }
    p.tokens = std::move(clean);
}

}  // namespace detail

// Some edge end at each vertex, to name vertices as edge points.
inline std::vector<EdgePoint> vertex_anchors(const DualData& d) {
    std::vector<EdgePoint> a(d.nx());
    for (int y = d.ny() - 1; y >= 0; --y)
        for (int r = 1; r >= 0; --r)
            if (int x = d.b[r][y]; x >= 0) a[x] = {y, r ? kOne : kZero};
    return a;
}

// ------------------------------------------------------------ fibres

// Upper cells over one lower key point: vertices and the edges joining them.
struct Fiber {
    std::vector<int> verts;
    std::vector<int> edges;
};

inline Fiber fiber_over(const Stage& lower, const Stage& upper, const ConnectorIndex& idx, const SPoint& P) {
    (void)lower;
    Fiber f;
    auto add_const = [&] {
        for (int v : f.verts)
            for (const int* e = idx.const_slots.begin(v); e != idx.const_slots.end(v); ++e) f.edges.push_back(*e);
    };
    if (P.vertex) {
        f.verts.assign(idx.vertex_copies.begin(P.id), idx.vertex_copies.end(P.id));
        f.edges.assign(idx.vertex_ffactor.begin(P.id), idx.vertex_ffactor.end(P.id));
        add_const();
    } else if (P.t == kHalf) {
        f.verts.assign(idx.edge_embedded.begin(P.id), idx.edge_embedded.end(P.id));
        for (const int* e = idx.edge_slots.begin(P.id); e != idx.edge_slots.end(P.id); ++e)
            if (is_constant(upper.slot_origin[*e].kind)) f.edges.push_back(*e);
        add_const();
    }
    std::sort(f.edges.begin(), f.edges.end());
    f.edges.erase(std::unique(f.edges.begin(), f.edges.end()), f.edges.end());
    return f;
}

namespace detail {

struct Hop {
    int edge;
    int from_end;  // 0: traverse b_0 -> b_1
};

// Shortest walk from u to w inside the fibre; `banned` edge is avoided when possible.
inline std::optional<std::vector<Hop>> fiber_route(const DualData& d, const Fiber& f, int u, int w, int banned = -1) {
    if (u == w) return std::vector<Hop>{};
    std::map<int, std::vector<Hop>> adj;
    for (int e : f.edges) {
        if (e == banned) continue;
        int a = d.b[0][e], b = d.b[1][e];
        if (a < 0 || b < 0 || a == b) continue;
        adj[a].push_back({e, 0});
        adj[b].push_back({e, 1});
    }
    std::map<int, std::pair<int, Hop>> prev;
    std::deque<int> q{u};
    prev[u] = {-1, {-1, 0}};
    while (!q.empty()) {
        int v = q.front();
        q.pop_front();
        if (v == w) break;
        for (auto h : adj[v]) {
            int nx = d.b[1 - h.from_end][h.edge];
            if (prev.count(nx)) continue;
            prev[nx] = {v, h};
            q.push_back(nx);
        }
    }
    if (!prev.count(w)) return std::nullopt;
    std::vector<Hop> path;
    for (int v = w; v != u; v = prev[v].first) path.push_back(prev[v].second);
    std::reverse(path.begin(), path.end());
    return path;
}

inline std::set<int> fiber_component(const DualData& d, const Fiber& f, int u) {
    std::set<int> seen{u};
    std::vector<int> st{u};
    while (!st.empty()) {
        int v = st.back();
        st.pop_back();
        for (int e : f.edges)
            for (int r = 0; r < 2; ++r)
                if (d.b[r][e] == v && d.b[1 - r][e] >= 0 && seen.insert(d.b[1 - r][e]).second) st.push_back(d.b[1 - r][e]);
    }
    return seen;
}

inline bool on_fiber_edge(const Fiber& f, int e) { return std::binary_search(f.edges.begin(), f.edges.end(), e); }

// Affine slots over y whose image contains the closed half [0,1/2] (low) or [1/2,1].
inline bool covers(Kind k, bool low) {
    switch (k) {
        case Kind::Id:
        case Kind::Rev: return true;
        case Kind::Lo:
        case Kind::Ld: return low;
        case Kind::Up:
        case Kind::Dn: return !low;
        default: return false;
    }
}

}  // namespace detail

struct LiftError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Lifts a base path at the lower stage to the upper stage, starting at lift0
// and ending at lift1.  Open pieces are lifted through the inverse of the
// affine entry of a chosen slot; stops at 0, 1/2, 1 become walks inside the
// fibre.  Choices are lexicographically least; `alternate` takes the second
// candidate where one exists.
inline DyadicPath lift_path(const Stage& lower, const Stage& upper, const ConnectorIndex& idx, const DyadicPath& base,
                            EdgePoint lift0, EdgePoint lift1, bool alternate = false) {
    const DualData& L = lower.d;
    const DualData& U = upper.d;
    if (auto chk = validate_path(L, base); !chk.ok) throw LiftError("malformed base path: " + chk.why);
    auto P0 = edge_point(U, lift0.edge, lift0.t), P1 = edge_point(U, lift1.edge, lift1.t);
    if (!P0 || !P1) throw LiftError("lift endpoint is a free end");
    if (project(upper, lower, *P0) != path_start(L, base)) throw LiftError("lift0 does not project to the start of the base path");
    if (project(upper, lower, *P1) != path_end(L, base)) throw LiftError("lift1 does not project to the end of the base path");

    // Group tokens: plateaus (stops at key values at one point) and open runs.
    struct Group {
        bool plateau;
        int first, last;
        SPoint P;
        int edge;
        bool low;
    };
    std::vector<Group> groups;
    const auto& bt = base.tokens;
    for (int k = 0; k < static_cast<int>(bt.size()); ++k) {
        const auto& t = bt[k];
        bool key_stay = t.stay() && is_key(t.a);
        if (key_stay) {
            SPoint P = *edge_point(L, t.edge, t.a);
            if (!groups.empty() && groups.back().plateau && groups.back().P == P) {
                groups.back().last = k;
                continue;
            }
            groups.push_back({true, k, k, P, t.edge, false});
        } else {
            bool low = std::max(t.a, t.b) <= kHalf;
            if (!groups.empty() && !groups.back().plateau) {
                auto& g = groups.back();
                if (g.edge != t.edge || g.low != low) throw LiftError("open run changes edge or half");
                g.last = k;
                continue;
            }
            groups.push_back({false, k, k, {}, t.edge, low});
        }
    }

    std::vector<PathToken> out;
    EdgePoint cur = lift0;
    auto cur_point = [&] { return *edge_point(U, cur.edge, cur.t); };

    // Candidate slots for an open run, in slot order.
    auto run_candidates = [&](const Group& g) {
        std::vector<int> c;
        for (const int* e = idx.edge_slots.begin(g.edge); e != idx.edge_slots.end(g.edge); ++e)
            if (detail::covers(upper.slot_origin[*e].kind, g.low)) c.push_back(*e);
        return c;
    };
    auto lifted = [&](int s, const Dyadic& v) { return *lambda_inv(upper.slot_origin[s].kind, v); };
    auto run_start = [&](int s, const Group& g) { return edge_point(U, s, lifted(s, bt[g.first].a)); };
    auto run_end = [&](int s, const Group& g) { return edge_point(U, s, lifted(s, bt[g.last].b)); };

    // Picks the slot for open run g; `reach` decides admissible start points.
    auto pick = [&](std::size_t gi, auto reach) -> int {
        const Group& g = groups[gi];
        bool last = gi + 1 == groups.size();
        std::vector<int> ok;
        for (int s : run_candidates(g)) {
            auto st = run_start(s, g), en = run_end(s, g);
            if (!st || !en || !reach(*st)) continue;
            if (last && *en != *P1) continue;
            ok.push_back(s);
        }
        if (ok.empty()) throw LiftError("no slot over y" + std::to_string(g.edge) + " continues the lift");
        int forced = gi == 0 ? lift0.edge : (last ? lift1.edge : -1);
        if (std::find(ok.begin(), ok.end(), forced) != ok.end()) return forced;
        return alternate && ok.size() > 1 ? ok[1] : ok[0];
    };

    std::vector<int> chosen(groups.size(), -1);
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        const Group& g = groups[gi];
        if (g.plateau) {
            Fiber f = fiber_over(lower, upper, idx, g.P);
            // Where the walk inside the fibre starts.
            std::optional<int> from;
            SPoint cp = cur_point();
            if (cp.vertex) {
                from = cp.id;
            } else if (detail::on_fiber_edge(f, cur.edge)) {
                out.push_back({cur.edge, cur.t, cur.t, g.first});
                detail::walk(out, cur.edge, cur.t, kZero, g.first);
                cur = {cur.edge, kZero};
                from = U.b[0][cur.edge];
            }
            std::set<int> comp;
            if (from) comp = detail::fiber_component(U, f, *from);
            auto reach = [&](const SPoint& p) { return p.vertex ? comp.count(p.id) > 0 : p == cp; };
            // Target point and the fibre vertex to walk to.
            std::optional<EdgePoint> target;
            if (gi + 1 < groups.size()) {
                int s = pick(gi + 1, reach);
                chosen[gi + 1] = s;
                target = EdgePoint{s, lifted(s, bt[groups[gi + 1].first].a)};
            } else {
                target = lift1;
            }
            SPoint tp = *edge_point(U, target->edge, target->t);
            std::optional<int> to;
            bool tail_walk = false;
            if (tp.vertex) {
                to = tp.id;
            } else if (detail::on_fiber_edge(f, target->edge)) {
                to = U.b[0][target->edge];
                tail_walk = true;
            } else if (tp != cp) {
                throw LiftError("lift target is not in the fibre component of the current point");
            }
            out.push_back({cur.edge, cur.t, cur.t, g.first});
            if (to) {
                if (!from) throw LiftError("fibre walk from a point that is not a vertex");
                std::optional<std::vector<detail::Hop>> route = detail::fiber_route(U, f, *from, *to);
                if (!route) throw LiftError("no route inside the fibre over " + to_string(g.P));
                if (alternate && !route->empty())
                    if (auto alt = detail::fiber_route(U, f, *from, *to, route->front().edge)) route = alt;
                for (auto h : *route) {
                    Dyadic a = h.from_end ? kOne : kZero;
                    detail::walk(out, h.edge, a, kOne - a, g.first);
                    cur = {h.edge, kOne - a};
                }
                if (tail_walk) {
                    detail::walk(out, target->edge, kZero, target->t, g.first);
                    cur = *target;
                }
            }
            cur = *target;
            for (int k = g.first + 1; k <= g.last; ++k) out.push_back({cur.edge, cur.t, cur.t, k});
        } else {
            int s = chosen[gi];
            if (s < 0) {
                SPoint cp = cur_point();
                s = pick(gi, [&](const SPoint& p) { return p == cp; });
            }
            for (int k = g.first; k <= g.last; ++k) {
                const auto& t = bt[k];
                Dyadic a = lifted(s, t.a), b = lifted(s, t.b);
                if (t.stay())
                    out.push_back({s, a, a, k});
                else
                    detail::walk(out, s, a, b, k);
                cur = {s, b};
            }
        }
    }
    if (cur_point() != *P1) throw LiftError("lift does not end at lift1");
    DyadicPath res;
    res.tokens = std::move(out);
    res.p3a_start = base.p3a_start;
    res.p3a_end = base.p3a_end;
    detail::add_key_stops(U, res);
    return res;
}

// Image of an upper token under the connecting map: a lower edge segment, or a point.
struct TokenImage {
    bool point = true;
    SPoint p;
    int edge = -1;
    Dyadic a, b;
};

inline std::optional<TokenImage> token_image(const Stage& lower, const Stage& upper, const PathToken& t) {
    const auto& o = upper.slot_origin[t.edge];
    if (o.src == SlotSource::Affine && !is_constant(o.kind) && !t.stay())
        return TokenImage{false, {}, o.ref, lambda(o.kind, t.a), lambda(o.kind, t.b)};
    auto p = project_edge_point(upper, lower, t.edge, t.a);
    if (!p) return std::nullopt;
    return TokenImage{true, *p, -1, {}, {}};
}

// Checks that `lift` covers `base` token by token under the connecting map,
// with matching endpoints, and is itself a valid path.
inline PathCheck verify_lift(const Stage& lower, const Stage& upper, const DyadicPath& base, const DyadicPath& lift,
                             std::optional<EdgePoint> lift0 = std::nullopt, std::optional<EdgePoint> lift1 = std::nullopt) {
    auto bad = [](std::string m) { return PathCheck{false, std::move(m)}; };
    if (auto c = validate_path(upper.d, lift); !c.ok) return bad("lift is not a valid path: " + c.why);
    if (lift0 && path_start(upper.d, lift) != *edge_point(upper.d, lift0->edge, lift0->t)) return bad("lift does not start at lift0");
    if (lift1 && path_end(upper.d, lift) != *edge_point(upper.d, lift1->edge, lift1->t)) return bad("lift does not end at lift1");
    const auto& L = lower.d;
    std::size_t k = 0;
    for (int bi = 0; bi < static_cast<int>(base.tokens.size()); ++bi) {
        const auto& bt = base.tokens[bi];
        Dyadic pos = bt.a;
        bool any = false;
        for (; k < lift.tokens.size() && lift.tokens[k].base == bi; ++k) {
            any = true;
            auto img = token_image(lower, upper, lift.tokens[k]);
            std::string where = "lift token " + std::to_string(k) + " over base token " + std::to_string(bi);
            if (!img) return bad(where + " projects to a free end");
            if (img->point) {
                auto here = edge_point(L, bt.edge, pos);
                if (!here || img->p != *here) return bad(where + " leaves the base trace");
                // the image of a moving token may be a point only if the token is constant over it
                if (!lift.tokens[k].stay()) {
                    auto e = project_edge_point(upper, lower, lift.tokens[k].edge, lift.tokens[k].b);
                    if (!e || *e != *here) return bad(where + " moves off the base point");
                }
            } else {
                if (img->edge != bt.edge || img->a != pos) return bad(where + " does not continue the base trace");
                Dyadic lo = std::min(bt.a, bt.b), hi = std::max(bt.a, bt.b);
                if (img->b < lo || img->b > hi) return bad(where + " overshoots the base token");
                if ((img->b - img->a) * (bt.b - bt.a) < kZero) return bad(where + " runs against the base direction");
                pos = img->b;
            }
        }
        if (!any) return bad("base token " + std::to_string(bi) + " is not covered");
        if (pos != bt.b) return bad("base token " + std::to_string(bi) + " is only covered up to " + to_string(pos));
    }
    if (k != lift.tokens.size()) return bad("lift has tokens beyond the base path");
    return {};
}

// ---------------------------------------------------------- connecting

// A (P1)/(P2) path between two points of one stage, through vertices.
inline DyadicPath connect_points(const Stage& st, EdgePoint a, EdgePoint b) {
    const DualData& d = st.d;
    auto pa = edge_point(d, a.edge, a.t), pb = edge_point(d, b.edge, b.t);
    if (!pa || !pb) throw LiftError("connect_points: free end");
    DyadicPath p;
    auto& out = p.tokens;
    if (*pa == *pb && is_key(a.t)) {
        out.push_back({a.edge, a.t, a.t, -1});
        return p;
    }
    if (a.edge == b.edge) {
        // Through 1/2 so that a key stop is visited.
        detail::walk(out, a.edge, a.t, kHalf, -1);
        out.push_back({a.edge, kHalf, kHalf, -1});
        detail::walk(out, a.edge, kHalf, b.t, -1);
        detail::add_key_stops(d, p);
        return p;
    }
    int u = pa->vertex ? pa->id : d.b[0][a.edge];
    int w = pb->vertex ? pb->id : d.b[0][b.edge];
    if (!pa->vertex) detail::walk(out, a.edge, a.t, kZero, -1);
    // breadth-first search over the whole stage graph
    std::vector<int> prev_e(d.nx(), -2);
    std::vector<std::vector<int>> inc(d.nx());
    for (int y = 0; y < d.ny(); ++y)
        for (int r = 0; r < 2; ++r)
            if (d.b[0][y] >= 0 && d.b[1][y] >= 0 && d.b[r][y] >= 0) inc[d.b[r][y]].push_back(y);
    std::deque<int> q{u};
    prev_e[u] = -1;
    while (!q.empty() && prev_e[w] == -2) {
        int v = q.front();
        q.pop_front();
        for (int y : inc[v]) {
            int nx = d.b[0][y] == v ? d.b[1][y] : d.b[0][y];
            if (prev_e[nx] != -2) continue;
            prev_e[nx] = y;
            q.push_back(nx);
        }
    }
    if (prev_e[w] == -2) throw LiftError("connect_points: points lie in different components");
    std::vector<std::pair<int, int>> hops;  // (edge, vertex reached)
    for (int v = w; v != u;) {
        int y = prev_e[v];
        hops.push_back({y, v});
        v = d.b[0][y] == v ? d.b[1][y] : d.b[0][y];
    }
    std::reverse(hops.begin(), hops.end());
    int at = u;
    for (auto [y, v] : hops) {
        Dyadic from = d.b[0][y] == at ? kZero : kOne;
        detail::walk(out, y, from, kOne - from, -1);
        at = v;
    }
    if (!pb->vertex) detail::walk(out, b.edge, kZero, b.t, -1);
    if (out.empty()) out.push_back({a.edge, a.t, a.t, -1});
    detail::add_key_stops(d, p);
    // A walk that never stops at a key value gets a stop at its first vertex.
    if (!validate_path(d, p).ok && !out.empty()) {
        for (std::size_t k = 0; k < p.tokens.size(); ++k)
            if (is_key(p.tokens[k].a)) {
                p.tokens.insert(p.tokens.begin() + k, {p.tokens[k].edge, p.tokens[k].a, p.tokens[k].a, -1});
                break;
            }
    }
    return p;
}

// Random point of the fibre over a lower edge point, for lift endpoints.
template <class Rng>
inline EdgePoint random_fiber_point(const Stage& lower, const Stage& upper, const ConnectorIndex& idx,
                                    const std::vector<EdgePoint>& anchors, EdgePoint at, Rng& rng) {
    SPoint P = *edge_point(lower.d, at.edge, at.t);
    std::vector<EdgePoint> opts;
    Fiber f = fiber_over(lower, upper, idx, P);
    for (int v : f.verts) opts.push_back(anchors[v]);
    for (int e : f.edges) opts.push_back({e, Dyadic(1, 4)});
    if (!P.vertex)
        for (const int* e = idx.edge_slots.begin(P.id); e != idx.edge_slots.end(P.id); ++e) {
            Kind k = upper.slot_origin[*e].kind;
            if (is_constant(k)) continue;
            if (auto t = lambda_inv(k, P.t)) {
                if (edge_point(upper.d, *e, *t)) opts.push_back({*e, *t});
            }
        }
    if (opts.empty()) throw LiftError("empty fibre over " + to_string(P));
    return opts[std::uniform_int_distribution<std::size_t>(0, opts.size() - 1)(rng)];
}

template <class Rng>
inline EdgePoint random_point(const Stage& st, Rng& rng) {
    static const Dyadic vals[] = {kZero, Dyadic(1, 8), Dyadic(1, 4), Dyadic(3, 8), kHalf, Dyadic(5, 8), Dyadic(3, 4), kOne};
    while (true) {
        int y = std::uniform_int_distribution<int>(0, st.ny() - 1)(rng);
        Dyadic t = vals[std::uniform_int_distribution<int>(0, 7)(rng)];
        if (edge_point(st.d, y, t)) return {y, t};
    }
}

// --------------------------------------------------------------- K_{3,3}

struct K33Certificate {
    int level = 0;  // level n of the basic open set
    int edge = -1;  // y at level n
    Dyadic lo = Dyadic(1, 4), hi = Dyadic(3, 4);
    std::array<std::array<int, 3>, 3> mu{};   // nine constant slots at level n+1
    std::array<int, 3> nu_lo{}, nu_up{};      // level n+2 slots over mu[0][0]
    std::array<std::array<DyadicPath, 3>, 3> paths;
    TopGraph sub;          // level n+2 cells used by the nine paths
    std::vector<int> sub_edges, sub_verts;  // global ids of the subgraph cells
    K33Witness witness;    // in subgraph ids
    bool lifts_ok = false, verified = false, search_found = false, projection_ok = false;
    std::string error;

    bool ok() const { return error.empty() && lifts_ok && verified && search_found && projection_ok; }
};

// Builds the nine paths of the non-planarity argument inside [I x {y}] at level n.
inline K33Certificate k33_witness(const Tower& tower, int n, int y, Dyadic lo = Dyadic(1, 4), Dyadic hi = Dyadic(3, 4),
                                  const ConnectorIndex* idx1p = nullptr, const ConnectorIndex* idx2p = nullptr) {
    K33Certificate c;
    c.level = n;
    c.edge = y;
    c.lo = lo;
    c.hi = hi;
    auto fail = [&](std::string m) {
        c.error = std::move(m);
        return c;
    };
    if (!(lo < kHalf && kHalf < hi)) return fail("interval must contain 1/2 in its interior");
    if (n + 2 > tower.depth()) return fail("tower too shallow: need level " + std::to_string(n + 2));
    const Stage& S0 = tower.level(n);
    const Stage& S1 = tower.level(n + 1);
    const Stage& S2 = tower.level(n + 2);
    ConnectorIndex own1, own2;
    if (!idx1p) own1 = build_connector(S0, S1);
    if (!idx2p) own2 = build_connector(S1, S2);
    const ConnectorIndex& idx1 = idx1p ? *idx1p : own1;
    const ConnectorIndex& idx2 = idx2p ? *idx2p : own2;

    // nine slots with lambda = 1/2 over y, all in one block
    std::map<std::pair<int, int>, std::vector<int>> consts;  // (block, kind) -> slots
    for (const int* e = idx1.edge_slots.begin(y); e != idx1.edge_slots.end(y); ++e)
        if (is_constant(S1.slot_origin[*e].kind)) consts[{S1.d.p_of(*e), idx(S1.slot_origin[*e].kind)}].push_back(*e);
    const std::vector<int>* nine = nullptr;
    int best = 0;
    for (auto& [key, v] : consts) {
        best = std::max(best, static_cast<int>(v.size()));
        if (!nine && v.size() >= 9) nine = &v;
    }
    if (!nine) return fail("missing mu^{ij}: at most " + std::to_string(best) + " constant entries over one block");
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) c.mu[i][j] = (*nine)[3 * i + j];

    // slots over each mu by (block, kind, copy)
    auto over = [&](int l) {
        std::map<std::tuple<int, int, int>, int> m;
        for (const int* e = idx2.edge_slots.begin(l); e != idx2.edge_slots.end(l); ++e) {
            const auto& o = S2.slot_origin[*e];
            m[{S2.d.p_of(*e), idx(o.kind), o.mu}] = *e;
        }
        return m;
    };
    auto base_map = over(c.mu[0][0]);
    std::optional<std::pair<std::vector<std::tuple<int, int, int>>, std::vector<std::tuple<int, int, int>>>> pickq;
    for (int q = 0; q < S2.d.np() && !pickq; ++q) {
        std::vector<std::tuple<int, int, int>> los, ups;
        std::set<int> b0s, b1s;
        for (auto& [key, e] : base_map) {
            auto [bq, kind, m] = key;
            if (bq != q) continue;
            if (kind == idx(Kind::Lo) && los.size() < 3 && b0s.insert(S2.d.b[0][e]).second) los.push_back(key);
            if (kind == idx(Kind::Up) && ups.size() < 3 && S2.d.b[1][e] >= 0 && b1s.insert(S2.d.b[1][e]).second) ups.push_back(key);
        }
        if (los.size() == 3 && ups.size() == 3) pickq = std::pair{los, ups};
    }
    if (!pickq) return fail("no block with three lo slots of distinct b_0 and three up slots of distinct b_1");
    for (int i = 0; i < 3; ++i) {
        c.nu_lo[i] = base_map[pickq->first[i]];
        c.nu_up[i] = base_map[pickq->second[i]];
    }

    // the nine lifted paths
    std::array<std::array<std::vector<int>, 3>, 3> pe, pv;
    c.lifts_ok = true;
    for (int i = 0; i < 3 && c.error.empty(); ++i)
        for (int j = 0; j < 3 && c.error.empty(); ++j) {
            int l = c.mu[i][j];
            auto m = over(l);
            auto lo_it = m.find(pickq->first[i]);
            auto up_it = m.find(pickq->second[j]);
            if (lo_it == m.end() || up_it == m.end()) return fail("matching nu slot missing over a mu^{ij}");
            DyadicPath base;
            base.tokens = {{l, kZero, kHalf, -1}, {l, kHalf, kHalf, -1}, {l, kHalf, kOne, -1}};
            base.p3a_start = base.p3a_end = true;
            EdgePoint a{lo_it->second, kZero}, b{up_it->second, kOne};
            try {
                c.paths[i][j] = lift_path(S1, S2, idx2, base, a, b);
            } catch (const LiftError& e) {
                return fail(std::string("lift failed: ") + e.what());
            }
            auto chk = verify_lift(S1, S2, base, c.paths[i][j], a, b);
            if (!chk.ok) {
                c.lifts_ok = false;
                return fail("lift check failed: " + chk.why);
            }
            // edge and vertex itinerary
            const auto& ts = c.paths[i][j].tokens;
            pv[i][j].push_back(edge_point(S2.d, ts.front().edge, ts.front().a)->id);
            int cur_edge = -1;
            for (auto& t : ts) {
                if (t.stay()) continue;
                cur_edge = t.edge;
                if (t.b == kZero || t.b == kOne) {
                    int v = S2.d.b[t.b == kOne][t.edge];
                    if (v != pv[i][j].back()) {
                        pe[i][j].push_back(cur_edge);
                        pv[i][j].push_back(v);
                    }
                }
            }
        }

    // subgraph of the level n+2 spectrum used by the nine paths
    std::map<int, int> vloc, eloc;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            for (int v : pv[i][j])
                if (!vloc.count(v)) {
                    vloc[v] = static_cast<int>(c.sub_verts.size());
                    c.sub_verts.push_back(v);
                }
            for (int e : pe[i][j])
                if (!eloc.count(e)) {
                    eloc[e] = static_cast<int>(c.sub_edges.size());
                    c.sub_edges.push_back(e);
                }
        }
    for (int v : c.sub_verts) c.sub.vertices.push_back({VertexKind::X, "x" + std::to_string(v), v});
    for (int e : c.sub_edges) {
        int u = S2.d.b[0][e], v = S2.d.b[1][e];
        c.sub.edges.push_back({u >= 0 && vloc.count(u) ? vloc[u] : -1, v >= 0 && vloc.count(v) ? vloc[v] : -1,
                               "y" + std::to_string(e), S2.d.p_of(e)});
    }
    for (int i = 0; i < 3; ++i) {
        c.witness.a[i] = vloc[pv[i][0].front()];
        c.witness.c[i] = vloc[pv[0][i].back()];
        for (int j = 0; j < 3; ++j) {
            for (int v : pv[i][j]) c.witness.verts[i][j].push_back(vloc[v]);
            for (int e : pe[i][j]) c.witness.paths[i][j].push_back(eloc[e]);
        }
    }
    std::string why;
    c.verified = verify_k33(c.sub, c.witness, &why);
    if (!c.verified) return fail("witness rejected: " + why);
    auto found = find_k33(c.sub);
    c.search_found = found.status == K33Status::Found && found.witness && verify_k33(c.sub, *found.witness);

    // every token point lands in I x {y} two levels down
    c.projection_ok = true;
    for (int i = 0; i < 3 && c.projection_ok; ++i)
        for (int j = 0; j < 3 && c.projection_ok; ++j)
            for (auto& t : c.paths[i][j].tokens)
                for (Dyadic s : {t.a, (t.a + t.b) / 2, t.b}) {
                    auto p1 = project_edge_point(S2, S1, t.edge, s);
                    auto p0 = p1 ? project(S1, S0, *p1) : std::nullopt;
                    if (!p0 || p0->vertex || p0->id != y || p0->t <= lo || p0->t >= hi) {
                        c.projection_ok = false;
                        c.error = "token " + to_string(t) + " projects outside the basic open set";
                        break;
                    }
                }
    if (c.error.empty() && !c.search_found) c.error = "independent search did not find a K33 in the subgraph";
    return c;
}

}  // namespace nccw
