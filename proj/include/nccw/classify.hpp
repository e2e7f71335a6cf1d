#pragma once

// Conjugacy of diagonals B_sigma in a 1-dimensional NCCW complex: reduced form,
// direct-sum decomposition, twisted-graph isomorphism and rigidity tests.

#include "nccw/iso.hpp"
#include "nccw/model.hpp"
#include "nccw/spectrum.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace nccw {

// ---------------------------------------------------------------- reduction

struct RewriteStep {
    std::string q, qbar, j;
    int r = 0, s = 0;
    std::string lemma_case;  // "same-end" (r = s) or "opposite-end"
};

using RewriteLog = std::vector<RewriteStep>;

struct Reduced {
    DualData dual;
    std::vector<TwistPerm> twists;
    RewriteLog log;
};

namespace detail {

struct Redundancy {
    int q, qbar, j, r, s;
};

// q is redundant via (qbar, j, r, s) when b_r on Y^qbar and b_s on Y^q are
// bijections onto X^j, their other ends avoid X^j, and no other block touches X^j.
inline std::optional<Redundancy> find_redundant(const DualData& d) {
    auto m = d.multiplicities();
    int P = d.np(), I = d.ni();
    auto iso_onto = [&](int r, int p, int j) {
        if (m[r][p][j] != 1 || d.p_size(p) != d.i_size(j)) return false;
        for (int i = 0; i < I; ++i)
            if (i != j && m[r][p][i] != 0) return false;
        return true;
    };
    for (int q = 0; q < P; ++q)
        for (int qb = 0; qb < P; ++qb) {
            if (qb == q) continue;
            for (int j = 0; j < I; ++j) {
                bool others_clear = true;
                for (int p = 0; p < P && others_clear; ++p)
                    if (p != q && p != qb && (m[0][p][j] || m[1][p][j])) others_clear = false;
                if (!others_clear) continue;
                for (int r = 0; r < 2; ++r)
                    for (int s = 0; s < 2; ++s)
                        if (iso_onto(r, qb, j) && iso_onto(s, q, j) && m[1 - r][qb][j] == 0 &&
                            m[1 - s][q][j] == 0)
                            return Redundancy{q, qb, j, r, s};
            }
        }
    return std::nullopt;
}

// Reverses every edge of block p (t -> 1-t); twists on p are inverted.
inline void flip_block(DualData& d, std::vector<TwistPerm>& tw, int p) {
    int lo = d.y_off[p], hi = d.y_off[p + 1];
    for (int y = lo; y < hi; ++y) {
        std::swap(d.b[0][y], d.b[1][y]);
        std::swap(d.slot[0][y], d.slot[1][y]);
    }
    for (auto& t : tw) {
        std::vector<int> inv(hi - lo);
        for (int y = lo; y < hi; ++y) inv[t.map[y] - lo] = y;
        for (int y = lo; y < hi; ++y) t.map[y] = inv[y - lo];
    }
}

}  // namespace detail

inline Reduced reduce(DualData d, std::vector<TwistPerm> twists) {
    Reduced out;
    while (auto red = detail::find_redundant(d)) {
        auto [q, qb, j, r, s] = *red;
        out.log.push_back({d.p_labels[q], d.p_labels[qb], d.i_labels[j], r, s, r == s ? "same-end" : "opposite-end"});
        if (r == 0) detail::flip_block(d, twists, qb);
        if (s == 1) detail::flip_block(d, twists, q);
        // Now b_1 on qb and b_0 on q are bijections onto X^j.
        int qlo = d.y_off[q], qblo = d.y_off[qb], n = d.p_size(qb);
        std::vector<int> inv0(d.nx(), -1);
        for (int z = qlo; z < qlo + n; ++z) inv0[d.b[0][z]] = z;
        std::vector<int> gamma(n), gamma_inv(n);  // local qb -> local q
        for (int w = 0; w < n; ++w) {
            gamma[w] = inv0[d.b[1][qblo + w]] - qlo;
            gamma_inv[gamma[w]] = w;
        }
        std::vector<int> nb1(n), ns1(n);
        for (int w = 0; w < n; ++w) {
            nb1[w] = d.b[1][qlo + gamma[w]];
            ns1[w] = d.slot[1][qlo + gamma[w]];
        }
        for (int w = 0; w < n; ++w) {
            d.b[1][qblo + w] = nb1[w];
            d.slot[1][qblo + w] = ns1[w];
        }
        for (auto& t : twists) {
            std::vector<int> nt(n);
            for (int w = 0; w < n; ++w) {
                int a = t.map[qblo + w] - qblo;
                int c = t.map[qlo + gamma[a]] - qlo;
                nt[w] = qblo + gamma_inv[c];
            }
            for (int w = 0; w < n; ++w) t.map[qblo + w] = nt[w];
        }
        // Drop block q and X^j.
        DualData nd;
        std::vector<int> ymap(d.ny(), -1), xmap(d.nx(), -1);
        for (int p = 0; p < d.np(); ++p) {
            if (p == q) continue;
            nd.p_labels.push_back(d.p_labels[p]);
            for (int y = d.y_off[p]; y < d.y_off[p + 1]; ++y) ymap[y] = nd.y_off.back() + (y - d.y_off[p]);
            nd.y_off.push_back(nd.y_off.back() + d.p_size(p));
        }
        for (int i = 0; i < d.ni(); ++i) {
            if (i == j) continue;
            nd.i_labels.push_back(d.i_labels[i]);
            for (int x = d.x_off[i]; x < d.x_off[i + 1]; ++x) xmap[x] = nd.x_off.back() + (x - d.x_off[i]);
            nd.x_off.push_back(nd.x_off.back() + d.i_size(i));
        }
        for (int rr = 0; rr < 2; ++rr) {
            nd.b[rr].assign(nd.ny(), -1);
            nd.slot[rr].assign(nd.ny(), -1);
            for (int y = 0; y < d.ny(); ++y) {
                if (ymap[y] < 0) continue;
                int x = d.b[rr][y];
                nd.b[rr][ymap[y]] = x < 0 ? -1 : xmap[x];
                nd.slot[rr][ymap[y]] = d.slot[rr][y];
            }
        }
        for (auto& t : twists) {
            TwistPerm nt;
            nt.map.assign(nd.ny(), -1);
            for (int y = 0; y < d.ny(); ++y)
                if (ymap[y] >= 0) nt.map[ymap[y]] = ymap[t.map[y]];
            t = nt;
        }
        d = std::move(nd);
    }
    out.dual = std::move(d);
    out.twists = std::move(twists);
    return out;
}

struct ReducedForm {
    NccwData data;
    TwistPerm sigma;
    RewriteLog log;
};

inline ReducedForm to_reduced_form(const NccwData& data, const TwistPerm& sigma) {
    auto red = reduce(dualize(data), {sigma});
    return {to_nccw(red.dual), red.twists[0], red.log};
}

// ------------------------------------------------------------ decomposition

struct Summand {
    NccwData data;
    std::vector<int> p_index;  // summand p -> original p
    std::vector<int> i_index;  // summand i -> original i
};

// Classes of P under the relation generated by sharing an i-block.
inline std::vector<std::vector<int>> p_classes(const std::array<std::vector<std::vector<int>>, 2>& m, int P, int I) {
    std::vector<int> parent(P);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (int i = 0; i < I; ++i) {
        int first = -1;
        for (int p = 0; p < P; ++p)
            if (m[0][p][i] > 0 || m[1][p][i] > 0) {
                if (first < 0)
                    first = p;
                else
                    parent[find(p)] = find(first);
            }
    }
    std::map<int, std::vector<int>> cls;
    for (int p = 0; p < P; ++p) cls[find(p)].push_back(p);
    std::vector<std::vector<int>> out;
    for (auto& [root, members] : cls) out.push_back(members);
    std::sort(out.begin(), out.end());
    return out;
}

inline std::vector<Summand> decompose(const NccwData& data) {
    std::vector<Summand> out;
    for (auto& ps : p_classes(data.mult, data.np(), data.ni())) {
        Summand s;
        s.p_index = ps;
        for (int i = 0; i < data.ni(); ++i)
            for (int p : ps)
                if (data.mult[0][p][i] > 0 || data.mult[1][p][i] > 0) {
                    s.i_index.push_back(i);
                    break;
                }
        std::vector<int> psz, isz;
        for (int p : ps) psz.push_back(data.p_sizes[p]);
        for (int i : s.i_index) isz.push_back(data.i_sizes[i]);
        s.data = NccwData::make(psz, isz);
        for (std::size_t a = 0; a < ps.size(); ++a) s.data.p_labels[a] = data.p_labels[ps[a]];
        for (std::size_t b = 0; b < s.i_index.size(); ++b) s.data.i_labels[b] = data.i_labels[s.i_index[b]];
        for (int r = 0; r < 2; ++r)
            for (std::size_t a = 0; a < ps.size(); ++a)
                for (std::size_t b = 0; b < s.i_index.size(); ++b)
                    s.data.mult[r][a][b] = data.mult[r][ps[a]][s.i_index[b]];
        if (data.layout) {
            // slots of the summand keep their order within each (r,p); the
            // layout entries of other i-blocks never occur in a summand
            std::array<std::vector<std::vector<int>>, 2> lay;
            for (int r = 0; r < 2; ++r)
                for (int p : ps) lay[r].push_back((*data.layout)[r][p]);
            s.data.layout = lay;
        }
        out.push_back(std::move(s));
    }
    return out;
}

// --------------------------------------------------------------- conjugacy

// Theta maps sigma-edges to tau-edges, Xi sigma-vertices to tau-vertices; with
// o(p) = -1 the edges of p are matched with reversed orientation.
struct ConjugacyCertificate {
    std::vector<int> rho;    // p -> p
    std::vector<int> kappa;  // i -> i
    std::vector<int> theta;  // y -> y
    std::vector<int> xi;     // x -> x
    std::vector<int> o;      // p -> +1 / -1
};

inline bool verify_certificate(const DualData& d, const TwistPerm& sigma, const TwistPerm& tau,
                               const ConjugacyCertificate& c, std::string* why = nullptr) {
    auto bad = [&](const std::string& m) {
        if (why) *why = m;
        return false;
    };
    int P = d.np(), I = d.ni(), Y = d.ny(), X = d.nx();
    if ((int)c.rho.size() != P || (int)c.kappa.size() != I || (int)c.theta.size() != Y ||
        (int)c.xi.size() != X || (int)c.o.size() != P)
        return bad("certificate has wrong sizes");
    auto is_perm = [](const std::vector<int>& v) {
        std::vector<bool> hit(v.size(), false);
        for (int a : v) {
            if (a < 0 || a >= (int)v.size() || hit[a]) return false;
            hit[a] = true;
        }
        return true;
    };
    if (!is_perm(c.rho) || !is_perm(c.kappa) || !is_perm(c.theta) || !is_perm(c.xi))
        return bad("a component is not a bijection");
    for (int x = 0; x < X; ++x)
        if (d.i_of(c.xi[x]) != c.kappa[d.i_of(x)]) return bad("Xi does not respect kappa");
    auto img = [&](int x) { return x < 0 ? -1 : c.xi[x]; };
    for (int p = 0; p < P; ++p) {
        if (c.o[p] != 1 && c.o[p] != -1) return bad("orientation must be +1 or -1");
        for (int y = d.y_off[p]; y < d.y_off[p + 1]; ++y) {
            int z = c.theta[y];
            if (d.p_of(z) != c.rho[p]) return bad("Theta does not respect rho");
            int s0 = img(d.b[0][y]), s1 = img(d.b[1][sigma(y)]);
            int t0 = d.b[0][z], t1 = d.b[1][tau(z)];
            if (c.o[p] == 1 ? (s0 != t0 || s1 != t1) : (s0 != t1 || s1 != t0))
                return bad("commuting square fails at edge " + std::to_string(y));
        }
    }
    return true;
}

namespace detail {

// Port encoding: each edge y becomes E_y with two ports; ports of side t hang
// on the side node S_t of the block, and both side nodes hang on the block
// node. An isomorphism may swap S_0 and S_1 of a block, which is exactly a
// per-block orientation reversal.
struct Encoded {
    ColGraph g;
    std::vector<int> xs, ks, bs, s0, s1, es;  // node ids
    std::vector<int> x_of, i_of, p_of, y_of;  // inverse lookups by position
};

inline Encoded encode(const DualData& d, const TwistPerm& sigma, const std::vector<int>& ps,
                      const std::vector<int>& is) {
    enum { cX, cK, cB, cS, cE, cPort, cFree };
    Encoded e;
    std::map<int, int> xnode;
    for (int i : is) {
        int k = e.g.add_vertex(cK);
        e.ks.push_back(k);
        e.i_of.push_back(i);
        for (int x = d.x_off[i]; x < d.x_off[i + 1]; ++x) {
            int v = e.g.add_vertex(cX);
            xnode[x] = v;
            e.xs.push_back(v);
            e.x_of.push_back(x);
            e.g.add_edge(k, v);
        }
    }
    int freev = e.g.add_vertex(cFree);
    auto end_node = [&](int x) {
        if (x < 0) return freev;
        auto it = xnode.find(x);
        if (it == xnode.end()) throw std::logic_error("edge leaves its summand");
        return it->second;
    };
    for (int p : ps) {
        int b = e.g.add_vertex(cB), a0 = e.g.add_vertex(cS), a1 = e.g.add_vertex(cS);
        e.g.add_edge(b, a0);
        e.g.add_edge(b, a1);
        e.bs.push_back(b);
        e.s0.push_back(a0);
        e.s1.push_back(a1);
        e.p_of.push_back(p);
        for (int y = d.y_off[p]; y < d.y_off[p + 1]; ++y) {
            int ev = e.g.add_vertex(cE), q0 = e.g.add_vertex(cPort), q1 = e.g.add_vertex(cPort);
            e.es.push_back(ev);
            e.y_of.push_back(y);
            e.g.add_edge(ev, q0);
            e.g.add_edge(ev, q1);
            e.g.add_edge(q0, a0);
            e.g.add_edge(q1, a1);
            e.g.add_edge(q0, end_node(d.b[0][y]));
            e.g.add_edge(q1, end_node(d.b[1][sigma(y)]));
        }
    }
    return e;
}

inline std::vector<int> sorted_degrees(const DualData& d, const TwistPerm& t) {
    std::vector<int> deg(d.nx(), 0);
    for (int y = 0; y < d.ny(); ++y) {
        if (d.b[0][y] >= 0) deg[d.b[0][y]]++;
        if (d.b[1][t(y)] >= 0) deg[d.b[1][t(y)]]++;
    }
    std::sort(deg.begin(), deg.end());
    return deg;
}

// Number of pairs of vertices with identical out-rows and identical in-columns
// of the edge-count matrix (only meaningful for a single block).
inline std::pair<int, int> twin_pairs(const DualData& d, const TwistPerm& t) {
    int X = d.nx();
    std::vector<std::vector<int>> row(X, std::vector<int>(X, 0)), col(X, std::vector<int>(X, 0));
    std::vector<bool> has_out(X, false), has_in(X, false);
    for (int y = 0; y < d.ny(); ++y) {
        int a = d.b[0][y], b = d.b[1][t(y)];
        if (a >= 0 && b >= 0) {
            row[a][b]++;
            col[b][a]++;
            has_out[a] = true;
            has_in[b] = true;
        }
    }
    auto count = [&](const std::vector<std::vector<int>>& m, const std::vector<bool>& has) {
        int pairs = 0;
        for (int a = 0; a < X; ++a)
            for (int b = a + 1; b < X; ++b)
                if (has[a] && has[b] && m[a] == m[b]) pairs++;
        return pairs;
    };
    return {count(row, has_out), count(col, has_in)};
}

}  // namespace detail

enum class Verdict { Conjugate, NotConjugate, Undecided };

struct Decision {
    Verdict verdict = Verdict::NotConjugate;
    std::optional<ConjugacyCertificate> certificate;  // on the reduced data
    std::string obstruction;
    Reduced reduced;  // reduced data with twists {sigma, tau}
    bool conjugate() const { return verdict == Verdict::Conjugate; }
};

inline Decision decide_conjugacy_dual(const DualData& dual, const TwistPerm& sigma, const TwistPerm& tau,
                                      long budget = 2'000'000) {
    Decision dec;
    dec.reduced = reduce(dual, {sigma, tau});
    const DualData& d = dec.reduced.dual;
    const TwistPerm& s = dec.reduced.twists[0];
    const TwistPerm& t = dec.reduced.twists[1];

    int pi_s = analyze(spec_b(d, s)).pi0, pi_t = analyze(spec_b(d, t)).pi0;
    if (pi_s != pi_t) {
        dec.obstruction = "component counts differ (" + std::to_string(pi_s) + " vs " + std::to_string(pi_t) + ")";
        return dec;
    }
    if (detail::sorted_degrees(d, s) != detail::sorted_degrees(d, t)) {
        dec.obstruction = "degree multisets differ";
        return dec;
    }
    if (d.np() == 1) {
        auto [rs, cs] = detail::twin_pairs(d, s);
        auto [rt, ct] = detail::twin_pairs(d, t);
        if (std::minmax(rs, cs) != std::minmax(rt, ct)) {
            dec.obstruction = "twin-vertex counts differ (rows/columns " + std::to_string(rs) + "/" +
                              std::to_string(cs) + " vs " + std::to_string(rt) + "/" + std::to_string(ct) + ")";
            return dec;
        }
    }

    auto m = d.multiplicities();
    auto classes = p_classes(m, d.np(), d.ni());
    auto i_set = [&](const std::vector<int>& ps) {
        std::vector<int> is;
        for (int i = 0; i < d.ni(); ++i)
            for (int p : ps)
                if (m[0][p][i] || m[1][p][i]) {
                    is.push_back(i);
                    break;
                }
        return is;
    };
    auto signature = [&](const std::vector<int>& ps, const std::vector<int>& is) {
        std::vector<int> sig;
        std::vector<int> a, b;
        for (int p : ps) a.push_back(d.p_size(p));
        for (int i : is) b.push_back(d.i_size(i));
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        sig.push_back(static_cast<int>(a.size()));
        sig.insert(sig.end(), a.begin(), a.end());
        sig.push_back(static_cast<int>(b.size()));
        sig.insert(sig.end(), b.begin(), b.end());
        return sig;
    };

    ConjugacyCertificate cert;
    cert.rho.assign(d.np(), -1);
    cert.kappa.assign(d.ni(), -1);
    cert.theta.assign(d.ny(), -1);
    cert.xi.assign(d.nx(), -1);
    cert.o.assign(d.np(), 1);
    std::vector<bool> used(classes.size(), false);
    for (std::size_t a = 0; a < classes.size(); ++a) {
        auto ia = i_set(classes[a]);
        auto ea = detail::encode(d, s, classes[a], ia);
        bool matched = false;
        bool budget_hit = false;
        for (std::size_t b = 0; b < classes.size() && !matched; ++b) {
            if (used[b]) continue;
            auto ib = i_set(classes[b]);
            if (signature(classes[a], ia) != signature(classes[b], ib)) continue;
            auto eb = detail::encode(d, t, classes[b], ib);
            auto iso = find_isomorphism(ea.g, eb.g, budget);
            if (iso.status == SearchStatus::Budget) budget_hit = true;
            if (iso.status != SearchStatus::Found) continue;
            std::map<int, int> pos;  // node of b -> position in its role list
            auto index = [&](const std::vector<int>& nodes) {
                for (std::size_t k = 0; k < nodes.size(); ++k) pos[nodes[k]] = static_cast<int>(k);
            };
            index(eb.xs);
            index(eb.ks);
            index(eb.bs);
            index(eb.es);
            for (std::size_t k = 0; k < ea.xs.size(); ++k) cert.xi[ea.x_of[k]] = eb.x_of[pos[iso.map[ea.xs[k]]]];
            for (std::size_t k = 0; k < ea.ks.size(); ++k) cert.kappa[ea.i_of[k]] = eb.i_of[pos[iso.map[ea.ks[k]]]];
            for (std::size_t k = 0; k < ea.bs.size(); ++k) {
                int pb = pos[iso.map[ea.bs[k]]];
                cert.rho[ea.p_of[k]] = eb.p_of[pb];
                cert.o[ea.p_of[k]] = iso.map[ea.s0[k]] == eb.s0[pb] ? 1 : -1;
            }
            for (std::size_t k = 0; k < ea.es.size(); ++k) cert.theta[ea.y_of[k]] = eb.y_of[pos[iso.map[ea.es[k]]]];
            used[b] = true;
            matched = true;
        }
        if (!matched) {
            dec.verdict = budget_hit ? Verdict::Undecided : Verdict::NotConjugate;
            dec.obstruction = budget_hit ? "search budget exhausted at summand " + std::to_string(a)
                                         : "search exhausted: summand " + std::to_string(a) +
                                               " has no isomorphic partner";
            return dec;
        }
    }
    std::string why;
    if (!verify_certificate(d, s, t, cert, &why)) throw std::logic_error("certificate failed re-verification: " + why);
    dec.verdict = Verdict::Conjugate;
    dec.certificate = cert;
    return dec;
}

inline Decision decide_conjugacy(const NccwData& data, const TwistPerm& sigma, const TwistPerm& tau,
                                 long budget = 2'000'000) {
    return decide_conjugacy_dual(dualize(data), sigma, tau, budget);
}

// -------------------------------------------------------------- congruence

using IntMatrix = std::vector<std::vector<int>>;

inline IntMatrix transpose(const IntMatrix& m) {
    if (m.empty()) return m;
    IntMatrix t(m[0].size(), std::vector<int>(m.size()));
    for (std::size_t r = 0; r < m.size(); ++r)
        for (std::size_t c = 0; c < m[r].size(); ++c) t[c][r] = m[r][c];
    return t;
}

// Msigma[r][c] == M'[row[r]][col[c]] with M' = Mtau or its transpose.
struct CongruenceWitness {
    std::vector<int> row, col;
    bool transposed = false;
};

struct CongruenceResult {
    bool congruent = false;
    std::optional<CongruenceWitness> witness;
    std::string reason;
};

inline bool check_congruence(const IntMatrix& ms, const IntMatrix& mt, const CongruenceWitness& w) {
    const IntMatrix m = w.transposed ? transpose(mt) : mt;
    for (std::size_t r = 0; r < ms.size(); ++r)
        for (std::size_t c = 0; c < ms[r].size(); ++c)
            if (ms[r][c] != m[w.row[r]][w.col[c]]) return false;
    return true;
}

namespace detail {

inline int duplicate_pairs(const IntMatrix& m) {
    int n = 0;
    for (std::size_t a = 0; a < m.size(); ++a)
        for (std::size_t b = a + 1; b < m.size(); ++b)
            if (m[a] == m[b]) n++;
    return n;
}

inline std::vector<std::vector<int>> sorted_lines(const IntMatrix& m) {
    std::vector<std::vector<int>> lines(m);
    for (auto& l : lines) std::sort(l.begin(), l.end());
    std::sort(lines.begin(), lines.end());
    return lines;
}

// Permutations with ms[r][c] == mt[row[r]][col[c]], as a coloured bipartite isomorphism.
inline std::optional<CongruenceWitness> match(const IntMatrix& ms, const IntMatrix& mt) {
    auto build = [](const IntMatrix& m) {
        ColGraph g;
        int R = static_cast<int>(m.size()), C = R ? static_cast<int>(m[0].size()) : 0;
        for (int r = 0; r < R; ++r) g.add_vertex(0);
        for (int c = 0; c < C; ++c) g.add_vertex(1);
        for (int r = 0; r < R; ++r)
            for (int c = 0; c < C; ++c)
                if (m[r][c] != 0) g.add_edge(r, R + c, m[r][c]);
        return g;
    };
    auto iso = find_isomorphism(build(ms), build(mt));
    if (iso.status != SearchStatus::Found) return std::nullopt;
    int R = static_cast<int>(ms.size());
    CongruenceWitness w;
    for (int r = 0; r < R; ++r) w.row.push_back(iso.map[r]);
    for (int c = 0; c < static_cast<int>(ms[0].size()); ++c) w.col.push_back(iso.map[R + c] - R);
    return w;
}

}  // namespace detail

inline CongruenceResult congruence_test(const IntMatrix& ms, const IntMatrix& mt) {
    CongruenceResult res;
    if (ms.size() != mt.size() || ms.empty() || ms[0].size() != mt[0].size() || ms.size() != ms[0].size())
        throw std::invalid_argument("congruence_test needs square matrices of equal size");
    for (bool tr : {false, true}) {
        IntMatrix m = tr ? transpose(mt) : mt;
        if (detail::sorted_lines(ms) != detail::sorted_lines(m) ||
            detail::sorted_lines(transpose(ms)) != detail::sorted_lines(transpose(m)))
            continue;
        if (auto w = detail::match(ms, m)) {
            w->transposed = tr;
            if (!check_congruence(ms, mt, *w)) throw std::logic_error("congruence witness failed verification");
            res.congruent = true;
            res.witness = w;
            return res;
        }
    }
    // Name the first screening invariant that separates the two matrices.
    int cs = detail::duplicate_pairs(transpose(ms)), ct = detail::duplicate_pairs(transpose(mt));
    int rs = detail::duplicate_pairs(ms), rt = detail::duplicate_pairs(mt);
    if (cs == 0 && ct > 0 && rt > 0)
        res.reason = "two identical columns: M_tau has two identical columns (and rows), the columns of M_sigma are pairwise distinct";
    else if (cs > 0 && ct == 0 && rt == 0)
        res.reason = "two identical columns: M_sigma has two identical columns, M_tau has none in either orientation";
    else if (cs != ct && cs != rt)
        res.reason = "numbers of identical column pairs differ";
    else if (rs != rt && rs != ct)
        res.reason = "numbers of identical row pairs differ";
    else
        res.reason = "no row and column permutations match (search exhausted)";
    return res;
}

// ------------------------------------------------------- centre and rigidity

// Spec Z(A): one edge per p; endpoint (r,q) glued to (s,qbar) when both hit a
// common i; classes containing a non-unital end become free ends.
inline TopGraph center_spectrum(const NccwData& data) {
    int P = data.np(), I = data.ni();
    std::vector<int> parent(2 * P);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    auto node = [&](int r, int p) { return 2 * p + r; };
    for (int i = 0; i < I; ++i) {
        int first = -1;
        for (int p = 0; p < P; ++p)
            for (int r = 0; r < 2; ++r)
                if (data.mult[r][p][i] > 0) {
                    if (first < 0)
                        first = node(r, p);
                    else
                        parent[find(node(r, p))] = find(first);
                }
    }
    std::vector<bool> bad(2 * P, false);
    for (int p = 0; p < P; ++p)
        for (int r = 0; r < 2; ++r)
            if (data.used(r, p) != data.p_sizes[p]) bad[find(node(r, p))] = true;
    TopGraph g;
    std::map<int, int> vid;
    for (int p = 0; p < P; ++p)
        for (int r = 0; r < 2; ++r) {
            int root = find(node(r, p));
            if (bad[root] || vid.count(root)) continue;
            vid[root] = g.nv();
            g.vertices.push_back({VertexKind::Anonymous, "[" + std::to_string(r) + "," + data.p_labels[p] + "]", -1});
        }
    for (int p = 0; p < P; ++p) {
        TGEdge e;
        int r0 = find(node(0, p)), r1 = find(node(1, p));
        e.u = bad[r0] ? -1 : vid[r0];
        e.v = bad[r1] ? -1 : vid[r1];
        e.label = data.p_labels[p];
        e.block = p;
        g.edges.push_back(e);
    }
    return g;
}

struct RigidityReport {
    bool abbz = false;
    bool abb = false;
    bool inapplicable_two = false;  // exactly one incident multiplicity equals 2
    std::vector<std::string> details;
};

inline RigidityReport rigidity_check(const NccwData& data) {
    RigidityReport rep;
    int P = data.np(), I = data.ni();
    rep.abbz = true;
    for (int r = 0; r < 2; ++r)
        for (int p = 0; p < P; ++p) {
            int hits = 0;
            for (int i = 0; i < I; ++i) hits += data.mult[r][p][i] > 0;
            if (hits > 1) {
                rep.abbz = false;
                rep.details.push_back("(" + std::to_string(r) + "," + data.p_labels[p] + ") hits " +
                                      std::to_string(hits) + " i-blocks");
            }
        }
    bool unital = true, per_i = true, per_rp = true, no_two = true, injective = true;
    for (int r = 0; r < 2; ++r)
        for (int p = 0; p < P; ++p) unital = unital && data.used(r, p) == data.p_sizes[p];
    for (int i = 0; i < I; ++i) {
        int c = 0;
        for (int r = 0; r < 2; ++r)
            for (int p = 0; p < P; ++p) c += data.mult[r][p][i] > 0;
        per_i = per_i && c == 1;
    }
    std::vector<int> values;
    int twos = 0;
    for (int r = 0; r < 2; ++r)
        for (int p = 0; p < P; ++p) {
            int c = 0;
            for (int i = 0; i < I; ++i)
                if (data.mult[r][p][i] > 0) {
                    c++;
                    values.push_back(data.mult[r][p][i]);
                    if (data.mult[r][p][i] == 2) twos++;
                }
            per_rp = per_rp && c == 1;
        }
    no_two = twos == 0;
    std::vector<int> sorted(values);
    std::sort(sorted.begin(), sorted.end());
    injective = std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end();
    if (!unital) rep.details.push_back("boundary maps are not unital");
    if (!per_i) rep.details.push_back("some i is hit by more or fewer than one (r,p)");
    if (!per_rp) rep.details.push_back("some (r,p) hits more or fewer than one i");
    if (!no_two) rep.details.push_back("a multiplicity equals 2");
    if (!injective) rep.details.push_back("multiplicity map is not injective");
    rep.abb = unital && per_i && per_rp && no_two && injective;
    rep.inapplicable_two = unital && per_i && per_rp && injective && twos == 1;
    return rep;
}

struct TheoremInapplicable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline bool decide_via_spectrum(const NccwData& data, const TwistPerm& sigma, const TwistPerm& tau) {
    auto rig = rigidity_check(data);
    if (!rig.abb) {
        std::string msg = rig.inapplicable_two ? "inapplicable: exactly one multiplicity equals 2"
                                               : "rigidity hypotheses fail";
        for (auto& s : rig.details) msg += "; " + s;
        throw TheoremInapplicable(msg);
    }
    DualData d = dualize(data);
    return graph_homeomorphic(spec_b(d, sigma), spec_b(d, tau)).homeomorphic;
}

// ------------------------------------------------------- the m = n example

struct AppBR {
    int nu = 0, delta = 0;
    IntMatrix M, Msigma, Mtau;
    TwistPerm sigma, tau;
    NccwData data;
};

struct Infeasible : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

// nu x nu 0/1 matrix, delta ones per row and column, rows 0 and 1 equal,
// columns pairwise distinct; lexicographic backtracking.
inline std::optional<IntMatrix> search_m(int nu, int delta, long budget) {
    IntMatrix m(nu, std::vector<int>(nu, 0));
    std::vector<int> colsum(nu, 0);
    long nodes = 0;
    std::vector<int> pick;
    std::function<bool(int)> row;
    std::function<bool(int, int, int)> fill = [&](int r, int from, int left) -> bool {
        if (++nodes > budget) return false;
        if (left == 0) {
            if (r == 0) {
                // duplicate row 0 into row 1
                for (int c = 0; c < nu; ++c) {
                    m[1][c] = m[0][c];
                    colsum[c] += m[1][c];
                }
                if (row(2)) return true;
                for (int c = 0; c < nu; ++c) {
                    colsum[c] -= m[1][c];
                    m[1][c] = 0;
                }
                return false;
            }
            return row(r + 1);
        }
        for (int c = from; c <= nu - left; ++c) {
            if (colsum[c] >= delta) continue;
            m[r][c] = 1;
            colsum[c]++;
            if (fill(r, c + 1, left - 1)) return true;
            m[r][c] = 0;
            colsum[c]--;
        }
        return false;
    };
    row = [&](int r) -> bool {
        if (r == nu) {
            for (int a = 0; a < nu; ++a)
                for (int b = a + 1; b < nu; ++b) {
                    bool same = true;
                    for (int k = 0; k < nu && same; ++k) same = m[k][a] == m[k][b];
                    if (same) return false;
                }
            return true;
        }
        // completed columns are final; two equal ones can never separate
        for (int a = 0; a < nu; ++a)
            for (int b = a + 1; b < nu; ++b) {
                if (colsum[a] != delta || colsum[b] != delta) continue;
                bool same = true;
                for (int k = 0; k < r && same; ++k) same = m[k][a] == m[k][b];
                if (same) return false;
            }
        // every column must still be fillable
        int rows_left = nu - r;
        for (int c = 0; c < nu; ++c)
            if (delta - colsum[c] > rows_left) return false;
        return fill(r, 0, delta);
    };
    if (row(0)) return m;
    return std::nullopt;
}

// Greedy row-major assignment of sigma with the prescribed pair counts.
inline TwistPerm realize(const DualData& d, const IntMatrix& counts, int x1_off) {
    int Y = d.ny();
    std::vector<std::vector<int>> by0(d.nx()), by1(d.nx());
    for (int y = 0; y < Y; ++y) {
        by0[d.b[0][y]].push_back(y);
        by1[d.b[1][y]].push_back(y);
    }
    std::vector<std::size_t> n0(d.nx(), 0), n1(d.nx(), 0);
    TwistPerm s;
    s.map.assign(Y, -1);
    for (std::size_t a = 0; a < counts.size(); ++a)
        for (std::size_t b = 0; b < counts[a].size(); ++b)
            for (int k = 0; k < counts[a][b]; ++k) {
                int x1 = x1_off + static_cast<int>(b);
                if (n0[a] >= by0[a].size() || n1[x1] >= by1[x1].size())
                    throw std::logic_error("pair counts exceed fibre sizes");
                s.map[by0[a][n0[a]++]] = by1[x1][n1[x1]++];
            }
    return s;
}

}  // namespace detail

inline AppBR build_appbr(int nu, int delta, long budget = 50'000'000) {
    if (nu < 6) throw Infeasible("nu must be at least 6");
    if (delta < 3 || delta > nu - 3 || nu % delta != 0)
        throw Infeasible("delta must be a divisor of nu with 3 <= delta <= nu - 3");
    auto M = detail::search_m(nu, delta, budget);
    if (!M) throw Infeasible("no matrix M found within the search budget");
    AppBR a;
    a.nu = nu;
    a.delta = delta;
    a.M = *M;
    int c = 2 * nu / delta, n = 2 * nu;
    IntMatrix cm(nu, std::vector<int>(nu));
    for (int r = 0; r < nu; ++r)
        for (int k = 0; k < nu; ++k) cm[r][k] = c * a.M[r][k];
    IntMatrix cmt = transpose(cm);
    a.Msigma.assign(n, std::vector<int>(n, 0));
    a.Mtau.assign(n, std::vector<int>(n, 0));
    for (int r = 0; r < nu; ++r)
        for (int k = 0; k < nu; ++k) {
            a.Msigma[r][k] = a.Msigma[nu + r][nu + k] = cm[r][k];
            a.Mtau[r][k] = cm[r][k];
            a.Mtau[nu + r][nu + k] = cmt[r][k];
        }
    a.data = NccwData::make({n * n}, {n, n});
    a.data.p_labels = {"p"};
    a.data.i_labels = {"i0", "i1"};
    a.data.mult[0][0] = {n, 0};
    a.data.mult[1][0] = {0, n};
    DualData d = dualize(a.data);
    a.sigma = detail::realize(d, a.Msigma, n);
    a.tau = detail::realize(d, a.Mtau, n);
    return a;
}

// Edge-count matrix between X^{i0} and X^{i1} of the twisted graph.
inline IntMatrix pair_counts(const DualData& d, const TwistPerm& t, int i0, int i1) {
    IntMatrix m(d.i_size(i0), std::vector<int>(d.i_size(i1), 0));
    for (int y = 0; y < d.ny(); ++y) {
        int a = d.b[0][y], b = d.b[1][t(y)];
        if (a >= 0 && b >= 0 && d.i_of(a) == i0 && d.i_of(b) == i1) m[a - d.x_off[i0]][b - d.x_off[i1]]++;
    }
    return m;
}

// Plain undirected multigraph isomorphism of the two twisted graphs.
inline IsoResult unoriented_iso(const DualData& d, const TwistPerm& s, const TwistPerm& t) {
    auto build = [&](const TwistPerm& tw) {
        ColGraph g;
        for (int x = 0; x < d.nx(); ++x) g.add_vertex(0);
        int freev = g.add_vertex(1);
        for (int y = 0; y < d.ny(); ++y) {
            int a = d.b[0][y], b = d.b[1][tw(y)];
            g.add_edge(a < 0 ? freev : a, b < 0 ? freev : b);
        }
        return g;
    };
    return find_isomorphism(build(s), build(t));
}

}  // namespace nccw
