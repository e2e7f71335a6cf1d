#pragma once

#include <algorithm>
#include <cctype>
#include <array>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace nccw {

// Boundary data of a 1-dimensional NCCW complex A = {(f,a) : f(r) = beta_r(a)}
// with E = sum_p M_{p}, F = sum_i M_[i]. Only the combinatorics is kept.
struct NccwData {
    std::vector<std::string> p_labels;
    std::vector<int> p_sizes;
    std::vector<std::string> i_labels;
    std::vector<int> i_sizes;
    // mult[r][p][i] = m_r(p,i)
    std::array<std::vector<std::vector<int>>, 2> mult;
    // Optional explicit layout: layout[r][p] lists the target diagonal slot of
    // each image slot, enumerated in (i, copy, k) order.
    std::optional<std::array<std::vector<std::vector<int>>, 2>> layout;

    int np() const { return static_cast<int>(p_sizes.size()); }
    int ni() const { return static_cast<int>(i_sizes.size()); }
    int m(int r, int p, int i) const { return mult[r][p][i]; }

    // Empty data with the given block sizes and zero multiplicities.
    static NccwData make(std::vector<int> ps, std::vector<int> is) {
        NccwData d;
        d.p_sizes = std::move(ps);
        d.i_sizes = std::move(is);
        for (int p = 0; p < d.np(); ++p) d.p_labels.push_back("p" + std::to_string(p + 1));
        for (int i = 0; i < d.ni(); ++i) d.i_labels.push_back("i" + std::to_string(i + 1));
        for (int r = 0; r < 2; ++r)
            d.mult[r].assign(d.np(), std::vector<int>(d.ni(), 0));
        return d;
    }

    int used(int r, int p) const {
        int s = 0;
        for (int i = 0; i < ni(); ++i) s += mult[r][p][i] * i_sizes[i];
        return s;
    }
};

struct ValidationReport {
    bool ok = true;
    std::vector<std::string> errors;
    std::array<std::vector<int>, 2> used;     // slots used by beta_r^p
    std::array<std::vector<bool>, 2> unital;  // used == {p}
    bool injective = true;                    // every i is hit by some (r,p)
    std::vector<int> uncovered;               // i with m_r(p,i) = 0 for all r,p
    std::optional<int> grave;                 // unique p with beta_1^p non-unital
};

inline ValidationReport validate_nccw(const NccwData& d) {
    ValidationReport rep;
    auto fail = [&](std::string msg) {
        rep.ok = false;
        rep.errors.push_back(std::move(msg));
    };
    int P = d.np(), I = d.ni();
    if (static_cast<int>(d.p_labels.size()) != P) fail("p_labels size differs from p_blocks");
    if (static_cast<int>(d.i_labels.size()) != I) fail("i_labels size differs from i_blocks");
    for (int p = 0; p < P; ++p)
        if (d.p_sizes[p] <= 0) fail("p-block " + std::to_string(p) + " has non-positive size");
    for (int i = 0; i < I; ++i)
        if (d.i_sizes[i] <= 0) fail("i-block " + std::to_string(i) + " has non-positive size");
    for (int r = 0; r < 2; ++r) {
        if (static_cast<int>(d.mult[r].size()) != P) {
            fail("multiplicity table has wrong number of p rows");
            return rep;
        }
        for (int p = 0; p < P; ++p) {
            if (static_cast<int>(d.mult[r][p].size()) != I) {
                fail("multiplicity table has wrong number of i columns");
                return rep;
            }
            for (int i = 0; i < I; ++i)
                if (d.mult[r][p][i] < 0) fail("negative multiplicity");
        }
    }
    if (!rep.ok) return rep;

    for (int r = 0; r < 2; ++r) {
        rep.used[r].resize(P);
        rep.unital[r].resize(P);
        for (int p = 0; p < P; ++p) {
            int u = d.used(r, p);
            rep.used[r][p] = u;
            rep.unital[r][p] = (u == d.p_sizes[p]);
            if (u > d.p_sizes[p])
                fail("beta_" + std::to_string(r) + " on " + d.p_labels[p] + " needs " +
                     std::to_string(u) + " slots but the block has " +
                     std::to_string(d.p_sizes[p]));
        }
    }
    for (int i = 0; i < I; ++i) {
        bool hit = false;
        for (int r = 0; r < 2; ++r)
            for (int p = 0; p < P; ++p) hit = hit || d.mult[r][p][i] > 0;
        if (!hit) {
            rep.injective = false;
            rep.uncovered.push_back(i);
        }
    }
    if (!rep.injective) fail("F -> E + E is not injective: some i-block is never hit");

    if (d.layout) {
        for (int r = 0; r < 2; ++r) {
            if (static_cast<int>((*d.layout)[r].size()) != P) {
                fail("layout has wrong number of p rows");
                continue;
            }
            for (int p = 0; p < P; ++p) {
                const auto& lay = (*d.layout)[r][p];
                if (static_cast<int>(lay.size()) != rep.used[r][p]) {
                    fail("layout of (" + std::to_string(r) + "," + d.p_labels[p] +
                         ") covers the wrong number of slots");
                    continue;
                }
                std::vector<bool> seen(std::max(d.p_sizes[p], 0), false);
                for (int s : lay) {
                    if (s < 0 || s >= d.p_sizes[p]) {
                        fail("layout slot out of range in " + d.p_labels[p]);
                        break;
                    }
                    if (seen[s]) {
                        fail("layout collision at slot " + std::to_string(s) + " of " +
                             d.p_labels[p]);
                        break;
                    }
                    seen[s] = true;
                }
            }
        }
    }

    if (rep.ok) {
        int bad1 = 0, g = -1;
        bool rest_unital = true;
        for (int p = 0; p < P; ++p) {
            if (!rep.unital[0][p]) rest_unital = false;
            if (!rep.unital[1][p]) {
                ++bad1;
                g = p;
            }
        }
        if (rest_unital && bad1 == 1) rep.grave = g;
    }
    return rep;
}

// Finite dual picture: Y = slots of E, X = slots of F, partial maps b_0, b_1.
struct DualData {
    std::vector<std::string> p_labels, i_labels;
    std::vector<int> y_off{0}, x_off{0};
    std::array<std::vector<int>, 2> b;     // -1 where undefined
    std::array<std::vector<int>, 2> slot;  // copy index within (r,p,i), -1 where undefined

    int np() const { return static_cast<int>(y_off.size()) - 1; }
    int ni() const { return static_cast<int>(x_off.size()) - 1; }
    int ny() const { return y_off.back(); }
    int nx() const { return x_off.back(); }
    int p_size(int p) const { return y_off[p + 1] - y_off[p]; }
    int i_size(int i) const { return x_off[i + 1] - x_off[i]; }
    int p_of(int y) const {
        return static_cast<int>(std::upper_bound(y_off.begin(), y_off.end(), y) - y_off.begin()) - 1;
    }
    int i_of(int x) const {
        return static_cast<int>(std::upper_bound(x_off.begin(), x_off.end(), x) - x_off.begin()) - 1;
    }

    // m_r(p,i) recovered from the fibres of b_r.
    std::array<std::vector<std::vector<int>>, 2> multiplicities() const {
        std::array<std::vector<std::vector<int>>, 2> m;
        for (int r = 0; r < 2; ++r) {
            m[r].assign(np(), std::vector<int>(ni(), 0));
            for (int p = 0; p < np(); ++p)
                for (int y = y_off[p]; y < y_off[p + 1]; ++y)
                    if (b[r][y] >= 0) m[r][p][i_of(b[r][y])]++;
            for (int p = 0; p < np(); ++p)
                for (int i = 0; i < ni(); ++i) m[r][p][i] /= std::max(i_size(i), 1);
        }
        return m;
    }

    bool operator==(const DualData&) const = default;
};

// Checks the fibre-count invariants; returns the list of violations.
inline std::vector<std::string> check_dual(const DualData& d) {
    std::vector<std::string> errs;
    int Y = d.ny(), X = d.nx();
    for (int r = 0; r < 2; ++r) {
        if (static_cast<int>(d.b[r].size()) != Y || static_cast<int>(d.slot[r].size()) != Y) {
            errs.push_back("map arrays have wrong length");
            return errs;
        }
    }
    for (int r = 0; r < 2; ++r) {
        for (int p = 0; p < d.np(); ++p) {
            // (i, copy) -> hits per x
            std::vector<std::vector<int>> count(d.ni());
            std::vector<int> fib(X, 0);
            for (int y = d.y_off[p]; y < d.y_off[p + 1]; ++y) {
                int x = d.b[r][y];
                if (x < 0) continue;
                if (x >= X) {
                    errs.push_back("b_" + std::to_string(r) + " points outside X");
                    continue;
                }
                fib[x]++;
            }
            for (int i = 0; i < d.ni(); ++i) {
                int lo = d.x_off[i], hi = d.x_off[i + 1];
                for (int x = lo; x < hi; ++x)
                    if (fib[x] != fib[lo])
                        errs.push_back("fibre sizes of b_" + std::to_string(r) + " over " +
                                       d.i_labels[i] + " differ within block " + d.p_labels[p]);
                int m = hi > lo ? fib[lo] : 0;
                // each (copy, x) must be hit exactly once
                std::vector<int> seen(static_cast<std::size_t>(m) * (hi - lo), 0);
                for (int y = d.y_off[p]; y < d.y_off[p + 1]; ++y) {
                    int x = d.b[r][y];
                    if (x < lo || x >= hi) continue;
                    int mu = d.slot[r][y];
                    if (mu < 0 || mu >= m) {
                        errs.push_back("slot-block label out of range");
                        continue;
                    }
                    if (seen[static_cast<std::size_t>(mu) * (hi - lo) + (x - lo)]++)
                        errs.push_back("slot-block fibre is not a single point");
                }
            }
        }
    }
    return errs;
}

inline DualData dualize(const NccwData& d) {
    DualData out;
    out.p_labels = d.p_labels;
    out.i_labels = d.i_labels;
    for (int s : d.p_sizes) out.y_off.push_back(out.y_off.back() + s);
    for (int s : d.i_sizes) out.x_off.push_back(out.x_off.back() + s);
    for (int r = 0; r < 2; ++r) {
        out.b[r].assign(out.ny(), -1);
        out.slot[r].assign(out.ny(), -1);
        for (int p = 0; p < d.np(); ++p) {
            int k = 0;
            for (int i = 0; i < d.ni(); ++i)
                for (int mu = 0; mu < d.mult[r][p][i]; ++mu)
                    for (int c = 0; c < d.i_sizes[i]; ++c, ++k) {
                        int target = d.layout ? (*d.layout)[r][p][k] : k;
                        int y = out.y_off[p] + target;
                        out.b[r][y] = out.x_off[i] + c;
                        out.slot[r][y] = mu;
                    }
        }
    }
    return out;
}

// Inverse of dualize: recovers multiplicities and an explicit layout.
inline NccwData to_nccw(const DualData& d) {
    NccwData out;
    out.p_labels = d.p_labels;
    out.i_labels = d.i_labels;
    for (int p = 0; p < d.np(); ++p) out.p_sizes.push_back(d.p_size(p));
    for (int i = 0; i < d.ni(); ++i) out.i_sizes.push_back(d.i_size(i));
    out.mult = d.multiplicities();
    std::array<std::vector<std::vector<int>>, 2> lay;
    bool canonical = true;
    for (int r = 0; r < 2; ++r) {
        lay[r].resize(d.np());
        for (int p = 0; p < d.np(); ++p) {
            std::vector<std::array<int, 4>> keyed;  // (i, copy, k, local y)
            for (int y = d.y_off[p]; y < d.y_off[p + 1]; ++y) {
                int x = d.b[r][y];
                if (x < 0) continue;
                int i = d.i_of(x);
                keyed.push_back({i, d.slot[r][y], x - d.x_off[i], y - d.y_off[p]});
            }
            std::sort(keyed.begin(), keyed.end());
            for (std::size_t k = 0; k < keyed.size(); ++k) {
                lay[r][p].push_back(keyed[k][3]);
                if (keyed[k][3] != static_cast<int>(k)) canonical = false;
            }
        }
    }
    if (!canonical) out.layout = lay;
    return out;
}

// Block-preserving permutation of Y, stored globally.
struct TwistPerm {
    std::vector<int> map;

    static TwistPerm identity(int n) {
        TwistPerm t;
        t.map.resize(n);
        std::iota(t.map.begin(), t.map.end(), 0);
        return t;
    }
    int operator()(int y) const { return map[y]; }
    int size() const { return static_cast<int>(map.size()); }
    TwistPerm inverse() const {
        TwistPerm t;
        t.map.resize(map.size());
        for (int y = 0; y < size(); ++y) t.map[map[y]] = y;
        return t;
    }
    // (a * b)(y) = a(b(y))
    friend TwistPerm operator*(const TwistPerm& a, const TwistPerm& b) {
        TwistPerm t;
        t.map.resize(b.map.size());
        for (int y = 0; y < b.size(); ++y) t.map[y] = a.map[b.map[y]];
        return t;
    }
    bool operator==(const TwistPerm&) const = default;

    bool block_preserving(const DualData& d) const {
        if (size() != d.ny()) return false;
        std::vector<bool> hit(size(), false);
        for (int y = 0; y < size(); ++y) {
            int z = map[y];
            if (z < 0 || z >= size() || hit[z] || d.p_of(z) != d.p_of(y)) return false;
            hit[z] = true;
        }
        return true;
    }
};

// Parses cycle notation such as "(1 2)(3 4 5)" on a block of the given size
// (1-based local indices) and writes it into t at offset.
inline void apply_cycles(TwistPerm& t, int offset, int size, const std::string& text) {
    std::vector<bool> used(size, false);
    std::size_t pos = 0;
    while (pos < text.size()) {
        if (std::isspace(static_cast<unsigned char>(text[pos])) || text[pos] == ',') {
            ++pos;
            continue;
        }
        if (text[pos] != '(') throw std::invalid_argument("cycle notation: expected '(' in \"" + text + "\"");
        auto close = text.find(')', pos);
        if (close == std::string::npos) throw std::invalid_argument("cycle notation: missing ')'");
        std::string body = text.substr(pos + 1, close - pos - 1);
        for (char& c : body)
            if (c == ',') c = ' ';
        std::istringstream in(body);
        std::vector<int> cyc;
        std::string tok;
        while (in >> tok) {
            int v;
            try {
                std::size_t used_chars = 0;
                v = std::stoi(tok, &used_chars);
                if (used_chars != tok.size()) throw std::invalid_argument(tok);
            } catch (const std::exception&) {
                throw std::invalid_argument("cycle notation: bad element \"" + tok + "\"");
            }
            if (v < 1 || v > size) throw std::invalid_argument("cycle notation: element out of range");
            if (used[v - 1]) throw std::invalid_argument("cycle notation: repeated element");
            used[v - 1] = true;
            cyc.push_back(v - 1);
        }
        for (std::size_t k = 0; k < cyc.size(); ++k)
            t.map[offset + cyc[k]] = offset + cyc[(k + 1) % cyc.size()];
        pos = close + 1;
    }
}

inline std::string to_cycles(const TwistPerm& t, int offset, int size) {
    std::string out;
    std::vector<bool> seen(size, false);
    for (int s = 0; s < size; ++s) {
        if (seen[s] || t.map[offset + s] == offset + s) continue;
        out += "(";
        int c = s;
        bool first = true;
        while (!seen[c]) {
            seen[c] = true;
            if (!first) out += " ";
            out += std::to_string(c + 1);
            first = false;
            c = t.map[offset + c] - offset;
        }
        out += ")";
    }
    return out.empty() ? "()" : out;
}

// Twisted graph of block p: edge y runs from b_0(y) to b_1(sigma(y)).
struct TwistedEdge {
    int y;
    int src;  // -1: free end
    int tgt;  // -1: free end
};

struct LabeledMultigraph {
    int p = 0;
    int nx = 0;
    std::vector<TwistedEdge> edges;
};

inline std::vector<LabeledMultigraph> twisted_graphs(const DualData& d, const TwistPerm& sigma) {
    if (!sigma.block_preserving(d)) throw std::invalid_argument("twist is not block preserving");
    std::vector<LabeledMultigraph> out(d.np());
    for (int p = 0; p < d.np(); ++p) {
        out[p].p = p;
        out[p].nx = d.nx();
        for (int y = d.y_off[p]; y < d.y_off[p + 1]; ++y)
            out[p].edges.push_back({y, d.b[0][y], d.b[1][sigma(y)]});
    }
    return out;
}

}  // namespace nccw
