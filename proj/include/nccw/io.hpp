#pragma once

// Reading boundary data, twists and tower seeds from YAML or JSON, and
// writing reports as JSON.  YAML documents are converted to JSON first so
// both dialects share one schema.

#include "nccw/classify.hpp"
#include "nccw/conditions.hpp"
#include "nccw/ends.hpp"
#include "nccw/paths.hpp"

#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace nccw {

using json = nlohmann::ordered_json;

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Tower section of a seed file.
struct TowerSeed {
    FamilySpec family;
    int twist_block = -1;
    int zcell = -1;
};

struct InputDoc {
    NccwData data;
    std::map<std::string, std::string> sigma, tau;  // p-label -> cycles
    std::optional<TowerSeed> tower;
};

namespace detail {

inline json yaml_to_json(const YAML::Node& n) {
    switch (n.Type()) {
        case YAML::NodeType::Null:
        case YAML::NodeType::Undefined:
            return nullptr;
        case YAML::NodeType::Sequence: {
            json a = json::array();
            for (const auto& c : n) a.push_back(yaml_to_json(c));
            return a;
        }
        case YAML::NodeType::Map: {
            json o = json::object();
            for (const auto& kv : n) o[kv.first.as<std::string>()] = yaml_to_json(kv.second);
            return o;
        }
        case YAML::NodeType::Scalar: {
            const std::string& s = n.Scalar();
            if (n.Tag() == "!") return s;  // quoted
            long v = 0;
            auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec == std::errc() && ptr == s.data() + s.size()) return v;
            if (s == "true") return true;
            if (s == "false") return false;
            return s;
        }
    }
    return nullptr;
}

inline int label_index(const std::vector<std::string>& labels, const json& v, const char* what) {
    if (v.is_number_integer()) {
        int k = v.get<int>();
        if (k < 0 || k >= static_cast<int>(labels.size()))
            throw ParseError(std::string(what) + " index " + std::to_string(k) + " out of range");
        return k;
    }
    if (!v.is_string()) throw ParseError(std::string(what) + " must be a label or an index");
    auto s = v.get<std::string>();
    for (int k = 0; k < static_cast<int>(labels.size()); ++k)
        if (labels[k] == s) return k;
    throw ParseError(std::string("unknown ") + what + " label \"" + s + "\"");
}

inline void read_blocks(const json& arr, const char* key, const std::string& prefix, std::vector<std::string>& labels,
                        std::vector<int>& sizes) {
    if (!arr.is_array() || arr.empty()) throw ParseError(std::string(key) + " must be a non-empty list");
    for (const auto& b : arr) {
        if (b.is_number_integer()) {
            labels.push_back(prefix + std::to_string(labels.size() + 1));
            sizes.push_back(b.get<int>());
        } else if (b.is_object() && b.contains("size") && b["size"].is_number_integer()) {
            labels.push_back(b.contains("label") ? b["label"].get<std::string>()
                                                 : prefix + std::to_string(labels.size() + 1));
            sizes.push_back(b["size"].get<int>());
        } else {
            throw ParseError(std::string(key) + " entries must be sizes or {label, size}");
        }
    }
    std::vector<std::string> sorted(labels);
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
        throw ParseError(std::string("duplicate label in ") + key);
}

inline KindCounts read_kinds(const json& o) {
    if (!o.is_object()) throw ParseError("kind counts must be a map such as {up: 3, c0: 9}");
    KindCounts c{};
    for (auto& [k, v] : o.items()) {
        auto kind = parse_kind(k);
        if (!kind) throw ParseError("unknown entry kind \"" + k + "\"");
        if (!v.is_number_integer() || v.get<int>() < 0) throw ParseError("kind count must be a non-negative integer");
        c[idx(*kind)] = v.get<int>();
    }
    return c;
}

inline std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

inline TowerSeed read_tower(const json& t, const NccwData& data) {
    if (!t.is_object()) throw ParseError("tower must be a map");
    TowerSeed s;
    auto& f = s.family;
    std::string mod = lower(t.value("modification", std::string("path")));
    if (mod == "path")
        f.mod = Modification::Path;
    else if (mod == "conn")
        f.mod = Modification::Conn;
    else
        throw ParseError("modification must be path or conn");
    std::string fl = lower(t.value("flavor", std::string("unital")));
    if (fl == "unital")
        f.flavor = Flavor::Unital;
    else if (fl == "projectionless" || fl == "stably_projectionless")
        f.flavor = Flavor::Projectionless;
    else
        throw ParseError("flavor must be unital or projectionless");
    f.rule.nq = t.value("blocks", 1);
    if (f.rule.nq < 1) throw ParseError("blocks must be positive");
    if (!t.contains("rule")) throw ParseError("tower needs a rule");
    f.rule.base = read_kinds(t["rule"]);
    if (t.contains("grave_rule")) f.rule.grave_counts = read_kinds(t["grave_rule"]);
    f.rule.grave = t.value("grave", -1);
    f.rule.frak = t.value("frak", 0);
    if (f.rule.frak < 0 || f.rule.frak >= f.rule.nq) throw ParseError("frak must index a target block");
    if (t.contains("toggles")) {
        for (const auto& tg : t["toggles"]) {
            std::string name = tg.get<std::string>();
            bool hit = false;
            for (auto& [n, b] : toggle_names())
                if (n == name) f.toggles |= b, hit = true;
            if (!hit) throw ParseError("unknown toggle \"" + name + "\"");
        }
    }
    if (t.contains("sccb")) {
        for (const auto& v : t["sccb"]) f.m_seq.push_back(v.get<int>());
        f.toggles |= kSccb;
        f.rule.sccb = true;
    }
    if (t.contains("twist") && !t["twist"].is_null()) s.twist_block = label_index(data.p_labels, t["twist"], "p");
    if (t.contains("zcell") && !t["zcell"].is_null()) s.zcell = label_index(data.i_labels, t["zcell"], "i");
    return s;
}

}  // namespace detail

inline InputDoc parse_input_json(const json& j) {
    if (!j.is_object()) throw ParseError("top level must be a map");
    InputDoc doc;
    auto& d = doc.data;
    if (!j.contains("p_blocks") || !j.contains("i_blocks")) throw ParseError("p_blocks and i_blocks are required");
    detail::read_blocks(j["p_blocks"], "p_blocks", "p", d.p_labels, d.p_sizes);
    detail::read_blocks(j["i_blocks"], "i_blocks", "i", d.i_labels, d.i_sizes);
    for (int r = 0; r < 2; ++r) d.mult[r].assign(d.np(), std::vector<int>(d.ni(), 0));
    if (!j.contains("mult") || !j["mult"].is_array()) throw ParseError("mult must be a list of (r, p, i, count)");
    for (const auto& e : j["mult"]) {
        json r, p, i, c;
        if (e.is_array() && e.size() == 4) {
            r = e[0], p = e[1], i = e[2], c = e[3];
        } else if (e.is_object()) {
            r = e.value("r", json()), p = e.value("p", json()), i = e.value("i", json()), c = e.value("count", json());
        } else {
            throw ParseError("mult entry must be [r, p, i, count] or {r, p, i, count}");
        }
        if (!r.is_number_integer() || (r != 0 && r != 1)) throw ParseError("mult entry: r must be 0 or 1");
        if (!c.is_number_integer() || c.get<int>() < 0) throw ParseError("mult entry: count must be a non-negative integer");
        int pi = detail::label_index(d.p_labels, p, "p"), ii = detail::label_index(d.i_labels, i, "i");
        d.mult[r.get<int>()][pi][ii] += c.get<int>();
    }
    if (j.contains("layout") && !j["layout"].is_null()) {
        const auto& l = j["layout"];
        std::array<std::vector<std::vector<int>>, 2> lay;
        for (int r = 0; r < 2; ++r) {
            std::string key = "r" + std::to_string(r);
            if (!l.contains(key)) throw ParseError("layout needs r0 and r1");
            try {
                lay[r] = l[key].get<std::vector<std::vector<int>>>();
            } catch (const json::exception&) {
                throw ParseError("layout." + key + " must be a list of slot lists, one per p-block");
            }
        }
        d.layout = lay;
    }
    for (const char* key : {"sigma", "tau"}) {
        if (!j.contains(key) || j[key].is_null()) continue;
        auto& dst = std::string(key) == "sigma" ? doc.sigma : doc.tau;
        if (!j[key].is_object()) throw ParseError(std::string(key) + " must map p-labels to cycle strings");
        for (auto& [p, cyc] : j[key].items()) {
            detail::label_index(d.p_labels, json(p), "p");
            dst[p] = cyc.get<std::string>();
        }
    }
    if (j.contains("tower")) doc.tower = detail::read_tower(j["tower"], d);
    return doc;
}

inline InputDoc parse_input_text(const std::string& text, bool as_json) {
    try {
        if (as_json) return parse_input_json(json::parse(text));
        return parse_input_json(detail::yaml_to_json(YAML::Load(text)));
    } catch (const ParseError&) {
        throw;
    } catch (const json::exception& e) {
        throw ParseError(std::string("json: ") + e.what());
    } catch (const YAML::Exception& e) {
        throw ParseError(std::string("yaml: ") + e.what());
    }
}

// Dialect by extension; anything but .json is read as YAML.
inline InputDoc load_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    bool as_json = path.size() >= 5 && path.compare(path.size() - 5, 5, ".json") == 0;
    return parse_input_text(ss.str(), as_json);
}

// "p1:(1 2);p2:(1 3)".  A bare cycle string is allowed when there is one p.
inline std::map<std::string, std::string> parse_twist_arg(const NccwData& d, const std::string& arg) {
    std::map<std::string, std::string> out;
    if (arg.empty() || arg == "id") return out;
    if (arg.find(':') == std::string::npos) {
        if (d.np() != 1) throw ParseError("twist argument needs p-label prefixes when there are several p-blocks");
        out[d.p_labels[0]] = arg;
        return out;
    }
    std::stringstream ss(arg);
    std::string part;
    while (std::getline(ss, part, ';')) {
        auto c = part.find(':');
        if (c == std::string::npos) throw ParseError("twist part \"" + part + "\" lacks a label");
        std::string label = part.substr(0, c);
        detail::label_index(d.p_labels, json(label), "p");
        out[label] = part.substr(c + 1);
    }
    return out;
}

inline TwistPerm make_twist(const NccwData& data, const std::map<std::string, std::string>& cycles) {
    DualData d = dualize(data);
    TwistPerm t = TwistPerm::identity(d.ny());
    for (auto& [label, text] : cycles) {
        int p = detail::label_index(d.p_labels, json(label), "p");
        try {
            apply_cycles(t, d.y_off[p], d.p_size(p), text);
        } catch (const std::invalid_argument& e) {
            throw ParseError(std::string(label) + ": " + e.what());
        }
    }
    return t;
}

inline std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        int v = 0;
        auto b = tok.find_first_not_of(' '), e = tok.find_last_not_of(' ');
        if (b == std::string::npos) throw ParseError("empty entry in list \"" + s + "\"");
        auto [ptr, ec] = std::from_chars(tok.data() + b, tok.data() + e + 1, v);
        if (ec != std::errc() || ptr != tok.data() + e + 1 || v < 0) throw ParseError("bad list entry \"" + tok + "\"");
        out.push_back(v);
    }
    return out;
}

inline unsigned parse_toggles(const std::string& s) {
    unsigned t = 0;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        bool hit = false;
        for (auto& [n, b] : toggle_names())
            if (n == tok) t |= b, hit = true;
        if (!hit) throw ParseError("unknown toggle \"" + tok + "\"");
    }
    return t;
}

// ------------------------------------------------------------------ output

inline json to_json(const NccwData& d) {
    json j;
    json pb = json::array(), ib = json::array(), m = json::array();
    for (int p = 0; p < d.np(); ++p) pb.push_back({{"label", d.p_labels[p]}, {"size", d.p_sizes[p]}});
    for (int i = 0; i < d.ni(); ++i) ib.push_back({{"label", d.i_labels[i]}, {"size", d.i_sizes[i]}});
    for (int r = 0; r < 2; ++r)
        for (int p = 0; p < d.np(); ++p)
            for (int i = 0; i < d.ni(); ++i)
                if (d.mult[r][p][i]) m.push_back({r, d.p_labels[p], d.i_labels[i], d.mult[r][p][i]});
    j["p_blocks"] = pb;
    j["i_blocks"] = ib;
    j["mult"] = m;
    if (d.layout) j["layout"] = {{"r0", (*d.layout)[0]}, {"r1", (*d.layout)[1]}};
    return j;
}

inline json to_json(const ValidationReport& r, const NccwData& d) {
    json j;
    j["ok"] = r.ok;
    j["errors"] = r.errors;
    if (!r.ok) return j;
    j["unital_b0"] = r.unital[0];
    j["unital_b1"] = r.unital[1];
    j["injective"] = r.injective;
    json unc = json::array();
    for (int i : r.uncovered) unc.push_back(d.i_labels[i]);
    j["uncovered"] = unc;
    j["grave"] = r.grave ? json(d.p_labels[*r.grave]) : json(nullptr);
    return j;
}

inline json to_json(const DualData& d) {
    json j;
    j["p_labels"] = d.p_labels;
    j["i_labels"] = d.i_labels;
    j["y_offsets"] = d.y_off;
    j["x_offsets"] = d.x_off;
    j["b0"] = d.b[0];
    j["b1"] = d.b[1];
    j["slot0"] = d.slot[0];
    j["slot1"] = d.slot[1];
    return j;
}

// All five components, keyed by labels of the reduced data.
inline json to_json(const ConjugacyCertificate& c, const DualData& d) {
    json j;
    json rho = json::object(), kappa = json::object(), o = json::object();
    for (int p = 0; p < d.np(); ++p) {
        rho[d.p_labels[p]] = d.p_labels[c.rho[p]];
        o[d.p_labels[p]] = c.o[p];
    }
    for (int i = 0; i < d.ni(); ++i) kappa[d.i_labels[i]] = d.i_labels[c.kappa[i]];
    j["rho"] = rho;
    j["kappa"] = kappa;
    j["o"] = o;
    j["Theta"] = c.theta;
    j["Xi"] = c.xi;
    return j;
}

inline const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Conjugate: return "Conjugate";
        case Verdict::NotConjugate: return "NotConjugate";
        default: return "Undecided";
    }
}

inline json to_json(const Decision& dec) {
    json j;
    j["verdict"] = verdict_name(dec.verdict);
    if (dec.certificate) j["certificate"] = to_json(*dec.certificate, dec.reduced.dual);
    if (!dec.obstruction.empty()) j["obstruction"] = dec.obstruction;
    j["reduced"] = to_json(to_nccw(dec.reduced.dual));
    j["rewrites"] = static_cast<int>(dec.reduced.log.size());
    return j;
}

inline json to_json(const TopGraph& g) {
    json j;
    json vs = json::array(), es = json::array();
    for (auto& v : g.vertices) vs.push_back(v.label);
    for (auto& e : g.edges)
        es.push_back({{"u", e.u < 0 ? json(nullptr) : json(e.u)}, {"v", e.v < 0 ? json(nullptr) : json(e.v)}, {"label", e.label}});
    j["vertices"] = vs;
    j["edges"] = es;
    return j;
}

inline json to_json(const Analysis& a) {
    return {{"pi0", a.pi0},           {"vertices", a.vertices},         {"edges", a.edges},
            {"free_ends", a.free_ends}, {"closed_edges", a.closed_edges}, {"betti1", a.betti1},
            {"cut_vertices", a.cut_vertices}};
}

inline json to_json(const ConditionReport& r) {
    json j = json::array();
    for (auto& e : r.entries) {
        if (!e.applicable) continue;
        json x{{"name", e.name}, {"pass", e.pass}};
        if (!e.witness.empty()) x["witness"] = e.witness;
        j.push_back(x);
    }
    return j;
}

inline json to_json(const K33Certificate& c) {
    json j;
    j["level"] = c.level;
    j["edge"] = c.edge;
    j["interval"] = {to_string(c.lo), to_string(c.hi)};
    j["ok"] = c.ok();
    if (!c.error.empty()) j["error"] = c.error;
    json mu = json::array();
    for (auto& row : c.mu) mu.push_back(row);
    j["mu"] = mu;
    j["nu_lo"] = c.nu_lo;
    j["nu_up"] = c.nu_up;
    json paths = json::array();
    for (auto& row : c.paths)
        for (auto& p : row) paths.push_back(to_string(p));
    j["paths"] = paths;
    j["sub_vertices"] = c.sub.nv();
    j["sub_edges"] = c.sub.ne();
    return j;
}

inline json to_json(const EndsTree& t) {
    json j;
    j["verdict"] = t.verdict();
    j["min_branching"] = t.min_branching;
    j["counts_match"] = t.counts_match();
    json lv = json::array();
    for (auto& l : t.levels)
        lv.push_back({{"level", l.level}, {"nodes", l.nodes.size()}, {"formula", l.formula}});
    j["levels"] = lv;
    if (!t.error.empty()) j["error"] = t.error;
    return j;
}

inline json to_json(const Comparison& c) {
    if (auto* d = std::get_if<Distinguished>(&c))
        return {{"result", "Distinguished"}, {"level", d->level}, {"value", d->value}, {"smaller", d->smaller}};
    return {{"result", "IndistinguishableToDepth"}, {"depth", std::get<IndistinguishableToDepth>(c).depth}};
}

inline std::string matrix_text(const IntMatrix& m) {
    std::string s;
    for (auto& row : m) {
        for (std::size_t c = 0; c < row.size(); ++c) s += (c ? " " : "") + std::to_string(row[c]);
        s += "\n";
    }
    return s;
}

}  // namespace nccw
