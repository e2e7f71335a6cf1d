// Command-line front end.  Exit codes: 0 ok / conjugate, 2 input error,
// 3 not conjugate, 4 condition failure, 5 undecided within the search budget.

#include "nccw/io.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

namespace fs = std::filesystem;
using namespace nccw;

namespace {

enum Exit { kOk = 0, kInput = 2, kNotConjugate = 3, kCondition = 4, kUndecided = 5 };

struct Options {
    std::string input, sigma, tau, toggles, sccb, against, out, format = "text";
    int depth = 3, nu = 6, delta = 3, lifts = 0;
    bool k33 = false, ends = false, invariants = false, center = false;
    std::uint64_t seed = 1;
};

// Write to a sibling temp file, then rename over the target.
void write_file(const Options& o, const std::string& name, const std::string& body) {
    if (o.out.empty()) return;
    fs::create_directories(o.out);
    fs::path dst = fs::path(o.out) / name, tmp = dst;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary);
        f << body;
    }
    fs::rename(tmp, dst);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// Twists from --sigma/--tau, falling back to the input file, then identity.
TwistPerm twist_from(const InputDoc& doc, const std::string& arg, const std::map<std::string, std::string>& file) {
    return make_twist(doc.data, arg.empty() ? file : parse_twist_arg(doc.data, arg));
}

InputDoc load_valid(const Options& o) {
    if (o.input.empty()) throw ParseError("--input is required");
    InputDoc doc = load_input(o.input);
    auto rep = validate_nccw(doc.data);
    if (!rep.ok) throw ParseError("invalid boundary data: " + rep.errors.front());
    return doc;
}

int cmd_validate(const Options& o) {
    if (o.input.empty()) throw ParseError("--input is required");
    InputDoc doc = load_input(o.input);
    auto rep = validate_nccw(doc.data);
    if (o.format == "json") {
        std::cout << dump(to_json(rep, doc.data));
    } else {
        std::cout << (rep.ok ? "valid" : "invalid") << "\n";
        for (auto& e : rep.errors) std::cout << "  error: " << e << "\n";
        if (rep.ok) {
            for (int r = 0; r < 2; ++r) {
                std::cout << "  b" << r << " unital:";
                for (int p = 0; p < doc.data.np(); ++p)
                    std::cout << " " << doc.data.p_labels[p] << "=" << (rep.unital[r][p] ? "yes" : "no");
                std::cout << "\n";
            }
            std::cout << "  injective: " << (rep.injective ? "yes" : "no") << "\n";
            std::cout << "  grave: " << (rep.grave ? doc.data.p_labels[*rep.grave] : std::string("none")) << "\n";
        }
    }
    write_file(o, "validate.json", dump(to_json(rep, doc.data)));
    return rep.ok ? kOk : kInput;
}

int cmd_classify(const Options& o) {
    InputDoc doc = load_valid(o);
    TwistPerm s = twist_from(doc, o.sigma, doc.sigma), t = twist_from(doc, o.tau, doc.tau);
    Decision dec = decide_conjugacy(doc.data, s, t);
    json j = to_json(dec);
    write_file(o, "classify.json", dump(j));
    if (o.format == "json") {
        std::cout << dump(j);
    } else {
        std::cout << verdict_name(dec.verdict) << "\n";
        if (dec.certificate) {
            const auto& c = j["certificate"];
            std::cout << "  rho: " << c["rho"].dump() << "\n  kappa: " << c["kappa"].dump()
                      << "\n  o: " << c["o"].dump() << "\n  Theta: " << c["Theta"].dump()
                      << "\n  Xi: " << c["Xi"].dump() << "\n";
        }
        if (!dec.obstruction.empty()) std::cout << "  obstruction: " << dec.obstruction << "\n";
    }
    switch (dec.verdict) {
        case Verdict::Conjugate: return kOk;
        case Verdict::NotConjugate: return kNotConjugate;
        default: return kUndecided;
    }
}

int cmd_appbr(const Options& o) {
    AppBR a;
    try {
        a = build_appbr(o.nu, o.delta);
    } catch (const Infeasible& e) {
        std::cerr << "appbr: " << e.what() << "\n";
        return kInput;
    }
    DualData d = dualize(a.data);
    auto cong = congruence_test(pair_counts(d, a.sigma, 0, 1), pair_counts(d, a.tau, 0, 1));
    auto iso = unoriented_iso(d, a.sigma, a.tau);
    auto dec = decide_conjugacy(a.data, a.sigma, a.tau);
    auto homeo = graph_homeomorphic(spec_b(d, a.sigma), spec_b(d, a.tau));
    bool iso_found = iso.status == SearchStatus::Found;
    json j;
    j["nu"] = a.nu;
    j["delta"] = a.delta;
    j["M"] = a.M;
    j["M_sigma"] = a.Msigma;
    j["M_tau"] = a.Mtau;
    j["congruence"] = {{"verdict", cong.congruent ? "Congruent" : "NotCongruent"}, {"reason", cong.reason}};
    j["graph_isomorphism"] = iso_found ? "isomorphic" : "not isomorphic";
    j["conjugacy"] = verdict_name(dec.verdict);
    j["spectrum"] = homeo.homeomorphic ? "homeomorphic" : "not homeomorphic";
    write_file(o, "appbr.json", dump(j));
    if (o.format == "json") {
        std::cout << dump(j);
    } else {
        std::cout << "M (" << a.nu << "x" << a.nu << ", " << a.delta << " ones per line):\n" << matrix_text(a.M);
        std::cout << "M_sigma:\n" << matrix_text(a.Msigma) << "M_tau:\n" << matrix_text(a.Mtau);
        std::cout << "congruence: " << (cong.congruent ? "Congruent" : "NotCongruent") << " (" << cong.reason << ")\n";
        std::cout << "graph isomorphism: " << j["graph_isomorphism"].get<std::string>() << "\n";
        std::cout << "conjugacy: " << verdict_name(dec.verdict) << "\n";
        std::cout << "spectrum: " << j["spectrum"].get<std::string>() << "\n";
    }
    bool as_stated = !cong.congruent && iso_found && dec.verdict == Verdict::NotConjugate && homeo.homeomorphic;
    return as_stated ? kOk : kCondition;
}

int cmd_spectrum_export(const Options& o) {
    InputDoc doc = load_valid(o);
    TopGraph g;
    if (o.center) {
        g = center_spectrum(doc.data);
    } else {
        TwistPerm s = twist_from(doc, o.sigma, doc.sigma);
        g = spec_b(dualize(doc.data), s);
    }
    auto a = analyze(g);
    std::string body;
    if (o.format == "dot") {
        body = to_dot(g);
    } else if (o.format == "json") {
        json j = to_json(g);
        j["analysis"] = to_json(a);
        j["dual"] = to_json(dualize(doc.data));
        body = dump(j);
    } else {
        body = "vertices " + std::to_string(a.vertices) + ", edges " + std::to_string(a.edges) + ", free ends " +
               std::to_string(a.free_ends) + ", pi0 " + std::to_string(a.pi0) + ", betti1 " +
               std::to_string(a.betti1) + "\n";
    }
    std::cout << body;
    write_file(o, o.format == "dot" ? "spectrum.dot" : o.format == "json" ? "spectrum.json" : "spectrum.txt", body);
    return kOk;
}

// Tower family from the seed file plus command-line overrides.
std::pair<Stage, FamilySpec> tower_setup(const Options& o, const std::string& sccb) {
    InputDoc doc = load_valid(o);
    if (!doc.tower) throw ParseError("seed file has no tower section");
    FamilySpec fam = doc.tower->family;
    if (!o.toggles.empty()) fam.toggles = parse_toggles(o.toggles) | (fam.toggles & kSccb);
    if (!sccb.empty()) {
        fam.m_seq = parse_int_list(sccb);
        fam.toggles |= kSccb;
        fam.rule.sccb = true;
    }
    try {
        Stage seed = seed_stage(doc.data, fam.flavor, fam.mod, doc.tower->twist_block, doc.tower->zcell);
        return {std::move(seed), fam};
    } catch (const BuildError& e) {
        throw ParseError(e.what());
    }
}

Tower build_or_throw(Stage seed, const FamilySpec& fam, int depth) {
    try {
        return build_tower(std::move(seed), fam, depth);
    } catch (const BuildError& e) {
        throw ParseError(std::string("tower: ") + e.what());
    }
}

int cmd_tower(const Options& o) {
    if (o.depth < 1) throw ParseError("--depth must be positive");
    auto [seed, fam] = tower_setup(o, o.sccb);
    constexpr int kK33MaxLevel = 3;
    int k33_top = o.k33 ? std::min(o.depth, kK33MaxLevel) : 0;
    if (o.k33 && fam.mod != Modification::Path) throw ParseError("--k33 needs a path tower");
    if (o.ends && fam.flavor != Flavor::Projectionless) throw ParseError("--ends needs a projectionless tower");
    Tower t = build_or_throw(std::move(seed), fam, std::max(o.depth, k33_top + 2));
    auto reports = check_tower(t);
    bool all_pass = true;
    json j;
    j["toggles"] = toggles_to_string(fam.toggles);
    json levels = json::array();
    std::ostringstream text;
    text << "tower " << (fam.mod == Modification::Path ? "path" : "conn") << " "
         << (fam.flavor == Flavor::Unital ? "unital" : "projectionless") << ", toggles " << toggles_to_string(fam.toggles)
         << "\n";
    for (int n = 1; n <= o.depth; ++n) {
        const Stage& st = t.level(n);
        int pi0 = stage_components(st);
        json lv{{"level", n}, {"P", st.d.np()}, {"I", st.d.ni()}, {"Y", st.ny()}, {"X", st.nx()}, {"pi0", pi0}};
        text << "level " << n << ": P=" << st.d.np() << " I=" << st.d.ni() << " Y=" << st.ny() << " X=" << st.nx()
             << " pi0=" << pi0;
        if (n >= 2) {
            const auto& rep = reports[n - 2];
            lv["conditions"] = to_json(rep);
            if (rep.ok()) {
                text << " conditions: pass";
            } else {
                all_pass = false;
                text << " conditions: FAIL";
                for (auto& name : rep.failing()) text << "\n  " << name << ": " << rep.find(name)->witness;
            }
        }
        text << "\n";
        levels.push_back(lv);
        if (o.format == "dot" || !o.out.empty()) {
            std::string dot = to_dot(spec_b_gen(st), "level" + std::to_string(n));
            write_file(o, "level" + std::to_string(n) + ".dot", dot);
        }
    }
    j["levels"] = levels;

    if (o.k33) {
        json k = json::array();
        for (int n = 1; n <= k33_top; ++n) {
            auto i1 = build_connector(t.level(n), t.level(n + 1));
            auto i2 = build_connector(t.level(n + 1), t.level(n + 2));
            int ok = 0;
            json certs = json::array();
            std::string first_error;
            for (int y = 0; y < t.level(n).ny(); ++y) {
                auto c = k33_witness(t, n, y, Dyadic(1, 4), Dyadic(3, 4), &i1, &i2);
                if (c.ok())
                    ok++;
                else if (first_error.empty())
                    first_error = c.error;
                certs.push_back(to_json(c));
            }
            text << "k33 level " << n << ": " << ok << "/" << t.level(n).ny() << " witnesses verified";
            if (!first_error.empty()) text << " (first failure: " << first_error << ")";
            text << "\n";
            if (ok != t.level(n).ny()) all_pass = false;
            write_file(o, "k33_level" + std::to_string(n) + ".json", dump(certs));
            k.push_back({{"level", n}, {"verified", ok}, {"total", t.level(n).ny()}});
        }
        if (o.depth > kK33MaxLevel) text << "k33: levels above " << kK33MaxLevel << " skipped\n";
        j["k33"] = k;
    }

    if (o.ends) {
        auto tree = ends_tree(t, o.depth);
        text << "ends: " << tree.verdict() << ", min branching " << tree.min_branching << ", counts";
        for (auto& l : tree.levels) text << " " << l.nodes.size();
        text << (tree.counts_match() ? " (match formula)" : " (formula mismatch)") << "\n";
        if (!tree.cantor_branching() || !tree.counts_match()) all_pass = false;
        j["ends"] = to_json(tree);
        write_file(o, "ends.json", dump(j["ends"]));
    }

    if (o.invariants) {
        auto seq = invariant_sequence(t, o.depth);
        text << "invariants #Y_n^p:";
        for (auto& lv : seq) {
            text << " (";
            for (std::size_t k = 0; k < lv.size(); ++k) text << (k ? "," : "") << lv[k];
            text << ")";
        }
        text << (strictly_growing(seq) ? " strictly growing" : " not strictly growing") << "\n";
        json census = json::array();
        for (auto& e : bisection_census(t, std::min(o.depth, 3)))
            census.push_back({{"level", e.level}, {"block", e.block}, {"count", e.count}, {"degree", e.degree}});
        j["invariants"] = {{"sequence", seq}, {"strictly_growing", strictly_growing(seq)}, {"census", census}};
        write_file(o, "invariants.json", dump(j["invariants"]));
    }

    if (o.lifts > 0) {
        if (fam.mod != Modification::Path) throw ParseError("--lifts needs a path tower");
        std::mt19937_64 rng(o.seed);
        json lj = json::array();
        for (int n = 1; n < o.depth; ++n) {
            const Stage& L = t.level(n);
            const Stage& U = t.level(n + 1);
            auto idx = build_connector(L, U);
            auto anc = vertex_anchors(U.d);
            int ok = 0;
            for (int k = 0; k < o.lifts; ++k) {
                auto base = connect_points(L, random_point(L, rng), random_point(L, rng));
                auto l0 = random_fiber_point(L, U, idx, anc, {base.tokens.front().edge, base.tokens.front().a}, rng);
                auto l1 = random_fiber_point(L, U, idx, anc, {base.tokens.back().edge, base.tokens.back().b}, rng);
                try {
                    auto lift = lift_path(L, U, idx, base, l0, l1, k % 2 == 1);
                    if (verify_lift(L, U, base, lift, l0, l1).ok) ok++;
                } catch (const LiftError&) {
                }
            }
            text << "lifts level " << n << "->" << n + 1 << ": " << ok << "/" << o.lifts << "\n";
            if (ok != o.lifts) all_pass = false;
            lj.push_back({{"level", n}, {"ok", ok}, {"total", o.lifts}});
        }
        j["lifts"] = lj;
    }

    j["pass"] = all_pass;
    write_file(o, "tower.json", dump(j));
    write_file(o, "tower.txt", text.str());
    if (o.format == "json")
        std::cout << dump(j);
    else if (o.format == "dot")
        std::cout << to_dot(spec_b_gen(t.level(o.depth)), "level" + std::to_string(o.depth));
    else
        std::cout << text.str();
    return all_pass ? kOk : kCondition;
}

int cmd_compare(const Options& o) {
    if (o.sccb.empty() || o.against.empty()) throw ParseError("compare needs --sccb and --against");
    auto [s1, f1] = tower_setup(o, o.sccb);
    auto [s2, f2] = tower_setup(o, o.against);
    Tower t1 = build_or_throw(std::move(s1), f1, o.depth), t2 = build_or_throw(std::move(s2), f2, o.depth);
    auto c = compare_towers(t1, t2, o.depth);
    json j = to_json(c);
    write_file(o, "compare.json", dump(j));
    if (o.format == "json") {
        std::cout << dump(j);
    } else if (auto* d = std::get_if<Distinguished>(&c)) {
        std::cout << "Distinguished at N=" << d->level << ": min_p #Y_N^p = " << d->value << " occurs only in tower "
                  << d->smaller + 1 << "\n";
    } else {
        std::cout << "IndistinguishableToDepth " << std::get<IndistinguishableToDepth>(c).depth << "\n";
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Diagonals of 1-dimensional NCCW complexes: validation, classification, spectra and towers"};
    app.require_subcommand(1);
    Options o;
    auto add_common = [&](CLI::App* c) {
        c->add_option("--input", o.input, "boundary data or tower seed (.yaml or .json)");
        c->add_option("--out", o.out, "directory for artifacts");
        c->add_option("--format", o.format, "text, json or dot")->check(CLI::IsMember({"text", "json", "dot"}));
    };
    auto* validate = app.add_subcommand("validate", "check boundary data");
    add_common(validate);

    auto* classify = app.add_subcommand("classify", "decide conjugacy of two twists");
    add_common(classify);
    classify->add_option("--sigma", o.sigma, "twist, e.g. \"p1:(1 2);p2:()\"");
    classify->add_option("--tau", o.tau, "second twist");

    auto* appbr = app.add_subcommand("appbr", "congruence versus conjugacy example");
    appbr->add_option("nu", o.nu, "matrix size")->required();
    appbr->add_option("delta", o.delta, "ones per row and column")->required();
    appbr->add_option("--out", o.out, "directory for artifacts");
    appbr->add_option("--format", o.format, "text or json")->check(CLI::IsMember({"text", "json"}));

    auto* tower = app.add_subcommand("tower", "build a tower and check its conditions");
    add_common(tower);
    tower->add_option("--depth", o.depth, "number of levels");
    tower->add_option("--toggles", o.toggles, "conditions to check: nlc1,nlc2,nop1,nop2,clsg,np4ni");
    tower->add_option("--sccb", o.sccb, "identity copies per level, e.g. \"1,0,0\"");
    tower->add_flag("--k33", o.k33, "K3,3 certificates for every edge at levels <= 3");
    tower->add_flag("--ends", o.ends, "free-end tree (projectionless towers)");
    tower->add_flag("--invariants", o.invariants, "block-size sequence and bisection census");
    tower->add_option("--lifts", o.lifts, "random path lifts per level");
    tower->add_option("--seed", o.seed, "seed for random sweeps");

    auto* compare = app.add_subcommand("compare", "separate two towers by their invariant sequences");
    add_common(compare);
    compare->add_option("--depth", o.depth, "number of levels");
    compare->add_option("--sccb", o.sccb, "identity copies of the first tower");
    compare->add_option("--against", o.against, "identity copies of the second tower");

    auto* spectrum = app.add_subcommand("spectrum", "spectrum operations");
    spectrum->require_subcommand(1);
    auto* sexport = spectrum->add_subcommand("export", "export Spec B_sigma or the centre spectrum");
    add_common(sexport);
    sexport->add_option("--sigma", o.sigma, "twist");
    sexport->add_flag("--center", o.center, "export the centre spectrum instead");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kOk : kInput;
    }
    try {
        if (*validate) return cmd_validate(o);
        if (*classify) return cmd_classify(o);
        if (*appbr) return cmd_appbr(o);
        if (*tower) return cmd_tower(o);
        if (*compare) return cmd_compare(o);
        if (*sexport) return cmd_spectrum_export(o);
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInput;
    } catch (const EndsError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInput;
    }
    return kInput;
}
