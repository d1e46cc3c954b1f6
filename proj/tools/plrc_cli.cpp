#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <plrc.h>

using nlohmann::json;

namespace {

// Shared budgets; defaults match the documented configuration.
struct Config {
    unsigned size_bound = 12;
    unsigned copies = 4;
    unsigned fuel = 32;
    unsigned depth = 3;
    bool as_json = false;
};

void add_common(CLI::App* cmd, Config& cfg) {
    cmd->add_option("--size-bound", cfg.size_bound, "Truncation size bound");
    cmd->add_option("--copies", cfg.copies, "Bag copy bound of the exponential");
    cmd->add_option("--fuel", cfg.fuel, "Head steps per probabilistic branch");
    cmd->add_option("--depth", cfg.depth, "Tree depth bound");
    cmd->add_flag("--json", cfg.as_json, "JSON output");
}

[[noreturn]] void fail(plrc_status st) {
    std::cerr << "error: " << plrc_last_error() << "\n";
    std::exit(st == PLRC_ERR_PARSE || st == PLRC_ERR_INVALID ? 2 : 1);
}

void check(plrc_status st) {
    if (st != PLRC_OK) fail(st);
}

// Owning wrapper for strings returned by the library.
struct CStr {
    char* p = nullptr;
    ~CStr() { plrc_string_free(p); }
    CStr() = default;
    CStr(const CStr&) = delete;
    CStr& operator=(const CStr&) = delete;
    std::string str() const { return p ? p : ""; }
};

using TermPtr = std::unique_ptr<plrc_term, decltype(&plrc_term_free)>;
using RtermPtr = std::unique_ptr<plrc_rterm, decltype(&plrc_rterm_free)>;
using CombPtr = std::unique_ptr<plrc_comb, decltype(&plrc_comb_free)>;
using FrontierPtr = std::unique_ptr<plrc_frontier, decltype(&plrc_frontier_free)>;
using TtsPtr = std::unique_ptr<plrc_tts, decltype(&plrc_tts_free)>;

std::string slurp(std::istream& in) {
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Positional argument, or stdin when absent.
std::string input_or_stdin(const std::string& arg) {
    if (!arg.empty()) return arg;
    return slurp(std::cin);
}

TermPtr parse_term(const std::string& text) {
    plrc_term* t = nullptr;
    check(plrc_term_parse(text.c_str(), &t));
    return TermPtr(t, plrc_term_free);
}

RtermPtr parse_rterm(const std::string& text) {
    plrc_rterm* t = nullptr;
    check(plrc_rterm_parse(text.c_str(), &t));
    return RtermPtr(t, plrc_rterm_free);
}

TtsPtr load_tts(const std::string& path) {
    std::string text;
    if (path == "-") {
        text = slurp(std::cin);
    } else {
        std::ifstream in(path);
        if (!in) {
            std::cerr << "error: cannot open " << path << "\n";
            std::exit(2);
        }
        text = slurp(in);
    }
    plrc_tts* t = nullptr;
    check(plrc_tts_parse(text.c_str(), &t));
    return TtsPtr(t, plrc_tts_free);
}

json comb_json(const plrc_comb* c) {
    CStr s;
    check(plrc_comb_to_json(c, &s.p));
    return json::parse(s.str());
}

std::string comb_text(const plrc_comb* c) {
    CStr s;
    check(plrc_comb_print(c, &s.p));
    return s.str();
}

// ---- run --trace: choice tree reconstructed from branch paths ----

struct TraceNode {
    std::map<std::string, TraceNode> children;  // "l{p}" sorts before "r{p}"
    std::string leaf;                           // outcome line, when a branch ends here
};

void insert_path(TraceNode& root, const std::string& path, const std::string& leaf) {
    TraceNode* node = &root;
    if (path != "e") {
        std::istringstream ss(path);
        std::string step;
        while (ss >> step) node = &node->children[step];
    }
    node->leaf = leaf;
}

void print_trace(const TraceNode& node, const std::string& indent) {
    if (!node.leaf.empty()) std::cout << indent << "=> " << node.leaf << "\n";
    for (const auto& [step, child] : node.children) {
        std::cout << indent << "+- " << step << "\n";
        print_trace(child, indent + "|  ");
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Probabilistic lambda-calculus resource engine"};
    app.require_subcommand(1);

    // parse
    Config parse_cfg;
    std::string parse_input;
    bool parse_resource = false;
    auto* cmd_parse = app.add_subcommand("parse", "Parse and print a term");
    cmd_parse->add_option("term", parse_input, "Term (stdin when absent)");
    cmd_parse->add_flag("--resource", parse_resource, "Parse a resource term");
    add_common(cmd_parse, parse_cfg);

    // reduce
    Config reduce_cfg;
    std::string reduce_input;
    auto* cmd_reduce = app.add_subcommand("reduce", "All one-step reducts of a resource term");
    cmd_reduce->add_option("term", reduce_input, "Resource term (stdin when absent)");
    add_common(cmd_reduce, reduce_cfg);

    // normalize
    Config norm_cfg;
    std::string norm_input;
    auto* cmd_norm = app.add_subcommand("normalize", "Normal form of a resource term");
    cmd_norm->add_option("term", norm_input, "Resource term (stdin when absent)");
    add_common(cmd_norm, norm_cfg);

    // coherence
    Config coh_cfg;
    std::string coh_a, coh_b;
    auto* cmd_coh = app.add_subcommand("coherence", "Coherence of two resource terms");
    cmd_coh->add_option("left", coh_a, "First resource term")->required();
    cmd_coh->add_option("right", coh_b, "Second resource term")->required();
    add_common(cmd_coh, coh_cfg);

    // multinomial
    Config multi_cfg;
    std::string multi_input;
    auto* cmd_multi = app.add_subcommand("multinomial", "Multinomial coefficient m(t)");
    cmd_multi->add_option("term", multi_input, "Resource term (stdin when absent)");
    add_common(cmd_multi, multi_cfg);

    // run
    Config run_cfg;
    std::string run_input;
    bool run_trace = false;
    auto* cmd_run = app.add_subcommand("run", "Head reduction of a probabilistic term");
    cmd_run->add_option("term", run_input, "Term (stdin when absent)");
    cmd_run->add_flag("--trace", run_trace, "Print the choice tree");
    add_common(cmd_run, run_cfg);

    // taylor
    Config taylor_cfg;
    std::string taylor_input;
    bool taylor_explicit = false, taylor_erased = false;
    auto* cmd_taylor = app.add_subcommand("taylor", "Truncated Taylor expansion");
    cmd_taylor->add_option("term", taylor_input, "Term (stdin when absent)");
    auto* fx = cmd_taylor->add_flag("--explicit", taylor_explicit, "Keep choice tags");
    cmd_taylor->add_flag("--erased", taylor_erased, "Erase choice tags (default)")->excludes(fx);
    add_common(cmd_taylor, taylor_cfg);

    // taylor-nf
    Config nf_cfg;
    std::string nf_input;
    bool nf_explicit = false, nf_erased = false;
    auto* cmd_nf = app.add_subcommand("taylor-nf", "Truncated Taylor normal form");
    cmd_nf->add_option("term", nf_input, "Term (stdin when absent)");
    auto* nfx = cmd_nf->add_flag("--explicit", nf_explicit, "Keep choice tags");
    cmd_nf->add_flag("--erased", nf_erased, "Erase choice tags (default)")->excludes(nfx);
    add_common(cmd_nf, nf_cfg);

    // bohm
    Config bohm_cfg;
    std::string bohm_input;
    bool bohm_folded = false;
    auto* cmd_bohm = app.add_subcommand("bohm", "Bohm tree approximant");
    cmd_bohm->add_option("term", bohm_input, "Term (stdin when absent)");
    cmd_bohm->add_flag("--folded", bohm_folded, "Fold unresolved mass outward");
    add_common(cmd_bohm, bohm_cfg);

    // test
    Config test_cfg;
    std::string test_input, test_btt;
    auto* cmd_test = app.add_subcommand("test", "Evaluate a tree test against a term");
    cmd_test->add_option("--btt", test_btt, "Test: w | T & T | ev(t) | (\\x y. x)(T, T)")
        ->required();
    cmd_test->add_option("term", test_input, "Term (stdin when absent)");
    add_common(cmd_test, test_cfg);

    // tts
    auto* cmd_tts = app.add_subcommand("tts", "Tree transition systems");
    cmd_tts->require_subcommand(1);

    Config bisim_cfg;
    std::string bisim_file, bisim_a, bisim_b;
    auto* cmd_bisim = cmd_tts->add_subcommand("bisim", "Bisimilarity of two states");
    cmd_bisim->add_option("file", bisim_file, "System file ('-' for stdin)")->required();
    cmd_bisim->add_option("a", bisim_a, "First state")->required();
    cmd_bisim->add_option("b", bisim_b, "Second state")->required();
    add_common(cmd_bisim, bisim_cfg);

    Config ttest_cfg;
    std::string ttest_file, ttest_state, ttest_test;
    bool ttest_branching = false;
    auto* cmd_ttest = cmd_tts->add_subcommand("test", "Evaluate a test at a state");
    cmd_ttest->add_option("file", ttest_file, "System file ('-' for stdin)")->required();
    cmd_ttest->add_option("state", ttest_state, "State name")->required();
    cmd_ttest->add_option("test", ttest_test, "Test: w | T & T | label(T, ...)")->required();
    cmd_ttest->add_flag("--branching", ttest_branching, "State is a branching state");
    add_common(cmd_ttest, ttest_cfg);

    Config from_cfg;
    std::vector<std::string> from_terms;
    auto* cmd_from = cmd_tts->add_subcommand("from-terms", "System of the terms' behaviour");
    cmd_from->add_option("terms", from_terms, "Probabilistic terms")->required();
    add_common(cmd_from, from_cfg);

    Config dist_cfg;
    std::string dist_file, dist_a, dist_b;
    auto* cmd_dist = cmd_tts->add_subcommand("distinguish", "Search for a separating test");
    cmd_dist->add_option("file", dist_file, "System file ('-' for stdin)")->required();
    cmd_dist->add_option("a", dist_a, "First linear state")->required();
    cmd_dist->add_option("b", dist_b, "Second linear state")->required();
    add_common(cmd_dist, dist_cfg);

    // compare
    Config cmp_cfg;
    std::string cmp_m, cmp_n;
    bool cmp_assert = false;
    auto* cmd_cmp = app.add_subcommand("compare", "Equivalence checks on two terms");
    cmd_cmp->add_option("left", cmp_m, "First term")->required();
    cmd_cmp->add_option("right", cmp_n, "Second term")->required();
    cmd_cmp->add_flag("--assert-equal", cmp_assert, "Exit 1 when a difference is witnessed");
    add_common(cmd_cmp, cmp_cfg);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (cmd_parse->parsed()) {
        std::string text = input_or_stdin(parse_input);
        CStr out;
        if (parse_resource) {
            auto t = parse_rterm(text);
            check(plrc_rterm_print(t.get(), &out.p));
        } else {
            auto t = parse_term(text);
            check(plrc_term_print(t.get(), &out.p));
        }
        if (parse_cfg.as_json)
            std::cout << json{{"parsed", out.str()}}.dump() << "\n";
        else
            std::cout << out.str() << "\n";
        return 0;
    }

    if (cmd_reduce->parsed()) {
        auto t = parse_rterm(input_or_stdin(reduce_input));
        plrc_comb** arr = nullptr;
        size_t n = 0;
        check(plrc_rterm_reduce_one(t.get(), &arr, &n));
        if (reduce_cfg.as_json) {
            json out = json::array();
            for (size_t i = 0; i < n; ++i) out.push_back(comb_json(arr[i]));
            std::cout << json{{"reducts", out}}.dump() << "\n";
        } else {
            for (size_t i = 0; i < n; ++i) std::cout << "-> " << comb_text(arr[i]) << "\n";
            if (n == 0) std::cout << "normal\n";
        }
        plrc_comb_array_free(arr, n);
        return 0;
    }

    if (cmd_norm->parsed()) {
        auto t = parse_rterm(input_or_stdin(norm_input));
        plrc_comb* c = nullptr;
        check(plrc_rterm_normalize(t.get(), &c));
        CombPtr comb(c, plrc_comb_free);
        if (norm_cfg.as_json)
            std::cout << json{{"normal_form", comb_json(comb.get())}}.dump() << "\n";
        else
            std::cout << comb_text(comb.get()) << "\n";
        return 0;
    }

    if (cmd_coh->parsed()) {
        auto a = parse_rterm(coh_a);
        auto b = parse_rterm(coh_b);
        int coh = 0;
        check(plrc_rterm_coherent(a.get(), b.get(), &coh));
        if (coh_cfg.as_json)
            std::cout << json{{"coherent", coh != 0}}.dump() << "\n";
        else
            std::cout << (coh ? "coherent" : "incoherent") << "\n";
        return 0;
    }

    if (cmd_multi->parsed()) {
        auto t = parse_rterm(input_or_stdin(multi_input));
        CStr out;
        check(plrc_rterm_multinomial(t.get(), &out.p));
        if (multi_cfg.as_json)
            std::cout << json{{"multinomial", out.str()}}.dump() << "\n";
        else
            std::cout << out.str() << "\n";
        return 0;
    }

    if (cmd_run->parsed()) {
        auto t = parse_term(input_or_stdin(run_input));
        plrc_frontier* f = nullptr;
        check(plrc_term_head_reduce(t.get(), run_cfg.fuel, &f));
        FrontierPtr frontier(f, plrc_frontier_free);
        size_t nres = 0, nunres = 0;
        check(plrc_frontier_resolved_count(f, &nres));
        check(plrc_frontier_unresolved_count(f, &nunres));
        CStr mres, munres, clo, chi;
        check(plrc_frontier_masses(f, &mres.p, &munres.p));
        check(plrc_term_convergence(t.get(), run_cfg.fuel, &clo.p, &chi.p));

        if (run_cfg.as_json) {
            json out;
            out["resolved"] = json::array();
            for (size_t i = 0; i < nres; ++i) {
                CStr path, term, prob;
                check(plrc_frontier_resolved(f, i, &path.p, &term.p, &prob.p));
                out["resolved"].push_back(
                    {{"path", path.str()}, {"prob", prob.str()}, {"hnf", term.str()}});
            }
            out["unresolved"] = json::array();
            for (size_t i = 0; i < nunres; ++i) {
                CStr path, term, prob;
                check(plrc_frontier_unresolved(f, i, &path.p, &term.p, &prob.p));
                out["unresolved"].push_back(
                    {{"path", path.str()}, {"prob", prob.str()}, {"term", term.str()}});
            }
            out["resolved_mass"] = mres.str();
            out["unresolved_mass"] = munres.str();
            out["convergence"] = {{"lower", clo.str()}, {"upper", chi.str()}};
            std::cout << out.dump() << "\n";
            return 0;
        }

        if (run_trace) {
            TraceNode root;
            for (size_t i = 0; i < nres; ++i) {
                CStr path, term, prob;
                check(plrc_frontier_resolved(f, i, &path.p, &term.p, &prob.p));
                insert_path(root, path.str(), prob.str() + "  " + term.str());
            }
            for (size_t i = 0; i < nunres; ++i) {
                CStr path, term, prob;
                check(plrc_frontier_unresolved(f, i, &path.p, &term.p, &prob.p));
                insert_path(root, path.str(), prob.str() + "  " + term.str() + "  (unresolved)");
            }
            CStr src;
            check(plrc_term_print(t.get(), &src.p));
            std::cout << src.str() << "\n";
            print_trace(root, "");
        } else {
            std::cout << "resolved (mass " << mres.str() << "):\n";
            for (size_t i = 0; i < nres; ++i) {
                CStr path, term, prob;
                check(plrc_frontier_resolved(f, i, &path.p, &term.p, &prob.p));
                std::cout << "  " << path.str() << "  " << prob.str() << "  " << term.str()
                          << "\n";
            }
            std::cout << "unresolved (mass " << munres.str() << "):\n";
            for (size_t i = 0; i < nunres; ++i) {
                CStr path, term, prob;
                check(plrc_frontier_unresolved(f, i, &path.p, &term.p, &prob.p));
                std::cout << "  " << path.str() << "  " << prob.str() << "  " << term.str()
                          << "\n";
            }
        }
        std::cout << "convergence in [" << clo.str() << ", " << chi.str() << "]\n";
        return 0;
    }

    if (cmd_taylor->parsed()) {
        auto t = parse_term(input_or_stdin(taylor_input));
        plrc_comb* c = nullptr;
        check(plrc_term_taylor(t.get(), taylor_explicit ? 0 : 1, taylor_cfg.size_bound,
                               taylor_cfg.copies, &c));
        CombPtr comb(c, plrc_comb_free);
        if (taylor_cfg.as_json)
            std::cout << json{{"taylor", comb_json(comb.get())}}.dump() << "\n";
        else
            std::cout << comb_text(comb.get()) << "\n";
        return 0;
    }

    if (cmd_nf->parsed()) {
        auto t = parse_term(input_or_stdin(nf_input));
        plrc_comb* c = nullptr;
        CStr residual;
        check(plrc_term_taylor_nf(t.get(), nf_explicit ? 1 : 0, nf_cfg.size_bound, nf_cfg.copies,
                                  nf_cfg.fuel, &c, &residual.p));
        CombPtr comb(c, plrc_comb_free);
        if (nf_cfg.as_json)
            std::cout << json{{"taylor_nf", comb_json(comb.get())}, {"residual", residual.str()}}
                             .dump()
                      << "\n";
        else
            std::cout << comb_text(comb.get()) << "\nresidual: " << residual.str() << "\n";
        return 0;
    }

    if (cmd_bohm->parsed()) {
        auto t = parse_term(input_or_stdin(bohm_input));
        CStr out;
        if (bohm_cfg.as_json) {
            check(plrc_term_bohm_json(t.get(), bohm_cfg.depth, bohm_cfg.fuel, bohm_folded ? 1 : 0,
                                      &out.p));
            std::cout << out.str() << "\n";
        } else {
            check(plrc_term_bohm(t.get(), bohm_cfg.depth, bohm_cfg.fuel, bohm_folded ? 1 : 0,
                                 &out.p));
            std::cout << out.str() << "\n";
        }
        return 0;
    }

    if (cmd_test->parsed()) {
        auto t = parse_term(input_or_stdin(test_input));
        CStr lo, hi;
        check(plrc_btt_eval(test_btt.c_str(), t.get(), test_cfg.fuel, &lo.p, &hi.p));
        if (test_cfg.as_json)
            std::cout << json{{"lower", lo.str()}, {"upper", hi.str()}}.dump() << "\n";
        else
            std::cout << "[" << lo.str() << ", " << hi.str() << "]\n";
        return 0;
    }

    if (cmd_bisim->parsed()) {
        auto t = load_tts(bisim_file);
        int yes = 0;
        check(plrc_tts_bisimilar(t.get(), bisim_a.c_str(), bisim_b.c_str(), &yes));
        if (bisim_cfg.as_json)
            std::cout << json{{"bisimilar", yes != 0}}.dump() << "\n";
        else
            std::cout << (yes ? "bisimilar" : "not bisimilar") << "\n";
        return 0;
    }

    if (cmd_ttest->parsed()) {
        auto t = load_tts(ttest_file);
        CStr out;
        check(plrc_tts_eval_test(t.get(), ttest_test.c_str(), ttest_state.c_str(),
                                 ttest_branching ? 0 : 1, &out.p));
        if (ttest_cfg.as_json)
            std::cout << json{{"probability", out.str()}}.dump() << "\n";
        else
            std::cout << out.str() << "\n";
        return 0;
    }

    if (cmd_from->parsed()) {
        std::vector<TermPtr> held;
        std::vector<const plrc_term*> raw;
        for (const auto& s : from_terms) {
            held.push_back(parse_term(s));
            raw.push_back(held.back().get());
        }
        plrc_tts* t = nullptr;
        check(plrc_tts_of_terms(raw.data(), raw.size(), from_cfg.fuel, from_cfg.depth, &t));
        TtsPtr tts(t, plrc_tts_free);
        CStr out;
        if (from_cfg.as_json)
            check(plrc_tts_to_json(tts.get(), &out.p));
        else
            check(plrc_tts_print(tts.get(), &out.p));
        std::cout << out.str();
        if (from_cfg.as_json) std::cout << "\n";
        return 0;
    }

    if (cmd_dist->parsed()) {
        auto t = load_tts(dist_file);
        CStr out;
        check(plrc_tts_distinguish(t.get(), dist_a.c_str(), dist_b.c_str(), dist_cfg.depth,
                                   &out.p));
        if (dist_cfg.as_json)
            std::cout << json{{"test", out.p ? json(out.str()) : json(nullptr)}}.dump() << "\n";
        else
            std::cout << (out.p ? out.str() : "none") << "\n";
        return 0;
    }

    if (cmd_cmp->parsed()) {
        auto m = parse_term(cmp_m);
        auto n = parse_term(cmp_n);
        CStr report;
        int separated = 0;
        check(plrc_term_compare(m.get(), n.get(), cmp_cfg.size_bound, cmp_cfg.copies,
                                cmp_cfg.fuel, cmp_cfg.depth, &report.p, &separated));
        if (cmp_cfg.as_json) {
            std::cout << report.str() << "\n";
        } else {
            json r = json::parse(report.str());
            std::cout << "generic taylor truncations: "
                      << (r["taylor"]["equal"].get<bool>() ? "equal" : "different") << "\n";
            std::cout << "taylor normal forms: "
                      << (r["taylor_nf"]["equal"].get<bool>()
                              ? "equal"
                              : (r["taylor_nf"]["overlap"].get<bool>() ? "overlapping"
                                                                       : "disjoint"))
                      << "\n";
            std::cout << "bohm approximants (depth " << cmp_cfg.depth << "): "
                      << (r["bohm"]["equal"].get<bool>() ? "equal" : "different") << "\n";
            if (r["separating_test"].is_null())
                std::cout << "separating test: none found\n";
            else
                std::cout << "separating test: " << r["separating_test"]["test"].get<std::string>()
                          << "\n";
        }
        if (separated && cmp_assert) return 1;
        return 0;
    }

    return 2;
}
