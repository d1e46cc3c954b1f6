#include "plrc.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "plrc/bohm.hpp"
#include "plrc/combination.hpp"
#include "plrc/lambda_term.hpp"
#include "plrc/operational.hpp"
#include "plrc/parser.hpp"
#include "plrc/resource_calculus.hpp"
#include "plrc/resource_term.hpp"
#include "plrc/taylor.hpp"
#include "plrc/tts.hpp"

using nlohmann::json;

struct plrc_term {
    plrc::syntax::TermPtr v;
};
struct plrc_rterm {
    plrc::resource::ResourcePtr v;
};
struct plrc_comb {
    plrc::resource::Combination v;
};
struct plrc_frontier {
    plrc::operational::ReductionFrontier v;
};
struct plrc_tts {
    plrc::tts::TTS v;
};

namespace {

thread_local std::string g_error;

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

template <typename F>
plrc_status guard(F&& body) noexcept {
    try {
        body();
        return PLRC_OK;
    } catch (const plrc::ParseError& e) {
        g_error = e.what();
        return PLRC_ERR_PARSE;
    } catch (const std::invalid_argument& e) {
        g_error = e.what();
        return PLRC_ERR_INVALID;
    } catch (const std::logic_error& e) {
        g_error = e.what();
        return PLRC_ERR_INTERNAL;
    } catch (const std::runtime_error& e) {
        g_error = e.what();
        return PLRC_ERR_LIMIT;
    } catch (const std::exception& e) {
        g_error = e.what();
        return PLRC_ERR_INTERNAL;
    } catch (...) {
        g_error = "unknown error";
        return PLRC_ERR_INTERNAL;
    }
}

void require(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
}

}  // namespace

extern "C" {

const char* plrc_last_error(void) { return g_error.c_str(); }

void plrc_string_free(char* s) { std::free(s); }

/* ---- lambda-terms ---- */

plrc_status plrc_term_parse(const char* text, plrc_term** out) {
    return guard([&] {
        require(text && out, "null argument");
        auto t = plrc::syntax::parse_term(text, &plrc::syntax::prelude());
        *out = new plrc_term{std::move(t)};
    });
}

void plrc_term_free(plrc_term* t) { delete t; }

plrc_status plrc_term_print(const plrc_term* t, char** out) {
    return guard([&] {
        require(t && out, "null argument");
        *out = dup_string(plrc::syntax::to_string(t->v));
    });
}

plrc_status plrc_term_left_reduct(const plrc_term* t, plrc_term** out) {
    return guard([&] {
        require(t && out, "null argument");
        *out = new plrc_term{plrc::operational::left_reduct_term(t->v)};
    });
}

/* ---- resource terms ---- */

plrc_status plrc_rterm_parse(const char* text, plrc_rterm** out) {
    return guard([&] {
        require(text && out, "null argument");
        auto t = plrc::resource::parse_resource(text, &plrc::resource::resource_prelude());
        *out = new plrc_rterm{std::move(t)};
    });
}

void plrc_rterm_free(plrc_rterm* t) { delete t; }

plrc_status plrc_rterm_print(const plrc_rterm* t, char** out) {
    return guard([&] {
        require(t && out, "null argument");
        *out = dup_string(plrc::resource::to_string(t->v));
    });
}

plrc_status plrc_rterm_coherent(const plrc_rterm* a, const plrc_rterm* b, int* out) {
    return guard([&] {
        require(a && b && out, "null argument");
        *out = plrc::resource::coherent(a->v, b->v) ? 1 : 0;
    });
}

plrc_status plrc_rterm_multinomial(const plrc_rterm* t, char** out) {
    return guard([&] {
        require(t && out, "null argument");
        *out = dup_string(plrc::to_string(plrc::resource::multinomial(t->v)));
    });
}

plrc_status plrc_rterm_reduce_one(const plrc_rterm* t, plrc_comb*** out, size_t* count) {
    return guard([&] {
        require(t && out && count, "null argument");
        auto reducts =
            plrc::resource::reduce_one(plrc::resource::Combination::singleton(t->v));
        auto** arr = static_cast<plrc_comb**>(std::malloc(sizeof(plrc_comb*) * reducts.size()));
        if (!arr && !reducts.empty()) throw std::bad_alloc();
        size_t i = 0;
        try {
            for (const auto& c : reducts) arr[i] = new plrc_comb{c}, ++i;
        } catch (...) {
            while (i > 0) delete arr[--i];
            std::free(arr);
            throw;
        }
        *out = arr;
        *count = reducts.size();
    });
}

plrc_status plrc_rterm_left_reduct(const plrc_rterm* t, plrc_comb** out) {
    return guard([&] {
        require(t && out, "null argument");
        *out = new plrc_comb{plrc::resource::left_reduct(t->v)};
    });
}

plrc_status plrc_rterm_normalize(const plrc_rterm* t, plrc_comb** out) {
    return guard([&] {
        require(t && out, "null argument");
        *out = new plrc_comb{plrc::resource::normalize(t->v)};
    });
}

/* ---- combinations ---- */

void plrc_comb_free(plrc_comb* c) { delete c; }

void plrc_comb_array_free(plrc_comb** arr, size_t count) {
    if (!arr) return;
    for (size_t i = 0; i < count; ++i) delete arr[i];
    std::free(arr);
}

plrc_status plrc_comb_print(const plrc_comb* c, char** out) {
    return guard([&] {
        require(c && out, "null argument");
        *out = dup_string(plrc::resource::to_string(c->v));
    });
}

plrc_status plrc_comb_to_json(const plrc_comb* c, char** out) {
    return guard([&] {
        require(c && out, "null argument");
        *out = dup_string(plrc::resource::to_json_string(c->v));
    });
}

plrc_status plrc_comb_support_size(const plrc_comb* c, size_t* out) {
    return guard([&] {
        require(c && out, "null argument");
        *out = c->v.support_size();
    });
}

plrc_status plrc_comb_mass(const plrc_comb* c, char** out) {
    return guard([&] {
        require(c && out, "null argument");
        *out = dup_string(plrc::to_string(c->v.mass()));
    });
}

plrc_status plrc_comb_coeff(const plrc_comb* c, const plrc_rterm* t, char** out) {
    return guard([&] {
        require(c && t && out, "null argument");
        *out = dup_string(plrc::to_string(c->v.coeff(t->v)));
    });
}

plrc_status plrc_comb_is_normal(const plrc_comb* c, int* out) {
    return guard([&] {
        require(c && out, "null argument");
        *out = plrc::resource::is_normal(c->v) ? 1 : 0;
    });
}

plrc_status plrc_comb_is_uniform(const plrc_comb* c, int* out) {
    return guard([&] {
        require(c && out, "null argument");
        *out = plrc::resource::is_uniform(c->v) ? 1 : 0;
    });
}

plrc_status plrc_comb_is_regular(const plrc_comb* c, int* out) {
    return guard([&] {
        require(c && out, "null argument");
        *out = plrc::resource::is_regular(c->v) ? 1 : 0;
    });
}

plrc_status plrc_comb_left_reduct(const plrc_comb* c, plrc_comb** out) {
    return guard([&] {
        require(c && out, "null argument");
        *out = new plrc_comb{plrc::resource::left_reduct(c->v)};
    });
}

plrc_status plrc_comb_normalize(const plrc_comb* c, plrc_comb** out) {
    return guard([&] {
        require(c && out, "null argument");
        *out = new plrc_comb{plrc::resource::normalize(c->v)};
    });
}

/* ---- head reduction ---- */

plrc_status plrc_term_head_reduce(const plrc_term* t, unsigned fuel, plrc_frontier** out) {
    return guard([&] {
        require(t && out, "null argument");
        *out = new plrc_frontier{plrc::operational::head_reductions(t->v, fuel)};
    });
}

void plrc_frontier_free(plrc_frontier* f) { delete f; }

plrc_status plrc_frontier_resolved_count(const plrc_frontier* f, size_t* out) {
    return guard([&] {
        require(f && out, "null argument");
        *out = f->v.resolved.size();
    });
}

plrc_status plrc_frontier_unresolved_count(const plrc_frontier* f, size_t* out) {
    return guard([&] {
        require(f && out, "null argument");
        *out = f->v.unresolved.size();
    });
}

plrc_status plrc_frontier_resolved(const plrc_frontier* f, size_t i, char** path, char** term,
                                   char** prob) {
    return guard([&] {
        require(f, "null argument");
        require(i < f->v.resolved.size(), "resolved branch index out of range");
        const auto& r = f->v.resolved[i];
        if (path) *path = dup_string(plrc::operational::to_string(r.path));
        if (term) *term = dup_string(plrc::syntax::to_string(r.hnf.to_term()));
        if (prob) *prob = dup_string(plrc::to_string(plrc::operational::prob_of(r.path)));
    });
}

plrc_status plrc_frontier_unresolved(const plrc_frontier* f, size_t i, char** path, char** term,
                                     char** prob) {
    return guard([&] {
        require(f, "null argument");
        require(i < f->v.unresolved.size(), "unresolved branch index out of range");
        const auto& u = f->v.unresolved[i];
        if (path) *path = dup_string(plrc::operational::to_string(u.path));
        if (term) *term = dup_string(plrc::syntax::to_string(u.term));
        if (prob) *prob = dup_string(plrc::to_string(plrc::operational::prob_of(u.path)));
    });
}

plrc_status plrc_frontier_masses(const plrc_frontier* f, char** resolved, char** unresolved) {
    return guard([&] {
        require(f, "null argument");
        if (resolved) *resolved = dup_string(plrc::to_string(f->v.resolved_mass()));
        if (unresolved) *unresolved = dup_string(plrc::to_string(f->v.unresolved_mass()));
    });
}

plrc_status plrc_term_convergence(const plrc_term* t, unsigned fuel, char** lower, char** upper) {
    return guard([&] {
        require(t, "null argument");
        auto [lo, hi] = plrc::operational::convergence_prob(t->v, fuel);
        if (lower) *lower = dup_string(plrc::to_string(lo));
        if (upper) *upper = dup_string(plrc::to_string(hi));
    });
}

/* ---- Taylor expansion ---- */

plrc_status plrc_term_taylor(const plrc_term* t, int generic, unsigned max_size,
                             unsigned max_copies, plrc_comb** out) {
    return guard([&] {
        require(t && out, "null argument");
        plrc::taylor::TruncationBudget b{max_size, max_copies};
        auto c = generic ? plrc::taylor::generic_taylor(t->v, b)
                         : plrc::taylor::explicit_taylor(t->v, b);
        *out = new plrc_comb{std::move(c)};
    });
}

plrc_status plrc_term_taylor_nf(const plrc_term* t, int explicit_tags, unsigned max_size,
                                unsigned max_copies, unsigned fuel, plrc_comb** out,
                                char** residual) {
    return guard([&] {
        require(t && out, "null argument");
        plrc::taylor::TruncationBudget b{max_size, max_copies};
        auto nf = explicit_tags ? plrc::taylor::explicit_taylor_nf(t->v, b, fuel)
                                : plrc::taylor::taylor_nf(t->v, b, fuel);
        *out = new plrc_comb{std::move(nf.comb)};
        if (residual) *residual = dup_string(plrc::to_string(nf.residual));
    });
}

/* ---- Bohm approximants and tree tests ---- */

plrc_status plrc_term_bohm(const plrc_term* t, unsigned depth, unsigned fuel, int folded,
                           char** out) {
    return guard([&] {
        require(t && out, "null argument");
        auto a = plrc::bohm::pt_approximant(t->v, depth, fuel);
        if (folded) a = plrc::bohm::folded(a);
        *out = dup_string(plrc::bohm::to_string(a));
    });
}

namespace {

json approx_to_json(const plrc::bohm::BohmApprox& a);

json tree_to_json(const plrc::bohm::ValueTree& t) {
    json out;
    out["binders"] = t.binders;
    if (t.head_is_bound)
        out["head"] = t.head_index;
    else
        out["head"] = t.head_name;
    out["children"] = json::array();
    for (const auto& c : t.children) out["children"].push_back(approx_to_json(c));
    return out;
}

json approx_to_json(const plrc::bohm::BohmApprox& a) {
    json out;
    out["dist"] = json::array();
    for (const auto& [tree, prob] : a.dist)
        out["dist"].push_back({{"tree", tree_to_json(*tree)}, {"prob", plrc::to_string(prob)}});
    out["residual"] = plrc::to_string(a.residual);
    return out;
}

}  // namespace

plrc_status plrc_term_bohm_json(const plrc_term* t, unsigned depth, unsigned fuel, int folded,
                                char** out) {
    return guard([&] {
        require(t && out, "null argument");
        auto a = plrc::bohm::pt_approximant(t->v, depth, fuel);
        if (folded) a = plrc::bohm::folded(a);
        *out = dup_string(approx_to_json(a).dump());
    });
}

plrc_status plrc_btt_eval(const char* test, const plrc_term* t, unsigned fuel, char** lower,
                          char** upper) {
    return guard([&] {
        require(test && t, "null argument");
        auto parsed = plrc::bohm::parse_btt(test);
        auto iv = plrc::bohm::eval_btt(parsed, t->v, fuel);
        if (lower) *lower = dup_string(plrc::to_string(iv.lower));
        if (upper) *upper = dup_string(plrc::to_string(iv.upper));
    });
}

/* ---- tree transition systems ---- */

plrc_status plrc_tts_parse(const char* text, plrc_tts** out) {
    return guard([&] {
        require(text && out, "null argument");
        auto t = plrc::tts::parse_tts(text);
        t.validate();
        *out = new plrc_tts{std::move(t)};
    });
}

void plrc_tts_free(plrc_tts* t) { delete t; }

plrc_status plrc_tts_print(const plrc_tts* t, char** out) {
    return guard([&] {
        require(t && out, "null argument");
        *out = dup_string(plrc::tts::to_text(t->v));
    });
}

plrc_status plrc_tts_to_json(const plrc_tts* t, char** out) {
    return guard([&] {
        require(t && out, "null argument");
        *out = dup_string(plrc::tts::to_json(t->v));
    });
}

plrc_status plrc_tts_bisimilar(const plrc_tts* t, const char* a, const char* b, int* out) {
    return guard([&] {
        require(t && a && b && out, "null argument");
        *out = plrc::tts::bisimilar(t->v, a, b) ? 1 : 0;
    });
}

plrc_status plrc_tts_eval_test(const plrc_tts* t, const char* test, const char* state,
                               int linear, char** out) {
    return guard([&] {
        require(t && test && state && out, "null argument");
        auto parsed = plrc::tts::parse_tts_test(test);
        auto p = plrc::tts::eval_tts_test(t->v, parsed, state, linear != 0);
        *out = dup_string(plrc::to_string(p));
    });
}

plrc_status plrc_tts_distinguish(const plrc_tts* t, const char* a, const char* b,
                                 unsigned max_depth, char** out) {
    return guard([&] {
        require(t && a && b && out, "null argument");
        auto found = plrc::tts::distinguishing_test_search(t->v, a, b, max_depth);
        *out = found ? dup_string(plrc::tts::to_string(*found)) : nullptr;
    });
}

plrc_status plrc_tts_of_terms(const plrc_term* const* terms, size_t count, unsigned fuel,
                              unsigned depth, plrc_tts** out) {
    return guard([&] {
        require(terms && out, "null argument");
        std::vector<plrc::syntax::TermPtr> roots;
        roots.reserve(count);
        for (size_t i = 0; i < count; ++i) {
            require(terms[i] != nullptr, "null term in array");
            roots.push_back(terms[i]->v);
        }
        *out = new plrc_tts{plrc::tts::tts_of_terms(roots, fuel, depth)};
    });
}

/* ---- equivalence comparison ---- */

plrc_status plrc_term_compare(const plrc_term* m, const plrc_term* n, unsigned max_size,
                              unsigned max_copies, unsigned fuel, unsigned depth, char** report,
                              int* separated) {
    return guard([&] {
        require(m && n && report, "null argument");
        plrc::taylor::TruncationBudget b{max_size, max_copies};

        bool taylor_equal = plrc::taylor::barycentric_equiv_check(m->v, n->v, b);

        auto nf_m = plrc::taylor::taylor_nf(m->v, b, fuel);
        auto nf_n = plrc::taylor::taylor_nf(n->v, b, fuel);

        // Per-support intervals [lower, lower + residual] must intersect.
        bool nf_overlap = true;
        auto check_overlap = [&](const plrc::taylor::TaylorNF& a,
                                 const plrc::taylor::TaylorNF& bb) {
            for (const auto& [s, ca] : a.comb) {
                auto cb = bb.comb.coeff(s);
                if (ca > cb + bb.residual || cb > ca + a.residual) nf_overlap = false;
            }
        };
        check_overlap(nf_m, nf_n);
        check_overlap(nf_n, nf_m);

        auto bm = plrc::bohm::folded(plrc::bohm::pt_approximant(m->v, depth, fuel));
        auto bn = plrc::bohm::folded(plrc::bohm::pt_approximant(n->v, depth, fuel));
        bool bohm_equal = bm == bn;

        auto test = plrc::bohm::separating_rbtt(m->v, n->v, fuel, max_size);

        json r;
        r["taylor"]["equal"] = taylor_equal;
        r["taylor"]["max_size"] = max_size;
        r["taylor"]["max_copies"] = max_copies;
        r["taylor_nf"]["left"] = json::parse(plrc::resource::to_json_string(nf_m.comb));
        r["taylor_nf"]["left_residual"] = plrc::to_string(nf_m.residual);
        r["taylor_nf"]["right"] = json::parse(plrc::resource::to_json_string(nf_n.comb));
        r["taylor_nf"]["right_residual"] = plrc::to_string(nf_n.residual);
        r["taylor_nf"]["equal"] = nf_m.comb == nf_n.comb && nf_m.residual == nf_n.residual;
        r["taylor_nf"]["overlap"] = nf_overlap;
        r["bohm"]["depth"] = depth;
        r["bohm"]["equal"] = bohm_equal;
        r["bohm"]["left"] = plrc::bohm::to_string(bm);
        r["bohm"]["right"] = plrc::bohm::to_string(bn);
        if (test) {
            auto iv_m = plrc::bohm::eval_btt(*test, m->v, fuel);
            auto iv_n = plrc::bohm::eval_btt(*test, n->v, fuel);
            r["separating_test"]["test"] = plrc::bohm::to_string(*test);
            r["separating_test"]["left"] = {plrc::to_string(iv_m.lower),
                                            plrc::to_string(iv_m.upper)};
            r["separating_test"]["right"] = {plrc::to_string(iv_n.lower),
                                             plrc::to_string(iv_n.upper)};
        } else {
            r["separating_test"] = nullptr;
        }
        bool sep = !taylor_equal || test.has_value();
        r["separated"] = sep;

        *report = dup_string(r.dump(2));
        if (separated) *separated = sep ? 1 : 0;
    });
}

} /* extern "C" */
