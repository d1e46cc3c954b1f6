#ifndef PLRC_H
#define PLRC_H

/* C interface to the probabilistic lambda-calculus resource library.
 *
 * Every function returns a plrc_status; results come back through out
 * parameters.  Returned strings are heap-allocated and must be released
 * with plrc_string_free; handles with their matching _free function.
 * On failure the out parameters are untouched and plrc_last_error()
 * describes the problem (thread-local).
 */

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum plrc_status {
    PLRC_OK = 0,
    PLRC_ERR_PARSE = 1,    /* malformed input text */
    PLRC_ERR_INVALID = 2,  /* argument outside the function's domain */
    PLRC_ERR_LIMIT = 3,    /* an exploration guard tripped */
    PLRC_ERR_INTERNAL = 4, /* invariant violation; please report */
} plrc_status;

/* Message for the most recent failure on this thread; empty string if none.
 * The pointer stays valid until the next failing call on the same thread. */
const char* plrc_last_error(void);

void plrc_string_free(char* s);

/* Opaque handles. */
typedef struct plrc_term plrc_term;         /* probabilistic lambda-term */
typedef struct plrc_rterm plrc_rterm;       /* resource (poly-)term */
typedef struct plrc_comb plrc_comb;         /* rational combination of resource terms */
typedef struct plrc_frontier plrc_frontier; /* head-reduction frontier */
typedef struct plrc_tts plrc_tts;           /* tree transition system */

/* ---- probabilistic lambda-terms ---- */

/* Grammar: \x y. M | M N | M (+p) N | name, with I, K, S, Delta, Omega
 * predefined.  p is a rational like 1/2 and the choice associates right. */
plrc_status plrc_term_parse(const char* text, plrc_term** out);
void plrc_term_free(plrc_term* t);
plrc_status plrc_term_print(const plrc_term* t, char** out);

/* Complete left reduct: one parallel head step in every probabilistic
 * branch (arguments reduce once the head is normal). */
plrc_status plrc_term_left_reduct(const plrc_term* t, plrc_term** out);

/* ---- resource terms ---- */

/* Grammar: \x. t | t [u, v] | l{p} t | r{p} t | name | [t, u] at top level. */
plrc_status plrc_rterm_parse(const char* text, plrc_rterm** out);
void plrc_rterm_free(plrc_rterm* t);
plrc_status plrc_rterm_print(const plrc_rterm* t, char** out);

/* Structural coherence of two simple terms (or two bags). */
plrc_status plrc_rterm_coherent(const plrc_rterm* a, const plrc_rterm* b, int* out);

/* Multinomial coefficient m(t) as a decimal string. */
plrc_status plrc_rterm_multinomial(const plrc_rterm* t, char** out);

/* All one-step reducts, each a combination.  *out receives a malloc'd array
 * of *count handles; release with plrc_comb_array_free. */
plrc_status plrc_rterm_reduce_one(const plrc_rterm* t, plrc_comb*** out, size_t* count);

plrc_status plrc_rterm_left_reduct(const plrc_rterm* t, plrc_comb** out);
plrc_status plrc_rterm_normalize(const plrc_rterm* t, plrc_comb** out);

/* ---- combinations ---- */

void plrc_comb_free(plrc_comb* c);
void plrc_comb_array_free(plrc_comb** arr, size_t count);
plrc_status plrc_comb_print(const plrc_comb* c, char** out);
plrc_status plrc_comb_to_json(const plrc_comb* c, char** out);
plrc_status plrc_comb_support_size(const plrc_comb* c, size_t* out);
plrc_status plrc_comb_mass(const plrc_comb* c, char** out); /* rational string */
plrc_status plrc_comb_coeff(const plrc_comb* c, const plrc_rterm* t, char** out);
plrc_status plrc_comb_is_normal(const plrc_comb* c, int* out);
plrc_status plrc_comb_is_uniform(const plrc_comb* c, int* out);
plrc_status plrc_comb_is_regular(const plrc_comb* c, int* out);
plrc_status plrc_comb_left_reduct(const plrc_comb* c, plrc_comb** out);
plrc_status plrc_comb_normalize(const plrc_comb* c, plrc_comb** out);

/* ---- head reduction ---- */

/* Explores the binary choice tree with at most `fuel` head steps per
 * branch.  Fails with PLRC_ERR_LIMIT if the tree explodes. */
plrc_status plrc_term_head_reduce(const plrc_term* t, unsigned fuel, plrc_frontier** out);
void plrc_frontier_free(plrc_frontier* f);

plrc_status plrc_frontier_resolved_count(const plrc_frontier* f, size_t* out);
plrc_status plrc_frontier_unresolved_count(const plrc_frontier* f, size_t* out);

/* Branch accessors; any out pointer may be NULL to skip that field.
 * path is the choice sequence like "l{1/2} l{1/2}", prob its probability. */
plrc_status plrc_frontier_resolved(const plrc_frontier* f, size_t i, char** path, char** term,
                                   char** prob);
plrc_status plrc_frontier_unresolved(const plrc_frontier* f, size_t i, char** path, char** term,
                                     char** prob);
plrc_status plrc_frontier_masses(const plrc_frontier* f, char** resolved, char** unresolved);

/* [lower, upper] bracket of the head-convergence probability. */
plrc_status plrc_term_convergence(const plrc_term* t, unsigned fuel, char** lower, char** upper);

/* ---- Taylor expansion ---- */

/* Truncated Taylor expansion.  generic = 0 keeps choice tags (explicit
 * expansion, truncated by tagged size); generic = 1 erases them (truncated
 * by erased size). */
plrc_status plrc_term_taylor(const plrc_term* t, int generic, unsigned max_size,
                             unsigned max_copies, plrc_comb** out);

/* Truncated Taylor normal form via head reduction.  Coefficients are exact
 * lower bounds; residual (a rational string) bounds the unresolved mass. */
plrc_status plrc_term_taylor_nf(const plrc_term* t, int explicit_tags, unsigned max_size,
                                unsigned max_copies, unsigned fuel, plrc_comb** out,
                                char** residual);

/* ---- Bohm approximants and tree tests ---- */

/* Rendered depth-d approximant of the Bohm tree; folded != 0 pushes all
 * unresolved mass to the outermost residual. */
plrc_status plrc_term_bohm(const plrc_term* t, unsigned depth, unsigned fuel, int folded,
                           char** out);

/* Same approximant as a structured JSON object
 * {"dist": [{"tree": {...}, "prob": "1/4"}], "residual": "0"}. */
plrc_status plrc_term_bohm_json(const plrc_term* t, unsigned depth, unsigned fuel, int folded,
                                char** out);

/* Evaluates a tree test, written as  w | T & T | ev(t) | (\x y. x)(T, T),
 * against a term; yields the success probability bracket. */
plrc_status plrc_btt_eval(const char* test, const plrc_term* t, unsigned fuel, char** lower,
                          char** upper);

/* ---- tree transition systems ---- */

plrc_status plrc_tts_parse(const char* text, plrc_tts** out);
void plrc_tts_free(plrc_tts* t);
plrc_status plrc_tts_print(const plrc_tts* t, char** out);
plrc_status plrc_tts_to_json(const plrc_tts* t, char** out);

/* State-to-state bisimilarity (both linear or both branching states). */
plrc_status plrc_tts_bisimilar(const plrc_tts* t, const char* a, const char* b, int* out);

/* Success probability of a test  w | T & T | label(T, ...)  at a state;
 * linear selects the sort of the state and the test's top level. */
plrc_status plrc_tts_eval_test(const plrc_tts* t, const char* test, const char* state,
                               int linear, char** out);

/* Searches tests up to max_depth for one separating two linear states;
 * *out is NULL when none is found (still PLRC_OK). */
plrc_status plrc_tts_distinguish(const plrc_tts* t, const char* a, const char* b,
                                 unsigned max_depth, char** out);

/* Transition system of the head-reduction behaviour of the given terms;
 * roots become linear states "t0", "t1", ... in order. */
plrc_status plrc_tts_of_terms(const plrc_term* const* terms, size_t count, unsigned fuel,
                              unsigned depth, plrc_tts** out);

/* ---- equivalence comparison ---- */

/* Compares two terms at the given budgets: truncated generic Taylor
 * expansions, Taylor normal forms, folded Bohm approximants, and a search
 * for a separating restricted tree test.  *report receives a JSON object;
 * *separated is nonzero iff some check witnessed a difference. */
plrc_status plrc_term_compare(const plrc_term* m, const plrc_term* n, unsigned max_size,
                              unsigned max_copies, unsigned fuel, unsigned depth, char** report,
                              int* separated);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* PLRC_H */
