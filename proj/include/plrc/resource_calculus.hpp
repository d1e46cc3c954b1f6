#pragma once

#include <set>
#include <vector>

#include "plrc/combination.hpp"
#include "plrc/resource_term.hpp"

namespace plrc::resource {

// Size measure used by truncations: Tagged counts every constructor (the
// calculus size), Erased ignores choice tags (the size of the erasure).
enum class SizeMeasure { Tagged, Erased };

inline unsigned measured_size(const ResourceTerm& t, SizeMeasure m) {
    return m == SizeMeasure::Tagged ? t.size() : t.erased_size();
}

// ---- sizes and the termination order ----

// Multiset of support sizes, as a sorted (ascending) list.
std::vector<unsigned> ssize(const Combination& c);

// Reverse lexicographic order on size multisets: a < b iff the multisets
// differ and at the largest size where they differ, a has fewer elements.
bool size_order_less(const std::vector<unsigned>& a, const std::vector<unsigned>& b);

// ---- substitution ----

// Number of occurrences of the free variable `name`.
unsigned degree(const ResourcePtr& t, const std::string& name);

// Substitutes the bag for the free variable `name` following the inductive
// clauses (the application clause sums over splittings, the bag clause over
// partitions).  Arity mismatch gives the zero combination.
Combination substitute(const ResourcePtr& t, const ResourcePtr& bag, const std::string& name);

// Independent brute-force formulation: sum over all n! assignments of bag
// elements to the free occurrences of `name`.  Test oracle only.
Combination substitute_oracle(const ResourcePtr& t, const ResourcePtr& bag,
                              const std::string& name);

// ---- reduction ----

// All one-step reducts of a single simple (poly-)term (beta or tag lifting,
// under arbitrary contexts).
std::vector<Combination> one_step_reducts(const ResourcePtr& t);

// All one-step reducts S - S_sigma.sigma + S_sigma.T of a combination;
// empty iff S is normal.
std::set<Combination> reduce_one(const Combination& c);

// Complete left reduct: every support term contracts its leftmost-outermost
// redex simultaneously.
Combination left_reduct(const ResourcePtr& t);
Combination left_reduct(const Combination& c);

bool is_normal(const Combination& c);

// Unique normal form, by iterating the complete left reduct to fixpoint.
Combination normalize(const Combination& c);
Combination normalize(const ResourcePtr& t);

// ---- coherence, uniformity, regularity ----

bool coherent(const ResourcePtr& a, const ResourcePtr& b);
bool self_coherent(const ResourcePtr& t);

// Pairwise coherence of the support, including each element with itself.
bool is_uniform(const Combination& c);

// Multinomial coefficient m(σ): bag-preserving permutation count.
Integer multinomial(const ResourcePtr& t);

// Uniform and every coefficient equals 1/m(σ).
bool is_regular(const Combination& c);

// ---- exponential ----

// Truncation of !S = Σ (1/n!)[S^n] to bags of at most max_copies elements
// whose measured size stays within max_size.
Combination exponential(const Combination& c, unsigned max_copies,
                        unsigned max_size = ~0u, SizeMeasure measure = SizeMeasure::Tagged);

// Coefficient of a specific bag in !S, computed directly as
// Π_u S(u)^k(u) / k(u)!  (zero if some element is outside supp S).
Rational exponential_coeff_at(const Combination& c, const ResourcePtr& bag);

}  // namespace plrc::resource
