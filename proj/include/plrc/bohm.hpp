#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "plrc/combination.hpp"
#include "plrc/operational.hpp"
#include "plrc/taylor.hpp"

namespace plrc::bohm {

using resource::Combination;
using resource::ResourcePtr;
using syntax::TermPtr;
using taylor::TruncationBudget;

// ---- probabilistic Bohm approximants ----

struct BohmApprox;

// Head-shaped value tree node: lam x1..xn. y A1 ... Am with approximant
// children.  The head follows the HeadNormalForm convention (bound index or
// free name; indices >= binders dangle into the enclosing tree).
class ValueTree {
  public:
    unsigned binders = 0;
    bool head_is_bound = true;
    int head_index = 0;
    std::string head_name;
    std::vector<BohmApprox> children;

    static int compare(const ValueTree& a, const ValueTree& b);
};

using ValueTreePtr = std::shared_ptr<const ValueTree>;

// Subprobability distribution over value trees plus unresolved mass.  The
// depth-0 approximant is the empty distribution with residual 0.
struct BohmApprox {
    std::vector<std::pair<ValueTreePtr, Rational>> dist;  // sorted by tree order
    Rational residual = 0;

    Rational mass() const;
};

int compare(const BohmApprox& a, const BohmApprox& b);
bool operator==(const BohmApprox& a, const BohmApprox& b);

// Equality up to unresolved mass: every tree containing unresolved mass
// anywhere contributes its whole probability to the parent residual.
BohmApprox folded(const BohmApprox& a);

std::string to_string(const BohmApprox& a);

// Depth-d approximant of the Bohm tree of M, explored with `fuel` head steps
// per probabilistic branch at every level.
BohmApprox pt_approximant(const TermPtr& t, unsigned depth, unsigned fuel);

// Taylor expansion of an approximant: choice-free combination whose
// coefficient at s is Pr(s's tree shape) / m(s), truncated by the budget.
Combination taylor_of_tree(const BohmApprox& a, const TruncationBudget& b);

// Number of multiset layers of a normal choice-free term: the depth at which
// its Taylor-of-tree coefficient stabilises.
unsigned nesting_depth(const ResourcePtr& s);

// ---- tree tests ----

class BohmTest;
using BttPtr = std::shared_ptr<const BohmTest>;

// Test over Bohm trees (tree level) and head normal forms (hnf level):
//   tree level:  w | T & U | ev(t)
//   hnf level:   w | t & u | (\x1..xn.y)(T1,...,Tm)
// One node type covers both levels; validate_btt/validate_bht check usage.
class BohmTest {
  public:
    enum class Kind { Omega, Conj, Ev, HeadForm };

    static BttPtr omega();
    static BttPtr conj(BttPtr left, BttPtr right);
    static BttPtr ev(BttPtr inner);
    static BttPtr head_form(unsigned binders, bool head_is_bound, int head_index,
                            std::string head_name, std::vector<BttPtr> children);

    Kind kind() const { return kind_; }
    const BttPtr& left() const { return a_; }
    const BttPtr& right() const { return b_; }
    const BttPtr& inner() const { return a_; }
    unsigned binders() const { return binders_; }
    bool head_is_bound() const { return head_is_bound_; }
    int head_index() const { return head_index_; }
    const std::string& head_name() const { return head_name_; }
    const std::vector<BttPtr>& children() const { return children_; }

    static int compare(const BohmTest& a, const BohmTest& b);

  private:
    explicit BohmTest(Kind k) : kind_(k) {}

    Kind kind_;
    BttPtr a_, b_;
    unsigned binders_ = 0;
    bool head_is_bound_ = true;
    int head_index_ = 0;
    std::string head_name_;
    std::vector<BttPtr> children_;
};

bool validate_btt(const BttPtr& t);
bool validate_bht(const BttPtr& t);

// Restricted tests: hnf level consists of head forms only.
bool validate_rbtt(const BttPtr& t);

// Grammar: w | T & T | ev(t) | (\x1..xn.y)(T1,...,Tm); heads resolve against
// enclosing binders.  Throws ParseError.
BttPtr parse_btt(const std::string& text);

std::string to_string(const BttPtr& t);

struct Interval {
    Rational lower;
    Rational upper;

    bool operator==(const Interval& o) const { return lower == o.lower && upper == o.upper; }
};

// Success probability bracket of a tree test on M / an hnf test on h.
Interval eval_btt(const BttPtr& t, const TermPtr& m, unsigned fuel);
Interval eval_bht(const BttPtr& t, const operational::HeadNormalForm& h, unsigned fuel);

// ---- the polyterm encoding of restricted tests ----

// s encoding: w -> [], conj -> bag union, ev(b) -> [s_b],
// (\x..y)(T1..Tm) -> lam x.. y s(T1) .. s(Tm).
ResourcePtr rbtt_to_polyterm(const BttPtr& t);
ResourcePtr rbht_to_term(const BttPtr& t);

// Inverses on canonical forms (sorted bags, left-nested conjunctions).
BttPtr polyterm_to_rbtt(const ResourcePtr& bag);
BttPtr term_to_rbht(const ResourcePtr& s);

struct CorrespondenceResult {
    ResourcePtr polyterm;
    Rational test_lower;   // eval_btt lower bound
    Rational coeff_route;  // m(s_T) * coefficient of s_T in !(taylor_nf)
    bool equal;
};

// Checks the exact match of the testing route and the normal-form
// coefficient route for a restricted tree test.
CorrespondenceResult coefficient_test_correspondence(const BttPtr& t, const TermPtr& m,
                                                     unsigned fuel);

// ---- refinement of general tests into restricted ones ----

struct FamilyLimits {
    unsigned max_binders = 2;
    unsigned max_arity = 2;
    unsigned count = 64;
    std::vector<std::string> head_names;
};

// Refines every hnf-level w into concrete head shapes, fairly by total shape
// weight; hnf-level conjunctions merge when their heads agree and yield the
// empty family when they clash.
std::vector<BttPtr> btt_to_rbtt_family(const BttPtr& t, const FamilyLimits& limits);

// Small search for a restricted test whose intervals on m and n are disjoint.
std::optional<BttPtr> separating_rbtt(const TermPtr& m, const TermPtr& n, unsigned fuel,
                                      unsigned max_size);

}  // namespace plrc::bohm
