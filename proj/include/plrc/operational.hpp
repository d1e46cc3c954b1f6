#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "plrc/lambda_term.hpp"
#include "plrc/rational.hpp"

namespace plrc::operational {

using syntax::TermPtr;

// One resolved probabilistic choice along a head reduction: which branch was
// taken and the probability parameter of the choice.
struct ChoiceStep {
    bool left;
    Rational p;

    Rational prob() const { return left ? p : Rational(1) - p; }
    bool operator==(const ChoiceStep& o) const { return left == o.left && p == o.p; }
};

using ChoiceSeq = std::vector<ChoiceStep>;

Rational prob_of(const ChoiceSeq& path);
std::string to_string(const ChoiceSeq& path);

// Head normal form lam x1..xn. y P1 ... Pm.  The head is either a bound
// index (< binders, or dangling into the surrounding context) or a free name;
// the args live under the binder prefix.
struct HeadNormalForm {
    unsigned binders = 0;
    bool head_is_bound = true;
    int head_index = 0;
    std::string head_name;
    std::vector<TermPtr> args;

    TermPtr to_term() const;
};

bool is_hnf(const TermPtr& t);
std::optional<HeadNormalForm> hnf_decompose(const TermPtr& t);

// A single head step.
struct AlreadyHnf {};
struct BetaStep {
    TermPtr next;
};
struct ChoiceBranch {
    Rational p;
    TermPtr left;
    TermPtr right;
};
using HeadStep = std::variant<AlreadyHnf, BetaStep, ChoiceBranch>;

HeadStep head_step(const TermPtr& t);

struct ResolvedBranch {
    ChoiceSeq path;
    HeadNormalForm hnf;
    unsigned steps = 0;
};

struct UnresolvedBranch {
    ChoiceSeq path;
    TermPtr term;
    unsigned steps = 0;
};

// Breadth-first exploration of the binary choice tree; each branch spends at
// most `fuel` head steps (beta and choice steps both count).
struct ReductionFrontier {
    std::vector<ResolvedBranch> resolved;
    std::vector<UnresolvedBranch> unresolved;

    Rational resolved_mass() const;
    Rational unresolved_mass() const;
};

ReductionFrontier head_reductions(const TermPtr& t, unsigned fuel);

using TermDist = std::map<TermPtr, Rational, syntax::TermLess>;

// Resolved branches aggregated by head normal form (as a term).
TermDist resolved_distribution(const ReductionFrontier& f);

// [lower, lower + residual] brackets the probability of reaching exactly the
// head normal form `hnf`; monotone in fuel.
std::pair<Rational, Rational> hnf_prob(const TermPtr& t, const TermPtr& hnf, unsigned fuel);

// [lower, lower + residual] brackets the probability of head convergence.
std::pair<Rational, Rational> convergence_prob(const TermPtr& t, unsigned fuel);

// Complete left reduct of a probabilistic lambda-term: contracts the head
// redex of every probabilistic branch; in head normal forms the arguments are
// reduced instead.
TermPtr left_reduct_term(const TermPtr& t);

}  // namespace plrc::operational
