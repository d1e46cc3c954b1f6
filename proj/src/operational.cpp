#include "plrc/operational.hpp"

#include <deque>
#include <stdexcept>

namespace plrc::operational {

using syntax::Term;

namespace {

struct Spine {
    unsigned binders = 0;
    TermPtr core;
    std::vector<TermPtr> args;  // application order, leftmost first
};

Spine decompose(TermPtr t) {
    Spine s;
    while (t->kind() == Term::Kind::Abs) {
        ++s.binders;
        t = t->body();
    }
    while (t->kind() == Term::Kind::App) {
        s.args.push_back(t->arg());
        t = t->fun();
    }
    std::reverse(s.args.begin(), s.args.end());
    s.core = t;
    return s;
}

TermPtr rebuild(const TermPtr& core, const std::vector<TermPtr>& args, unsigned binders,
                size_t from = 0) {
    TermPtr t = core;
    for (size_t i = from; i < args.size(); ++i) t = Term::app(t, args[i]);
    for (unsigned i = 0; i < binders; ++i) t = Term::abs(t);
    return t;
}

}  // namespace

Rational prob_of(const ChoiceSeq& path) {
    Rational out = 1;
    for (const auto& s : path) out *= s.prob();
    return out;
}

std::string to_string(const ChoiceSeq& path) {
    if (path.empty()) return "e";
    std::string out;
    for (const auto& s : path) {
        if (!out.empty()) out += " ";
        out += (s.left ? "l" : "r") + std::string("{") + plrc::to_string(s.p) + "}";
    }
    return out;
}

TermPtr HeadNormalForm::to_term() const {
    TermPtr h = head_is_bound ? Term::bound(head_index) : Term::free(head_name);
    return rebuild(h, args, binders);
}

bool is_hnf(const TermPtr& t) {
    Spine s = decompose(t);
    return s.core->kind() == Term::Kind::BoundVar || s.core->kind() == Term::Kind::FreeVar;
}

std::optional<HeadNormalForm> hnf_decompose(const TermPtr& t) {
    Spine s = decompose(t);
    HeadNormalForm h;
    h.binders = s.binders;
    h.args = s.args;
    if (s.core->kind() == Term::Kind::BoundVar) {
        h.head_is_bound = true;
        h.head_index = s.core->index();
    } else if (s.core->kind() == Term::Kind::FreeVar) {
        h.head_is_bound = false;
        h.head_name = s.core->name();
    } else {
        return std::nullopt;
    }
    return h;
}

HeadStep head_step(const TermPtr& t) {
    Spine s = decompose(t);
    switch (s.core->kind()) {
        case Term::Kind::BoundVar:
        case Term::Kind::FreeVar:
            return AlreadyHnf{};
        case Term::Kind::Choice: {
            TermPtr l = rebuild(s.core->left(), s.args, s.binders);
            TermPtr r = rebuild(s.core->right(), s.args, s.binders);
            return ChoiceBranch{s.core->prob(), l, r};
        }
        case Term::Kind::Abs: {
            // decompose strips binders maximally, so an Abs core has args.
            TermPtr contracted = syntax::subst_bound(s.core->body(), 0, s.args[0]);
            return BetaStep{rebuild(contracted, s.args, s.binders, 1)};
        }
        case Term::Kind::App:
            break;
    }
    throw std::logic_error("head_step: malformed spine");
}

Rational ReductionFrontier::resolved_mass() const {
    Rational out = 0;
    for (const auto& b : resolved) out += prob_of(b.path);
    return out;
}

Rational ReductionFrontier::unresolved_mass() const {
    Rational out = 0;
    for (const auto& b : unresolved) out += prob_of(b.path);
    return out;
}

ReductionFrontier head_reductions(const TermPtr& t, unsigned fuel) {
    ReductionFrontier out;
    struct Entry {
        TermPtr term;
        ChoiceSeq path;
        unsigned steps;
    };
    std::deque<Entry> queue;
    queue.push_back({t, {}, 0});
    while (!queue.empty()) {
        if (queue.size() + out.resolved.size() + out.unresolved.size() > (1u << 22))
            throw std::runtime_error("head_reductions: choice tree too large");
        Entry e = std::move(queue.front());
        queue.pop_front();
        if (auto h = hnf_decompose(e.term)) {
            out.resolved.push_back({std::move(e.path), std::move(*h), e.steps});
            continue;
        }
        if (e.steps >= fuel) {
            out.unresolved.push_back({std::move(e.path), e.term, e.steps});
            continue;
        }
        HeadStep step = head_step(e.term);
        if (auto* b = std::get_if<BetaStep>(&step)) {
            queue.push_back({b->next, std::move(e.path), e.steps + 1});
        } else if (auto* c = std::get_if<ChoiceBranch>(&step)) {
            ChoiceSeq lp = e.path;
            lp.push_back({true, c->p});
            queue.push_back({c->left, std::move(lp), e.steps + 1});
            ChoiceSeq rp = std::move(e.path);
            rp.push_back({false, c->p});
            queue.push_back({c->right, std::move(rp), e.steps + 1});
        } else {
            throw std::logic_error("head_reductions: hnf missed by decompose");
        }
    }
    return out;
}

TermDist resolved_distribution(const ReductionFrontier& f) {
    TermDist out;
    for (const auto& b : f.resolved) {
        TermPtr h = b.hnf.to_term();
        out[h] += prob_of(b.path);
    }
    return out;
}

std::pair<Rational, Rational> hnf_prob(const TermPtr& t, const TermPtr& hnf, unsigned fuel) {
    ReductionFrontier f = head_reductions(t, fuel);
    Rational lower = 0;
    for (const auto& b : f.resolved)
        if (syntax::equal(b.hnf.to_term(), hnf)) lower += prob_of(b.path);
    return {lower, lower + f.unresolved_mass()};
}

std::pair<Rational, Rational> convergence_prob(const TermPtr& t, unsigned fuel) {
    ReductionFrontier f = head_reductions(t, fuel);
    return {f.resolved_mass(), f.resolved_mass() + f.unresolved_mass()};
}

TermPtr left_reduct_term(const TermPtr& t) {
    if (t->kind() == Term::Kind::Choice)
        return Term::choice(t->prob(), left_reduct_term(t->left()), left_reduct_term(t->right()));
    Spine s = decompose(t);
    switch (s.core->kind()) {
        case Term::Kind::BoundVar:
        case Term::Kind::FreeVar: {
            std::vector<TermPtr> args;
            args.reserve(s.args.size());
            for (const auto& a : s.args) args.push_back(left_reduct_term(a));
            return rebuild(s.core, args, s.binders);
        }
        case Term::Kind::Abs: {
            TermPtr contracted = syntax::subst_bound(s.core->body(), 0, s.args[0]);
            return rebuild(contracted, s.args, s.binders, 1);
        }
        case Term::Kind::Choice: {
            TermPtr l = rebuild(s.core->left(), s.args, s.binders);
            TermPtr r = rebuild(s.core->right(), s.args, s.binders);
            return Term::choice(s.core->prob(), l, r);
        }
        case Term::Kind::App:
            break;
    }
    throw std::logic_error("left_reduct_term: malformed spine");
}

}  // namespace plrc::operational
