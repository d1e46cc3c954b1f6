#include "plrc/taylor.hpp"

#include <algorithm>
#include <vector>

#include "plrc/operational.hpp"

namespace plrc::taylor {

using resource::Combination;
using resource::measured_size;
using resource::ResourceLess;
using resource::ResourcePtr;
using resource::ResourceTerm;
using syntax::Term;

namespace {

unsigned tag_cost(SizeMeasure m) { return m == SizeMeasure::Tagged ? 1u : 0u; }

Combination expand(const TermPtr& t, int remaining, const TruncationBudget& b,
                   SizeMeasure measure) {
    if (remaining < 1) return {};
    switch (t->kind()) {
        case Term::Kind::BoundVar:
            return Combination::singleton(ResourceTerm::bound(t->index()));
        case Term::Kind::FreeVar:
            return Combination::singleton(ResourceTerm::free(t->name()));
        case Term::Kind::Abs: {
            Combination body = expand(t->body(), remaining - 1, b, measure);
            Combination out;
            for (const auto& [s, c] : body) out.add(ResourceTerm::abs(s), c);
            return out;
        }
        case Term::Kind::App: {
            Combination heads = expand(t->fun(), remaining - 1, b, measure);
            if (heads.empty()) return {};
            Combination arg = expand(t->arg(), remaining - 2, b, measure);
            Combination out;
            for (const auto& [h, hc] : heads) {
                int slack = remaining - 1 - static_cast<int>(measured_size(*h, measure));
                if (slack < 0) continue;
                Combination bags = resource::exponential(arg, b.max_bag_copies,
                                                         static_cast<unsigned>(slack), measure);
                for (const auto& [bag, bc] : bags)
                    out.add(ResourceTerm::lin_app(h, bag), hc * bc);
            }
            return out;
        }
        case Term::Kind::Choice: {
            int inner = remaining - static_cast<int>(tag_cost(measure));
            Combination out;
            for (const auto& [s, c] : expand(t->left(), inner, b, measure))
                out.add(ResourceTerm::left_tag(t->prob(), s), c);
            for (const auto& [s, c] : expand(t->right(), inner, b, measure))
                out.add(ResourceTerm::right_tag(t->prob(), s), c);
            return out;
        }
    }
    return {};
}

using TermSet = std::set<ResourcePtr, ResourceLess>;

// Independent support enumeration: build candidate sets bottom-up and filter
// by measured size at each constructor.
TermSet support(const TermPtr& t, unsigned bound, unsigned copies, SizeMeasure measure) {
    TermSet out;
    auto keep = [&](const ResourcePtr& s) {
        if (measured_size(*s, measure) <= bound) out.insert(s);
    };
    switch (t->kind()) {
        case Term::Kind::BoundVar:
            keep(ResourceTerm::bound(t->index()));
            return out;
        case Term::Kind::FreeVar:
            keep(ResourceTerm::free(t->name()));
            return out;
        case Term::Kind::Abs:
            for (const auto& s : support(t->body(), bound, copies, measure))
                keep(ResourceTerm::abs(s));
            return out;
        case Term::Kind::App: {
            TermSet heads = support(t->fun(), bound, copies, measure);
            TermSet arg = support(t->arg(), bound, copies, measure);
            std::vector<ResourcePtr> pool(arg.begin(), arg.end());
            // All multisets over the pool with at most `copies` elements.
            std::vector<std::vector<ResourcePtr>> bags;
            std::vector<ResourcePtr> cur;
            auto rec = [&](auto&& self, size_t from) -> void {
                bags.push_back(cur);
                if (cur.size() == copies) return;
                for (size_t i = from; i < pool.size(); ++i) {
                    cur.push_back(pool[i]);
                    self(self, i);
                    cur.pop_back();
                }
            };
            rec(rec, 0);
            for (const auto& h : heads)
                for (const auto& es : bags) {
                    std::vector<ResourcePtr> copy = es;
                    keep(ResourceTerm::lin_app(h, ResourceTerm::bag(std::move(copy))));
                }
            return out;
        }
        case Term::Kind::Choice:
            for (const auto& s : support(t->left(), bound, copies, measure))
                keep(ResourceTerm::left_tag(t->prob(), s));
            for (const auto& s : support(t->right(), bound, copies, measure))
                keep(ResourceTerm::right_tag(t->prob(), s));
            return out;
    }
    return out;
}

ResourcePtr erase_rec(const ResourcePtr& t, Rational& weight) {
    switch (t->kind()) {
        case ResourceTerm::Kind::BoundVar:
        case ResourceTerm::Kind::FreeVar:
            return t;
        case ResourceTerm::Kind::Abs:
            return ResourceTerm::abs(erase_rec(t->body(), weight));
        case ResourceTerm::Kind::LeftTag:
            weight *= t->prob();
            return erase_rec(t->body(), weight);
        case ResourceTerm::Kind::RightTag:
            weight *= Rational(1) - t->prob();
            return erase_rec(t->body(), weight);
        case ResourceTerm::Kind::LinApp: {
            ResourcePtr f = erase_rec(t->head(), weight);
            return ResourceTerm::lin_app(f, erase_rec(t->args(), weight));
        }
        case ResourceTerm::Kind::Bag: {
            std::vector<ResourcePtr> es;
            es.reserve(t->elems().size());
            for (const auto& e : t->elems()) es.push_back(erase_rec(e, weight));
            return ResourceTerm::bag(std::move(es));
        }
    }
    return t;
}

Combination erase_collapse(const Combination& c) {
    Combination out;
    for (const auto& [s, coeff] : c) {
        ErasedWeight ew = erase(s);
        if (ew.weight == 0) continue;
        out.add(ew.term, coeff * ew.weight);
    }
    return out;
}

// Wraps the resolved choice path as a tag prefix, first choice outermost.
ResourcePtr apply_path(const operational::ChoiceSeq& path, ResourcePtr s) {
    for (auto it = path.rbegin(); it != path.rend(); ++it)
        s = it->left ? ResourceTerm::left_tag(it->p, s) : ResourceTerm::right_tag(it->p, s);
    return s;
}

struct NfExpander {
    TruncationBudget budget;
    unsigned fuel;
    SizeMeasure measure;

    TaylorNF run(const TermPtr& t, int remaining) {
        TaylorNF out;
        out.residual = 0;
        operational::ReductionFrontier frontier = operational::head_reductions(t, fuel);
        out.residual += frontier.unresolved_mass();
        for (const auto& branch : frontier.resolved) {
            Rational pr = operational::prob_of(branch.path);
            const operational::HeadNormalForm& h = branch.hnf;
            ResourcePtr head = h.head_is_bound
                                   ? ResourceTerm::bound(h.head_index)
                                   : ResourceTerm::free(h.head_name);
            unsigned m = static_cast<unsigned>(h.args.size());
            int skel = static_cast<int>(h.binders + 1 + m);
            int prefix_cost =
                measure == SizeMeasure::Tagged ? static_cast<int>(branch.path.size()) : 0;
            int rem_args = remaining - prefix_cost - skel;

            if (m == 0) {
                ResourcePtr s = apply_path(branch.path, wrap(head, {}, h.binders));
                if (static_cast<int>(measured_size(*s, measure)) <= remaining)
                    out.comb.add(s, 1);
                continue;
            }

            if (rem_args < 1) {
                // Arguments cannot be explored within the budget; the only
                // coefficient known exactly is the all-empty-bags term (the
                // zero-copies coefficient of every exponential is 1).
                std::vector<ResourcePtr> empties(m, ResourceTerm::bag({}));
                ResourcePtr s = apply_path(branch.path, wrap(head, empties, h.binders));
                if (static_cast<int>(measured_size(*s, measure)) <= remaining)
                    out.comb.add(s, 1);
                out.residual += pr;
                continue;
            }

            Rational keep = 1;  // product of (1 - sub-residual)
            std::vector<Combination> bag_choices;
            bag_choices.reserve(m);
            for (const auto& arg : h.args) {
                TaylorNF sub = run(arg, rem_args);
                keep *= Rational(1) - sub.residual;
                bag_choices.push_back(resource::exponential(
                    sub.comb, budget.max_bag_copies, static_cast<unsigned>(rem_args), measure));
            }
            out.residual += pr * (Rational(1) - keep);

            // Cross product over the per-argument bag choices.
            std::vector<ResourcePtr> bags(m);
            auto cross = [&](auto&& self, size_t i, const Rational& coeff) -> void {
                if (i == m) {
                    ResourcePtr s = apply_path(branch.path, wrap(head, bags, h.binders));
                    if (static_cast<int>(measured_size(*s, measure)) <= remaining)
                        out.comb.add(s, coeff);
                    return;
                }
                for (const auto& [bag, bc] : bag_choices[i]) {
                    bags[i] = bag;
                    self(self, i + 1, coeff * bc);
                }
            };
            cross(cross, 0, 1);
        }
        return out;
    }

    static ResourcePtr wrap(ResourcePtr head, const std::vector<ResourcePtr>& bags,
                            unsigned binders) {
        for (const auto& b : bags) head = ResourceTerm::lin_app(head, b);
        for (unsigned i = 0; i < binders; ++i) head = ResourceTerm::abs(head);
        return head;
    }
};

}  // namespace

Combination explicit_taylor(const TermPtr& t, const TruncationBudget& b, SizeMeasure measure) {
    return expand(t, static_cast<int>(b.max_term_size), b, measure);
}

std::set<ResourcePtr, ResourceLess> explicit_taylor_support(const TermPtr& t,
                                                            const TruncationBudget& b,
                                                            SizeMeasure measure) {
    return support(t, b.max_term_size, b.max_bag_copies, measure);
}

ErasedWeight erase(const ResourcePtr& t) {
    ErasedWeight out;
    out.weight = 1;
    out.term = erase_rec(t, out.weight);
    return out;
}

Combination generic_taylor(const TermPtr& t, const TruncationBudget& b) {
    return erase_collapse(explicit_taylor(t, b, SizeMeasure::Erased));
}

Combination generic_taylor_direct(const TermPtr& t, const TruncationBudget& b) {
    struct Direct {
        const TruncationBudget& b;

        Combination go(const TermPtr& t, int remaining) {
            if (remaining < 1) return {};
            switch (t->kind()) {
                case Term::Kind::BoundVar:
                    return Combination::singleton(ResourceTerm::bound(t->index()));
                case Term::Kind::FreeVar:
                    return Combination::singleton(ResourceTerm::free(t->name()));
                case Term::Kind::Abs: {
                    Combination out;
                    for (const auto& [s, c] : go(t->body(), remaining - 1))
                        out.add(ResourceTerm::abs(s), c);
                    return out;
                }
                case Term::Kind::App: {
                    Combination heads = go(t->fun(), remaining - 1);
                    Combination arg = go(t->arg(), remaining - 2);
                    Combination out;
                    for (const auto& [h, hc] : heads) {
                        int slack = remaining - 1 - static_cast<int>(h->size());
                        if (slack < 0) continue;
                        Combination bags =
                            resource::exponential(arg, b.max_bag_copies,
                                                  static_cast<unsigned>(slack));
                        for (const auto& [bag, bc] : bags)
                            out.add(ResourceTerm::lin_app(h, bag), hc * bc);
                    }
                    return out;
                }
                case Term::Kind::Choice: {
                    Combination out;
                    const Rational& p = t->prob();
                    if (p != 0) out.add(go(t->left(), remaining), p);
                    if (p != 1) out.add(go(t->right(), remaining), Rational(1) - p);
                    return out;
                }
            }
            return {};
        }
    };
    return Direct{b}.go(t, static_cast<int>(b.max_term_size));
}

bool barycentric_equiv_check(const TermPtr& m, const TermPtr& n, const TruncationBudget& b) {
    return generic_taylor(m, b) == generic_taylor(n, b);
}

TaylorNF explicit_taylor_nf(const TermPtr& t, const TruncationBudget& b, unsigned fuel) {
    NfExpander e{b, fuel, SizeMeasure::Tagged};
    return e.run(t, static_cast<int>(b.max_term_size));
}

TaylorNF taylor_nf(const TermPtr& t, const TruncationBudget& b, unsigned fuel) {
    NfExpander e{b, fuel, SizeMeasure::Erased};
    TaylorNF out = e.run(t, static_cast<int>(b.max_term_size));
    out.comb = erase_collapse(out.comb);
    return out;
}

}  // namespace plrc::taylor
