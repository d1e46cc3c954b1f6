#include "plrc/resource_calculus.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <unordered_map>

#include "plrc/rational.hpp"

namespace plrc::resource {

namespace {

unsigned popcount(std::uint32_t m) { return static_cast<unsigned>(std::popcount(m)); }

ResourcePtr wrap_binders(ResourcePtr t, unsigned n) {
    for (unsigned i = 0; i < n; ++i) t = ResourceTerm::abs(t);
    return t;
}

ResourcePtr apply_bags(ResourcePtr h, const std::vector<ResourcePtr>& bags, size_t from = 0) {
    for (size_t i = from; i < bags.size(); ++i) h = ResourceTerm::lin_app(h, bags[i]);
    return h;
}

// Spine view of a simple term: binder prefix, core head, bag arguments in
// application order (innermost first).
struct Spine {
    unsigned binders = 0;
    ResourcePtr head;
    std::vector<ResourcePtr> bags;
};

Spine decompose(ResourcePtr t) {
    Spine s;
    while (t->kind() == ResourceTerm::Kind::Abs) {
        ++s.binders;
        t = t->body();
    }
    while (t->kind() == ResourceTerm::Kind::LinApp) {
        s.bags.push_back(t->args());
        t = t->head();
    }
    std::reverse(s.bags.begin(), s.bags.end());
    s.head = t;
    return s;
}

// ---- substitution ----

// Shared driver for the name-directed and index-directed substitutions.  The
// bag elements are kept unshifted; each placement shifts by the local binder
// depth.  `mask` selects which bag positions this subtree must consume.
struct Subst {
    bool bound_mode;
    int target;               // de Bruijn index at depth 0 (bound mode)
    std::string name;         // free-variable target (name mode)
    std::vector<ResourcePtr> elems;
    std::unordered_map<const ResourceTerm*, unsigned> deg;  // name mode only

    unsigned degree_of(const ResourcePtr& t) {
        auto it = deg.find(t.get());
        if (it != deg.end()) return it->second;
        unsigned d = 0;
        switch (t->kind()) {
            case ResourceTerm::Kind::BoundVar: d = 0; break;
            case ResourceTerm::Kind::FreeVar: d = t->name() == name ? 1 : 0; break;
            case ResourceTerm::Kind::Abs:
            case ResourceTerm::Kind::LeftTag:
            case ResourceTerm::Kind::RightTag: d = degree_of(t->body()); break;
            case ResourceTerm::Kind::LinApp:
                d = degree_of(t->head()) + degree_of(t->args());
                break;
            case ResourceTerm::Kind::Bag:
                for (const auto& e : t->elems()) d += degree_of(e);
                break;
        }
        deg.emplace(t.get(), d);
        return d;
    }

    Combination run(const ResourcePtr& t, std::uint32_t mask, unsigned depth) {
        if (!bound_mode && degree_of(t) != popcount(mask)) return {};
        switch (t->kind()) {
            case ResourceTerm::Kind::BoundVar: {
                int idx = t->index();
                if (bound_mode) {
                    int tgt = target + static_cast<int>(depth);
                    if (idx == tgt) {
                        if (popcount(mask) != 1) return {};
                        int pos = std::countr_zero(mask);
                        return Combination::singleton(shift(elems[pos], static_cast<int>(depth)));
                    }
                    if (mask != 0) return {};
                    if (idx > tgt) return Combination::singleton(ResourceTerm::bound(idx - 1));
                    return Combination::singleton(t);
                }
                return mask == 0 ? Combination::singleton(t) : Combination{};
            }
            case ResourceTerm::Kind::FreeVar: {
                if (!bound_mode && t->name() == name) {
                    if (popcount(mask) != 1) return {};
                    int pos = std::countr_zero(mask);
                    return Combination::singleton(shift(elems[pos], static_cast<int>(depth)));
                }
                return mask == 0 ? Combination::singleton(t) : Combination{};
            }
            case ResourceTerm::Kind::Abs: {
                Combination body = run(t->body(), mask, depth + 1);
                Combination out;
                for (const auto& [b, c] : body) out.add(ResourceTerm::abs(b), c);
                return out;
            }
            case ResourceTerm::Kind::LeftTag: {
                Combination body = run(t->body(), mask, depth);
                Combination out;
                for (const auto& [b, c] : body) out.add(ResourceTerm::left_tag(t->prob(), b), c);
                return out;
            }
            case ResourceTerm::Kind::RightTag: {
                Combination body = run(t->body(), mask, depth);
                Combination out;
                for (const auto& [b, c] : body) out.add(ResourceTerm::right_tag(t->prob(), b), c);
                return out;
            }
            case ResourceTerm::Kind::LinApp: {
                Combination out;
                // Sum over splittings of the selected positions between the
                // head and the bag.
                std::uint32_t sub = mask;
                while (true) {
                    Combination hs = run(t->head(), sub, depth);
                    if (!hs.empty()) {
                        Combination bs = run(t->args(), mask & ~sub, depth);
                        for (const auto& [h, hc] : hs)
                            for (const auto& [b, bc] : bs)
                                out.add(ResourceTerm::lin_app(h, b), hc * bc);
                    }
                    if (sub == 0) break;
                    sub = (sub - 1) & mask;
                }
                return out;
            }
            case ResourceTerm::Kind::Bag:
                return run_bag(t->elems(), 0, mask, depth);
        }
        return {};
    }

    // Partition the selected positions across the bag elements, one element
    // at a time.
    Combination run_bag(const std::vector<ResourcePtr>& es, size_t i, std::uint32_t mask,
                        unsigned depth) {
        if (i == es.size()) {
            if (mask != 0) return {};
            return Combination::singleton(ResourceTerm::bag({}));
        }
        Combination out;
        std::uint32_t sub = mask;
        while (true) {
            Combination first = run(es[i], sub, depth);
            if (!first.empty()) {
                Combination rest = run_bag(es, i + 1, mask & ~sub, depth);
                for (const auto& [f, fc] : first)
                    for (const auto& [r, rc] : rest) {
                        std::vector<ResourcePtr> combined = r->elems();
                        combined.push_back(f);
                        out.add(ResourceTerm::bag(std::move(combined)), fc * rc);
                    }
            }
            if (sub == 0) break;
            sub = (sub - 1) & mask;
        }
        return out;
    }
};

Combination subst_by_name(const ResourcePtr& t, const ResourcePtr& bag, const std::string& name) {
    Subst s;
    s.bound_mode = false;
    s.name = name;
    s.elems = bag->elems();
    if (s.elems.size() > 20) throw std::invalid_argument("substitution bag too large");
    unsigned n = static_cast<unsigned>(s.elems.size());
    if (s.degree_of(t) != n) return {};
    std::uint32_t full = n == 0 ? 0 : ((n == 32 ? 0u : (1u << n)) - 1u);
    return s.run(t, full, 0);
}

unsigned count_bound(const ResourcePtr& t, int target) {
    switch (t->kind()) {
        case ResourceTerm::Kind::BoundVar: return t->index() == target ? 1u : 0u;
        case ResourceTerm::Kind::FreeVar: return 0;
        case ResourceTerm::Kind::Abs: return count_bound(t->body(), target + 1);
        case ResourceTerm::Kind::LeftTag:
        case ResourceTerm::Kind::RightTag: return count_bound(t->body(), target);
        case ResourceTerm::Kind::LinApp:
            return count_bound(t->head(), target) + count_bound(t->args(), target);
        case ResourceTerm::Kind::Bag: {
            unsigned d = 0;
            for (const auto& e : t->elems()) d += count_bound(e, target);
            return d;
        }
    }
    return 0;
}

// Substitute the bag for de Bruijn index 0 of `body` (the beta step for
// LinApp(Abs(body), bag)); outer indices of body are decremented.
Combination subst_index0(const ResourcePtr& body, const ResourcePtr& bag) {
    Subst s;
    s.bound_mode = true;
    s.target = 0;
    s.elems = bag->elems();
    if (s.elems.size() > 20) throw std::invalid_argument("substitution bag too large");
    unsigned n = static_cast<unsigned>(s.elems.size());
    if (count_bound(body, 0) != n) return {};
    std::uint32_t full = n == 0 ? 0 : ((1u << n) - 1u);
    return s.run(body, full, 0);
}

// ---- coherence ----

struct CoherenceMemo {
    std::map<std::pair<const ResourceTerm*, const ResourceTerm*>, bool> memo;

    bool coh(const ResourcePtr& a, const ResourcePtr& b) {
        const ResourceTerm* pa = a.get();
        const ResourceTerm* pb = b.get();
        if (pa > pb) std::swap(pa, pb);
        auto key = std::make_pair(pa, pb);
        auto it = memo.find(key);
        if (it != memo.end()) return it->second;
        memo.emplace(key, true);  // provisional; structural recursion cannot cycle
        bool r = compute(a, b);
        memo[key] = r;
        return r;
    }

    bool compute(const ResourcePtr& a, const ResourcePtr& b) {
        using K = ResourceTerm::Kind;
        K ka = a->kind(), kb = b->kind();
        if (ka == kb) {
            switch (ka) {
                case K::BoundVar: return a->index() == b->index();
                case K::FreeVar: return a->name() == b->name();
                case K::Abs: return coh(a->body(), b->body());
                case K::LinApp:
                    return coh(a->head(), b->head()) && coh(a->args(), b->args());
                case K::LeftTag:
                case K::RightTag:
                    return a->prob() == b->prob() && coh(a->body(), b->body());
                case K::Bag: {
                    std::vector<ResourcePtr> all = a->elems();
                    const auto& be = b->elems();
                    all.insert(all.end(), be.begin(), be.end());
                    for (size_t i = 0; i < all.size(); ++i)
                        for (size_t j = i; j < all.size(); ++j)
                            if (!coh(all[i], all[j])) return false;
                    return true;
                }
            }
            return false;
        }
        // Mixed tags cohere when the probabilities agree and each body is
        // self-coherent.
        if ((ka == K::LeftTag && kb == K::RightTag) || (ka == K::RightTag && kb == K::LeftTag))
            return a->prob() == b->prob() && coh(a->body(), a->body()) && coh(b->body(), b->body());
        return false;
    }
};

}  // namespace

std::vector<unsigned> ssize(const Combination& c) {
    std::vector<unsigned> out;
    out.reserve(c.support_size());
    for (const auto& [t, q] : c) out.push_back(t->size());
    std::sort(out.begin(), out.end());
    return out;
}

bool size_order_less(const std::vector<unsigned>& a, const std::vector<unsigned>& b) {
    // Compare multiplicities from the largest size downward.
    std::map<unsigned, long long> diff;
    for (unsigned x : a) ++diff[x];
    for (unsigned x : b) --diff[x];
    for (auto it = diff.rbegin(); it != diff.rend(); ++it) {
        if (it->second < 0) return true;
        if (it->second > 0) return false;
    }
    return false;
}

unsigned degree(const ResourcePtr& t, const std::string& name) {
    switch (t->kind()) {
        case ResourceTerm::Kind::BoundVar: return 0;
        case ResourceTerm::Kind::FreeVar: return t->name() == name ? 1u : 0u;
        case ResourceTerm::Kind::Abs:
        case ResourceTerm::Kind::LeftTag:
        case ResourceTerm::Kind::RightTag: return degree(t->body(), name);
        case ResourceTerm::Kind::LinApp:
            return degree(t->head(), name) + degree(t->args(), name);
        case ResourceTerm::Kind::Bag: {
            unsigned d = 0;
            for (const auto& e : t->elems()) d += degree(e, name);
            return d;
        }
    }
    return 0;
}

Combination substitute(const ResourcePtr& t, const ResourcePtr& bag, const std::string& name) {
    if (bag->kind() != ResourceTerm::Kind::Bag)
        throw std::invalid_argument("substitute: second argument must be a bag");
    return subst_by_name(t, bag, name);
}

Combination substitute_oracle(const ResourcePtr& t, const ResourcePtr& bag,
                              const std::string& name) {
    if (bag->kind() != ResourceTerm::Kind::Bag)
        throw std::invalid_argument("substitute: second argument must be a bag");
    const std::vector<ResourcePtr>& elems = bag->elems();
    unsigned n = static_cast<unsigned>(elems.size());
    if (degree(t, name) != n) return {};

    // Replace the k-th occurrence (in traversal order) by the perm[k]-th bag
    // element, all occurrences at once.
    std::vector<int> perm(n);
    for (unsigned i = 0; i < n; ++i) perm[i] = static_cast<int>(i);

    struct Replacer {
        const std::string& name;
        const std::vector<ResourcePtr>& elems;
        const std::vector<int>& perm;
        unsigned next = 0;

        ResourcePtr go(const ResourcePtr& t, unsigned depth) {
            switch (t->kind()) {
                case ResourceTerm::Kind::BoundVar: return t;
                case ResourceTerm::Kind::FreeVar:
                    if (t->name() == name)
                        return shift(elems[perm[next++]], static_cast<int>(depth));
                    return t;
                case ResourceTerm::Kind::Abs:
                    return ResourceTerm::abs(go(t->body(), depth + 1));
                case ResourceTerm::Kind::LeftTag:
                    return ResourceTerm::left_tag(t->prob(), go(t->body(), depth));
                case ResourceTerm::Kind::RightTag:
                    return ResourceTerm::right_tag(t->prob(), go(t->body(), depth));
                case ResourceTerm::Kind::LinApp: {
                    ResourcePtr f = go(t->head(), depth);
                    return ResourceTerm::lin_app(f, go(t->args(), depth));
                }
                case ResourceTerm::Kind::Bag: {
                    std::vector<ResourcePtr> es;
                    es.reserve(t->elems().size());
                    for (const auto& e : t->elems()) es.push_back(go(e, depth));
                    return ResourceTerm::bag(std::move(es));
                }
            }
            return t;
        }
    };

    Combination out;
    std::sort(perm.begin(), perm.end());
    do {
        Replacer r{name, elems, perm};
        out.add(r.go(t, 0), 1);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return out;
}

std::vector<Combination> one_step_reducts(const ResourcePtr& t) {
    // Positions are enumerated directly to keep each reduct independent.
    using K = ResourceTerm::Kind;
    std::vector<Combination> out;
    switch (t->kind()) {
        case K::BoundVar:
        case K::FreeVar: return out;
        case K::Abs: {
            const ResourcePtr& body = t->body();
            if (body->kind() == K::LeftTag)
                out.push_back(Combination::singleton(
                    ResourceTerm::left_tag(body->prob(), ResourceTerm::abs(body->body()))));
            if (body->kind() == K::RightTag)
                out.push_back(Combination::singleton(
                    ResourceTerm::right_tag(body->prob(), ResourceTerm::abs(body->body()))));
            for (const Combination& c : one_step_reducts(body)) {
                Combination r;
                for (const auto& [u, q] : c) r.add(ResourceTerm::abs(u), q);
                out.push_back(std::move(r));
            }
            return out;
        }
        case K::LeftTag:
            for (const Combination& c : one_step_reducts(t->body())) {
                Combination r;
                for (const auto& [u, q] : c) r.add(ResourceTerm::left_tag(t->prob(), u), q);
                out.push_back(std::move(r));
            }
            return out;
        case K::RightTag:
            for (const Combination& c : one_step_reducts(t->body())) {
                Combination r;
                for (const auto& [u, q] : c) r.add(ResourceTerm::right_tag(t->prob(), u), q);
                out.push_back(std::move(r));
            }
            return out;
        case K::LinApp: {
            const ResourcePtr& f = t->head();
            const ResourcePtr& a = t->args();
            if (f->kind() == K::Abs) out.push_back(subst_index0(f->body(), a));
            if (f->kind() == K::LeftTag)
                out.push_back(Combination::singleton(
                    ResourceTerm::left_tag(f->prob(), ResourceTerm::lin_app(f->body(), a))));
            if (f->kind() == K::RightTag)
                out.push_back(Combination::singleton(
                    ResourceTerm::right_tag(f->prob(), ResourceTerm::lin_app(f->body(), a))));
            for (const Combination& c : one_step_reducts(f)) {
                Combination r;
                for (const auto& [u, q] : c) r.add(ResourceTerm::lin_app(u, a), q);
                out.push_back(std::move(r));
            }
            for (const Combination& c : one_step_reducts(a)) {
                Combination r;
                for (const auto& [u, q] : c) r.add(ResourceTerm::lin_app(f, u), q);
                out.push_back(std::move(r));
            }
            return out;
        }
        case K::Bag: {
            const auto& es = t->elems();
            for (size_t i = 0; i < es.size(); ++i) {
                for (const Combination& c : one_step_reducts(es[i])) {
                    Combination r;
                    for (const auto& [u, q] : c) {
                        std::vector<ResourcePtr> nes = es;
                        nes[i] = u;
                        r.add(ResourceTerm::bag(std::move(nes)), q);
                    }
                    out.push_back(std::move(r));
                }
            }
            return out;
        }
    }
    return out;
}

std::set<Combination> reduce_one(const Combination& c) {
    std::set<Combination> out;
    for (const auto& [sigma, coeff] : c) {
        for (const Combination& target : one_step_reducts(sigma)) {
            Combination next = c;
            next.add(sigma, -coeff);
            next.add(target, coeff);
            out.insert(std::move(next));
        }
    }
    return out;
}

Combination left_reduct(const ResourcePtr& t) {
    using K = ResourceTerm::Kind;
    if (t->is_normal()) return Combination::singleton(t);
    switch (t->kind()) {
        case K::LeftTag: {
            Combination body = left_reduct(t->body());
            Combination out;
            for (const auto& [u, q] : body) out.add(ResourceTerm::left_tag(t->prob(), u), q);
            return out;
        }
        case K::RightTag: {
            Combination body = left_reduct(t->body());
            Combination out;
            for (const auto& [u, q] : body) out.add(ResourceTerm::right_tag(t->prob(), u), q);
            return out;
        }
        case K::Bag: {
            Combination out = Combination::singleton(ResourceTerm::bag({}));
            for (const auto& e : t->elems()) {
                Combination le = left_reduct(e);
                Combination next;
                for (const auto& [b, bc] : out)
                    for (const auto& [u, uc] : le) {
                        std::vector<ResourcePtr> es = b->elems();
                        es.push_back(u);
                        next.add(ResourceTerm::bag(std::move(es)), bc * uc);
                    }
                out = std::move(next);
            }
            return out;
        }
        default: break;
    }

    Spine s = decompose(t);
    switch (s.head->kind()) {
        case K::BoundVar:
        case K::FreeVar: {
            // Head normal form: reduce every bag argument.
            Combination out = Combination::singleton(s.head);
            for (const auto& b : s.bags) {
                Combination lb = left_reduct(b);
                Combination next;
                for (const auto& [h, hc] : out)
                    for (const auto& [nb, bc] : lb)
                        next.add(ResourceTerm::lin_app(h, nb), hc * bc);
                out = std::move(next);
            }
            Combination wrapped;
            for (const auto& [u, q] : out) wrapped.add(wrap_binders(u, s.binders), q);
            return wrapped;
        }
        case K::Abs: {
            // Head beta step, consuming the first bag only.
            Combination sub = subst_index0(s.head->body(), s.bags[0]);
            Combination out;
            for (const auto& [u, q] : sub)
                out.add(wrap_binders(apply_bags(u, s.bags, 1), s.binders), q);
            return out;
        }
        case K::LeftTag: {
            ResourcePtr inner = wrap_binders(apply_bags(s.head->body(), s.bags), s.binders);
            return Combination::singleton(ResourceTerm::left_tag(s.head->prob(), inner));
        }
        case K::RightTag: {
            ResourcePtr inner = wrap_binders(apply_bags(s.head->body(), s.bags), s.binders);
            return Combination::singleton(ResourceTerm::right_tag(s.head->prob(), inner));
        }
        case K::LinApp:
        case K::Bag: break;  // unreachable after decompose
    }
    throw std::logic_error("left_reduct: malformed spine");
}

Combination left_reduct(const Combination& c) {
    Combination out;
    for (const auto& [t, q] : c) out.add(left_reduct(t), q);
    return out;
}

bool is_normal(const Combination& c) {
    for (const auto& [t, q] : c)
        if (!t->is_normal()) return false;
    return true;
}

Combination normalize(const Combination& c) {
    Combination s = c;
    while (!is_normal(s)) s = left_reduct(s);
    return s;
}

Combination normalize(const ResourcePtr& t) { return normalize(Combination::singleton(t)); }

bool coherent(const ResourcePtr& a, const ResourcePtr& b) {
    CoherenceMemo m;
    return m.coh(a, b);
}

bool self_coherent(const ResourcePtr& t) { return coherent(t, t); }

bool is_uniform(const Combination& c) {
    std::vector<ResourcePtr> supp;
    supp.reserve(c.support_size());
    for (const auto& [t, q] : c) supp.push_back(t);
    CoherenceMemo m;
    for (size_t i = 0; i < supp.size(); ++i)
        for (size_t j = i; j < supp.size(); ++j)
            if (!m.coh(supp[i], supp[j])) return false;
    return true;
}

Integer multinomial(const ResourcePtr& t) {
    switch (t->kind()) {
        case ResourceTerm::Kind::BoundVar:
        case ResourceTerm::Kind::FreeVar: return 1;
        case ResourceTerm::Kind::Abs:
        case ResourceTerm::Kind::LeftTag:
        case ResourceTerm::Kind::RightTag: return multinomial(t->body());
        case ResourceTerm::Kind::LinApp:
            return multinomial(t->head()) * multinomial(t->args());
        case ResourceTerm::Kind::Bag: {
            Integer out = 1;
            const auto& es = t->elems();
            size_t i = 0;
            while (i < es.size()) {
                size_t j = i;
                while (j < es.size() && ResourceTerm::compare(*es[i], *es[j]) == 0) ++j;
                unsigned count = static_cast<unsigned>(j - i);
                out *= factorial(count);
                Integer m = multinomial(es[i]);
                for (unsigned k = 0; k < count; ++k) out *= m;
                i = j;
            }
            return out;
        }
    }
    return 1;
}

bool is_regular(const Combination& c) {
    if (!is_uniform(c)) return false;
    for (const auto& [t, q] : c)
        if (q != Rational(1) / Rational(multinomial(t))) return false;
    return true;
}

Combination exponential(const Combination& c, unsigned max_copies, unsigned max_size,
                        SizeMeasure measure) {
    auto msize = [&](const ResourcePtr& t) { return measured_size(*t, measure); };
    Combination out = Combination::singleton(ResourceTerm::bag({}));
    // layer holds Σ over length-n sequences; dividing by n! turns sequence
    // counts into the multiset coefficients of !S.
    Combination layer = Combination::singleton(ResourceTerm::bag({}));
    Integer nfact = 1;
    for (unsigned n = 1; n <= max_copies; ++n) {
        Combination next;
        for (const auto& [b, bc] : layer) {
            unsigned bsize = msize(b);
            for (const auto& [u, uc] : c) {
                if (bsize + msize(u) > max_size) continue;
                std::vector<ResourcePtr> es = b->elems();
                es.push_back(u);
                next.add(ResourceTerm::bag(std::move(es)), bc * uc);
            }
        }
        if (next.empty()) break;
        layer = std::move(next);
        nfact *= n;
        out.add(layer, Rational(1) / Rational(nfact));
    }
    return out;
}

Rational exponential_coeff_at(const Combination& c, const ResourcePtr& bag) {
    if (bag->kind() != ResourceTerm::Kind::Bag)
        throw std::invalid_argument("exponential_coeff_at: argument must be a bag");
    const auto& es = bag->elems();
    Rational out = 1;
    size_t i = 0;
    while (i < es.size()) {
        size_t j = i;
        while (j < es.size() && ResourceTerm::compare(*es[i], *es[j]) == 0) ++j;
        unsigned count = static_cast<unsigned>(j - i);
        Rational coeff = c.coeff(es[i]);
        if (coeff == 0) return 0;
        for (unsigned k = 0; k < count; ++k) out *= coeff;
        out /= Rational(factorial(count));
        i = j;
    }
    return out;
}

}  // namespace plrc::resource
