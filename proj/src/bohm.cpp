#include "plrc/bohm.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "plrc/parser.hpp"
#include "plrc/resource_calculus.hpp"

namespace plrc::bohm {

using operational::HeadNormalForm;
using resource::ResourceTerm;
using syntax::Term;

// ---- approximants ----

int ValueTree::compare(const ValueTree& a, const ValueTree& b) {
    if (a.binders != b.binders) return a.binders < b.binders ? -1 : 1;
    if (a.head_is_bound != b.head_is_bound) return a.head_is_bound ? -1 : 1;
    if (a.head_is_bound) {
        if (a.head_index != b.head_index) return a.head_index < b.head_index ? -1 : 1;
    } else if (int c = a.head_name.compare(b.head_name); c != 0) {
        return c < 0 ? -1 : 1;
    }
    if (a.children.size() != b.children.size())
        return a.children.size() < b.children.size() ? -1 : 1;
    for (size_t i = 0; i < a.children.size(); ++i)
        if (int c = bohm::compare(a.children[i], b.children[i]); c != 0) return c;
    return 0;
}

Rational BohmApprox::mass() const {
    Rational out = 0;
    for (const auto& [t, p] : dist) out += p;
    return out;
}

int compare(const BohmApprox& a, const BohmApprox& b) {
    if (a.dist.size() != b.dist.size()) return a.dist.size() < b.dist.size() ? -1 : 1;
    for (size_t i = 0; i < a.dist.size(); ++i) {
        if (int c = ValueTree::compare(*a.dist[i].first, *b.dist[i].first); c != 0) return c;
        if (a.dist[i].second != b.dist[i].second)
            return a.dist[i].second < b.dist[i].second ? -1 : 1;
    }
    if (a.residual != b.residual) return a.residual < b.residual ? -1 : 1;
    return 0;
}

bool operator==(const BohmApprox& a, const BohmApprox& b) { return compare(a, b) == 0; }

namespace {

bool tree_has_residual(const ValueTree& t);

bool approx_has_residual(const BohmApprox& a) {
    if (a.residual != 0) return true;
    for (const auto& [t, p] : a.dist)
        if (tree_has_residual(*t)) return true;
    return false;
}

bool tree_has_residual(const ValueTree& t) {
    for (const auto& c : t.children)
        if (approx_has_residual(c)) return true;
    return false;
}

}  // namespace

BohmApprox folded(const BohmApprox& a) {
    BohmApprox out;
    out.residual = a.residual;
    for (const auto& [t, p] : a.dist) {
        if (tree_has_residual(*t))
            out.residual += p;
        else
            out.dist.emplace_back(t, p);
    }
    return out;
}

BohmApprox pt_approximant(const TermPtr& t, unsigned depth, unsigned fuel) {
    BohmApprox out;
    if (depth == 0) return out;  // bottom: nothing claimed, residual 0
    operational::ReductionFrontier f = operational::head_reductions(t, fuel);
    out.residual = f.unresolved_mass();

    struct TreeLess {
        bool operator()(const ValueTreePtr& a, const ValueTreePtr& b) const {
            return ValueTree::compare(*a, *b) < 0;
        }
    };
    std::map<ValueTreePtr, Rational, TreeLess> dist;
    for (const auto& branch : f.resolved) {
        auto tree = std::make_shared<ValueTree>();
        tree->binders = branch.hnf.binders;
        tree->head_is_bound = branch.hnf.head_is_bound;
        tree->head_index = branch.hnf.head_index;
        tree->head_name = branch.hnf.head_name;
        for (const auto& arg : branch.hnf.args)
            tree->children.push_back(pt_approximant(arg, depth - 1, fuel));
        dist[tree] += operational::prob_of(branch.path);
    }
    for (auto& [tree, p] : dist) out.dist.emplace_back(tree, p);
    return out;
}

namespace {

Combination tay_tree(const ValueTree& t, int remaining, const TruncationBudget& b);

Combination tay_approx(const BohmApprox& a, int remaining, const TruncationBudget& b) {
    Combination out;
    if (remaining < 1) return out;
    for (const auto& [tree, p] : a.dist) out.add(tay_tree(*tree, remaining, b), p);
    return out;
}

Combination tay_tree(const ValueTree& t, int remaining, const TruncationBudget& b) {
    ResourcePtr head =
        t.head_is_bound ? ResourceTerm::bound(t.head_index) : ResourceTerm::free(t.head_name);
    unsigned m = static_cast<unsigned>(t.children.size());
    int skel = static_cast<int>(t.binders + 1 + m);
    Combination out;
    if (skel > remaining) return out;
    int rem_args = remaining - skel;

    std::vector<Combination> bag_choices;
    bag_choices.reserve(m);
    for (const auto& child : t.children)
        bag_choices.push_back(resource::exponential(tay_approx(child, rem_args, b),
                                                    b.max_bag_copies,
                                                    static_cast<unsigned>(std::max(rem_args, 0))));

    std::vector<ResourcePtr> bags(m);
    auto cross = [&](auto&& self, size_t i, const Rational& coeff) -> void {
        if (i == m) {
            ResourcePtr s = head;
            for (const auto& bag : bags) s = ResourceTerm::lin_app(s, bag);
            for (unsigned k = 0; k < t.binders; ++k) s = ResourceTerm::abs(s);
            if (static_cast<int>(s->size()) <= remaining) out.add(s, coeff);
            return;
        }
        for (const auto& [bag, bc] : bag_choices[i]) {
            bags[i] = bag;
            self(self, i + 1, coeff * bc);
        }
    };
    cross(cross, 0, 1);
    return out;
}

}  // namespace

Combination taylor_of_tree(const BohmApprox& a, const TruncationBudget& b) {
    return tay_approx(a, static_cast<int>(b.max_term_size), b);
}

unsigned nesting_depth(const ResourcePtr& s) {
    ResourcePtr t = s;
    while (t->kind() == ResourceTerm::Kind::Abs) t = t->body();
    std::vector<ResourcePtr> bags;
    while (t->kind() == ResourceTerm::Kind::LinApp) {
        bags.push_back(t->args());
        t = t->head();
    }
    if (t->kind() != ResourceTerm::Kind::BoundVar && t->kind() != ResourceTerm::Kind::FreeVar)
        throw std::invalid_argument("nesting_depth: not a normal choice-free term");
    unsigned deepest = 0;
    for (const auto& bag : bags)
        for (const auto& e : bag->elems()) deepest = std::max(deepest, nesting_depth(e));
    return 1 + deepest;
}

// ---- tests ----

BttPtr BohmTest::omega() {
    return BttPtr(new BohmTest(Kind::Omega));
}

BttPtr BohmTest::conj(BttPtr left, BttPtr right) {
    auto t = new BohmTest(Kind::Conj);
    t->a_ = std::move(left);
    t->b_ = std::move(right);
    return BttPtr(t);
}

BttPtr BohmTest::ev(BttPtr inner) {
    auto t = new BohmTest(Kind::Ev);
    t->a_ = std::move(inner);
    return BttPtr(t);
}

BttPtr BohmTest::head_form(unsigned binders, bool head_is_bound, int head_index,
                           std::string head_name, std::vector<BttPtr> children) {
    auto t = new BohmTest(Kind::HeadForm);
    t->binders_ = binders;
    t->head_is_bound_ = head_is_bound;
    t->head_index_ = head_index;
    t->head_name_ = std::move(head_name);
    t->children_ = std::move(children);
    return BttPtr(t);
}

int BohmTest::compare(const BohmTest& a, const BohmTest& b) {
    if (a.kind_ != b.kind_) return a.kind_ < b.kind_ ? -1 : 1;
    switch (a.kind_) {
        case Kind::Omega: return 0;
        case Kind::Conj:
            if (int c = compare(*a.a_, *b.a_); c != 0) return c;
            return compare(*a.b_, *b.b_);
        case Kind::Ev: return compare(*a.a_, *b.a_);
        case Kind::HeadForm: {
            if (a.binders_ != b.binders_) return a.binders_ < b.binders_ ? -1 : 1;
            if (a.head_is_bound_ != b.head_is_bound_) return a.head_is_bound_ ? -1 : 1;
            if (a.head_is_bound_) {
                if (a.head_index_ != b.head_index_) return a.head_index_ < b.head_index_ ? -1 : 1;
            } else if (int c = a.head_name_.compare(b.head_name_); c != 0) {
                return c < 0 ? -1 : 1;
            }
            if (a.children_.size() != b.children_.size())
                return a.children_.size() < b.children_.size() ? -1 : 1;
            for (size_t i = 0; i < a.children_.size(); ++i)
                if (int c = compare(*a.children_[i], *b.children_[i]); c != 0) return c;
            return 0;
        }
    }
    return 0;
}

bool validate_btt(const BttPtr& t) {
    switch (t->kind()) {
        case BohmTest::Kind::Omega: return true;
        case BohmTest::Kind::Conj: return validate_btt(t->left()) && validate_btt(t->right());
        case BohmTest::Kind::Ev: return validate_bht(t->inner());
        case BohmTest::Kind::HeadForm: return false;
    }
    return false;
}

bool validate_bht(const BttPtr& t) {
    switch (t->kind()) {
        case BohmTest::Kind::Omega: return true;
        case BohmTest::Kind::Conj: return validate_bht(t->left()) && validate_bht(t->right());
        case BohmTest::Kind::Ev: return false;
        case BohmTest::Kind::HeadForm:
            for (const auto& c : t->children())
                if (!validate_btt(c)) return false;
            return true;
    }
    return false;
}

namespace {

bool rbtt_valid(const BttPtr& t);

bool rbht_valid(const BttPtr& t) {
    if (t->kind() != BohmTest::Kind::HeadForm) return false;
    for (const auto& c : t->children())
        if (!rbtt_valid(c)) return false;
    return true;
}

bool rbtt_valid(const BttPtr& t) {
    switch (t->kind()) {
        case BohmTest::Kind::Omega: return true;
        case BohmTest::Kind::Conj: return rbtt_valid(t->left()) && rbtt_valid(t->right());
        case BohmTest::Kind::Ev: return rbht_valid(t->inner());
        case BohmTest::Kind::HeadForm: return false;
    }
    return false;
}

}  // namespace

bool validate_rbtt(const BttPtr& t) { return rbtt_valid(t); }

// ---- parsing ----

namespace {

struct TestParser {
    const std::string& text;
    size_t pos = 0;
    std::vector<std::string> env = {};  // binder stack, outermost first

    void skip() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }

    [[noreturn]] void fail(const std::string& msg) { throw ParseError(pos, msg); }

    bool eat(char c) {
        skip();
        if (pos < text.size() && text[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!eat(c)) fail(std::string("expected '") + c + "'");
    }

    static bool ident_start(char c) {
        return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
    }
    static bool ident_char(char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
    }

    std::string ident() {
        skip();
        if (pos >= text.size() || !ident_start(text[pos])) fail("expected identifier");
        size_t start = pos;
        while (pos < text.size() && ident_char(text[pos])) ++pos;
        return text.substr(start, pos - start);
    }

    bool peek_ident(const std::string& kw) {
        skip();
        size_t p = pos;
        if (p >= text.size() || !ident_start(text[p])) return false;
        size_t start = p;
        while (p < text.size() && ident_char(text[p])) ++p;
        return text.compare(start, p - start, kw) == 0;
    }

    BttPtr parse_test() {
        BttPtr out = parse_atom();
        while (true) {
            skip();
            if (pos < text.size() && text[pos] == '&') {
                ++pos;
                out = BohmTest::conj(out, parse_atom());
            } else {
                return out;
            }
        }
    }

    BttPtr parse_atom() {
        skip();
        if (pos >= text.size()) fail("unexpected end of test");
        if (peek_ident("w")) {
            ident();
            return BohmTest::omega();
        }
        if (peek_ident("ev")) {
            ident();
            expect('(');
            BttPtr inner = parse_test();
            expect(')');
            return BohmTest::ev(inner);
        }
        if (text[pos] == '(') return parse_head_form();
        fail("expected 'w', 'ev(..)' or a head form");
    }

    BttPtr parse_head_form() {
        expect('(');
        std::vector<std::string> binders;
        skip();
        if (pos < text.size() && text[pos] == '\\') {
            ++pos;
            while (true) {
                binders.push_back(ident());
                skip();
                if (pos < text.size() && text[pos] == '.') {
                    ++pos;
                    break;
                }
            }
        }
        std::string head = ident();
        expect(')');

        // Resolve the head: own binders innermost-first, then the enclosing
        // stack; otherwise a free name.
        bool bound = false;
        int index = 0;
        unsigned n = static_cast<unsigned>(binders.size());
        for (size_t i = binders.size(); i-- > 0;) {
            if (binders[i] == head) {
                bound = true;
                index = static_cast<int>(n - 1 - i);
                break;
            }
        }
        if (!bound) {
            for (size_t i = env.size(); i-- > 0;) {
                if (env[i] == head) {
                    bound = true;
                    index = static_cast<int>(n + (env.size() - 1 - i));
                    break;
                }
            }
        }

        expect('(');
        std::vector<BttPtr> children;
        skip();
        if (!(pos < text.size() && text[pos] == ')')) {
            size_t saved = env.size();
            env.insert(env.end(), binders.begin(), binders.end());
            children.push_back(parse_test());
            while (eat(',')) children.push_back(parse_test());
            env.resize(saved);
        }
        expect(')');
        return BohmTest::head_form(n, bound, index, bound ? std::string() : head,
                                   std::move(children));
    }
};

}  // namespace

BttPtr parse_btt(const std::string& text) {
    TestParser p{text};
    BttPtr out = p.parse_test();
    p.skip();
    if (p.pos != text.size()) throw ParseError(p.pos, "trailing input after test");
    if (!validate_btt(out)) throw ParseError(0, "head form used at tree level (wrap it in ev)");
    return out;
}

// ---- printing ----

namespace {

void collect_free_heads(const BttPtr& t, std::set<std::string>& out) {
    switch (t->kind()) {
        case BohmTest::Kind::Omega: return;
        case BohmTest::Kind::Conj:
            collect_free_heads(t->left(), out);
            collect_free_heads(t->right(), out);
            return;
        case BohmTest::Kind::Ev: collect_free_heads(t->inner(), out); return;
        case BohmTest::Kind::HeadForm:
            if (!t->head_is_bound()) out.insert(t->head_name());
            for (const auto& c : t->children()) collect_free_heads(c, out);
            return;
    }
}

struct TestPrinter {
    std::set<std::string> avoid;
    std::vector<std::string> env;
    unsigned counter = 0;

    std::string fresh() {
        while (true) {
            std::string name = "x" + std::to_string(++counter);
            if (!avoid.count(name)) return name;
        }
    }

    std::string print(const BttPtr& t) {
        switch (t->kind()) {
            case BohmTest::Kind::Omega: return "w";
            case BohmTest::Kind::Conj: return print(t->left()) + " & " + print(t->right());
            case BohmTest::Kind::Ev: return "ev(" + print(t->inner()) + ")";
            case BohmTest::Kind::HeadForm: {
                unsigned n = t->binders();
                std::vector<std::string> binders;
                for (unsigned i = 0; i < n; ++i) binders.push_back(fresh());
                std::string head;
                if (t->head_is_bound()) {
                    int idx = t->head_index();
                    if (idx < static_cast<int>(n)) {
                        head = binders[n - 1 - static_cast<unsigned>(idx)];
                    } else {
                        size_t outer = static_cast<size_t>(idx) - n;
                        head = outer < env.size() ? env[env.size() - 1 - outer]
                                                  : "^" + std::to_string(idx);
                    }
                } else {
                    head = t->head_name();
                }
                std::string out = "(";
                if (n > 0) {
                    out += "\\";
                    for (unsigned i = 0; i < n; ++i) out += (i ? " " : "") + binders[i];
                    out += ". ";
                }
                out += head + ")(";
                size_t saved = env.size();
                env.insert(env.end(), binders.begin(), binders.end());
                for (size_t i = 0; i < t->children().size(); ++i)
                    out += (i ? ", " : "") + print(t->children()[i]);
                env.resize(saved);
                out += ")";
                return out;
            }
        }
        return "?";
    }
};

}  // namespace

std::string to_string(const BttPtr& t) {
    TestPrinter p;
    collect_free_heads(t, p.avoid);
    return p.print(t);
}

// ---- approximant printing ----

namespace {

struct ApproxPrinter {
    std::vector<std::string> env;
    unsigned counter = 0;

    std::string fresh() { return "x" + std::to_string(++counter); }

    std::string print_tree(const ValueTree& t) {
        unsigned n = t.binders;
        std::vector<std::string> binders;
        for (unsigned i = 0; i < n; ++i) binders.push_back(fresh());
        std::string head;
        if (t.head_is_bound) {
            int idx = t.head_index;
            if (idx < static_cast<int>(n)) {
                head = binders[n - 1 - static_cast<unsigned>(idx)];
            } else {
                size_t outer = static_cast<size_t>(idx) - n;
                head = outer < env.size() ? env[env.size() - 1 - outer]
                                          : "^" + std::to_string(idx);
            }
        } else {
            head = t.head_name;
        }
        std::string out;
        if (n > 0) {
            out += "\\";
            for (unsigned i = 0; i < n; ++i) out += (i ? " " : "") + binders[i];
            out += ". ";
        }
        out += head;
        size_t saved = env.size();
        env.insert(env.end(), binders.begin(), binders.end());
        for (const auto& c : t.children) out += " " + print_approx(c);
        env.resize(saved);
        return out;
    }

    std::string print_approx(const BohmApprox& a) {
        std::string out = "{";
        bool first = true;
        for (const auto& [tree, p] : a.dist) {
            if (!first) out += ", ";
            first = false;
            out += plrc::to_string(p) + ": " + print_tree(*tree);
        }
        if (!first) out += "; ";
        out += "residual " + plrc::to_string(a.residual) + "}";
        return out;
    }
};

}  // namespace

std::string to_string(const BohmApprox& a) {
    ApproxPrinter p;
    return p.print_approx(a);
}

// ---- evaluation ----

Interval eval_btt(const BttPtr& t, const TermPtr& m, unsigned fuel) {
    switch (t->kind()) {
        case BohmTest::Kind::Omega: return {1, 1};
        case BohmTest::Kind::Conj: {
            Interval l = eval_btt(t->left(), m, fuel);
            Interval r = eval_btt(t->right(), m, fuel);
            return {l.lower * r.lower, l.upper * r.upper};
        }
        case BohmTest::Kind::Ev: {
            operational::ReductionFrontier f = operational::head_reductions(m, fuel);
            Rational lower = 0;
            Rational upper = f.unresolved_mass();
            for (const auto& branch : f.resolved) {
                Rational pr = operational::prob_of(branch.path);
                Interval sub = eval_bht(t->inner(), branch.hnf, fuel);
                lower += pr * sub.lower;
                upper += pr * sub.upper;
            }
            return {lower, upper};
        }
        case BohmTest::Kind::HeadForm:
            throw std::invalid_argument("eval_btt: head form at tree level");
    }
    throw std::logic_error("eval_btt: bad kind");
}

Interval eval_bht(const BttPtr& t, const HeadNormalForm& h, unsigned fuel) {
    switch (t->kind()) {
        case BohmTest::Kind::Omega: return {1, 1};
        case BohmTest::Kind::Conj: {
            Interval l = eval_bht(t->left(), h, fuel);
            Interval r = eval_bht(t->right(), h, fuel);
            return {l.lower * r.lower, l.upper * r.upper};
        }
        case BohmTest::Kind::HeadForm: {
            bool match = t->binders() == h.binders &&
                         t->head_is_bound() == h.head_is_bound &&
                         t->children().size() == h.args.size();
            if (match) {
                if (t->head_is_bound())
                    match = t->head_index() == h.head_index;
                else
                    match = t->head_name() == h.head_name;
            }
            if (!match) return {0, 0};
            Interval out{1, 1};
            for (size_t i = 0; i < h.args.size(); ++i) {
                Interval sub = eval_btt(t->children()[i], h.args[i], fuel);
                out.lower *= sub.lower;
                out.upper *= sub.upper;
            }
            return out;
        }
        case BohmTest::Kind::Ev:
            throw std::invalid_argument("eval_bht: ev at hnf level");
    }
    throw std::logic_error("eval_bht: bad kind");
}

// ---- encoding ----

namespace {

void collect_elements(const BttPtr& t, std::vector<ResourcePtr>& out) {
    switch (t->kind()) {
        case BohmTest::Kind::Omega: return;
        case BohmTest::Kind::Conj:
            collect_elements(t->left(), out);
            collect_elements(t->right(), out);
            return;
        case BohmTest::Kind::Ev: out.push_back(rbht_to_term(t->inner())); return;
        case BohmTest::Kind::HeadForm:
            throw std::invalid_argument("rbtt_to_polyterm: head form at tree level");
    }
}

}  // namespace

ResourcePtr rbtt_to_polyterm(const BttPtr& t) {
    std::vector<ResourcePtr> elems;
    collect_elements(t, elems);
    return ResourceTerm::bag(std::move(elems));
}

ResourcePtr rbht_to_term(const BttPtr& t) {
    if (t->kind() != BohmTest::Kind::HeadForm)
        throw std::invalid_argument("rbht_to_term: expected a head form");
    ResourcePtr s = t->head_is_bound() ? ResourceTerm::bound(t->head_index())
                                       : ResourceTerm::free(t->head_name());
    for (const auto& c : t->children()) s = ResourceTerm::lin_app(s, rbtt_to_polyterm(c));
    for (unsigned i = 0; i < t->binders(); ++i) s = ResourceTerm::abs(s);
    return s;
}

BttPtr polyterm_to_rbtt(const ResourcePtr& bag) {
    if (bag->kind() != ResourceTerm::Kind::Bag)
        throw std::invalid_argument("polyterm_to_rbtt: expected a bag");
    BttPtr out;
    for (const auto& e : bag->elems()) {
        BttPtr atom = BohmTest::ev(term_to_rbht(e));
        out = out ? BohmTest::conj(out, atom) : atom;
    }
    return out ? out : BohmTest::omega();
}

BttPtr term_to_rbht(const ResourcePtr& s) {
    if (!s->choice_free() || !s->is_normal())
        throw std::invalid_argument("term_to_rbht: expected a normal choice-free term");
    ResourcePtr t = s;
    unsigned binders = 0;
    while (t->kind() == ResourceTerm::Kind::Abs) {
        ++binders;
        t = t->body();
    }
    std::vector<ResourcePtr> bags;
    while (t->kind() == ResourceTerm::Kind::LinApp) {
        bags.push_back(t->args());
        t = t->head();
    }
    std::reverse(bags.begin(), bags.end());
    std::vector<BttPtr> children;
    children.reserve(bags.size());
    for (const auto& b : bags) children.push_back(polyterm_to_rbtt(b));
    if (t->kind() == ResourceTerm::Kind::BoundVar)
        return BohmTest::head_form(binders, true, t->index(), "", std::move(children));
    if (t->kind() == ResourceTerm::Kind::FreeVar)
        return BohmTest::head_form(binders, false, 0, t->name(), std::move(children));
    throw std::invalid_argument("term_to_rbht: head is not a variable");
}

namespace {

unsigned max_bag_width(const ResourcePtr& t) {
    unsigned w = 0;
    switch (t->kind()) {
        case ResourceTerm::Kind::BoundVar:
        case ResourceTerm::Kind::FreeVar: return 0;
        case ResourceTerm::Kind::Abs:
        case ResourceTerm::Kind::LeftTag:
        case ResourceTerm::Kind::RightTag: return max_bag_width(t->body());
        case ResourceTerm::Kind::LinApp:
            return std::max(max_bag_width(t->head()), max_bag_width(t->args()));
        case ResourceTerm::Kind::Bag:
            w = static_cast<unsigned>(t->elems().size());
            for (const auto& e : t->elems()) w = std::max(w, max_bag_width(e));
            return w;
    }
    return w;
}

}  // namespace

CorrespondenceResult coefficient_test_correspondence(const BttPtr& t, const TermPtr& m,
                                                     unsigned fuel) {
    if (!validate_rbtt(t))
        throw std::invalid_argument("coefficient_test_correspondence: not a restricted test");
    CorrespondenceResult out;
    out.polyterm = rbtt_to_polyterm(t);

    unsigned max_elem = 1;
    for (const auto& e : out.polyterm->elems()) max_elem = std::max(max_elem, e->size());
    TruncationBudget budget;
    budget.max_term_size = max_elem;
    budget.max_bag_copies = std::max(1u, max_bag_width(out.polyterm));

    taylor::TaylorNF nf = taylor::taylor_nf(m, budget, fuel);
    out.coeff_route = resource::exponential_coeff_at(nf.comb, out.polyterm) *
                      Rational(resource::multinomial(out.polyterm));
    out.test_lower = eval_btt(t, m, fuel).lower;
    out.equal = out.test_lower == out.coeff_route;
    return out;
}

// ---- refinement ----

namespace {

struct Refiner {
    const FamilyLimits& limits;

    // Diagonal cross product: tuples ordered by total index weight.
    std::vector<std::vector<BttPtr>> cross(const std::vector<std::vector<BttPtr>>& options) {
        std::vector<std::vector<BttPtr>> out;
        if (options.empty()) {
            out.push_back({});
            return out;
        }
        for (const auto& o : options)
            if (o.empty()) return out;
        size_t max_sum = 0;
        for (const auto& o : options) max_sum += o.size() - 1;
        std::vector<size_t> idx(options.size(), 0);
        for (size_t target = 0; target <= max_sum && out.size() < limits.count; ++target) {
            auto rec = [&](auto&& self, size_t slot, size_t left) -> void {
                if (out.size() >= limits.count) return;
                if (slot == options.size()) {
                    if (left == 0) {
                        std::vector<BttPtr> tuple;
                        tuple.reserve(idx.size());
                        for (size_t i = 0; i < idx.size(); ++i)
                            tuple.push_back(options[i][idx[i]]);
                        out.push_back(std::move(tuple));
                    }
                    return;
                }
                for (size_t i = 0; i <= left && i < options[slot].size(); ++i) {
                    idx[slot] = i;
                    self(self, slot + 1, left - i);
                }
            };
            rec(rec, 0, target);
        }
        return out;
    }

    // All concrete head shapes with omega children, ordered by weight.
    std::vector<BttPtr> shapes() {
        struct Shape {
            unsigned weight;
            BttPtr test;
        };
        std::vector<Shape> all;
        for (unsigned n = 0; n <= limits.max_binders; ++n) {
            std::vector<int> indices;
            for (unsigned i = 0; i < n; ++i) indices.push_back(static_cast<int>(i));
            for (unsigned m = 0; m <= limits.max_arity; ++m) {
                std::vector<BttPtr> children(m, BohmTest::omega());
                unsigned rank = 0;
                for (int i : indices) {
                    all.push_back({n + m + rank,
                                   BohmTest::head_form(n, true, i, "", children)});
                    ++rank;
                }
                for (const auto& name : limits.head_names) {
                    all.push_back({n + m + rank,
                                   BohmTest::head_form(n, false, 0, name, children)});
                    ++rank;
                }
            }
        }
        std::stable_sort(all.begin(), all.end(),
                         [](const Shape& a, const Shape& b) { return a.weight < b.weight; });
        std::vector<BttPtr> out;
        for (const auto& s : all) {
            if (out.size() >= limits.count) break;
            out.push_back(s.test);
        }
        return out;
    }

    // Flattens an hnf-level conjunction; returns false on clashing heads.
    bool flatten(const BttPtr& t, std::vector<BttPtr>& atoms) {
        switch (t->kind()) {
            case BohmTest::Kind::Omega: return true;
            case BohmTest::Kind::Conj:
                return flatten(t->left(), atoms) && flatten(t->right(), atoms);
            case BohmTest::Kind::HeadForm: atoms.push_back(t); return true;
            case BohmTest::Kind::Ev: return false;
        }
        return false;
    }

    std::vector<BttPtr> refine_bht(const BttPtr& t) {
        std::vector<BttPtr> atoms;
        if (!flatten(t, atoms)) return {};
        if (atoms.empty()) return shapes();

        // Merge the head forms: all must share binder count, head and arity.
        const BttPtr& first = atoms[0];
        for (const auto& a : atoms) {
            if (a->binders() != first->binders() ||
                a->head_is_bound() != first->head_is_bound() ||
                a->children().size() != first->children().size())
                return {};
            if (a->head_is_bound() ? a->head_index() != first->head_index()
                                   : a->head_name() != first->head_name())
                return {};
        }
        size_t arity = first->children().size();
        std::vector<std::vector<BttPtr>> child_options;
        for (size_t i = 0; i < arity; ++i) {
            BttPtr merged;
            for (const auto& a : atoms) {
                const BttPtr& c = a->children()[i];
                if (c->kind() == BohmTest::Kind::Omega) continue;
                merged = merged ? BohmTest::conj(merged, c) : c;
            }
            if (!merged) merged = BohmTest::omega();
            child_options.push_back(refine_btt(merged));
        }
        std::vector<BttPtr> out;
        for (auto& tuple : cross(child_options))
            out.push_back(BohmTest::head_form(first->binders(), first->head_is_bound(),
                                              first->head_index(), first->head_name(),
                                              std::move(tuple)));
        return out;
    }

    std::vector<BttPtr> refine_btt(const BttPtr& t) {
        switch (t->kind()) {
            case BohmTest::Kind::Omega: return {BohmTest::omega()};
            case BohmTest::Kind::Conj: {
                std::vector<std::vector<BttPtr>> options{refine_btt(t->left()),
                                                         refine_btt(t->right())};
                std::vector<BttPtr> out;
                for (auto& tuple : cross(options))
                    out.push_back(BohmTest::conj(tuple[0], tuple[1]));
                return out;
            }
            case BohmTest::Kind::Ev: {
                std::vector<BttPtr> out;
                for (const auto& b : refine_bht(t->inner())) out.push_back(BohmTest::ev(b));
                return out;
            }
            case BohmTest::Kind::HeadForm:
                throw std::invalid_argument("btt_to_rbtt_family: head form at tree level");
        }
        return {};
    }
};

}  // namespace

std::vector<BttPtr> btt_to_rbtt_family(const BttPtr& t, const FamilyLimits& limits) {
    Refiner r{limits};
    std::vector<BttPtr> out = r.refine_btt(t);
    if (out.size() > limits.count) out.resize(limits.count);
    return out;
}

std::optional<BttPtr> separating_rbtt(const TermPtr& m, const TermPtr& n, unsigned fuel,
                                      unsigned max_size) {
    TruncationBudget budget;
    budget.max_term_size = max_size;
    budget.max_bag_copies = 3;
    taylor::TaylorNF a = taylor::taylor_nf(m, budget, fuel);
    taylor::TaylorNF b = taylor::taylor_nf(n, budget, fuel);

    std::vector<ResourcePtr> candidates;
    for (const auto& [s, c] : a.comb) candidates.push_back(s);
    for (const auto& [s, c] : b.comb)
        if (a.comb.coeff(s) == 0) candidates.push_back(s);
    std::sort(candidates.begin(), candidates.end(),
              [](const ResourcePtr& x, const ResourcePtr& y) {
                  if (x->size() != y->size()) return x->size() < y->size();
                  return ResourceTerm::compare(*x, *y) < 0;
              });

    auto disjoint = [](const Interval& x, const Interval& y) {
        return x.upper < y.lower || y.upper < x.lower;
    };

    size_t cap = 200;
    std::vector<ResourcePtr> bags;
    for (const auto& s : candidates) {
        if (bags.size() >= cap) break;
        bags.push_back(ResourceTerm::bag({s}));
        if (2 * s->size() <= max_size) bags.push_back(ResourceTerm::bag({s, s}));
    }
    for (size_t i = 0; i < candidates.size() && bags.size() < cap; ++i)
        for (size_t j = i + 1; j < candidates.size() && bags.size() < cap; ++j)
            if (candidates[i]->size() + candidates[j]->size() <= max_size)
                bags.push_back(ResourceTerm::bag({candidates[i], candidates[j]}));

    for (const auto& bag : bags) {
        BttPtr test = polyterm_to_rbtt(bag);
        Interval im = eval_btt(test, m, fuel);
        Interval in = eval_btt(test, n, fuel);
        if (disjoint(im, in)) return test;
    }
    return std::nullopt;
}

}  // namespace plrc::bohm
