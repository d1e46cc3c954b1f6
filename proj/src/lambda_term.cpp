#include "plrc/lambda_term.hpp"

#include <functional>
#include <stdexcept>
#include <vector>

namespace plrc::syntax {

TermPtr Term::bound(int index) {
    if (index < 0) throw std::invalid_argument("negative de Bruijn index");
    auto t = std::shared_ptr<Term>(new Term(Kind::BoundVar));
    t->index_ = index;
    return t;
}

TermPtr Term::free(std::string name) {
    if (name.empty()) throw std::invalid_argument("empty variable name");
    auto t = std::shared_ptr<Term>(new Term(Kind::FreeVar));
    t->name_ = std::move(name);
    return t;
}

TermPtr Term::abs(TermPtr body) {
    if (!body) throw std::invalid_argument("null body");
    auto t = std::shared_ptr<Term>(new Term(Kind::Abs));
    t->size_ = 1 + body->size_;
    t->has_choice_ = body->has_choice_;
    t->a_ = std::move(body);
    return t;
}

TermPtr Term::app(TermPtr fun, TermPtr arg) {
    if (!fun || !arg) throw std::invalid_argument("null subterm");
    auto t = std::shared_ptr<Term>(new Term(Kind::App));
    t->size_ = 1 + fun->size_ + arg->size_;
    t->has_choice_ = fun->has_choice_ || arg->has_choice_;
    t->a_ = std::move(fun);
    t->b_ = std::move(arg);
    return t;
}

TermPtr Term::choice(const Rational& p, TermPtr left, TermPtr right) {
    if (!left || !right) throw std::invalid_argument("null subterm");
    if (!is_probability(p)) throw std::invalid_argument("choice probability outside [0,1]");
    auto t = std::shared_ptr<Term>(new Term(Kind::Choice));
    t->prob_ = p;
    t->size_ = 1 + left->size_ + right->size_;
    t->has_choice_ = true;
    t->a_ = std::move(left);
    t->b_ = std::move(right);
    return t;
}

int Term::compare(const Term& a, const Term& b) {
    if (&a == &b) return 0;
    if (a.kind_ != b.kind_) return a.kind_ < b.kind_ ? -1 : 1;
    switch (a.kind_) {
        case Kind::BoundVar:
            return a.index_ < b.index_ ? -1 : a.index_ > b.index_ ? 1 : 0;
        case Kind::FreeVar:
            return a.name_.compare(b.name_);
        case Kind::Abs:
            return compare(*a.a_, *b.a_);
        case Kind::App: {
            int c = compare(*a.a_, *b.a_);
            return c != 0 ? c : compare(*a.b_, *b.b_);
        }
        case Kind::Choice: {
            if (a.prob_ != b.prob_) return a.prob_ < b.prob_ ? -1 : 1;
            int c = compare(*a.a_, *b.a_);
            return c != 0 ? c : compare(*a.b_, *b.b_);
        }
    }
    return 0;
}

bool equal(const TermPtr& a, const TermPtr& b) {
    return a == b || Term::compare(*a, *b) == 0;
}

static void collect_free(const TermPtr& t, std::set<std::string>& out) {
    switch (t->kind()) {
        case Term::Kind::BoundVar: return;
        case Term::Kind::FreeVar: out.insert(t->name()); return;
        case Term::Kind::Abs: collect_free(t->body(), out); return;
        case Term::Kind::App:
        case Term::Kind::Choice:
            collect_free(t->left(), out);
            collect_free(t->right(), out);
            return;
    }
}

std::set<std::string> free_names(const TermPtr& t) {
    std::set<std::string> out;
    collect_free(t, out);
    return out;
}

namespace {

// Shared binder-name pool for pretty-printing; indices past the pool become
// x1, x2, ...  Names already used free in the term are skipped.
struct NamePicker {
    std::set<std::string> taken;
    int counter = 0;

    explicit NamePicker(const std::set<std::string>& free) : taken(free) {}

    std::string fresh() {
        static const char* pool[] = {"x", "y", "z", "u", "v", "w", "s", "t", "a", "b", "c"};
        for (const char* cand : pool) {
            if (!taken.count(cand)) {
                taken.insert(cand);
                return cand;
            }
        }
        for (;;) {
            std::string cand = "x" + std::to_string(++counter);
            if (!taken.count(cand)) {
                taken.insert(cand);
                return cand;
            }
        }
    }
};

std::string print_term(const TermPtr& t, int prec, NamePicker& names,
                       std::vector<std::string>& env);

std::string print_abs(const TermPtr& t, NamePicker& names, std::vector<std::string>& env) {
    std::string binders = "\\";
    TermPtr cur = t;
    std::size_t pushed = 0;
    while (cur->kind() == Term::Kind::Abs) {
        std::string n = names.fresh();
        binders += (pushed ? " " : "") + n;
        env.push_back(n);
        ++pushed;
        cur = cur->body();
    }
    std::string out = binders + ". " + print_term(cur, 0, names, env);
    env.resize(env.size() - pushed);
    return out;
}

std::string print_term(const TermPtr& t, int prec, NamePicker& names,
                       std::vector<std::string>& env) {
    switch (t->kind()) {
        case Term::Kind::BoundVar: {
            int index = t->index();
            if (index < static_cast<int>(env.size())) return env[env.size() - 1 - index];
            return "^" + std::to_string(index - static_cast<int>(env.size()));
        }
        case Term::Kind::FreeVar:
            return t->name();
        case Term::Kind::Abs: {
            std::string out = print_abs(t, names, env);
            return prec > 0 ? "(" + out + ")" : out;
        }
        case Term::Kind::App: {
            std::string out = print_term(t->fun(), 2, names, env) + " " +
                              print_term(t->arg(), 3, names, env);
            return prec > 2 ? "(" + out + ")" : out;
        }
        case Term::Kind::Choice: {
            std::string out = print_term(t->left(), 2, names, env) + " (+" +
                              plrc::to_string(t->prob()) + ") " +
                              print_term(t->right(), 0, names, env);
            return prec > 1 ? "(" + out + ")" : out;
        }
    }
    return "";
}

}  // namespace

std::string to_string(const TermPtr& t) {
    NamePicker names(free_names(t));
    std::vector<std::string> env;
    return print_term(t, 0, names, env);
}

TermPtr shift(const TermPtr& t, int delta, int cutoff) {
    if (delta == 0) return t;
    switch (t->kind()) {
        case Term::Kind::BoundVar:
            return t->index() >= cutoff ? Term::bound(t->index() + delta) : t;
        case Term::Kind::FreeVar:
            return t;
        case Term::Kind::Abs: {
            TermPtr b = shift(t->body(), delta, cutoff + 1);
            return b == t->body() ? t : Term::abs(b);
        }
        case Term::Kind::App: {
            TermPtr f = shift(t->fun(), delta, cutoff);
            TermPtr a = shift(t->arg(), delta, cutoff);
            return f == t->fun() && a == t->arg() ? t : Term::app(f, a);
        }
        case Term::Kind::Choice: {
            TermPtr l = shift(t->left(), delta, cutoff);
            TermPtr r = shift(t->right(), delta, cutoff);
            return l == t->left() && r == t->right() ? t : Term::choice(t->prob(), l, r);
        }
    }
    return t;
}

TermPtr subst_bound(const TermPtr& t, int target, const TermPtr& value) {
    switch (t->kind()) {
        case Term::Kind::BoundVar: {
            if (t->index() == target) return shift(value, target);
            if (t->index() > target) return Term::bound(t->index() - 1);
            return t;
        }
        case Term::Kind::FreeVar:
            return t;
        case Term::Kind::Abs:
            return Term::abs(subst_bound(t->body(), target + 1, value));
        case Term::Kind::App:
            return Term::app(subst_bound(t->fun(), target, value),
                             subst_bound(t->arg(), target, value));
        case Term::Kind::Choice:
            return Term::choice(t->prob(), subst_bound(t->left(), target, value),
                                subst_bound(t->right(), target, value));
    }
    return t;
}

}  // namespace plrc::syntax
