#include "plrc/resource_term.hpp"

#include <algorithm>
#include <stdexcept>

namespace plrc::resource {

using Kind = ResourceTerm::Kind;

static void require_simple(const ResourcePtr& t, const char* what) {
    if (!t) throw std::invalid_argument(std::string("null ") + what);
    if (t->is_bag()) throw std::invalid_argument(std::string(what) + " must be a simple term");
}

ResourcePtr ResourceTerm::bound(int index) {
    if (index < 0) throw std::invalid_argument("negative de Bruijn index");
    auto t = std::shared_ptr<ResourceTerm>(new ResourceTerm(Kind::BoundVar));
    t->index_ = index;
    return t;
}

ResourcePtr ResourceTerm::free(std::string name) {
    if (name.empty()) throw std::invalid_argument("empty variable name");
    auto t = std::shared_ptr<ResourceTerm>(new ResourceTerm(Kind::FreeVar));
    t->name_ = std::move(name);
    return t;
}

ResourcePtr ResourceTerm::abs(ResourcePtr body) {
    require_simple(body, "abstraction body");
    auto t = std::shared_ptr<ResourceTerm>(new ResourceTerm(Kind::Abs));
    t->size_ = 1 + body->size_;
    t->tags_ = body->tags_;
    // lambda over a tagged term is a tag-lifting redex
    bool redex = body->kind_ == Kind::LeftTag || body->kind_ == Kind::RightTag;
    t->normal_ = !redex && body->normal_;
    t->a_ = std::move(body);
    return t;
}

ResourcePtr ResourceTerm::lin_app(ResourcePtr head, ResourcePtr bag) {
    require_simple(head, "application head");
    if (!bag || !bag->is_bag()) throw std::invalid_argument("application arguments must be a bag");
    auto t = std::shared_ptr<ResourceTerm>(new ResourceTerm(Kind::LinApp));
    t->size_ = 1 + head->size_ + bag->size_;
    t->tags_ = head->tags_ + bag->tags_;
    bool redex = head->kind_ == Kind::Abs || head->kind_ == Kind::LeftTag ||
                 head->kind_ == Kind::RightTag;
    t->normal_ = !redex && head->normal_ && bag->normal_;
    t->a_ = std::move(head);
    t->b_ = std::move(bag);
    return t;
}

ResourcePtr ResourceTerm::left_tag(const Rational& p, ResourcePtr body) {
    require_simple(body, "tag body");
    if (!is_probability(p)) throw std::invalid_argument("tag probability outside [0,1]");
    auto t = std::shared_ptr<ResourceTerm>(new ResourceTerm(Kind::LeftTag));
    t->prob_ = p;
    t->size_ = 1 + body->size_;
    t->tags_ = 1 + body->tags_;
    t->normal_ = body->normal_;
    t->a_ = std::move(body);
    return t;
}

ResourcePtr ResourceTerm::right_tag(const Rational& p, ResourcePtr body) {
    require_simple(body, "tag body");
    if (!is_probability(p)) throw std::invalid_argument("tag probability outside [0,1]");
    auto t = std::shared_ptr<ResourceTerm>(new ResourceTerm(Kind::RightTag));
    t->prob_ = p;
    t->size_ = 1 + body->size_;
    t->tags_ = 1 + body->tags_;
    t->normal_ = body->normal_;
    t->a_ = std::move(body);
    return t;
}

ResourcePtr ResourceTerm::bag(std::vector<ResourcePtr> elems) {
    for (const auto& e : elems) require_simple(e, "bag element");
    std::sort(elems.begin(), elems.end(),
              [](const ResourcePtr& a, const ResourcePtr& b) { return compare(*a, *b) < 0; });
    auto t = std::shared_ptr<ResourceTerm>(new ResourceTerm(Kind::Bag));
    t->size_ = 0;
    for (const auto& e : elems) {
        t->size_ += e->size_;
        t->tags_ += e->tags_;
        t->normal_ = t->normal_ && e->normal_;
    }
    t->elems_ = std::move(elems);
    return t;
}

int ResourceTerm::compare(const ResourceTerm& a, const ResourceTerm& b) {
    if (&a == &b) return 0;
    if (a.kind_ != b.kind_) return a.kind_ < b.kind_ ? -1 : 1;
    switch (a.kind_) {
        case Kind::BoundVar:
            return a.index_ < b.index_ ? -1 : a.index_ > b.index_ ? 1 : 0;
        case Kind::FreeVar:
            return a.name_.compare(b.name_);
        case Kind::Abs:
            return compare(*a.a_, *b.a_);
        case Kind::LinApp: {
            int c = compare(*a.a_, *b.a_);
            return c != 0 ? c : compare(*a.b_, *b.b_);
        }
        case Kind::LeftTag:
        case Kind::RightTag: {
            if (a.prob_ != b.prob_) return a.prob_ < b.prob_ ? -1 : 1;
            return compare(*a.a_, *b.a_);
        }
        case Kind::Bag: {
            if (a.elems_.size() != b.elems_.size())
                return a.elems_.size() < b.elems_.size() ? -1 : 1;
            for (std::size_t i = 0; i < a.elems_.size(); ++i) {
                int c = compare(*a.elems_[i], *b.elems_[i]);
                if (c != 0) return c;
            }
            return 0;
        }
    }
    return 0;
}

bool equal(const ResourcePtr& a, const ResourcePtr& b) {
    return a == b || ResourceTerm::compare(*a, *b) == 0;
}

static void collect_free(const ResourcePtr& t, std::set<std::string>& out) {
    switch (t->kind()) {
        case Kind::BoundVar: return;
        case Kind::FreeVar: out.insert(t->name()); return;
        case Kind::Abs:
        case Kind::LeftTag:
        case Kind::RightTag: collect_free(t->body(), out); return;
        case Kind::LinApp:
            collect_free(t->head(), out);
            collect_free(t->args(), out);
            return;
        case Kind::Bag:
            for (const auto& e : t->elems()) collect_free(e, out);
            return;
    }
}

std::set<std::string> free_names(const ResourcePtr& t) {
    std::set<std::string> out;
    collect_free(t, out);
    return out;
}

namespace {

struct Names {
    std::set<std::string> taken;
    int counter = 0;

    std::string fresh() {
        static const char* pool[] = {"x", "y", "z", "u", "v", "w", "s", "t", "a", "b", "c"};
        for (const char* cand : pool)
            if (!taken.count(cand)) return *taken.insert(cand).first;
        for (;;) {
            std::string cand = "x" + std::to_string(++counter);
            if (!taken.count(cand)) return *taken.insert(cand).first;
        }
    }
};

// prec 0: any position; prec 2: application head (lambdas and tags need parens).
std::string print(const ResourcePtr& t, int prec, Names& names, std::vector<std::string>& env) {
    switch (t->kind()) {
        case Kind::BoundVar: {
            int index = t->index();
            if (index < static_cast<int>(env.size())) return env[env.size() - 1 - index];
            return "^" + std::to_string(index - static_cast<int>(env.size()));
        }
        case Kind::FreeVar:
            return t->name();
        case Kind::Abs: {
            std::string binders = "\\";
            ResourcePtr cur = t;
            std::size_t pushed = 0;
            while (cur->kind() == Kind::Abs) {
                std::string n = names.fresh();
                binders += (pushed ? " " : "") + n;
                env.push_back(n);
                ++pushed;
                cur = cur->body();
            }
            std::string out = binders + ". " + print(cur, 0, names, env);
            env.resize(env.size() - pushed);
            return prec > 0 ? "(" + out + ")" : out;
        }
        case Kind::LinApp:
            return print(t->head(), 2, names, env) + " " + print(t->args(), 0, names, env);
        case Kind::LeftTag:
        case Kind::RightTag: {
            std::string out = (t->kind() == Kind::LeftTag ? "l{" : "r{") +
                              plrc::to_string(t->prob()) + "} " +
                              print(t->body(), 0, names, env);
            return prec > 0 ? "(" + out + ")" : out;
        }
        case Kind::Bag: {
            std::string out = "[";
            bool first = true;
            for (const auto& e : t->elems()) {
                if (!first) out += ", ";
                out += print(e, 0, names, env);
                first = false;
            }
            return out + "]";
        }
    }
    return "";
}

}  // namespace

std::string to_string(const ResourcePtr& t) {
    Names names{free_names(t), 0};
    std::vector<std::string> env;
    return print(t, 0, names, env);
}

ResourcePtr shift(const ResourcePtr& t, int delta, int cutoff) {
    if (delta == 0) return t;
    switch (t->kind()) {
        case Kind::BoundVar:
            return t->index() >= cutoff ? ResourceTerm::bound(t->index() + delta) : t;
        case Kind::FreeVar:
            return t;
        case Kind::Abs:
            return ResourceTerm::abs(shift(t->body(), delta, cutoff + 1));
        case Kind::LinApp:
            return ResourceTerm::lin_app(shift(t->head(), delta, cutoff),
                                         shift(t->args(), delta, cutoff));
        case Kind::LeftTag:
            return ResourceTerm::left_tag(t->prob(), shift(t->body(), delta, cutoff));
        case Kind::RightTag:
            return ResourceTerm::right_tag(t->prob(), shift(t->body(), delta, cutoff));
        case Kind::Bag: {
            std::vector<ResourcePtr> elems;
            elems.reserve(t->elems().size());
            for (const auto& e : t->elems()) elems.push_back(shift(e, delta, cutoff));
            return ResourceTerm::bag(std::move(elems));
        }
    }
    return t;
}

}  // namespace plrc::resource
