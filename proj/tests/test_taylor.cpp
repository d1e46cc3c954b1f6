#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "plrc/parser.hpp"
#include "plrc/resource_calculus.hpp"
#include "plrc/taylor.hpp"
#include "support/generators.hpp"

using namespace plrc;
using namespace plrc::taylor;
using resource::Combination;
using resource::ResourcePtr;
using resource::ResourceTerm;
using syntax::TermPtr;

namespace {

TermPtr lt(const std::string& s) { return syntax::parse_term(s, &syntax::prelude()); }
ResourcePtr rt(const std::string& s) {
    return resource::parse_resource(s, &resource::resource_prelude());
}

bool same_support(const Combination& c,
                  const std::set<ResourcePtr, resource::ResourceLess>& s) {
    if (c.support_size() != s.size()) return false;
    auto i = c.begin();
    auto j = s.begin();
    for (; i != c.end(); ++i, ++j)
        if (ResourceTerm::compare(*i->first, **j) != 0) return false;
    return true;
}

// Every bag within the copy bound, every term within the size bound.
bool within_budget(const ResourcePtr& t, const TruncationBudget& b, SizeMeasure m) {
    if (resource::measured_size(*t, m) > b.max_term_size && !t->is_bag()) return false;
    switch (t->kind()) {
        case ResourceTerm::Kind::BoundVar:
        case ResourceTerm::Kind::FreeVar:
            return true;
        case ResourceTerm::Kind::Abs:
        case ResourceTerm::Kind::LeftTag:
        case ResourceTerm::Kind::RightTag:
            return within_budget(t->body(), b, m);
        case ResourceTerm::Kind::LinApp:
            return within_budget(t->head(), b, m) && within_budget(t->args(), b, m);
        case ResourceTerm::Kind::Bag: {
            if (t->elems().size() > b.max_bag_copies) return false;
            for (const auto& e : t->elems())
                if (!within_budget(e, b, m)) return false;
            return true;
        }
    }
    return false;
}

}  // namespace

TEST_CASE("explicit expansion of variables, abstractions, applications") {
    TruncationBudget b{12, 4};
    Combination vx = explicit_taylor(lt("x"), b);
    CHECK(vx.support_size() == 1);
    CHECK(vx.coeff(rt("x")) == 1);

    Combination id = explicit_taylor(lt("I"), b);
    CHECK(id.support_size() == 1);
    CHECK(id.coeff(rt("\\x. x")) == 1);

    // Applications take every bag of copies, weighted 1/m(s).
    Combination app = explicit_taylor(lt("x y"), b);
    CHECK(app.coeff(rt("x []")) == 1);
    CHECK(app.coeff(rt("x [y]")) == 1);
    CHECK(app.coeff(rt("x [y, y]")) == Rational(1, 2));
    CHECK(app.coeff(rt("x [y, y, y]")) == Rational(1, 6));
    CHECK(app.coeff(rt("x [y, y, y, y]")) == Rational(1, 24));
    CHECK(app.support_size() == 5);  // copies capped at 4
}

TEST_CASE("explicit expansion keeps both choice branches, tagged") {
    TruncationBudget b{12, 4};
    Combination c = explicit_taylor(lt("x (+1/3) y"), b);
    CHECK(c.support_size() == 2);
    CHECK(c.coeff(rt("l{1/3} x")) == 1);
    CHECK(c.coeff(rt("r{1/3} y")) == 1);

    // Probability zero or one still keeps both tags in the explicit route.
    Combination d = explicit_taylor(lt("x (+1) y"), b);
    CHECK(d.coeff(rt("l{1} x")) == 1);
    CHECK(d.coeff(rt("r{1} y")) == 1);
}

TEST_CASE("the deterministic example's key summand") {
    TruncationBudget b{12, 4};
    Combination c = explicit_taylor(lt("Delta I"), b);
    CHECK(c.coeff(rt("(\\x. x [x]) [\\y. y, \\y. y]")) == Rational(1, 2));
    CHECK(c.coeff(rt("(\\x. x [x]) [\\y. y]")) == 1);
    CHECK(c.coeff(rt("(\\x. x [x]) []")) == 1);
}

TEST_CASE("support oracle matches the threaded budget") {
    gen::Rng rng(101);
    for (int i = 0; i < 60; ++i) {
        TermPtr m = gen::random_term(rng, 1 + rng.below(7));
        TruncationBudget b{static_cast<unsigned>(6 + rng.below(5)),
                           static_cast<unsigned>(2 + rng.below(2))};
        SizeMeasure measure = rng.chance(0.5) ? SizeMeasure::Tagged : SizeMeasure::Erased;
        Combination c = explicit_taylor(m, b, measure);
        auto s = explicit_taylor_support(m, b, measure);
        CHECK(same_support(c, s));
        for (const auto& [t, q] : c) CHECK(within_budget(t, b, measure));
    }
}

TEST_CASE("explicit truncations are regular") {
    gen::Rng rng(103);
    for (int i = 0; i < 80; ++i) {
        TermPtr m = gen::random_term(rng, 1 + rng.below(8));
        Combination c = explicit_taylor(m, TruncationBudget{9, 3});
        CHECK(resource::is_regular(c));
    }
}

TEST_CASE("erasure removes tags and multiplies weights") {
    auto [t1, w1] = erase(rt("l{1/3} x"));
    CHECK(resource::equal(t1, rt("x")));
    CHECK(w1 == Rational(1, 3));

    auto [t2, w2] = erase(rt("r{1/3} x"));
    CHECK(resource::equal(t2, rt("x")));
    CHECK(w2 == Rational(2, 3));

    auto [t3, w3] = erase(rt("l{1/2} \\x. x [r{1/4} y]"));
    CHECK(resource::equal(t3, rt("\\x. x [y]")));
    CHECK(w3 == Rational(3, 8));

    auto [t4, w4] = erase(rt("\\x. x []"));
    CHECK(resource::equal(t4, rt("\\x. x []")));
    CHECK(w4 == 1);
}

TEST_CASE("generic expansion agrees with the direct inductive clauses") {
    gen::Rng rng(107);
    TruncationBudget b{9, 3};
    for (int i = 0; i < 80; ++i) {
        TermPtr m = gen::random_term(rng, 1 + rng.below(8));
        CHECK(generic_taylor(m, b) == generic_taylor_direct(m, b));
    }

    Combination c = generic_taylor(lt("x (+1/3) y"), b);
    CHECK(c.coeff(rt("x")) == Rational(1, 3));
    CHECK(c.coeff(rt("y")) == Rational(2, 3));

    // Degenerate probabilities collapse to one branch.
    Combination one = generic_taylor(lt("x (+1) y"), b);
    CHECK(one.support_size() == 1);
    CHECK(one.coeff(rt("x")) == 1);
}

TEST_CASE("barycentric axioms leave the generic expansion unchanged") {
    gen::Rng rng(109);
    TruncationBudget b{8, 3};
    for (int i = 0; i < 40; ++i) {
        TermPtr m = gen::random_term(rng, 1 + rng.below(5));
        TermPtr n = gen::random_term(rng, 1 + rng.below(5));
        TermPtr p3 = gen::random_term(rng, 1 + rng.below(5));
        Rational p = rng.prob(), q = rng.prob();

        // M (+p) N == N (+1-p) M
        CHECK(generic_taylor(syntax::Term::choice(p, m, n), b) ==
              generic_taylor(syntax::Term::choice(1 - p, n, m), b));
        // M (+p) M == M
        CHECK(generic_taylor(syntax::Term::choice(p, m, m), b) == generic_taylor(m, b));
        // M (+1) N == M
        CHECK(generic_taylor(syntax::Term::choice(1, m, n), b) == generic_taylor(m, b));
        // (M (+p) N) (+q) P == M (+pq) (N (+q(1-p)/(1-pq)) P) when pq != 1
        if (p * q != 1) {
            auto lhs = syntax::Term::choice(q, syntax::Term::choice(p, m, n), p3);
            auto rhs = syntax::Term::choice(
                p * q, m, syntax::Term::choice(q * (1 - p) / (1 - p * q), n, p3));
            CHECK(generic_taylor(lhs, b) == generic_taylor(rhs, b));
        }
    }

    // The commuted explicit expansions differ (tags record the orientation).
    CHECK(explicit_taylor(lt("x (+1/3) y"), b) != explicit_taylor(lt("y (+2/3) x"), b));
    CHECK(barycentric_equiv_check(lt("x (+1/3) y"), lt("y (+2/3) x"), b));
}

TEST_CASE("normalization of affine truncations is exact") {
    TruncationBudget b{12, 4};
    CHECK(resource::normalize(explicit_taylor(lt("(\\x. x) y"), b)) ==
          explicit_taylor(lt("y"), b));
    CHECK(resource::normalize(explicit_taylor(lt("(\\x. \\y. x) a b"), b)) ==
          explicit_taylor(lt("a"), b));
    CHECK(resource::normalize(explicit_taylor(lt("(\\x. x) (\\y. y z)"), b)) ==
          explicit_taylor(lt("\\y. y z"), b));
}

TEST_CASE("taylor normal form of the introductory example") {
    TruncationBudget b{12, 4};

    TaylorNF ex = explicit_taylor_nf(lt("Delta (I (+1/2) Omega)"), b, 16);
    CHECK(ex.comb.support_size() == 1);
    CHECK(ex.comb.coeff(rt("l{1/2} l{1/2} \\x. x")) == 1);
    CHECK(ex.residual == Rational(3, 4));

    TaylorNF ge = taylor_nf(lt("Delta (I (+1/2) Omega)"), b, 16);
    CHECK(ge.comb.support_size() == 1);
    CHECK(ge.comb.coeff(rt("\\x. x")) == Rational(1, 4));
    CHECK(ge.residual == Rational(3, 4));

    TaylorNF det = taylor_nf(lt("Delta I"), b, 16);
    CHECK(det.comb.coeff(rt("\\x. x")) == 1);
    CHECK(det.residual == 0);

    TaylorNF dead = taylor_nf(lt("Omega"), b, 16);
    CHECK(dead.comb.empty());
    CHECK(dead.residual == 1);
}

TEST_CASE("taylor normal form with free heads and dead arguments") {
    TruncationBudget b{12, 4};
    TaylorNF nf = taylor_nf(lt("x Omega"), b, 8);
    // The empty-bag term survives with its exact coefficient.
    CHECK(nf.comb.coeff(rt("x []")) == 1);
    CHECK(nf.comb.support_size() == 1);

    TaylorNF nfy = taylor_nf(lt("x y"), b, 8);
    CHECK(nfy.comb.coeff(rt("x []")) == 1);
    CHECK(nfy.comb.coeff(rt("x [y]")) == 1);
    CHECK(nfy.comb.coeff(rt("x [y, y]")) == Rational(1, 2));
    CHECK(nfy.residual == 0);
}

TEST_CASE("taylor normal form coefficients grow with fuel, residual shrinks") {
    gen::Rng rng(113);
    TruncationBudget b{8, 3};
    for (int i = 0; i < 50; ++i) {
        TermPtr m = gen::random_term(rng, 1 + rng.below(7));
        TaylorNF lo = taylor_nf(m, b, 4);
        TaylorNF hi = taylor_nf(m, b, 8);
        for (const auto& [s, c] : lo.comb) CHECK(hi.comb.coeff(s) >= c);
        CHECK(hi.residual <= lo.residual);
        CHECK(lo.residual <= 1);
        CHECK(0 <= lo.residual);
    }
}

TEST_CASE("normal forms are supported by normal choice-free terms") {
    gen::Rng rng(127);
    TruncationBudget b{9, 3};
    for (int i = 0; i < 40; ++i) {
        TermPtr m = gen::random_term(rng, 1 + rng.below(7));
        TaylorNF nf = taylor_nf(m, b, 8);
        for (const auto& [s, c] : nf.comb) {
            CHECK(s->is_normal());
            CHECK(s->choice_free());
            CHECK(c > 0);
        }
        TaylorNF ex = explicit_taylor_nf(m, b, 8);
        for (const auto& [s, c] : ex.comb) CHECK(s->is_normal());
    }
}
