#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "plrc/lambda_term.hpp"
#include "plrc/parser.hpp"
#include "plrc/resource_term.hpp"
#include "support/generators.hpp"

using namespace plrc;
using syntax::Term;
using syntax::TermPtr;
using resource::ResourcePtr;
using resource::ResourceTerm;

TEST_CASE("lambda parsing and printing round-trips") {
    auto check = [](const std::string& text) {
        TermPtr t = syntax::parse_term(text);
        CHECK(syntax::to_string(t) == text);
        TermPtr again = syntax::parse_term(syntax::to_string(t));
        CHECK(syntax::equal(t, again));
    };
    check("\\x. x");
    check("\\x y. x (y x)");
    check("x (+1/2) y");
    check("x y z");
    check("x (y z)");
    // Binders are renamed apart from free names and from each other.
    CHECK(syntax::to_string(syntax::parse_term("(\\x. x x) (x (+1/3) \\y. y)")) ==
          "(\\z. z z) (x (+1/3) \\y. y)");
}

TEST_CASE("prelude combinators") {
    CHECK(syntax::to_string(syntax::parse_term("I", &syntax::prelude())) == "\\x. x");
    CHECK(syntax::to_string(syntax::parse_term("Delta", &syntax::prelude())) == "\\x. x x");
    auto omega = syntax::parse_term("Omega", &syntax::prelude());
    CHECK(syntax::to_string(omega) == "(\\y. y y) (\\x. x x)");
    CHECK(syntax::equal(omega, syntax::parse_term("(\\a. a a) (\\a. a a)")));
    CHECK(syntax::equal(omega, syntax::parse_term("W", &syntax::prelude())));
}

TEST_CASE("choice binds weakest and associates right") {
    auto t = syntax::parse_term("x y (+1/2) z (+1/3) w");
    REQUIRE(t->kind() == Term::Kind::Choice);
    CHECK(t->prob() == Rational(1, 2));
    CHECK(t->left()->kind() == Term::Kind::App);
    REQUIRE(t->right()->kind() == Term::Kind::Choice);
    CHECK(t->right()->prob() == Rational(1, 3));
}

TEST_CASE("de Bruijn binding and free names") {
    auto t = syntax::parse_term("\\x. x (\\y. x y z)");
    auto names = syntax::free_names(t);
    CHECK(names == std::set<std::string>{"z"});

    auto body = t->body();
    REQUIRE(body->kind() == Term::Kind::App);
    CHECK(body->fun()->index() == 0);
}

TEST_CASE("parse errors carry positions") {
    CHECK_THROWS_AS(syntax::parse_term("\\x."), ParseError);
    CHECK_THROWS_AS(syntax::parse_term("(x"), ParseError);
    CHECK_THROWS_AS(syntax::parse_term("x (+2) y"), ParseError);
    CHECK_THROWS_AS(syntax::parse_term(""), ParseError);
    CHECK_THROWS_AS(syntax::parse_term("x y)"), ParseError);
}

TEST_CASE("substitution and shift") {
    // (\x. x (\y. x y)) applied to z via subst_bound on the body.
    auto t = syntax::parse_term("\\x. x (\\y. x y)");
    auto z = Term::free("z");
    auto r = syntax::subst_bound(t->body(), 0, z);
    CHECK(syntax::to_string(r) == "z (\\x. z x)");
}

TEST_CASE("structural order is total and consistent") {
    gen::Rng rng(7);
    std::vector<TermPtr> ts;
    for (int i = 0; i < 50; ++i) ts.push_back(gen::random_term(rng, 6));
    for (const auto& a : ts)
        for (const auto& b : ts) {
            int ab = Term::compare(*a, *b), ba = Term::compare(*b, *a);
            CHECK(((ab < 0) == (ba > 0)));
            CHECK(((ab == 0) == (ba == 0)));
            if (ab == 0) CHECK(syntax::to_string(a) == syntax::to_string(b));
        }
}

TEST_CASE("resource parsing round-trips") {
    auto check = [](const std::string& text) {
        ResourcePtr t = resource::parse_resource(text);
        CHECK(resource::to_string(t) == text);
    };
    check("\\x. x [x]");
    check("x [y, z]");
    check("x []");
    check("l{1/2} \\x. x []");
    check("\\x. x [r{1/3} y]");
    check("[x, x, y]");
    check("[]");
    // Bag elements are simple terms; nested bag literals are rejected.
    CHECK_THROWS_AS(resource::parse_resource("x [[y]]"), ParseError);
}

TEST_CASE("bags are canonical multisets") {
    auto a = resource::parse_resource("[x, y, x]");
    auto b = resource::parse_resource("[y, x, x]");
    CHECK(resource::equal(a, b));
    CHECK(resource::to_string(a) == resource::to_string(b));

    auto c = resource::parse_resource("[x, y]");
    CHECK(!resource::equal(a, c));
}

TEST_CASE("resource sizes and tag counts") {
    // size: every constructor except the bag former.
    CHECK(resource::parse_resource("x")->size() == 1);
    CHECK(resource::parse_resource("\\x. x")->size() == 2);
    CHECK(resource::parse_resource("x [y, z]")->size() == 4);
    CHECK(resource::parse_resource("x []")->size() == 2);

    auto tagged = resource::parse_resource("l{1/2} x [r{1/2} y]");
    CHECK(tagged->size() == 5);
    CHECK(tagged->tag_count() == 2);
    CHECK(tagged->erased_size() == 3);
    CHECK(!tagged->choice_free());
    CHECK(resource::parse_resource("\\x. x [x]")->choice_free());
}

TEST_CASE("normality detection") {
    CHECK(resource::parse_resource("\\x. x [x]")->is_normal());
    CHECK(resource::parse_resource("x [\\y. y []]")->is_normal());
    CHECK(!resource::parse_resource("(\\x. x []) []")->is_normal());
    CHECK(!resource::parse_resource("\\x. l{1/2} x")->is_normal());   // tag under binder
    CHECK(!resource::parse_resource("(l{1/2} x) [y]")->is_normal());  // tag in head
    CHECK(resource::parse_resource("l{1/2} x [y]")->is_normal());
}
