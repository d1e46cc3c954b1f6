#include "plrc/parser.hpp"

#include <cctype>
#include <vector>

namespace plrc {
namespace {

// Minimal hand-rolled scanner shared by both term grammars.
struct Scanner {
    const std::string& text;
    std::size_t pos = 0;

    explicit Scanner(const std::string& t) : text(t) {}

    void skip_space() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }

    bool eof() {
        skip_space();
        return pos >= text.size();
    }

    char peek() {
        skip_space();
        return pos < text.size() ? text[pos] : '\0';
    }

    char peek_raw(std::size_t ahead) const {
        return pos + ahead < text.size() ? text[pos + ahead] : '\0';
    }

    bool consume(char c) {
        if (peek() != c) return false;
        ++pos;
        return true;
    }

    void expect(char c, const char* what) {
        if (!consume(c)) throw ParseError(pos, std::string("expected '") + c + "' " + what);
    }

    static bool ident_start(char c) {
        return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
    }
    static bool ident_char(char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
    }

    bool at_ident() { return ident_start(peek()); }

    std::string ident() {
        skip_space();
        if (pos >= text.size() || !ident_start(text[pos]))
            throw ParseError(pos, "expected an identifier");
        std::size_t start = pos;
        while (pos < text.size() && ident_char(text[pos])) ++pos;
        return text.substr(start, pos - start);
    }

    Rational rational() {
        skip_space();
        std::size_t start = pos;
        while (pos < text.size() &&
               (std::isdigit(static_cast<unsigned char>(text[pos])) || text[pos] == '/'))
            ++pos;
        auto q = parse_rational(text.substr(start, pos - start));
        if (!q) throw ParseError(start, "expected a rational number");
        return *q;
    }

    Rational probability() {
        std::size_t start = pos;
        Rational q = rational();
        if (!is_probability(q)) throw ParseError(start, "probability outside [0,1]");
        return q;
    }
};

}  // namespace

namespace syntax {
namespace {

struct TermParser {
    Scanner sc;
    const Definitions* defs;
    std::vector<std::string> binders;  // innermost last

    TermParser(const std::string& text, const Definitions* d) : sc(text), defs(d) {}

    TermPtr resolve(std::size_t at, const std::string& name) {
        for (std::size_t i = 0; i < binders.size(); ++i)
            if (binders[binders.size() - 1 - i] == name) return Term::bound(static_cast<int>(i));
        if (defs) {
            auto it = defs->find(name);
            if (it != defs->end()) return it->second;
        }
        (void)at;
        return Term::free(name);
    }

    // "(+" starts a choice infix; a plain "(" opens a subterm.
    bool at_choice_infix() {
        sc.skip_space();
        return sc.peek() == '(' && sc.peek_raw(1) == '+';
    }

    TermPtr parse_term() {
        if (sc.consume('\\')) {
            std::vector<std::string> names;
            names.push_back(sc.ident());
            while (sc.at_ident()) names.push_back(sc.ident());
            sc.expect('.', "after binders");
            for (const auto& n : names) binders.push_back(n);
            TermPtr body = parse_term();
            for (std::size_t i = 0; i < names.size(); ++i) {
                binders.pop_back();
                body = Term::abs(body);
            }
            return body;
        }
        TermPtr left = parse_app();
        if (at_choice_infix()) {
            sc.expect('(', "");
            sc.expect('+', "");
            Rational p = sc.probability();
            sc.expect(')', "after probability");
            TermPtr right = parse_term();
            return Term::choice(p, left, right);
        }
        return left;
    }

    TermPtr parse_app() {
        TermPtr t = parse_atom();
        for (;;) {
            sc.skip_space();
            char c = sc.peek();
            if (Scanner::ident_start(c) || (c == '(' && !at_choice_infix()))
                t = Term::app(t, parse_atom());
            else
                return t;
        }
    }

    TermPtr parse_atom() {
        if (sc.at_ident()) {
            std::size_t at = sc.pos;
            return resolve(at, sc.ident());
        }
        if (sc.consume('(')) {
            TermPtr t = parse_term();
            sc.expect(')', "to close the subterm");
            return t;
        }
        throw ParseError(sc.pos, "expected a term");
    }
};

}  // namespace

const Definitions& prelude() {
    static const Definitions defs = [] {
        Definitions d;
        auto parse = [&d](const char* src) { return parse_term(src, &d); };
        d["I"] = parse("\\x. x");
        d["K"] = parse("\\x y. x");
        d["S"] = parse("\\x y z. x z (y z)");
        d["Delta"] = parse("\\x. x x");
        d["Omega"] = parse("Delta Delta");
        d["W"] = d["Omega"];
        return d;
    }();
    return defs;
}

TermPtr parse_term(const std::string& text, const Definitions* defs) {
    TermParser p(text, defs);
    TermPtr t = p.parse_term();
    if (!p.sc.eof()) throw ParseError(p.sc.pos, "trailing input");
    return t;
}

}  // namespace syntax

namespace resource {
namespace {

struct ResourceParser {
    Scanner sc;
    const ResourceDefinitions* defs;
    std::vector<std::string> binders;

    ResourceParser(const std::string& text, const ResourceDefinitions* d) : sc(text), defs(d) {}

    ResourcePtr resolve(const std::string& name) {
        for (std::size_t i = 0; i < binders.size(); ++i)
            if (binders[binders.size() - 1 - i] == name)
                return ResourceTerm::bound(static_cast<int>(i));
        if (defs) {
            auto it = defs->find(name);
            if (it != defs->end()) return it->second;
        }
        return ResourceTerm::free(name);
    }

    // "l{" / "r{" introduce a choice tag; a bare l or r is an ordinary name.
    bool at_tag() {
        sc.skip_space();
        char c = sc.peek();
        return (c == 'l' || c == 'r') && sc.peek_raw(1) == '{';
    }

    ResourcePtr parse_rterm() {
        if (sc.consume('\\')) {
            std::vector<std::string> names;
            names.push_back(sc.ident());
            while (sc.at_ident()) names.push_back(sc.ident());
            sc.expect('.', "after binders");
            for (const auto& n : names) binders.push_back(n);
            ResourcePtr body = parse_rterm();
            for (std::size_t i = 0; i < names.size(); ++i) {
                binders.pop_back();
                body = ResourceTerm::abs(body);
            }
            return body;
        }
        if (at_tag()) {
            bool is_left = sc.peek() == 'l';
            ++sc.pos;  // tag letter
            sc.expect('{', "");
            Rational p = sc.probability();
            sc.expect('}', "after probability");
            ResourcePtr body = parse_rterm();
            return is_left ? ResourceTerm::left_tag(p, body) : ResourceTerm::right_tag(p, body);
        }
        return parse_app();
    }

    ResourcePtr parse_app() {
        ResourcePtr t = parse_atom();
        while (sc.peek() == '[') t = ResourceTerm::lin_app(t, parse_bag());
        return t;
    }

    ResourcePtr parse_atom() {
        if (sc.at_ident() && !at_tag()) return resolve(sc.ident());
        if (sc.consume('(')) {
            ResourcePtr t = parse_rterm();
            sc.expect(')', "to close the subterm");
            return t;
        }
        throw ParseError(sc.pos, "expected a resource term");
    }

    ResourcePtr parse_bag() {
        sc.expect('[', "to open a bag");
        std::vector<ResourcePtr> elems;
        if (!sc.consume(']')) {
            elems.push_back(parse_rterm());
            while (sc.consume(',')) elems.push_back(parse_rterm());
            sc.expect(']', "to close the bag");
        }
        return ResourceTerm::bag(std::move(elems));
    }

    ResourcePtr parse_input() {
        if (sc.peek() == '[') return parse_bag();
        return parse_rterm();
    }
};

}  // namespace

const ResourceDefinitions& resource_prelude() {
    static const ResourceDefinitions defs = [] {
        ResourceDefinitions d;
        d["I"] = ResourceTerm::abs(ResourceTerm::bound(0));
        return d;
    }();
    return defs;
}

ResourcePtr parse_resource(const std::string& text, const ResourceDefinitions* defs) {
    ResourceParser p(text, defs);
    ResourcePtr t = p.parse_input();
    if (!p.sc.eof()) throw ParseError(p.sc.pos, "trailing input");
    return t;
}

}  // namespace resource
}  // namespace plrc
