#pragma once

#include <map>
#include <stdexcept>
#include <string>

#include "plrc/lambda_term.hpp"
#include "plrc/resource_term.hpp"

namespace plrc {

class ParseError : public std::runtime_error {
  public:
    ParseError(std::size_t pos, const std::string& message)
        : std::runtime_error(message + " (at offset " + std::to_string(pos) + ")"),
          pos_(pos) {}
    std::size_t pos() const { return pos_; }

  private:
    std::size_t pos_;
};

namespace syntax {

using Definitions = std::map<std::string, TermPtr>;

// I, K, S, Delta (self application), Omega (divergence) and W (alias of Omega).
const Definitions& prelude();

// Grammar:   term   := "\" name+ "." term | app [ "(+" rational ")" term ]
//            app    := atom+
//            atom   := name | "(" term ")"
// Names bound by an enclosing "\" become de Bruijn indices, names found in
// `defs` are replaced by their (closed) definition, the rest stay free.
TermPtr parse_term(const std::string& text, const Definitions* defs = nullptr);

}  // namespace syntax

namespace resource {

using ResourceDefinitions = std::map<std::string, ResourcePtr>;

// Just I for now; handy for writing nf examples.
const ResourceDefinitions& resource_prelude();

// Grammar:   rterm := "\" name+ "." rterm | tag | app
//            tag   := ("l" | "r") "{" rational "}" rterm
//            app   := atom bag*
//            atom  := name | "(" rterm ")"
//            bag   := "[" [rterm ("," rterm)*] "]"
// A top-level bag literal parses to a Bag node (a poly-term).
ResourcePtr parse_resource(const std::string& text, const ResourceDefinitions* defs = nullptr);

}  // namespace resource
}  // namespace plrc
