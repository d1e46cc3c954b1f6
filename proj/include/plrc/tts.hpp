#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "plrc/lambda_term.hpp"
#include "plrc/rational.hpp"

namespace plrc::tts {

// Tree transition system: linear states step through labelled
// subdistributions over branching states; branching states decompose through
// labelled tuples of linear states.  delta is total (absent entries read as
// the empty subdistribution); gamma is partial and its definedness is
// observable.
struct TTS {
    std::vector<std::string> lin_names;
    std::vector<std::string> bra_names;
    std::vector<std::string> lin_labels;
    std::vector<std::string> bra_labels;
    std::map<std::string, int> lin_index;
    std::map<std::string, int> bra_index;
    std::map<std::string, int> lin_label_index;
    std::map<std::string, int> bra_label_index;

    // (linear state, linear label) -> sparse subdistribution, sorted by state
    std::map<std::pair<int, int>, std::vector<std::pair<int, Rational>>> delta;
    // (branching state, branching label) -> tuple of linear states
    std::map<std::pair<int, int>, std::vector<int>> gamma;

    // Optional per-state annotations shown as comments by to_text.
    std::map<std::string, std::string> display;

    int lin_state(const std::string& name);
    int bra_state(const std::string& name);
    int lin_label(const std::string& name);
    int bra_label(const std::string& name);

    int find_lin(const std::string& name) const;
    int find_bra(const std::string& name) const;

    // Masses within [0,1], indices in range.
    void validate() const;
};

// Textual format, one transition per line:
//   lin q --ev-> {h1: 1/4, h2: 1/2}
//   bra h --(lam 2 y)-> q1 q2
// Labels with spaces are parenthesized; bare "lin q" / "bra h" declare
// states without transitions; '#' starts a comment.
TTS parse_tts(const std::string& text);
std::string to_text(const TTS& t);
std::string to_json(const TTS& t);

// ---- bisimilarity ----

struct Partition {
    std::vector<int> lin_class;
    std::vector<int> bra_class;
};

// Coarsest two-sorted partition closed under class-mass refinement on delta
// and definedness/arity/position refinement on gamma.
Partition bisimilarity(const TTS& t);

bool bisimilar(const TTS& t, const std::string& a, const std::string& b);

// ---- tests ----

// T_L ::= w | T_L & T_L | l(T_B)      (one branching child per linear step)
// T_B ::= w | T_B & T_B | i(T_L,...)  (arity must match gamma's tuple)
class TtsTest;
using TtsTestPtr = std::shared_ptr<const TtsTest>;

class TtsTest {
  public:
    enum class Kind { Omega, Conj, Step };

    static TtsTestPtr omega();
    static TtsTestPtr conj(TtsTestPtr left, TtsTestPtr right);
    static TtsTestPtr step(std::string label, std::vector<TtsTestPtr> children);

    Kind kind() const { return kind_; }
    const TtsTestPtr& left() const { return a_; }
    const TtsTestPtr& right() const { return b_; }
    const std::string& label() const { return label_; }
    const std::vector<TtsTestPtr>& children() const { return children_; }

  private:
    explicit TtsTest(Kind k) : kind_(k) {}

    Kind kind_;
    TtsTestPtr a_, b_;
    std::string label_;
    std::vector<TtsTestPtr> children_;
};

// Grammar: w | T & T | label(T,...) with quoted labels for spaces.
TtsTestPtr parse_tts_test(const std::string& text);
std::string to_string(const TtsTestPtr& t);

// Exact success probability of a linear-level (default) or branching-level
// test at the named state.
Rational eval_tts_test(const TTS& t, const TtsTestPtr& test, const std::string& state,
                       bool linear = true);

// Fair pool of linear-level tests of the given label depth (capped),
// including definedness probes and conjunction powers.
std::vector<TtsTestPtr> enumerate_tests(const TTS& t, unsigned depth, size_t cap);

// Searches the enumerated pools for a test separating two linear states.
std::optional<TtsTestPtr> distinguishing_test_search(const TTS& t, const std::string& a,
                                                     const std::string& b, unsigned max_depth);

// ---- labelled Markov chain translation ----

struct LMC {
    std::vector<std::string> states;
    std::vector<std::string> labels;
    std::map<std::string, int> state_index;
    std::map<std::string, int> label_index;
    std::map<std::pair<int, int>, std::vector<std::pair<int, Rational>>> trans;
};

// States Q + S; delta kept as is; gamma becomes Dirac loops "i#n" (defined
// with arity n) and Dirac edges "i#n@m" to the m-th component.
LMC lmc_translation(const TTS& t);

// Ordinary probabilistic partition refinement on the translated chain.
std::vector<int> lmc_bisimilarity(const LMC& m);

// ---- systems from lambda-terms ----

// Linear states are deduplicated terms, branching states their head normal
// forms; delta("ev") is the resolved frontier distribution and gamma exposes
// the head shape "lam n y" with the argument terms as successors.  States
// first reached at the depth bound keep an empty delta.
TTS tts_of_terms(const std::vector<syntax::TermPtr>& roots, unsigned fuel, unsigned depth);

}  // namespace plrc::tts
