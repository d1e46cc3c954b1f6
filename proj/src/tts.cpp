#include "plrc/tts.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "plrc/operational.hpp"
#include "plrc/parser.hpp"

namespace plrc::tts {

namespace {

int find_or_add(std::vector<std::string>& names, std::map<std::string, int>& index,
                const std::string& name) {
    auto it = index.find(name);
    if (it != index.end()) return it->second;
    int id = static_cast<int>(names.size());
    names.push_back(name);
    index.emplace(name, id);
    return id;
}

}  // namespace

int TTS::lin_state(const std::string& name) { return find_or_add(lin_names, lin_index, name); }
int TTS::bra_state(const std::string& name) { return find_or_add(bra_names, bra_index, name); }
int TTS::lin_label(const std::string& name) {
    return find_or_add(lin_labels, lin_label_index, name);
}
int TTS::bra_label(const std::string& name) {
    return find_or_add(bra_labels, bra_label_index, name);
}

int TTS::find_lin(const std::string& name) const {
    auto it = lin_index.find(name);
    if (it == lin_index.end()) throw std::invalid_argument("unknown linear state: " + name);
    return it->second;
}

int TTS::find_bra(const std::string& name) const {
    auto it = bra_index.find(name);
    if (it == bra_index.end()) throw std::invalid_argument("unknown branching state: " + name);
    return it->second;
}

void TTS::validate() const {
    for (const auto& [key, dist] : delta) {
        Rational mass = 0;
        for (const auto& [s, p] : dist) {
            if (s < 0 || s >= static_cast<int>(bra_names.size()))
                throw std::invalid_argument("delta target out of range");
            if (p < 0 || p > 1) throw std::invalid_argument("delta mass outside [0,1]");
            mass += p;
        }
        if (mass > 1) throw std::invalid_argument("delta distribution exceeds mass 1");
    }
    for (const auto& [key, tuple] : gamma)
        for (int q : tuple)
            if (q < 0 || q >= static_cast<int>(lin_names.size()))
                throw std::invalid_argument("gamma target out of range");
}

// ---- textual format ----

namespace {

std::string trim(const std::string& s) {
    size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string word;
    while (in >> word) out.push_back(word);
    return out;
}

// State names are plain identifiers; anything else on a state position is a
// structural error (e.g. a {dist} body after a bra label).
bool valid_state_name(const std::string& s) {
    if (s.empty() || (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_'))
        return false;
    for (char c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
    return true;
}

// Splits "name --label-> rest" into its three parts; the label may be
// parenthesized to allow spaces.
struct TransLine {
    std::string state;
    std::string label;
    std::string rest;
    bool has_transition = false;
};

TransLine split_transition(const std::string& line, size_t lineno) {
    TransLine out;
    size_t arrow = line.find("--");
    if (arrow == std::string::npos) {
        out.state = trim(line);
        return out;
    }
    out.state = trim(line.substr(0, arrow));
    size_t end = line.find("->", arrow + 2);
    if (end == std::string::npos)
        throw ParseError(lineno, "expected '->' after label");
    std::string label = trim(line.substr(arrow + 2, end - arrow - 2));
    if (!label.empty() && label.front() == '(') {
        if (label.size() < 2 || label.back() != ')')
            throw ParseError(lineno, "unclosed parenthesized label");
        label = trim(label.substr(1, label.size() - 2));
    }
    if (label.empty()) throw ParseError(lineno, "empty transition label");
    out.label = label;
    out.rest = trim(line.substr(end + 2));
    out.has_transition = true;
    return out;
}

}  // namespace

TTS parse_tts(const std::string& text) {
    TTS out;
    std::istringstream in(text);
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;

        std::string kind;
        if (line.rfind("lin", 0) == 0)
            kind = "lin";
        else if (line.rfind("bra", 0) == 0)
            kind = "bra";
        else
            throw ParseError(lineno, "expected 'lin' or 'bra'");
        TransLine t = split_transition(trim(line.substr(3)), lineno);
        if (t.state.empty()) throw ParseError(lineno, "missing state name");
        if (!valid_state_name(t.state)) throw ParseError(lineno, "bad state name: " + t.state);

        if (kind == "lin") {
            int q = out.lin_state(t.state);
            if (!t.has_transition) continue;
            int l = out.lin_label(t.label);
            if (t.rest.empty() || t.rest.front() != '{' || t.rest.back() != '}')
                throw ParseError(lineno, "expected {target: prob, ...}");
            std::string body = trim(t.rest.substr(1, t.rest.size() - 2));
            std::vector<std::pair<int, Rational>> dist;
            if (!body.empty()) {
                std::istringstream entries(body);
                std::string entry;
                while (std::getline(entries, entry, ',')) {
                    size_t colon = entry.find(':');
                    if (colon == std::string::npos)
                        throw ParseError(lineno, "expected target: prob");
                    std::string name = trim(entry.substr(0, colon));
                    if (!valid_state_name(name))
                        throw ParseError(lineno, "bad state name: " + name);
                    auto p = parse_rational(trim(entry.substr(colon + 1)));
                    if (!p) throw ParseError(lineno, "bad probability");
                    dist.emplace_back(out.bra_state(name), *p);
                }
            }
            std::sort(dist.begin(), dist.end());
            // merge duplicate targets
            std::vector<std::pair<int, Rational>> merged;
            for (auto& [s, p] : dist) {
                if (!merged.empty() && merged.back().first == s)
                    merged.back().second += p;
                else
                    merged.emplace_back(s, p);
            }
            if (!merged.empty()) out.delta[{q, l}] = std::move(merged);
        } else {
            int s = out.bra_state(t.state);
            if (!t.has_transition) continue;
            int l = out.bra_label(t.label);
            std::vector<int> tuple;
            for (const auto& name : split_ws(t.rest)) {
                if (!valid_state_name(name))
                    throw ParseError(lineno, "bad state name: " + name);
                tuple.push_back(out.lin_state(name));
            }
            auto key = std::make_pair(s, l);
            if (out.gamma.count(key)) throw ParseError(lineno, "duplicate gamma entry");
            out.gamma[key] = std::move(tuple);
        }
    }
    try {
        out.validate();
    } catch (const std::invalid_argument& e) {
        // Structural problems in parsed text are parse errors.
        throw ParseError(lineno, e.what());
    }
    return out;
}

namespace {

std::string render_label(const std::string& label) {
    if (label.find(' ') != std::string::npos) return "(" + label + ")";
    return label;
}

}  // namespace

std::string to_text(const TTS& t) {
    std::ostringstream out;
    for (const auto& [name, note] : t.display) out << "# " << name << ": " << note << "\n";
    for (size_t q = 0; q < t.lin_names.size(); ++q) {
        bool any = false;
        for (size_t l = 0; l < t.lin_labels.size(); ++l) {
            auto it = t.delta.find({static_cast<int>(q), static_cast<int>(l)});
            if (it == t.delta.end()) continue;
            any = true;
            out << "lin " << t.lin_names[q] << " --" << render_label(t.lin_labels[l]) << "-> {";
            bool first = true;
            for (const auto& [s, p] : it->second) {
                if (!first) out << ", ";
                first = false;
                out << t.bra_names[s] << ": " << plrc::to_string(p);
            }
            out << "}\n";
        }
        if (!any) out << "lin " << t.lin_names[q] << "\n";
    }
    for (size_t s = 0; s < t.bra_names.size(); ++s) {
        bool any = false;
        for (size_t l = 0; l < t.bra_labels.size(); ++l) {
            auto it = t.gamma.find({static_cast<int>(s), static_cast<int>(l)});
            if (it == t.gamma.end()) continue;
            any = true;
            out << "bra " << t.bra_names[s] << " --" << render_label(t.bra_labels[l]) << "->";
            for (int q : it->second) out << " " << t.lin_names[q];
            out << "\n";
        }
        if (!any) out << "bra " << t.bra_names[s] << "\n";
    }
    return out.str();
}

std::string to_json(const TTS& t) {
    nlohmann::json j;
    j["lin_states"] = t.lin_names;
    j["bra_states"] = t.bra_names;
    j["lin_labels"] = t.lin_labels;
    j["bra_labels"] = t.bra_labels;
    j["delta"] = nlohmann::json::array();
    for (const auto& [key, dist] : t.delta) {
        nlohmann::json e;
        e["state"] = t.lin_names[key.first];
        e["label"] = t.lin_labels[key.second];
        e["dist"] = nlohmann::json::array();
        for (const auto& [s, p] : dist) {
            nlohmann::json d;
            d["target"] = t.bra_names[s];
            d["num"] = boost::multiprecision::numerator(p).str();
            d["den"] = boost::multiprecision::denominator(p).str();
            e["dist"].push_back(d);
        }
        j["delta"].push_back(e);
    }
    j["gamma"] = nlohmann::json::array();
    for (const auto& [key, tuple] : t.gamma) {
        nlohmann::json e;
        e["state"] = t.bra_names[key.first];
        e["label"] = t.bra_labels[key.second];
        e["tuple"] = nlohmann::json::array();
        for (int q : tuple) e["tuple"].push_back(t.lin_names[q]);
        j["gamma"].push_back(e);
    }
    return j.dump(2);
}

// ---- bisimilarity ----

namespace {

// Regroups by (old class, signature), assigning dense ids in encounter order.
template <class Sig>
int regroup(std::vector<int>& cls, const std::vector<Sig>& sigs) {
    std::map<std::pair<int, Sig>, int> ids;
    std::vector<int> next(cls.size());
    for (size_t i = 0; i < cls.size(); ++i) {
        auto key = std::make_pair(cls[i], sigs[i]);
        auto it = ids.find(key);
        if (it == ids.end()) it = ids.emplace(key, static_cast<int>(ids.size())).first;
        next[i] = it->second;
    }
    cls = std::move(next);
    return static_cast<int>(ids.size());
}

}  // namespace

Partition bisimilarity(const TTS& t) {
    size_t nq = t.lin_names.size();
    size_t ns = t.bra_names.size();
    Partition p;
    p.lin_class.assign(nq, 0);
    p.bra_class.assign(ns, 0);
    int qc = nq ? 1 : 0;
    int sc = ns ? 1 : 0;

    while (true) {
        // Branching refinement: definedness, arity and positional classes.
        using BraSig = std::vector<std::pair<bool, std::vector<int>>>;
        std::vector<BraSig> bsigs(ns);
        for (size_t s = 0; s < ns; ++s) {
            BraSig sig;
            for (size_t l = 0; l < t.bra_labels.size(); ++l) {
                auto it = t.gamma.find({static_cast<int>(s), static_cast<int>(l)});
                if (it == t.gamma.end()) {
                    sig.emplace_back(false, std::vector<int>{});
                } else {
                    std::vector<int> classes;
                    classes.reserve(it->second.size());
                    for (int q : it->second) classes.push_back(p.lin_class[q]);
                    sig.emplace_back(true, std::move(classes));
                }
            }
            bsigs[s] = std::move(sig);
        }
        int sc2 = ns ? regroup(p.bra_class, bsigs) : 0;

        // Linear refinement: class masses per label.
        using LinSig = std::vector<std::vector<std::pair<int, Rational>>>;
        std::vector<LinSig> qsigs(nq);
        for (size_t q = 0; q < nq; ++q) {
            LinSig sig;
            for (size_t l = 0; l < t.lin_labels.size(); ++l) {
                std::map<int, Rational> masses;
                auto it = t.delta.find({static_cast<int>(q), static_cast<int>(l)});
                if (it != t.delta.end())
                    for (const auto& [s, pr] : it->second) masses[p.bra_class[s]] += pr;
                sig.emplace_back(masses.begin(), masses.end());
            }
            qsigs[q] = std::move(sig);
        }
        int qc2 = nq ? regroup(p.lin_class, qsigs) : 0;

        if (qc2 == qc && sc2 == sc) break;
        qc = qc2;
        sc = sc2;
    }
    return p;
}

bool bisimilar(const TTS& t, const std::string& a, const std::string& b) {
    Partition p = bisimilarity(t);
    return p.lin_class[t.find_lin(a)] == p.lin_class[t.find_lin(b)];
}

// ---- tests ----

TtsTestPtr TtsTest::omega() { return TtsTestPtr(new TtsTest(Kind::Omega)); }

TtsTestPtr TtsTest::conj(TtsTestPtr left, TtsTestPtr right) {
    auto t = new TtsTest(Kind::Conj);
    t->a_ = std::move(left);
    t->b_ = std::move(right);
    return TtsTestPtr(t);
}

TtsTestPtr TtsTest::step(std::string label, std::vector<TtsTestPtr> children) {
    auto t = new TtsTest(Kind::Step);
    t->label_ = std::move(label);
    t->children_ = std::move(children);
    return TtsTestPtr(t);
}

namespace {

struct TtsTestParser {
    const std::string& text;
    size_t pos = 0;

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

    TtsTestPtr parse_test() {
        TtsTestPtr out = parse_atom();
        while (true) {
            skip();
            if (pos < text.size() && text[pos] == '&') {
                ++pos;
                out = TtsTest::conj(out, parse_atom());
            } else {
                return out;
            }
        }
    }

    std::string label() {
        skip();
        if (pos < text.size() && text[pos] == '"') {
            ++pos;
            size_t start = pos;
            while (pos < text.size() && text[pos] != '"') ++pos;
            if (pos >= text.size()) fail("unterminated label");
            std::string out = text.substr(start, pos - start);
            ++pos;
            return out;
        }
        size_t start = pos;
        while (pos < text.size() &&
               (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_' ||
                text[pos] == '\'' || text[pos] == '^' || text[pos] == '#' || text[pos] == '@'))
            ++pos;
        if (pos == start) fail("expected label or 'w'");
        return text.substr(start, pos - start);
    }

    TtsTestPtr parse_atom() {
        std::string name = label();
        skip();
        if (name == "w" && (pos >= text.size() || text[pos] != '(')) return TtsTest::omega();
        if (!eat('(')) fail("expected '(' after label");
        std::vector<TtsTestPtr> children;
        skip();
        if (!(pos < text.size() && text[pos] == ')')) {
            children.push_back(parse_test());
            while (eat(',')) children.push_back(parse_test());
        }
        if (!eat(')')) fail("expected ')'");
        return TtsTest::step(std::move(name), std::move(children));
    }
};

}  // namespace

TtsTestPtr parse_tts_test(const std::string& text) {
    TtsTestParser p{text};
    TtsTestPtr out = p.parse_test();
    p.skip();
    if (p.pos != text.size()) throw ParseError(p.pos, "trailing input after test");
    return out;
}

std::string to_string(const TtsTestPtr& t) {
    switch (t->kind()) {
        case TtsTest::Kind::Omega: return "w";
        case TtsTest::Kind::Conj: return to_string(t->left()) + " & " + to_string(t->right());
        case TtsTest::Kind::Step: {
            bool quote = t->label().find(' ') != std::string::npos || t->label() == "w";
            std::string out = quote ? "\"" + t->label() + "\"" : t->label();
            out += "(";
            for (size_t i = 0; i < t->children().size(); ++i)
                out += (i ? ", " : "") + to_string(t->children()[i]);
            out += ")";
            return out;
        }
    }
    return "?";
}

namespace {

Rational eval_lin(const TTS& t, const TtsTestPtr& test, int q);

Rational eval_bra(const TTS& t, const TtsTestPtr& test, int s) {
    switch (test->kind()) {
        case TtsTest::Kind::Omega: return 1;
        case TtsTest::Kind::Conj:
            return eval_bra(t, test->left(), s) * eval_bra(t, test->right(), s);
        case TtsTest::Kind::Step: {
            auto lit = t.bra_label_index.find(test->label());
            if (lit == t.bra_label_index.end())
                throw std::invalid_argument("unknown branching label: " + test->label());
            auto git = t.gamma.find({s, lit->second});
            if (git == t.gamma.end()) return 0;
            if (git->second.size() != test->children().size()) return 0;
            Rational out = 1;
            for (size_t i = 0; i < git->second.size(); ++i)
                out *= eval_lin(t, test->children()[i], git->second[i]);
            return out;
        }
    }
    throw std::logic_error("eval_bra: bad kind");
}

Rational eval_lin(const TTS& t, const TtsTestPtr& test, int q) {
    switch (test->kind()) {
        case TtsTest::Kind::Omega: return 1;
        case TtsTest::Kind::Conj:
            return eval_lin(t, test->left(), q) * eval_lin(t, test->right(), q);
        case TtsTest::Kind::Step: {
            if (test->children().size() != 1)
                throw std::invalid_argument("linear test step takes exactly one child");
            auto lit = t.lin_label_index.find(test->label());
            if (lit == t.lin_label_index.end())
                throw std::invalid_argument("unknown linear label: " + test->label());
            auto dit = t.delta.find({q, lit->second});
            if (dit == t.delta.end()) return 0;
            Rational out = 0;
            for (const auto& [s, p] : dit->second)
                out += p * eval_bra(t, test->children()[0], s);
            return out;
        }
    }
    throw std::logic_error("eval_lin: bad kind");
}

}  // namespace

Rational eval_tts_test(const TTS& t, const TtsTestPtr& test, const std::string& state,
                       bool linear) {
    if (linear) return eval_lin(t, test, t.find_lin(state));
    return eval_bra(t, test, t.find_bra(state));
}

// ---- test pools ----

namespace {

struct Valued {
    TtsTestPtr test;
    std::vector<Rational> values;
};

// Pool candidates share subtrees, so evaluation is cached per (node, state).
struct EvalMemo {
    std::map<std::pair<const TtsTest*, int>, Rational> lin, bra;
};

Rational eval_lin_m(const TTS& t, const TtsTestPtr& test, int q, EvalMemo& memo);

Rational eval_bra_m(const TTS& t, const TtsTestPtr& test, int s, EvalMemo& memo) {
    auto key = std::make_pair(test.get(), s);
    auto it = memo.bra.find(key);
    if (it != memo.bra.end()) return it->second;
    Rational out;
    switch (test->kind()) {
        case TtsTest::Kind::Omega: out = 1; break;
        case TtsTest::Kind::Conj:
            out = eval_bra_m(t, test->left(), s, memo) * eval_bra_m(t, test->right(), s, memo);
            break;
        case TtsTest::Kind::Step: {
            auto lit = t.bra_label_index.find(test->label());
            if (lit == t.bra_label_index.end())
                throw std::invalid_argument("unknown branching label: " + test->label());
            auto git = t.gamma.find({s, lit->second});
            if (git == t.gamma.end() || git->second.size() != test->children().size()) {
                out = 0;
                break;
            }
            out = 1;
            for (size_t i = 0; i < git->second.size(); ++i)
                out *= eval_lin_m(t, test->children()[i], git->second[i], memo);
            break;
        }
    }
    memo.bra.emplace(key, out);
    return out;
}

Rational eval_lin_m(const TTS& t, const TtsTestPtr& test, int q, EvalMemo& memo) {
    auto key = std::make_pair(test.get(), q);
    auto it = memo.lin.find(key);
    if (it != memo.lin.end()) return it->second;
    Rational out;
    switch (test->kind()) {
        case TtsTest::Kind::Omega: out = 1; break;
        case TtsTest::Kind::Conj:
            out = eval_lin_m(t, test->left(), q, memo) * eval_lin_m(t, test->right(), q, memo);
            break;
        case TtsTest::Kind::Step: {
            if (test->children().size() != 1)
                throw std::invalid_argument("linear test step takes exactly one child");
            auto lit = t.lin_label_index.find(test->label());
            if (lit == t.lin_label_index.end())
                throw std::invalid_argument("unknown linear label: " + test->label());
            auto dit = t.delta.find({q, lit->second});
            if (dit == t.delta.end()) {
                out = 0;
                break;
            }
            out = 0;
            for (const auto& [s, p] : dit->second)
                out += p * eval_bra_m(t, test->children()[0], s, memo);
            break;
        }
    }
    memo.lin.emplace(key, out);
    return out;
}

struct Pools {
    const TTS& t;
    size_t cap;
    std::vector<std::vector<Valued>> lin = {};  // per depth, index 0 unused
    std::vector<std::vector<Valued>> bra = {};
    EvalMemo memo = {};
    // Every evaluated candidate is kept alive so memo keys (node addresses)
    // stay unique even when the pool rejects the candidate.
    std::vector<TtsTestPtr> evaluated = {};
    // Observed arities per branching label (filled on first grow()).
    std::map<int, std::set<size_t>> arities = {};

    std::vector<Rational> lin_values(const TtsTestPtr& test) {
        std::vector<Rational> out(t.lin_names.size());
        for (size_t q = 0; q < out.size(); ++q)
            out[q] = eval_lin_m(t, test, static_cast<int>(q), memo);
        return out;
    }

    std::vector<Rational> bra_values(const TtsTestPtr& test) {
        std::vector<Rational> out(t.bra_names.size());
        for (size_t s = 0; s < out.size(); ++s)
            out[s] = eval_bra_m(t, test, static_cast<int>(s), memo);
        return out;
    }

    // Adds the test if its value vector is new for this pool.
    static void push(std::vector<Valued>& pool, std::set<std::vector<Rational>>& seen,
                     TtsTestPtr test, std::vector<Rational> values, size_t cap) {
        if (pool.size() >= cap) return;
        if (!seen.insert(values).second) return;
        pool.push_back({std::move(test), std::move(values)});
    }

    void build(unsigned max_depth) {
        while (lin.size() <= max_depth) grow();
    }

    // Appends one depth level, so callers can deepen pools on demand.
    void grow() {
        if (lin.empty()) {
            lin.emplace_back();  // index 0 unused
            bra.emplace_back();
            for (const auto& [key, tuple] : t.gamma) arities[key.second].insert(tuple.size());
        }
        const unsigned d = static_cast<unsigned>(lin.size());
        lin.emplace_back();
        bra.emplace_back();
        {
            std::set<std::vector<Rational>> bseen;
            auto bpush = [&](TtsTestPtr test) {
                if (bra[d].size() >= cap) return;  // skip evaluation once full
                evaluated.push_back(test);
                push(bra[d], bseen, test, bra_values(test), cap);
            };
            bpush(TtsTest::omega());
            if (d > 1)
                for (const auto& v : bra[d - 1]) bpush(v.test);

            // Definedness probes and single-position refinements.
            std::vector<TtsTestPtr> bases;
            for (const auto& [label_id, sizes] : arities) {
                const std::string& label = t.bra_labels[label_id];
                for (size_t n : sizes) {
                    std::vector<TtsTestPtr> children(n, TtsTest::omega());
                    TtsTestPtr base = TtsTest::step(label, children);
                    bases.push_back(base);
                    bpush(base);
                    if (d > 1) {
                        for (size_t i = 0; i < n; ++i)
                            for (const auto& v : lin[d - 1]) {
                                if (v.test->kind() == TtsTest::Kind::Omega) continue;
                                std::vector<TtsTestPtr> cs(n, TtsTest::omega());
                                cs[i] = v.test;
                                bpush(TtsTest::step(label, cs));
                            }
                    }
                }
            }
            // Pairwise conjunctions of the probes (definedness combinations).
            for (size_t i = 0; i < bases.size(); ++i)
                for (size_t j = i + 1; j < bases.size(); ++j)
                    bpush(TtsTest::conj(bases[i], bases[j]));
            // Conjunction powers of everything gathered so far (moments).
            size_t base_count = bra[d].size();
            for (size_t i = 0; i < base_count; ++i) {
                TtsTestPtr sq = TtsTest::conj(bra[d][i].test, bra[d][i].test);
                bpush(sq);
                bpush(TtsTest::conj(sq, bra[d][i].test));
            }

            std::set<std::vector<Rational>> lseen;
            auto lpush = [&](TtsTestPtr test) {
                if (lin[d].size() >= cap) return;  // skip evaluation once full
                evaluated.push_back(test);
                push(lin[d], lseen, test, lin_values(test), cap);
            };
            lpush(TtsTest::omega());
            if (d > 1)
                for (const auto& v : lin[d - 1]) lpush(v.test);
            for (size_t l = 0; l < t.lin_labels.size(); ++l)
                for (const auto& v : bra[d])
                    lpush(TtsTest::step(t.lin_labels[l], {v.test}));
            size_t lin_count = lin[d].size();
            for (size_t i = 0; i < lin_count; ++i) {
                TtsTestPtr sq = TtsTest::conj(lin[d][i].test, lin[d][i].test);
                lpush(sq);
                lpush(TtsTest::conj(sq, lin[d][i].test));
            }
        }
    }
};

}  // namespace

std::vector<TtsTestPtr> enumerate_tests(const TTS& t, unsigned depth, size_t cap) {
    Pools p{t, cap};
    p.build(depth);
    std::vector<TtsTestPtr> out;
    for (const auto& v : p.lin[depth]) out.push_back(v.test);
    return out;
}

std::optional<TtsTestPtr> distinguishing_test_search(const TTS& t, const std::string& a,
                                                     const std::string& b, unsigned max_depth) {
    int qa = t.find_lin(a);
    int qb = t.find_lin(b);
    Pools p{t, 4000};
    // Deepen lazily: most distinguishable pairs separate at shallow depth,
    // and each level carries the distinct tests of the previous one forward.
    for (unsigned d = 1; d <= max_depth; ++d) {
        p.build(d);
        for (const auto& v : p.lin[d])
            if (v.values[qa] != v.values[qb]) return v.test;
    }
    return std::nullopt;
}

// ---- labelled Markov chain translation ----

LMC lmc_translation(const TTS& t) {
    LMC m;
    for (const auto& name : t.lin_names)
        find_or_add(m.states, m.state_index, "L:" + name);
    for (const auto& name : t.bra_names)
        find_or_add(m.states, m.state_index, "B:" + name);
    int nq = static_cast<int>(t.lin_names.size());

    for (const auto& [key, dist] : t.delta) {
        int label = find_or_add(m.labels, m.label_index, t.lin_labels[key.second]);
        std::vector<std::pair<int, Rational>> moved;
        moved.reserve(dist.size());
        for (const auto& [s, p] : dist) moved.emplace_back(nq + s, p);
        m.trans[{key.first, label}] = std::move(moved);
    }
    for (const auto& [key, tuple] : t.gamma) {
        const std::string& base = t.bra_labels[key.second];
        std::string arity_label = base + "#" + std::to_string(tuple.size());
        int dl = find_or_add(m.labels, m.label_index, arity_label);
        m.trans[{nq + key.first, dl}] = {{nq + key.first, Rational(1)}};
        for (size_t i = 0; i < tuple.size(); ++i) {
            int pl = find_or_add(m.labels, m.label_index,
                                 arity_label + "@" + std::to_string(i));
            m.trans[{nq + key.first, pl}] = {{tuple[i], Rational(1)}};
        }
    }
    return m;
}

std::vector<int> lmc_bisimilarity(const LMC& m) {
    size_t n = m.states.size();
    std::vector<int> cls(n, 0);
    int count = n ? 1 : 0;
    while (true) {
        using Sig = std::vector<std::vector<std::pair<int, Rational>>>;
        std::vector<Sig> sigs(n);
        for (size_t st = 0; st < n; ++st) {
            Sig sig;
            for (size_t l = 0; l < m.labels.size(); ++l) {
                std::map<int, Rational> masses;
                auto it = m.trans.find({static_cast<int>(st), static_cast<int>(l)});
                if (it != m.trans.end())
                    for (const auto& [target, p] : it->second) masses[cls[target]] += p;
                sig.emplace_back(masses.begin(), masses.end());
            }
            sigs[st] = std::move(sig);
        }
        int count2 = n ? regroup(cls, sigs) : 0;
        if (count2 == count) break;
        count = count2;
    }
    return cls;
}

// ---- systems from lambda-terms ----

TTS tts_of_terms(const std::vector<syntax::TermPtr>& roots, unsigned fuel, unsigned depth) {
    using syntax::TermPtr;
    TTS out;
    out.lin_label("ev");

    std::map<TermPtr, int, syntax::TermLess> lin_ids;
    std::map<TermPtr, int, syntax::TermLess> bra_ids;
    std::vector<bool> explored;

    auto lin_of = [&](const TermPtr& term) {
        auto it = lin_ids.find(term);
        if (it != lin_ids.end()) return it->second;
        int id = out.lin_state("t" + std::to_string(lin_ids.size()));
        out.display[out.lin_names[id]] = syntax::to_string(term);
        lin_ids.emplace(term, id);
        explored.push_back(false);
        return id;
    };

    struct Entry {
        TermPtr term;
        unsigned remaining;
    };
    std::deque<Entry> queue;
    for (const auto& r : roots) {
        lin_of(r);
        queue.push_back({r, depth});
    }

    while (!queue.empty()) {
        Entry e = std::move(queue.front());
        queue.pop_front();
        int q = lin_of(e.term);
        if (e.remaining == 0 || explored[q]) continue;
        explored[q] = true;

        operational::ReductionFrontier f = operational::head_reductions(e.term, fuel);
        std::map<int, Rational> dist;
        for (const auto& branch : f.resolved) {
            TermPtr hterm = branch.hnf.to_term();
            int s;
            auto it = bra_ids.find(hterm);
            if (it != bra_ids.end()) {
                s = it->second;
            } else {
                s = out.bra_state("h" + std::to_string(bra_ids.size()));
                out.display[out.bra_names[s]] = syntax::to_string(hterm);
                bra_ids.emplace(hterm, s);

                std::string head = branch.hnf.head_is_bound
                                       ? "^" + std::to_string(branch.hnf.head_index)
                                       : branch.hnf.head_name;
                std::string label =
                    "lam " + std::to_string(branch.hnf.binders) + " " + head;
                std::vector<int> tuple;
                for (const auto& arg : branch.hnf.args) tuple.push_back(lin_of(arg));
                out.gamma[{s, out.bra_label(label)}] = std::move(tuple);
            }
            // Re-enqueue the arguments even for a known hnf: an earlier visit
            // may have reached them with a smaller depth budget.
            for (const auto& arg : branch.hnf.args)
                queue.push_back({arg, e.remaining - 1});
            dist[s] += operational::prob_of(branch.path);
        }
        if (!dist.empty())
            out.delta[{q, 0}] = std::vector<std::pair<int, Rational>>(dist.begin(), dist.end());
    }
    out.validate();
    return out;
}

}  // namespace plrc::tts
