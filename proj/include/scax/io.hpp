#pragma once

#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "scax/abstraction.hpp"
#include "scax/alignment.hpp"
#include "scax/domain.hpp"
#include "scax/expr.hpp"
#include "scax/intervention.hpp"
#include "scax/scm.hpp"
#include "scax/tau.hpp"

namespace scax {

// ---------------------------------------------------------------------------
// Workspace: every named object loadable from one .sca file.
// ---------------------------------------------------------------------------

struct Workspace {
    std::vector<Domain> domains;                    // name-sorted
    std::vector<Scm> models;                        // name-sorted
    std::vector<Tau> taus;                          // name-sorted
    std::vector<Alignment> alignments;              // name-sorted
    std::vector<InterventionSets> intervention_sets; // name-sorted

    const Scm* find_model(const std::string& name) const {
        for (const auto& m : models)
            if (m.name() == name) return &m;
        return nullptr;
    }
    const Tau* find_tau(const std::string& name) const {
        for (const auto& t : taus)
            if (t.name() == name) return &t;
        return nullptr;
    }
    const Alignment* find_alignment(const std::string& name) const {
        for (const auto& a : alignments)
            if (a.name() == name) return &a;
        return nullptr;
    }
    const InterventionSets* find_sets(const std::string& name) const {
        for (const auto& s : intervention_sets)
            if (s.name == name) return &s;
        return nullptr;
    }
};

struct ParseResult {
    std::optional<Workspace> workspace;   // present iff no error diagnostics
    Diagnostics diagnostics;
};

// ---------------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------------

namespace io_detail {

enum class Tok {
    Ident, Keyword, Int,
    LParen, RParen, LBrace, RBrace, LBracket, RBracket,
    Colon, Comma, Equals, Plus, Minus, Star, Slash,
    Arrow, Assign, DotDot, Eof
};

struct Token {
    Tok kind = Tok::Eof;
    std::string text;
    Value num = 0;
    int line = 1, col = 1;
};

inline const std::set<std::string>& keywords() {
    static const std::set<std::string> kw = {
        "domain", "model", "tau", "align", "interventions", "exo", "eq", "map", "pi",
        "low", "high", "weights", "eps", "mod", "and", "or", "xor", "not", "ite", "T", "F"};
    return kw;
}

struct SyntaxError {
    Diagnostic diag;
};

[[noreturn]] inline void fail(int line, int col, const std::string& msg) {
    throw SyntaxError{{Severity::Error, "syntax-error", msg, line, col}};
}

inline std::vector<Token> lex(std::string_view text, Diagnostics& diags) {
    std::vector<Token> out;
    int line = 1, col = 1;
    std::size_t i = 0;
    auto advance = [&](std::size_t n = 1) {
        for (std::size_t k = 0; k < n; ++k) {
            if (i < text.size() && text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
            ++i;
        }
    };
    while (i < text.size()) {
        char c = text[i];
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            advance();
            continue;
        }
        if (c == '#') {
            while (i < text.size() && text[i] != '\n') advance();
            continue;
        }
        Token t;
        t.line = line;
        t.col = col;
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = i;
            while (i < text.size() &&
                   (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_'))
                advance();
            t.text = std::string(text.substr(start, i - start));
            t.kind = keywords().count(t.text) ? Tok::Keyword : Tok::Ident;
            out.push_back(std::move(t));
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t start = i;
            while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) advance();
            t.text = std::string(text.substr(start, i - start));
            t.kind = Tok::Int;
            try {
                t.num = std::stoll(t.text);
            } catch (...) {
                diags.push_back({Severity::Error, "syntax-error",
                                 "integer literal out of range: " + t.text, t.line, t.col});
                t.num = 0;
            }
            if (t.num > (Value(1) << 31))
                diags.push_back({Severity::Error, "syntax-error",
                                 "integer literal too large: " + t.text, t.line, t.col});
            out.push_back(std::move(t));
            continue;
        }
        auto two = [&](char a, char b) {
            return c == a && i + 1 < text.size() && text[i + 1] == b;
        };
        if (two('-', '>')) { t.kind = Tok::Arrow; t.text = "->"; advance(2); }
        else if (two('<', '-')) { t.kind = Tok::Assign; t.text = "<-"; advance(2); }
        else if (two('.', '.')) { t.kind = Tok::DotDot; t.text = ".."; advance(2); }
        else {
            switch (c) {
            case '(': t.kind = Tok::LParen; break;
            case ')': t.kind = Tok::RParen; break;
            case '{': t.kind = Tok::LBrace; break;
            case '}': t.kind = Tok::RBrace; break;
            case '[': t.kind = Tok::LBracket; break;
            case ']': t.kind = Tok::RBracket; break;
            case ':': t.kind = Tok::Colon; break;
            case ',': t.kind = Tok::Comma; break;
            case '=': t.kind = Tok::Equals; break;
            case '+': t.kind = Tok::Plus; break;
            case '-': t.kind = Tok::Minus; break;
            case '*': t.kind = Tok::Star; break;
            case '/': t.kind = Tok::Slash; break;
            default:
                diags.push_back({Severity::Error, "syntax-error",
                                 std::string("unexpected character '") + c + "'", line, col});
                advance();
                continue;
            }
            t.text = std::string(1, c);
            advance();
        }
        out.push_back(std::move(t));
    }
    Token eof;
    eof.kind = Tok::Eof;
    eof.line = line;
    eof.col = col;
    out.push_back(eof);
    return out;
}

// ---------------------------------------------------------------------------
// Parser: raw declarations. Statements are self-delimiting because every
// statement starts with a reserved keyword and expressions never absorb
// keywords, so the format is newline-agnostic.
// ---------------------------------------------------------------------------

struct DomainDecl {
    std::string name;
    std::vector<Value> values;
    bool boolean_display = false;
    int line = 0, col = 0;
};

struct WorkspaceDecl {
    std::vector<DomainDecl> domains;
    std::vector<ScmDecl> models;
    std::vector<TauDecl> taus;
    std::vector<AlignmentDecl> alignments;
    std::vector<InterventionSetsDecl> sets;
};

class Parser {
public:
    Parser(std::vector<Token> toks, Diagnostics& diags) : toks_(std::move(toks)), diags_(diags) {}

    WorkspaceDecl parse() {
        WorkspaceDecl w;
        while (!at(Tok::Eof)) {
            try {
                if (at_keyword("domain")) w.domains.push_back(parse_domain());
                else if (at_keyword("model")) w.models.push_back(parse_model());
                else if (at_keyword("tau")) w.taus.push_back(parse_tau());
                else if (at_keyword("align")) w.alignments.push_back(parse_align());
                else if (at_keyword("interventions")) w.sets.push_back(parse_sets());
                else
                    fail(peek().line, peek().col,
                         "expected a top-level declaration (domain, model, tau, align, "
                         "interventions), got '" + peek().text + "'");
            } catch (const SyntaxError& e) {
                diags_.push_back(e.diag);
                sync_toplevel();
            }
        }
        return w;
    }

    // Parses a single intervention literal, e.g. "eps" or
    // "X4 <- T, X1 <- F"; shared with the command line.
    InterventionDecl parse_intervention_literal() {
        InterventionDecl d = parse_intervention();
        if (!at(Tok::Eof))
            fail(peek().line, peek().col, "trailing input after intervention: '" + peek().text + "'");
        return d;
    }

    ExprPtr parse_expression_only() {
        ExprPtr e = parse_expr();
        if (!at(Tok::Eof))
            fail(peek().line, peek().col, "trailing input after expression: '" + peek().text + "'");
        return e;
    }

private:
    const Token& peek(std::size_t ahead = 0) const {
        std::size_t k = std::min(pos_ + ahead, toks_.size() - 1);
        return toks_[k];
    }
    const Token& get() { return toks_[std::min(pos_++, toks_.size() - 1)]; }
    bool at(Tok k) const { return peek().kind == k; }
    bool at_keyword(const char* kw) const { return at(Tok::Keyword) && peek().text == kw; }

    Token expect(Tok k, const char* what) {
        if (!at(k)) fail(peek().line, peek().col, std::string("expected ") + what + ", got '" +
                                                       (peek().kind == Tok::Eof ? "end of input"
                                                                                : peek().text) + "'");
        return get();
    }

    Token expect_keyword(const char* kw) {
        if (!at_keyword(kw))
            fail(peek().line, peek().col,
                 std::string("expected '") + kw + "', got '" + peek().text + "'");
        return get();
    }

    std::string expect_name(const char* what) {
        if (!at(Tok::Ident))
            fail(peek().line, peek().col,
                 std::string("expected ") + what + ", got '" + peek().text + "'");
        return get().text;
    }

    void sync_toplevel() {
        static const std::set<std::string> starters = {"domain", "model", "tau", "align",
                                                       "interventions"};
        int depth = 0;
        while (!at(Tok::Eof)) {
            if (at(Tok::LBrace)) ++depth;
            if (at(Tok::RBrace) && depth > 0) --depth;
            else if (depth == 0 && at(Tok::Keyword) && starters.count(peek().text)) return;
            get();
        }
    }

    Value parse_value() {
        bool negative = false;
        if (at(Tok::Minus)) {
            get();
            negative = true;
        }
        if (at_keyword("T")) { get(); return negative ? -1 : 1; }
        if (at_keyword("F")) { get(); return 0; }
        Token t = expect(Tok::Int, "a value");
        return negative ? -t.num : t.num;
    }

    DomainDecl parse_domain() {
        DomainDecl d;
        Token kw = expect_keyword("domain");
        d.line = kw.line;
        d.col = kw.col;
        d.name = expect_name("a domain name");
        expect(Tok::Equals, "'='");
        bool any = false;
        while (at(Tok::Int) || at(Tok::Minus) || at_keyword("T") || at_keyword("F")) {
            any = true;
            if (at_keyword("T") || at_keyword("F")) d.boolean_display = true;
            Value v = parse_value();
            if (at(Tok::DotDot)) {
                get();
                Value hi = parse_value();
                if (hi < v)
                    fail(peek().line, peek().col, "descending range in domain '" + d.name + "'");
                for (Value x = v; x <= hi; ++x) d.values.push_back(x);
            } else {
                d.values.push_back(v);
            }
        }
        if (!any) fail(peek().line, peek().col, "domain '" + d.name + "' lists no values");
        return d;
    }

    ScmDecl parse_model() {
        ScmDecl m;
        Token kw = expect_keyword("model");
        m.line = kw.line;
        m.col = kw.col;
        m.name = expect_name("a model name");
        expect(Tok::LBrace, "'{'");
        while (!at(Tok::RBrace)) {
            if (at_keyword("exo") || at_keyword("eq")) {
                VarDecl v;
                bool is_eq = peek().text == "eq";
                Token t = get();
                v.line = t.line;
                v.col = t.col;
                v.kind = is_eq ? VarKind::Endogenous : VarKind::Exogenous;
                v.name = expect_name("a variable name");
                expect(Tok::Colon, "':'");
                // Domain reference resolved later; remember the name.
                v.domain = Domain(expect_name("a domain name"), {});
                if (is_eq) {
                    expect(Tok::Equals, "'='");
                    v.equation = parse_expr();
                }
                m.vars.push_back(std::move(v));
            } else if (at_keyword("weights")) {
                get();
                expect(Tok::LBrace, "'{'");
                while (!at(Tok::RBrace)) {
                    WeightDecl w;
                    Token lp = expect(Tok::LParen, "'('");
                    w.line = lp.line;
                    w.col = lp.col;
                    while (true) {
                        std::string var = expect_name("a variable name");
                        expect(Tok::Equals, "'='");
                        w.setting[var] = parse_value();
                        if (at(Tok::Comma)) { get(); continue; }
                        break;
                    }
                    expect(Tok::RParen, "')'");
                    expect(Tok::Colon, "':'");
                    w.weight.num = parse_value();
                    if (at(Tok::Slash)) {
                        get();
                        w.weight.den = parse_value();
                    }
                    m.weights.push_back(std::move(w));
                }
                expect(Tok::RBrace, "'}'");
            } else {
                fail(peek().line, peek().col,
                     "expected 'exo', 'eq' or 'weights' in model '" + m.name + "', got '" +
                         peek().text + "'");
            }
        }
        expect(Tok::RBrace, "'}'");
        return m;
    }

    TauDecl parse_tau() {
        TauDecl t;
        Token kw = expect_keyword("tau");
        t.line = kw.line;
        t.col = kw.col;
        t.name = expect_name("a tau name");
        expect(Tok::Colon, "':'");
        t.low_model = expect_name("the low model name");
        expect(Tok::Arrow, "'->'");
        t.high_model = expect_name("the high model name");
        expect(Tok::LBrace, "'{'");
        while (at_keyword("map")) {
            TauMapDecl m;
            Token mk = get();
            m.line = mk.line;
            m.col = mk.col;
            m.high_var = expect_name("a high-level variable name");
            expect(Tok::Equals, "'='");
            m.expr = parse_expr();
            t.maps.push_back(std::move(m));
        }
        expect(Tok::RBrace, "'}'");
        return t;
    }

    AlignmentDecl parse_align() {
        AlignmentDecl a;
        Token kw = expect_keyword("align");
        a.line = kw.line;
        a.col = kw.col;
        a.name = expect_name("an alignment name");
        expect(Tok::Colon, "':'");
        a.tau_name = expect_name("a tau name");
        expect(Tok::LBrace, "'{'");
        while (at_keyword("pi")) {
            PiDecl p;
            Token pk = get();
            p.line = pk.line;
            p.col = pk.col;
            p.high_var = expect_name("a high-level variable name");
            expect(Tok::Equals, "'='");
            expect(Tok::LBrace, "'{'");
            while (at(Tok::Ident)) p.low_vars.push_back(get().text);
            expect(Tok::RBrace, "'}'");
            a.pis.push_back(std::move(p));
        }
        expect(Tok::RBrace, "'}'");
        return a;
    }

    InterventionDecl parse_intervention() {
        InterventionDecl d;
        d.line = peek().line;
        d.col = peek().col;
        if (at_keyword("eps")) {
            get();
            return d;
        }
        while (true) {
            ReplacementDecl r;
            r.line = peek().line;
            r.col = peek().col;
            r.target = expect_name("a target variable name");
            expect(Tok::Assign, "'<-'");
            r.expr = parse_expr();
            d.replacements.push_back(std::move(r));
            if (at(Tok::Comma)) { get(); continue; }
            break;
        }
        return d;
    }

    InterventionSetsDecl parse_sets() {
        InterventionSetsDecl s;
        Token kw = expect_keyword("interventions");
        s.line = kw.line;
        s.col = kw.col;
        s.name = expect_name("an interventions name");
        expect(Tok::Colon, "':'");
        s.low_model = expect_name("the low model name");
        expect(Tok::Arrow, "'->'");
        s.high_model = expect_name("the high model name");
        expect(Tok::LBrace, "'{'");
        while (at_keyword("low") || at_keyword("high")) {
            bool is_low = peek().text == "low";
            get();
            (is_low ? s.low : s.high).push_back(parse_intervention());
        }
        expect(Tok::RBrace, "'}'");
        return s;
    }

    // Expression grammar, loosest to tightest:
    //   or < and < xor < mod < (+,-) < * < (not, unary -) < atom
    ExprPtr parse_expr() { return parse_or(); }

    ExprPtr parse_or() {
        ExprPtr e = parse_and();
        while (at_keyword("or")) {
            get();
            e = expr::lor(e, parse_and());
        }
        return e;
    }

    ExprPtr parse_and() {
        ExprPtr e = parse_xor();
        while (at_keyword("and")) {
            get();
            e = expr::land(e, parse_xor());
        }
        return e;
    }

    ExprPtr parse_xor() {
        ExprPtr e = parse_mod();
        while (at_keyword("xor")) {
            get();
            e = expr::lxor(e, parse_mod());
        }
        return e;
    }

    ExprPtr parse_mod() {
        ExprPtr e = parse_add();
        if (at_keyword("mod")) {
            Token t = get();
            Token k = expect(Tok::Int, "a positive modulus");
            if (k.num <= 0) fail(t.line, t.col, "modulus must be positive");
            e = expr::mod(e, k.num);
        }
        return e;
    }

    ExprPtr parse_add() {
        ExprPtr e = parse_mul();
        while (at(Tok::Plus) || at(Tok::Minus)) {
            bool plus = at(Tok::Plus);
            get();
            e = plus ? expr::add(e, parse_mul()) : expr::sub(e, parse_mul());
        }
        return e;
    }

    ExprPtr parse_mul() {
        ExprPtr e = parse_unary();
        while (at(Tok::Star)) {
            get();
            e = expr::mul(e, parse_unary());
        }
        return e;
    }

    ExprPtr parse_unary() {
        if (at_keyword("not")) {
            get();
            return expr::lnot(parse_unary());
        }
        if (at(Tok::Minus)) {
            get();
            return expr::neg(parse_unary());
        }
        return parse_primary();
    }

    ExprPtr parse_primary() {
        if (at(Tok::Int)) return expr::constant(get().num);
        if (at_keyword("T")) { get(); return expr::constant(1); }
        if (at_keyword("F")) { get(); return expr::constant(0); }
        if (at(Tok::Ident)) return expr::var(get().text);
        if (at_keyword("ite")) {
            get();
            expect(Tok::LParen, "'('");
            ExprPtr c = parse_expr();
            expect(Tok::Comma, "','");
            ExprPtr a = parse_expr();
            expect(Tok::Comma, "','");
            ExprPtr b = parse_expr();
            expect(Tok::RParen, "')'");
            return expr::ite(c, a, b);
        }
        if (at(Tok::LParen)) {
            get();
            ExprPtr e = parse_expr();
            expect(Tok::RParen, "')'");
            return e;
        }
        if (at(Tok::LBracket)) {
            get();
            ExprPtr a = parse_expr();
            expect(Tok::Equals, "'='");
            ExprPtr b = parse_expr();
            expect(Tok::RBracket, "']'");
            return expr::eq(a, b);
        }
        fail(peek().line, peek().col, "expected an expression, got '" +
                                          (peek().kind == Tok::Eof ? "end of input" : peek().text) +
                                          "'");
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    Diagnostics& diags_;
};

} // namespace io_detail

// ---------------------------------------------------------------------------
// Workspace compilation: declarations are collected first, then resolved
// in dependency order, so file order never matters.
// ---------------------------------------------------------------------------

inline ParseResult compile_workspace(const io_detail::WorkspaceDecl& decl) {
    ParseResult res;
    Diagnostics& diags = res.diagnostics;
    Workspace w;

    std::map<std::string, Domain> domains;
    for (const auto& d : decl.domains) {
        Domain dom(d.name, d.values, d.boolean_display);
        for (auto diag : dom.validate()) {
            diag.line = d.line;
            diag.col = d.col;
            diags.push_back(diag);
        }
        if (!domains.emplace(d.name, dom).second)
            diags.push_back({Severity::Error, "duplicate-name",
                             "domain '" + d.name + "' declared twice", d.line, d.col});
    }

    std::set<std::string> model_names;
    for (auto m : decl.models) {
        if (!model_names.insert(m.name).second) {
            diags.push_back({Severity::Error, "duplicate-name",
                             "model '" + m.name + "' declared twice", m.line, m.col});
            continue;
        }
        bool resolved = true;
        for (auto& v : m.vars) {
            auto it = domains.find(v.domain.name());
            if (it == domains.end()) {
                diags.push_back({Severity::Error, "unknown-domain",
                                 "variable '" + v.name + "' uses undeclared domain '" +
                                     v.domain.name() + "'",
                                 v.line, v.col});
                resolved = false;
            } else {
                v.domain = it->second;
            }
        }
        if (!resolved) continue;
        auto compiled = Scm::compile(m, diags);
        if (compiled) w.models.push_back(std::move(*compiled));
    }

    std::set<std::string> tau_names;
    for (const auto& t : decl.taus) {
        if (!tau_names.insert(t.name).second) {
            diags.push_back({Severity::Error, "duplicate-name",
                             "tau '" + t.name + "' declared twice", t.line, t.col});
            continue;
        }
        const Scm* low = nullptr;
        const Scm* high = nullptr;
        for (const auto& m : w.models) {
            if (m.name() == t.low_model) low = &m;
            if (m.name() == t.high_model) high = &m;
        }
        if (!low || !high) {
            diags.push_back({Severity::Error, "unknown-model",
                             "tau '" + t.name + "' references an unknown or invalid model", t.line,
                             t.col});
            continue;
        }
        auto compiled = Tau::compile(*low, *high, t, diags);
        if (compiled) w.taus.push_back(std::move(*compiled));
    }

    std::set<std::string> align_names;
    for (const auto& a : decl.alignments) {
        if (!align_names.insert(a.name).second) {
            diags.push_back({Severity::Error, "duplicate-name",
                             "alignment '" + a.name + "' declared twice", a.line, a.col});
            continue;
        }
        const Tau* tau = nullptr;
        for (const auto& t : w.taus)
            if (t.name() == a.tau_name) tau = &t;
        if (!tau) {
            diags.push_back({Severity::Error, "unknown-tau",
                             "alignment '" + a.name + "' references unknown tau '" + a.tau_name +
                                 "'",
                             a.line, a.col});
            continue;
        }
        const Scm* low = w.find_model(tau->low_model());
        const Scm* high = w.find_model(tau->high_model());
        auto compiled = Alignment::compile(*low, *high, *tau, a, diags);
        if (!compiled) continue;
        AlignmentReport rep = validate_alignment(*low, *high, *tau, *compiled);
        for (const auto& v : rep.violations) {
            std::string msg = "alignment '" + a.name + "': tau map for '" + v.high_var +
                              "' reads outside its cluster; ";
            msg += "inputs agreeing on the cluster map to different values";
            diags.push_back({Severity::Error, "factorization-violation", msg, a.line, a.col});
        }
        if (!rep.constructive())
            diags.push_back({Severity::Info, "non-partition-alignment",
                             "alignment '" + a.name +
                                 "' has overlapping clusters; constructive mode is unavailable",
                             a.line, a.col});
        for (const auto& u : rep.uncovered_low)
            diags.push_back({Severity::Info, "uncovered-variable",
                             "alignment '" + a.name + "' covers no cluster with '" + u + "'",
                             a.line, a.col});
        if (rep.ok()) w.alignments.push_back(std::move(*compiled));
    }

    std::set<std::string> set_names;
    for (const auto& s : decl.sets) {
        if (!set_names.insert(s.name).second) {
            diags.push_back({Severity::Error, "duplicate-name",
                             "interventions '" + s.name + "' declared twice", s.line, s.col});
            continue;
        }
        const Scm* low = w.find_model(s.low_model);
        const Scm* high = w.find_model(s.high_model);
        if (!low || !high) {
            diags.push_back({Severity::Error, "unknown-model",
                             "interventions '" + s.name + "' references an unknown or invalid model",
                             s.line, s.col});
            continue;
        }
        auto compiled = InterventionSets::compile(*low, *high, s, diags);
        if (compiled) {
            for (auto d : validate_intervention_sets(*low, *high, *compiled)) {
                d.line = s.line;
                d.col = s.col;
                diags.push_back(std::move(d));
            }
            w.intervention_sets.push_back(std::move(*compiled));
        }
    }

    auto by_name = [](const auto& a, const auto& b) { return a.name() < b.name(); };
    std::sort(w.models.begin(), w.models.end(), by_name);
    std::sort(w.taus.begin(), w.taus.end(), by_name);
    std::sort(w.alignments.begin(), w.alignments.end(), by_name);
    std::sort(w.intervention_sets.begin(), w.intervention_sets.end(),
              [](const auto& a, const auto& b) { return a.name < b.name; });
    for (const auto& [name, d] : domains) w.domains.push_back(d);

    if (!has_errors(diags)) res.workspace = std::move(w);
    return res;
}

inline ParseResult parse_workspace(std::string_view text) {
    ParseResult res;
    auto tokens = io_detail::lex(text, res.diagnostics);
    if (has_errors(res.diagnostics)) return res;
    io_detail::Parser parser(std::move(tokens), res.diagnostics);
    auto decl = parser.parse();
    if (has_errors(res.diagnostics)) return res;
    auto compiled = compile_workspace(decl);
    for (auto& d : compiled.diagnostics) res.diagnostics.push_back(std::move(d));
    res.workspace = std::move(compiled.workspace);
    return res;
}

// Parses an inline intervention literal with the same grammar the
// workspace files use.
inline Intervention parse_intervention(const Scm& m, const std::string& text) {
    Diagnostics diags;
    auto tokens = io_detail::lex(text, diags);
    if (has_errors(diags)) raise("syntax-error", diags.front().message);
    io_detail::Parser parser(std::move(tokens), diags);
    InterventionDecl decl;
    try {
        decl = parser.parse_intervention_literal();
    } catch (const io_detail::SyntaxError& e) {
        raise("syntax-error", e.diag.message);
    }
    return make_intervention(m, decl);
}

// ---------------------------------------------------------------------------
// Canonical serialization: name-sorted declarations, fixed formatting,
// LF endings. parse(serialize(w)) reproduces w exactly, and semantically
// equal workspaces serialize identically regardless of input order.
// ---------------------------------------------------------------------------

namespace io_detail {

inline std::string domain_values_text(const Domain& d) {
    const auto& vs = d.values();
    if (d.boolean_display() && vs.size() == 2 && ((vs[0] == 0 && vs[1] == 1) || (vs[0] == 1 && vs[1] == 0)))
        return vs[0] == 0 ? "F T" : "T F";
    std::string out;
    std::size_t i = 0;
    while (i < vs.size()) {
        std::size_t j = i;
        while (j + 1 < vs.size() && vs[j + 1] == vs[j] + 1) ++j;
        if (!out.empty()) out += " ";
        if (j - i >= 2)
            out += std::to_string(vs[i]) + ".." + std::to_string(vs[j]);
        else {
            for (std::size_t k = i; k <= j; ++k)
                out += (k > i ? " " : "") + std::to_string(vs[k]);
        }
        i = j + 1;
    }
    return out;
}

} // namespace io_detail

inline std::string serialize_workspace(const Workspace& w) {
    std::string out;
    bool first_block = true;
    auto block = [&] {
        if (!first_block) out += "\n";
        first_block = false;
    };

    if (!w.domains.empty()) {
        block();
        for (const auto& d : w.domains)
            out += "domain " + d.name() + " = " + io_detail::domain_values_text(d) + "\n";
    }

    for (const auto& m : w.models) {
        block();
        out += "model " + m.name() + " {\n";
        for (const auto& v : m.exo()) out += "  exo " + v.name + " : " + v.domain.name() + "\n";
        for (const auto& v : m.endo())
            out += "  eq " + v.name + " : " + v.domain.name() + " = " +
                   to_string(*v.equation, v.domain.boolean_display()) + "\n";
        if (!m.weights().empty()) {
            out += "  weights {\n";
            for (const auto& [rank, r] : m.weights()) {
                auto ords = m.exo_space().unrank(rank);
                out += "    (";
                for (std::size_t k = 0; k < m.exo().size(); ++k) {
                    if (k) out += ", ";
                    const auto& vd = m.exo()[k];
                    out += vd.name + "=" + vd.domain.display(vd.domain.value_at(ords[k]));
                }
                out += ") : " + r.str() + "\n";
            }
            out += "  }\n";
        }
        out += "}\n";
    }

    for (const auto& t : w.taus) {
        block();
        const Scm* high = w.find_model(t.high_model());
        out += "tau " + t.name() + " : " + t.low_model() + " -> " + t.high_model() + " {\n";
        for (std::size_t k = 0; k < high->endo().size(); ++k)
            out += "  map " + high->endo()[k].name + " = " +
                   to_string(*t.endo_exprs()[k], high->endo()[k].domain.boolean_display()) + "\n";
        for (std::size_t k = 0; k < high->exo().size(); ++k)
            out += "  map " + high->exo()[k].name + " = " +
                   to_string(*t.exo_exprs()[k], high->exo()[k].domain.boolean_display()) + "\n";
        out += "}\n";
    }

    for (const auto& a : w.alignments) {
        block();
        const Tau* tau = w.find_tau(a.tau_name());
        const Scm* low = w.find_model(tau->low_model());
        const Scm* high = w.find_model(tau->high_model());
        out += "align " + a.name() + " : " + a.tau_name() + " {\n";
        auto emit = [&](const std::vector<std::vector<VarRef>>& pis,
                        const std::vector<VarDecl>& vars) {
            for (std::size_t k = 0; k < vars.size(); ++k) {
                out += "  pi " + vars[k].name + " = {";
                for (const auto& v : pis[k]) out += " " + low->var(v).name;
                out += " }\n";
            }
        };
        emit(a.endo_pi(), high->endo());
        emit(a.exo_pi(), high->exo());
        out += "}\n";
    }

    for (const auto& s : w.intervention_sets) {
        block();
        const Scm* low = w.find_model(s.low_model);
        const Scm* high = w.find_model(s.high_model);
        out += "interventions " + s.name + " : " + s.low_model + " -> " + s.high_model + " {\n";
        for (const auto& i : s.low) out += "  low " + i.display(*low) + "\n";
        for (const auto& j : s.high) out += "  high " + j.display(*high) + "\n";
        out += "}\n";
    }
    return out;
}

} // namespace scax
