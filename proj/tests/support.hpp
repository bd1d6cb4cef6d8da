#pragma once

// Shared helpers for the test and acceptance suites: fixture loading,
// programmatic declaration builders, and the random instance generators
// behind the property suites.

#include <map>
#include <random>
#include <string>
#include <vector>

#include "scax/io.hpp"

namespace testsupport {

using namespace scax;

inline Workspace load(std::string_view text) {
    ParseResult res = parse_workspace(text);
    if (!res.workspace) {
        std::string msg = "fixture failed to load:";
        for (const auto& d : res.diagnostics) msg += "\n  " + d.str();
        raise("fixture", msg);
    }
    return std::move(*res.workspace);
}

inline ExprPtr E(const std::string& text) {
    Diagnostics diags;
    auto toks = io_detail::lex(text, diags);
    io_detail::Parser p(std::move(toks), diags);
    return p.parse_expression_only();
}

inline Intervention iv(const Scm& m, const std::string& literal) {
    return parse_intervention(m, literal);
}

inline VarDecl exo_var(const std::string& name, Domain d) {
    VarDecl v;
    v.kind = VarKind::Exogenous;
    v.name = name;
    v.domain = std::move(d);
    return v;
}

inline VarDecl eq_var(const std::string& name, Domain d, const std::string& expr_text) {
    VarDecl v;
    v.kind = VarKind::Endogenous;
    v.name = name;
    v.domain = std::move(d);
    v.equation = E(expr_text);
    return v;
}

inline ExprPtr rename_vars(const Expr& e, const std::map<std::string, std::string>& names) {
    auto out = std::make_shared<Expr>(e);
    if (e.op == Expr::Op::Var) {
        auto it = names.find(e.var);
        if (it != names.end()) out->var = it->second;
        return out;
    }
    out->args.clear();
    for (const auto& a : e.args) out->args.push_back(rename_vars(*a, names));
    return out;
}

// ---------------------------------------------------------------------------
// Random finite SCMs (any operators, contiguous 0..k-1 domains, equations
// wrapped in mod k so domain closure holds by construction).
// ---------------------------------------------------------------------------

struct GenParams {
    int max_endo = 3;
    int max_exo = 2;
    int min_domain = 2;   // singleton domains falsify the hard/soft
                          // ordering equivalence as literally stated
    int max_domain = 4;
    int max_depth = 3;
};

// A generated model plus the domain declarations it references.
struct GeneratedModel {
    io_detail::DomainDecl domain;   // one shared domain keeps files small
    ScmDecl scm;
};

inline ExprPtr random_tree(std::mt19937& rng, const std::vector<std::string>& pool, int depth,
                           bool ring_only) {
    auto pick_leaf = [&]() -> ExprPtr {
        if (pool.empty() || rng() % 3 == 0)
            return expr::constant(static_cast<Value>(rng() % 8));
        return expr::var(pool[rng() % pool.size()]);
    };
    if (depth == 0 || rng() % 4 == 0) return pick_leaf();
    if (ring_only) {
        switch (rng() % 3) {
        case 0: return expr::add(random_tree(rng, pool, depth - 1, true),
                                 random_tree(rng, pool, depth - 1, true));
        case 1: return expr::sub(random_tree(rng, pool, depth - 1, true),
                                 random_tree(rng, pool, depth - 1, true));
        default: return expr::mul(random_tree(rng, pool, depth - 1, true),
                                  random_tree(rng, pool, depth - 1, true));
        }
    }
    switch (rng() % 10) {
    case 0: return expr::add(random_tree(rng, pool, depth - 1, false),
                             random_tree(rng, pool, depth - 1, false));
    case 1: return expr::sub(random_tree(rng, pool, depth - 1, false),
                             random_tree(rng, pool, depth - 1, false));
    case 2: return expr::mul(random_tree(rng, pool, depth - 1, false),
                             random_tree(rng, pool, depth - 1, false));
    case 3: return expr::land(random_tree(rng, pool, depth - 1, false),
                              random_tree(rng, pool, depth - 1, false));
    case 4: return expr::lor(random_tree(rng, pool, depth - 1, false),
                             random_tree(rng, pool, depth - 1, false));
    case 5: return expr::lxor(random_tree(rng, pool, depth - 1, false),
                              random_tree(rng, pool, depth - 1, false));
    case 6: return expr::eq(random_tree(rng, pool, depth - 1, false),
                            random_tree(rng, pool, depth - 1, false));
    case 7: return expr::lnot(random_tree(rng, pool, depth - 1, false));
    case 8: return expr::ite(random_tree(rng, pool, depth - 1, false),
                             random_tree(rng, pool, depth - 1, false),
                             random_tree(rng, pool, depth - 1, false));
    default: return pick_leaf();
    }
}

inline Scm random_scm(std::mt19937& rng, const GenParams& p = {}) {
    int n_exo = 1 + static_cast<int>(rng() % static_cast<unsigned>(p.max_exo));
    int n_endo = 1 + static_cast<int>(rng() % static_cast<unsigned>(p.max_endo));
    ScmDecl decl;
    decl.name = "M";
    std::vector<std::string> exo_names, endo_names;
    for (int k = 0; k < n_exo; ++k) {
        int size = p.min_domain + static_cast<int>(rng() % static_cast<unsigned>(p.max_domain - p.min_domain + 1));
        Domain d = Domain::range("D" + std::to_string(size), 0, size - 1);
        std::string name = "E" + std::to_string(k + 1);
        exo_names.push_back(name);
        decl.vars.push_back(exo_var(name, d));
    }
    for (int k = 0; k < n_endo; ++k) {
        int size = p.min_domain + static_cast<int>(rng() % static_cast<unsigned>(p.max_domain - p.min_domain + 1));
        Domain d = Domain::range("D" + std::to_string(size), 0, size - 1);
        std::string name = "X" + std::to_string(k + 1);
        std::vector<std::string> pool = exo_names;
        for (int j = 0; j < k; ++j)
            if (rng() % 2) pool.push_back(endo_names[j]);
        VarDecl v;
        v.kind = VarKind::Endogenous;
        v.name = name;
        v.domain = d;
        v.equation = expr::mod(random_tree(rng, pool, p.max_depth, false),
                               static_cast<Value>(size));
        decl.vars.push_back(std::move(v));
        endo_names.push_back(name);
    }
    return make_scm(decl);
}

inline Intervention random_hard(std::mt19937& rng, const Scm& m, bool allow_empty = true) {
    InterventionDecl decl;
    for (std::size_t k = 0; k < m.endo().size(); ++k) {
        if (rng() % 2) continue;
        ReplacementDecl r;
        r.target = m.endo()[k].name;
        const auto& dom = m.endo()[k].domain;
        r.expr = expr::constant(dom.value_at(static_cast<int>(rng() % dom.size())));
        decl.replacements.push_back(std::move(r));
    }
    if (!allow_empty && decl.replacements.empty()) {
        ReplacementDecl r;
        r.target = m.endo()[0].name;
        r.expr = expr::constant(m.endo()[0].domain.value_at(0));
        decl.replacements.push_back(std::move(r));
    }
    return make_intervention(m, decl);
}

// Extends `base` with agreeing constants on extra targets, producing a
// pair ordered under the hard (and therefore soft) ordering.
inline Intervention extend_hard(std::mt19937& rng, const Scm& m, const Intervention& base) {
    InterventionDecl decl;
    std::vector<bool> used(m.endo().size(), false);
    for (const auto& e : base.entries()) {
        used[static_cast<std::size_t>(e.target)] = true;
        ReplacementDecl r;
        r.target = m.endo()[static_cast<std::size_t>(e.target)].name;
        r.expr = expr::constant(
            m.endo()[static_cast<std::size_t>(e.target)].domain.value_at(e.fn.table.front()));
        decl.replacements.push_back(std::move(r));
    }
    for (std::size_t k = 0; k < m.endo().size(); ++k) {
        if (used[k] || rng() % 2) continue;
        ReplacementDecl r;
        r.target = m.endo()[k].name;
        r.expr = expr::constant(m.endo()[k].domain.value_at(static_cast<int>(rng() % m.endo()[k].domain.size())));
        decl.replacements.push_back(std::move(r));
    }
    return make_intervention(m, decl);
}

// ---------------------------------------------------------------------------
// Quotient instances: H is L reduced mod 2^n through the per-variable
// ring homomorphism x -> x mod 2^n, which makes soft abstraction hold by
// construction for interventions lifted along the same reduction.
// ---------------------------------------------------------------------------

struct QuotientInstance {
    io_detail::WorkspaceDecl decl;   // serializable form
    Workspace workspace;             // compiled form

    const Scm& low() const { return *workspace.find_model("L"); }
    const Scm& high() const { return *workspace.find_model("H"); }
    const Tau& tau() const { return workspace.taus.front(); }
    const Alignment& alignment() const { return workspace.alignments.front(); }
    const InterventionSets& sets() const { return workspace.intervention_sets.front(); }
};

inline QuotientInstance make_quotient(std::mt19937& rng, bool small = false) {
    int m_bits = small ? 2 : 2 + static_cast<int>(rng() % 2);   // low domain 2^m
    int n_bits = 1 + static_cast<int>(rng() % m_bits);          // high domain 2^n, n <= m
    Value lo_mod = Value(1) << m_bits, hi_mod = Value(1) << n_bits;

    io_detail::WorkspaceDecl w;
    io_detail::DomainDecl dl{"ZL", {}, false, 0, 0}, dh{"ZH", {}, false, 0, 0};
    for (Value v = 0; v < lo_mod; ++v) dl.values.push_back(v);
    for (Value v = 0; v < hi_mod; ++v) dh.values.push_back(v);
    w.domains = {dl, dh};

    int n_exo = 1 + static_cast<int>(rng() % 2);
    int n_endo = 1 + static_cast<int>(rng() % 3);
    ScmDecl L, H;
    L.name = "L";
    H.name = "H";
    TauDecl tau;
    tau.name = "reduce";
    tau.low_model = "L";
    tau.high_model = "H";
    AlignmentDecl align;
    align.name = "cells";
    align.tau_name = "reduce";

    std::map<std::string, std::string> to_high;
    std::vector<std::string> exo_names;
    for (int k = 0; k < n_exo; ++k) {
        std::string lo = "E" + std::to_string(k + 1), hi = "U" + std::to_string(k + 1);
        to_high[lo] = hi;
        exo_names.push_back(lo);
        L.vars.push_back(exo_var(lo, Domain("ZL", dl.values)));
        H.vars.push_back(exo_var(hi, Domain("ZH", dh.values)));
        tau.maps.push_back({hi, expr::mod(expr::var(lo), hi_mod)});
        align.pis.push_back({hi, {lo}});
    }
    std::vector<std::string> endo_names;
    std::vector<ExprPtr> trees;   // unreduced equation bodies, low names
    for (int k = 0; k < n_endo; ++k) {
        std::string lo = "X" + std::to_string(k + 1), hi = "Y" + std::to_string(k + 1);
        to_high[lo] = hi;
        std::vector<std::string> pool = exo_names;
        for (int j = 0; j < k; ++j)
            if (rng() % 2) pool.push_back(endo_names[j]);
        ExprPtr tree = random_tree(rng, pool, 3, /*ring_only=*/true);
        trees.push_back(tree);
        VarDecl vl;
        vl.kind = VarKind::Endogenous;
        vl.name = lo;
        vl.domain = Domain("ZL", dl.values);
        vl.equation = expr::mod(tree, lo_mod);
        L.vars.push_back(std::move(vl));
        VarDecl vh;
        vh.kind = VarKind::Endogenous;
        vh.name = hi;
        vh.domain = Domain("ZH", dh.values);
        vh.equation = expr::mod(rename_vars(*tree, to_high), hi_mod);
        H.vars.push_back(std::move(vh));
        tau.maps.push_back({hi, expr::mod(expr::var(lo), hi_mod)});
        align.pis.push_back({hi, {lo}});
        endo_names.push_back(lo);
    }

    InterventionSetsDecl sets;
    sets.name = "lifted";
    sets.low_model = "L";
    sets.high_model = "H";
    sets.low.push_back({});    // eps
    sets.high.push_back({});   // eps
    int extra = 1 + static_cast<int>(rng() % 3);
    for (int t = 0; t < extra; ++t) {
        InterventionDecl low_i, high_j;
        for (int k = 0; k < n_endo; ++k) {
            if (rng() % 2) continue;
            std::string lo = endo_names[static_cast<std::size_t>(k)];
            if (rng() % 2) {
                Value c = static_cast<Value>(rng()) % lo_mod;
                low_i.replacements.push_back({lo, expr::constant(c)});
                high_j.replacements.push_back({to_high[lo], expr::constant(floor_mod(c, hi_mod))});
            } else {
                std::vector<std::string> pool;
                for (const auto& leaf : leaves(*trees[static_cast<std::size_t>(k)]))
                    pool.push_back(leaf);
                ExprPtr f = random_tree(rng, pool, 2, /*ring_only=*/true);
                low_i.replacements.push_back({lo, expr::mod(f, lo_mod)});
                high_j.replacements.push_back({to_high[lo], expr::mod(rename_vars(*f, to_high), hi_mod)});
            }
        }
        if (low_i.replacements.empty()) continue;
        sets.low.push_back(std::move(low_i));
        sets.high.push_back(std::move(high_j));
    }

    w.models = {L, H};
    w.taus = {tau};
    w.alignments = {align};
    w.sets = {sets};

    QuotientInstance out;
    out.decl = w;
    ParseResult res = compile_workspace(w);
    if (!res.workspace) {
        std::string msg = "generated quotient instance failed to compile:";
        for (const auto& d : res.diagnostics) msg += "\n  " + d.str();
        raise("generator", msg);
    }
    out.workspace = std::move(*res.workspace);
    return out;
}

} // namespace testsupport
