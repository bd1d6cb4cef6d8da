// Dual-route check of the whole abstraction engine: a reference checker
// written straight from the definitions over name-keyed settings and raw
// expression evaluation. It shares nothing with the library's compiled
// path except the expression evaluator itself: no lookup tables, no rank
// spaces, no topological solve and no shared candidate machinery. The
// engine and the reference must agree on verdicts and table counts, on
// passing instances as well as on broken ones.

#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <set>

#include "scax/fixtures.hpp"
#include "support.hpp"

using namespace scax;
using testsupport::load;

namespace {

using Named = NamedSetting;

Value raw_eval(const Expr& e, const Named& env) {
    return eval(e, [&](const std::string& n) { return env.at(n); });
}

Named merged(const Named& a, const Named& b) {
    Named out = a;
    for (const auto& [k, v] : b) out[k] = v;
    return out;
}

// A model plus replacement expressions, kept purely symbolic.
struct NaiveModel {
    const Scm* m;
    std::map<std::string, ExprPtr> overrides;

    ExprPtr equation_of(const VarDecl& v) const {
        auto it = overrides.find(v.name);
        return it == overrides.end() ? v.equation : it->second;
    }
};

NaiveModel naive_intervene(const Scm& m, const Intervention& i) {
    NaiveModel out{&m, {}};
    for (const auto& e : i.entries()) {
        REQUIRE(e.source);
        out.overrides[m.endo()[static_cast<std::size_t>(e.target)].name] = e.source;
    }
    return out;
}

std::vector<Named> enumerate_settings(const std::vector<VarDecl>& vars) {
    std::vector<Named> out{Named{}};
    for (const auto& v : vars) {
        std::vector<Named> next;
        for (const auto& partial : out)
            for (Value val : v.domain.values()) {
                Named s = partial;
                s[v.name] = val;
                next.push_back(std::move(s));
            }
        out = std::move(next);
    }
    return out;
}

Named naive_one_step(const NaiveModel& nm, const Named& x, const Named& e) {
    Named env = merged(x, e);
    Named out;
    for (const auto& v : nm.m->endo()) out[v.name] = raw_eval(*nm.equation_of(v), env);
    return out;
}

// Solve by sweeping one-step evaluation |endo| times: each sweep settles
// one more dependency layer, so no explicit topological order is needed.
Named naive_solve(const NaiveModel& nm, const Named& e) {
    Named x;
    for (const auto& v : nm.m->endo()) x[v.name] = v.domain.values().front();
    for (std::size_t sweep = 0; sweep <= nm.m->endo().size(); ++sweep) x = naive_one_step(nm, x, e);
    return x;
}

std::set<Named> naive_image(const Scm& m, const Intervention& i) {
    NaiveModel nm = naive_intervene(m, i);
    std::set<Named> out;
    for (const auto& x : enumerate_settings(m.endo()))
        for (const auto& e : enumerate_settings(m.exo())) {
            Named env = merged(x, e);
            Named tuple;
            for (const auto& [name, expr] : nm.overrides) tuple[name] = raw_eval(*expr, env);
            out.insert(std::move(tuple));
        }
    return out;
}

std::set<Named> naive_softrst(const Scm& m, const Intervention& i) {
    std::set<Named> img = naive_image(m, i);
    std::set<std::string> targets;
    for (const auto& e : i.entries())
        targets.insert(m.endo()[static_cast<std::size_t>(e.target)].name);
    std::set<Named> out;
    for (const auto& x : enumerate_settings(m.endo()))
        if (img.count(project(x, targets))) out.insert(x);
    return out;
}

struct NaiveTau {
    const Scm* low;
    const Scm* high;
    std::map<std::string, ExprPtr> maps;   // high var -> expression over low vars

    Named endo(const Named& x) const {
        Named out;
        for (const auto& v : high->endo()) out[v.name] = raw_eval(*maps.at(v.name), x);
        return out;
    }
    Named exo(const Named& e) const {
        Named out;
        for (const auto& v : high->exo()) out[v.name] = raw_eval(*maps.at(v.name), e);
        return out;
    }
};

NaiveTau naive_tau(const Workspace& w) {
    const Tau& t = w.taus.front();
    const Scm* low = w.find_model(t.low_model());
    const Scm* high = w.find_model(t.high_model());
    NaiveTau out{low, high, {}};
    for (std::size_t k = 0; k < high->endo().size(); ++k)
        out.maps[high->endo()[k].name] = t.endo_exprs()[k];
    for (std::size_t k = 0; k < high->exo().size(); ++k)
        out.maps[high->exo()[k].name] = t.exo_exprs()[k];
    return out;
}

struct NaiveVerdict {
    bool holds = false;
    std::size_t tables = 0;
    std::vector<std::map<std::string, std::string>> assignments;   // display -> display
};

// Observational signature for deduplication, computed naively: the
// per-variable one-step behaviour of the intervened model over every
// input, plus the soft restriction set.
std::string naive_signature(const Scm& m, const Intervention& i) {
    NaiveModel nm = naive_intervene(m, i);
    std::string sig;
    for (const auto& x : enumerate_settings(m.endo()))
        for (const auto& e : enumerate_settings(m.exo()))
            for (const auto& [k, v] : naive_one_step(nm, x, e))
                sig += std::to_string(v) + ",";
    sig += "|";
    for (const auto& x : naive_softrst(m, i))
        for (const auto& [k, v] : x) sig += std::to_string(v) + ",";
    return sig;
}

NaiveVerdict naive_check(const Workspace& w, Relation relation) {
    const InterventionSets& sets = w.intervention_sets.front();
    NaiveTau tau = naive_tau(w);
    const Scm& L = *tau.low;
    const Scm& H = *tau.high;

    auto dedup = [&](const Scm& m, const std::vector<Intervention>& xs) {
        std::vector<std::size_t> kept;
        std::set<std::string> seen;
        for (std::size_t k = 0; k < xs.size(); ++k)
            if (seen.insert(naive_signature(m, xs[k])).second) kept.push_back(k);
        return kept;
    };
    std::vector<std::size_t> lows = dedup(L, sets.low), highs = dedup(H, sets.high);

    // Restriction match.
    std::vector<std::set<Named>> low_img(lows.size()), high_rst(highs.size());
    for (std::size_t a = 0; a < lows.size(); ++a)
        for (const auto& x : naive_softrst(L, sets.low[lows[a]])) low_img[a].insert(tau.endo(x));
    for (std::size_t b = 0; b < highs.size(); ++b)
        high_rst[b] = naive_softrst(H, sets.high[highs[b]]);

    auto consistent = [&](std::size_t a, std::size_t b) {
        NaiveModel Li = naive_intervene(L, sets.low[lows[a]]);
        NaiveModel Hj = naive_intervene(H, sets.high[highs[b]]);
        if (relation == Relation::Soft) {
            for (const auto& x : enumerate_settings(L.endo()))
                for (const auto& e : enumerate_settings(L.exo()))
                    if (tau.endo(naive_one_step(Li, x, e)) !=
                        naive_one_step(Hj, tau.endo(x), tau.exo(e)))
                        return false;
        } else {
            for (const auto& e : enumerate_settings(L.exo()))
                if (tau.endo(naive_solve(Li, e)) != naive_solve(Hj, tau.exo(e))) return false;
        }
        return true;
    };

    std::vector<std::vector<std::size_t>> candidates(lows.size());
    for (std::size_t a = 0; a < lows.size(); ++a)
        for (std::size_t b = 0; b < highs.size(); ++b)
            if (low_img[a] == high_rst[b] && consistent(a, b)) candidates[a].push_back(b);

    NaiveVerdict out;
    std::vector<std::size_t> pick(lows.size(), 0);
    std::function<void(std::size_t)> rec = [&](std::size_t at) {
        if (at == lows.size()) {
            std::set<std::size_t> covered(pick.begin(), pick.end());
            if (covered.size() != highs.size()) return;
            ++out.tables;
            std::map<std::string, std::string> assignment;
            for (std::size_t a = 0; a < lows.size(); ++a)
                assignment[sets.low[lows[a]].display(L)] = sets.high[highs[pick[a]]].display(H);
            out.assignments.push_back(std::move(assignment));
            return;
        }
        for (std::size_t b : candidates[at]) {
            pick[at] = b;
            rec(at + 1);
        }
    };
    bool total = true;
    for (const auto& c : candidates) total = total && !c.empty();
    if (total && !lows.empty()) rec(0);
    if (lows.empty() && highs.empty()) out.tables = 1;
    out.holds = out.tables > 0;
    return out;
}

// Engine verdicts mapped into the same comparable shape.
NaiveVerdict engine_check(const Workspace& w, Relation relation) {
    const InterventionSets& sets = w.intervention_sets.front();
    const Tau& tau = w.taus.front();
    const Scm& L = *w.find_model(tau.low_model());
    const Scm& H = *w.find_model(tau.high_model());
    CheckReport rep = check_abstraction(L, H, tau, sets, relation);
    NaiveVerdict out;
    out.holds = rep.holds;
    out.tables = rep.tables.size();
    for (const auto& t : rep.tables) {
        std::map<std::string, std::string> assignment;
        for (std::size_t a = 0; a < t.assign.size(); ++a)
            assignment[sets.low[rep.low_kept[a]].display(L)] =
                sets.high[rep.high_kept[t.assign[a]]].display(H);
        out.assignments.push_back(std::move(assignment));
    }
    return out;
}

void compare(const Workspace& w, Relation relation) {
    NaiveVerdict naive = naive_check(w, relation);
    NaiveVerdict engine = engine_check(w, relation);
    INFO(serialize_workspace(w));
    INFO("relation " << to_string(relation));
    REQUIRE(naive.holds == engine.holds);
    REQUIRE(naive.tables == engine.tables);
    auto sorted = [](std::vector<std::map<std::string, std::string>> v) {
        std::sort(v.begin(), v.end());
        return v;
    };
    CHECK(sorted(naive.assignments) == sorted(engine.assignments));
}

// Breaks instances in ways that exercise different rejection paths.
io_detail::WorkspaceDecl mutate(std::mt19937& rng, const io_detail::WorkspaceDecl& decl) {
    io_detail::WorkspaceDecl out = decl;
    auto& sets = out.sets.front();
    switch (rng() % 3) {
    case 0: {
        // Flip a high-level constant or replace a replacement by a constant.
        if (sets.high.size() > 1 && !sets.high[1].replacements.empty()) {
            auto& r = sets.high[1].replacements.front();
            r.expr = expr::constant(0);
        }
        break;
    }
    case 1: {
        // Drop a low-level member: surjectivity may become unreachable.
        if (sets.low.size() > 1) sets.low.erase(sets.low.begin() + 1);
        break;
    }
    default: {
        // Perturb a high-level equation, breaking the quotient property.
        for (auto& m : out.models)
            if (m.name == "H") {
                for (auto& v : m.vars)
                    if (v.kind == VarKind::Endogenous) {
                        v.equation = expr::mod(expr::add(v.equation, expr::constant(1)),
                                               static_cast<Value>(v.domain.values().size()));
                        return out;
                    }
            }
        break;
    }
    }
    return out;
}

} // namespace

TEST_CASE("engine and reference checker agree on the bundled fixtures") {
    // The soft relation's reference scan is quadratic in the setting
    // space, so the mod-16 fixtures compare on the low-soft route and the
    // small adder exercises both.
    Workspace w2 = load(fixtures::fig2);
    compare(w2, Relation::LowSoft);
    Workspace w3 = load(fixtures::fig3);
    compare(w3, Relation::LowSoft);
    Workspace w4 = load(fixtures::fig4);
    compare(w4, Relation::LowSoft);
    compare(w4, Relation::Soft);
}

TEST_CASE("engine and reference checker agree on random quotient instances") {
    std::mt19937 rng(67);
    for (int trial = 0; trial < 12; ++trial) {
        auto q = testsupport::make_quotient(rng, /*small=*/true);
        compare(q.workspace, Relation::LowSoft);
        compare(q.workspace, Relation::Soft);
    }
}

TEST_CASE("engine and reference checker agree on broken instances") {
    std::mt19937 rng(71);
    int disagreements_possible = 0;
    for (int trial = 0; trial < 12; ++trial) {
        auto q = testsupport::make_quotient(rng, /*small=*/true);
        io_detail::WorkspaceDecl broken = mutate(rng, q.decl);
        ParseResult res = compile_workspace(broken);
        if (!res.workspace) continue;   // a mutation may invalidate the workspace
        ++disagreements_possible;
        compare(*res.workspace, Relation::LowSoft);
        compare(*res.workspace, Relation::Soft);
    }
    CHECK(disagreements_possible > 0);
}

TEST_CASE("solve agrees with sweep-to-fixed-point evaluation on random models") {
    std::mt19937 rng(73);
    for (int trial = 0; trial < 25; ++trial) {
        Scm m = testsupport::random_scm(rng);
        NaiveModel nm{&m, {}};
        for (const auto& e : enumerate_settings(m.exo()))
            CHECK(solve(m, e) == naive_solve(nm, e));
    }
}
