#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "scax/intervention.hpp"
#include "scax/restriction.hpp"
#include "scax/scm.hpp"
#include "scax/tau.hpp"

namespace scax {

enum class Relation { Tau, LowSoft, Soft };

inline const char* to_string(Relation r) {
    switch (r) {
    case Relation::Tau: return "tau";
    case Relation::LowSoft: return "low-soft";
    case Relation::Soft: return "soft";
    }
    return "?";
}

struct InterventionSetsDecl {
    std::string name;
    std::string low_model, high_model;
    std::vector<InterventionDecl> low, high;
    int line = 0, col = 0;
};

// The admissible intervention sets of a pair of models. Membership of the
// empty intervention is explicit; entries keep their declaration order.
struct InterventionSets {
    std::string name;
    std::string low_model, high_model;
    std::vector<Intervention> low, high;

    static std::optional<InterventionSets> compile(const Scm& L, const Scm& H,
                                                   const InterventionSetsDecl& decl,
                                                   Diagnostics& diags) {
        InterventionSets out;
        out.name = decl.name;
        out.low_model = L.name();
        out.high_model = H.name();
        bool ok = true;
        for (const auto& d : decl.low) {
            auto i = Intervention::compile(L, d, diags);
            if (i) out.low.push_back(std::move(*i));
            else ok = false;
        }
        for (const auto& d : decl.high) {
            auto j = Intervention::compile(H, d, diags);
            if (j) out.high.push_back(std::move(*j));
            else ok = false;
        }
        if (!ok) return std::nullopt;
        return out;
    }
};

// A consistency failure witness: the first input (in canonical enumeration
// order) where the two routes through the abstraction square disagree.
// `endo` is present for the soft relation only; the tau and low-soft
// relations quantify over exogenous settings alone.
struct Counterexample {
    std::size_t low_index = 0, high_index = 0;
    std::optional<NamedSetting> endo;
    NamedSetting exo;
    NamedSetting lhs, rhs;   // high-level endogenous settings
};

struct PairOutcome {
    bool restriction_match = false;
    bool consistent = false;
    std::optional<Counterexample> counterexample;
};

enum class OmegaKind { RestrictionMatched, ConsistencyMatched, ExplicitForm };

inline const char* to_string(OmegaKind k) {
    switch (k) {
    case OmegaKind::RestrictionMatched: return "restriction-matched";
    case OmegaKind::ConsistencyMatched: return "consistency-matched";
    case OmegaKind::ExplicitForm: return "explicit-form";
    }
    return "?";
}

// One admissible assignment omega: entry t maps low intervention
// low_kept[t] to high intervention high_kept[table[t]].
struct OmegaTable {
    std::vector<std::size_t> assign;      // per kept low index -> kept high index
    std::vector<OmegaKind> kinds;
};

struct CheckReport {
    Relation relation = Relation::Tau;
    bool holds = false;

    // Indices below refer to these deduplicated index lists (positions in
    // the original declaration order). Table-identical interventions with
    // identical soft restrictions are interchangeable in every condition
    // the relations test, so duplicates are dropped with a warning.
    std::vector<std::size_t> low_kept, high_kept;

    std::vector<OmegaTable> tables;                  // every surjective assignment
    std::vector<std::vector<PairOutcome>> pairs;     // [kept low][kept high]
    std::vector<std::vector<std::size_t>> candidates; // per kept low: kept high indices

    // (i, j, j') with both j and j' admissible for i; non-empty output is
    // the realized form of intervention-map ambiguity.
    std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> ambiguity_witnesses;

    Diagnostics notes;
    std::optional<std::string> failure;              // totality/surjectivity failure
    std::optional<Counterexample> counterexample;    // first failing (i, x, e) when !holds
};

namespace detail {

// Observational signature of an intervention: the full intervened-model
// tables plus the soft restriction set. These are the only facts any of
// the relations consult, so members with equal signatures are
// interchangeable everywhere; in particular an intervention that
// replaces equations with themselves collapses onto the empty one.
inline std::string intervention_signature(const Scm& m, const Intervention& i) {
    std::string sig;
    for (const auto& table : intervened_tables(m, i)) {
        for (int v : table) sig += std::to_string(v) + ",";
        sig += ";";
    }
    sig += "|";
    for (auto r : soft_restriction(m, i).ranks) sig += std::to_string(r) + ",";
    return sig;
}

inline std::vector<std::size_t> dedup_interventions(const Scm& m,
                                                    const std::vector<Intervention>& xs,
                                                    const char* side, Diagnostics& notes) {
    std::map<std::string, std::size_t> seen;
    std::vector<std::size_t> kept;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        auto sig = intervention_signature(m, xs[k]);
        auto [it, fresh] = seen.emplace(sig, k);
        if (fresh) {
            kept.push_back(k);
        } else {
            notes.push_back({Severity::Warning, "duplicate-intervention",
                             std::string(side) + " intervention '" + xs[k].display(m) +
                                 "' duplicates '" + xs[it->second].display(m) +
                                 "' (same tables and restriction); dropped"});
        }
    }
    return kept;
}

// Enumerates all ways to pick one candidate per low index such that every
// kept high index is covered.
inline void enumerate_assignments(const std::vector<std::vector<std::size_t>>& candidates,
                                  std::size_t n_high, std::vector<OmegaTable>& out) {
    double combos = 1;
    for (const auto& c : candidates) combos *= static_cast<double>(std::max<std::size_t>(c.size(), 1));
    if (combos > 1e6)
        raise("state-space-too-large", "too many candidate omega assignments to enumerate");

    std::vector<std::size_t> cover(n_high, 0);
    std::vector<std::size_t> assign(candidates.size(), 0);

    auto rec = [&](auto&& self, std::size_t at) -> void {
        if (at == candidates.size()) {
            for (std::size_t j = 0; j < n_high; ++j)
                if (cover[j] == 0) return;
            OmegaTable t;
            t.assign = assign;
            out.push_back(std::move(t));
            return;
        }
        for (std::size_t c : candidates[at]) {
            assign[at] = c;
            ++cover[c];
            self(self, at + 1);
            --cover[c];
        }
    };
    if (std::none_of(candidates.begin(), candidates.end(),
                     [](const auto& c) { return c.empty(); }))
        rec(rec, 0);
}

} // namespace detail

// Load-time lint for an intervention set: members that duplicate another
// member's observable behaviour, and hard member pairs sharing a
// restriction set. With equal restrictions two hard interventions
// necessarily pin the same variables to the same values, so such a pair
// is always a duplicate as well; the warnings point at the same entries
// from the two angles a reader might look for.
inline Diagnostics validate_intervention_sets(const Scm& L, const Scm& H,
                                              const InterventionSets& sets) {
    Diagnostics out;
    auto side = [&](const Scm& m, const std::vector<Intervention>& xs, const char* which) {
        detail::dedup_interventions(m, xs, which, out);
        for (std::size_t a = 0; a < xs.size(); ++a)
            for (std::size_t b = a + 1; b < xs.size(); ++b)
                if (xs[a].is_hard() && xs[b].is_hard() &&
                    soft_restriction(m, xs[a]).ranks == soft_restriction(m, xs[b]).ranks)
                    out.push_back({Severity::Warning, "duplicate-restriction",
                                   std::string(which) + " hard interventions '" +
                                       xs[a].display(m) + "' and '" + xs[b].display(m) +
                                       "' of set '" + sets.name + "' share a restriction set"});
    };
    side(L, sets.low, "low");
    side(H, sets.high, "high");
    for (auto& d : out)
        if (d.code == "duplicate-intervention")
            d.message = "set '" + sets.name + "': " + d.message;
    return out;
}

// Decides one of the three abstraction relations between L and H under
// tau, for the admissible intervention sets. All three share the same
// skeleton: candidate high-level interventions are matched by canonical
// restriction-set equality, pruned by the relation's consistency
// equation, and the verdict holds iff some total assignment covers the
// whole high-level set.
//
//   tau       hard interventions only; solve-level consistency per e
//   low-soft  soft restriction sets; solve-level consistency per e
//   soft      soft restriction sets; one-step consistency per (x, e)
inline CheckReport check_abstraction(const Scm& L, const Scm& H, const Tau& tau,
                                     const InterventionSets& sets, Relation relation) {
    tau.bind_check(L, H);
    if (sets.low_model != L.name() || sets.high_model != H.name())
        raise("cross-model", "intervention set '" + sets.name + "' does not match models '" +
                                 L.name() + "' and '" + H.name() + "'");
    if (relation == Relation::Tau) {
        for (const auto& i : sets.low)
            if (!i.is_hard())
                raise("non-hard-intervention", "the tau relation admits hard interventions only; '" +
                                                   i.display(L) + "' is soft");
        for (const auto& j : sets.high)
            if (!j.is_hard())
                raise("non-hard-intervention", "the tau relation admits hard interventions only; '" +
                                                   j.display(H) + "' is soft");
    }

    CheckReport rep;
    rep.relation = relation;
    rep.low_kept = detail::dedup_interventions(L, sets.low, "low", rep.notes);
    rep.high_kept = detail::dedup_interventions(H, sets.high, "high", rep.notes);
    const std::size_t nI = rep.low_kept.size(), nJ = rep.high_kept.size();

    // Restriction sets and their tau images.
    std::vector<std::vector<std::uint64_t>> low_image(nI), high_rst(nJ);
    for (std::size_t a = 0; a < nI; ++a)
        low_image[a] = tau.image_of(soft_restriction(L, sets.low[rep.low_kept[a]]));
    for (std::size_t b = 0; b < nJ; ++b)
        high_rst[b] = soft_restriction(H, sets.high[rep.high_kept[b]]).ranks;

    // For hard interventions equal restriction sets should be impossible;
    // a pair like this breaks the uniqueness the restriction match relies
    // on (soft pairs with equal restrictions are ordinary and are what the
    // consistency equations are for).
    for (std::size_t b = 0; b < nJ; ++b)
        for (std::size_t b2 = b + 1; b2 < nJ; ++b2)
            if (sets.high[rep.high_kept[b]].is_hard() && sets.high[rep.high_kept[b2]].is_hard() &&
                high_rst[b] == high_rst[b2])
                rep.notes.push_back(
                    {Severity::Warning, "duplicate-restriction",
                     "hard high-level interventions '" + sets.high[rep.high_kept[b]].display(H) +
                         "' and '" + sets.high[rep.high_kept[b2]].display(H) +
                         "' have identical restriction sets; restriction matching cannot "
                         "separate them"});

    // Intervened models, compiled once.
    std::vector<Scm> Li, Hj;
    Li.reserve(nI);
    Hj.reserve(nJ);
    for (std::size_t a = 0; a < nI; ++a) Li.push_back(apply_intervention(L, sets.low[rep.low_kept[a]]));
    for (std::size_t b = 0; b < nJ; ++b) Hj.push_back(apply_intervention(H, sets.high[rep.high_kept[b]]));

    const JointSpace& XS = L.endo_space();
    const JointSpace& ES = L.exo_space();
    const JointSpace& YS = H.endo_space();
    const JointSpace& US = H.exo_space();

    // Solve tables: low side per exogenous rank, high side per exogenous rank.
    std::vector<std::vector<std::uint64_t>> lsolve(nI), hsolve(nJ);
    for (std::size_t a = 0; a < nI; ++a) {
        lsolve[a].reserve(ES.size());
        std::vector<int> e(L.exo().size(), 0);
        do {
            lsolve[a].push_back(XS.rank(Li[a].solve(e)));
        } while (ES.next(e));
    }
    for (std::size_t b = 0; b < nJ; ++b) {
        hsolve[b].reserve(US.size());
        std::vector<int> u(H.exo().size(), 0);
        do {
            hsolve[b].push_back(YS.rank(Hj[b].solve(u)));
        } while (US.next(u));
    }

    // One-step tables for the high side, used by the soft relation.
    std::vector<std::vector<std::uint64_t>> hstep;   // [j][y_rank * |U| + u_rank]
    if (relation == Relation::Soft) {
        hstep.resize(nJ);
        for (std::size_t b = 0; b < nJ; ++b) {
            hstep[b].reserve(YS.size() * US.size());
            std::vector<int> y(H.endo().size(), 0);
            do {
                std::vector<int> u(H.exo().size(), 0);
                do {
                    hstep[b].push_back(YS.rank(Hj[b].eval_equations(y, u)));
                } while (US.next(u));
            } while (YS.next(y));
        }
    }

    auto named_x = [&](std::uint64_t r) { return L.to_named(XS.unrank(r), VarKind::Endogenous); };
    auto named_e = [&](std::uint64_t r) { return L.to_named(ES.unrank(r), VarKind::Exogenous); };
    auto named_y = [&](std::uint64_t r) { return H.to_named(YS.unrank(r), VarKind::Endogenous); };

    rep.pairs.assign(nI, std::vector<PairOutcome>(nJ));
    rep.candidates.assign(nI, {});
    for (std::size_t a = 0; a < nI; ++a) {
        for (std::size_t b = 0; b < nJ; ++b) {
            PairOutcome& po = rep.pairs[a][b];
            po.restriction_match = low_image[a] == high_rst[b];
            if (!po.restriction_match) continue;
            po.consistent = true;

            if (relation == Relation::Soft) {
                // tau_Y(F^i(x, e)) = G^j(tau_Y(x), tau_U(e)) for all (x, e);
                // one simultaneous application of the equations, not a solve.
                std::vector<int> x(L.endo().size(), 0), e;
                std::vector<int> out(L.endo().size(), 0);
                std::uint64_t xr = 0;
                bool stop = false;
                do {
                    std::uint64_t yr = tau.map_endo_rank(xr);
                    e.assign(L.exo().size(), 0);
                    std::uint64_t er = 0;
                    do {
                        Li[a].eval_equations_into(x, e, out);
                        std::uint64_t lhs = tau.map_endo_rank(XS.rank(out));
                        std::uint64_t rhs = hstep[b][yr * US.size() + tau.map_exo_rank(er)];
                        if (lhs != rhs) {
                            po.consistent = false;
                            po.counterexample = Counterexample{
                                rep.low_kept[a], rep.high_kept[b], named_x(xr), named_e(er),
                                named_y(lhs), named_y(rhs)};
                            stop = true;
                            break;
                        }
                        ++er;
                    } while (ES.next(e));
                    ++xr;
                } while (!stop && XS.next(x));
            } else {
                // tau_Y(L_i(e)) = H_j(tau_U(e)) for all e.
                for (std::uint64_t er = 0; er < ES.size(); ++er) {
                    std::uint64_t lhs = tau.map_endo_rank(lsolve[a][er]);
                    std::uint64_t rhs = hsolve[b][tau.map_exo_rank(er)];
                    if (lhs != rhs) {
                        po.consistent = false;
                        po.counterexample = Counterexample{rep.low_kept[a], rep.high_kept[b],
                                                           std::nullopt, named_e(er), named_y(lhs),
                                                           named_y(rhs)};
                        break;
                    }
                }
            }
            if (po.consistent) rep.candidates[a].push_back(b);
        }
        for (std::size_t u = 0; u < rep.candidates[a].size(); ++u)
            for (std::size_t v = u + 1; v < rep.candidates[a].size(); ++v)
                rep.ambiguity_witnesses.emplace_back(rep.low_kept[a],
                                                     rep.high_kept[rep.candidates[a][u]],
                                                     rep.high_kept[rep.candidates[a][v]]);
    }

    detail::enumerate_assignments(rep.candidates, nJ, rep.tables);
    for (auto& t : rep.tables) {
        t.kinds.resize(nI);
        for (std::size_t a = 0; a < nI; ++a) {
            std::size_t matched = 0;
            for (std::size_t b = 0; b < nJ; ++b)
                if (rep.pairs[a][b].restriction_match) ++matched;
            t.kinds[a] = matched <= 1 ? OmegaKind::RestrictionMatched : OmegaKind::ConsistencyMatched;
        }
    }
    rep.holds = !rep.tables.empty();

    if (!rep.holds) {
        // Name the first obstruction in canonical order: a low intervention
        // with no admissible image, or a missed high-level intervention.
        // Among that intervention's matched candidates, the reported
        // counterexample is the lexicographically-first failing (x, e).
        auto cex_rank = [&](const Counterexample& c) {
            std::uint64_t xr = c.endo ? XS.rank(L.to_ordinals(*c.endo, VarKind::Endogenous)) : 0;
            std::uint64_t er = ES.rank(L.to_ordinals(c.exo, VarKind::Exogenous));
            return std::pair(xr, er);
        };
        for (std::size_t a = 0; a < nI && !rep.failure; ++a) {
            if (!rep.candidates[a].empty()) continue;
            const auto& iv = sets.low[rep.low_kept[a]];
            bool any_match = false;
            for (std::size_t b = 0; b < nJ; ++b) {
                if (!rep.pairs[a][b].restriction_match) continue;
                any_match = true;
                const auto& cex = rep.pairs[a][b].counterexample;
                if (cex && (!rep.counterexample || cex_rank(*cex) < cex_rank(*rep.counterexample)))
                    rep.counterexample = cex;
            }
            rep.failure = any_match
                              ? "no consistent high-level intervention for '" + iv.display(L) + "'"
                              : "no high-level intervention matches the restriction set of '" +
                                    iv.display(L) + "'";
        }
        if (!rep.failure) {
            std::vector<bool> reachable(nJ, false);
            for (std::size_t a = 0; a < nI; ++a)
                for (std::size_t b : rep.candidates[a]) reachable[b] = true;
            for (std::size_t b = 0; b < nJ; ++b)
                if (!reachable[b]) {
                    rep.failure = "omega cannot be surjective: no low-level intervention maps to '" +
                                  sets.high[rep.high_kept[b]].display(H) + "'";
                    break;
                }
            if (!rep.failure)
                rep.failure = "no single assignment covers every admissible high-level intervention";
        }
    }

    if (relation == Relation::Soft && rep.holds && rep.tables.size() != 1)
        rep.notes.push_back({Severity::Warning, "nonunique-soft-omega",
                             "soft abstraction holds but omega is not unique; this should be "
                             "impossible after deduplication"});
    return rep;
}

// Brute-force enumeration of every admissible omega assignment; the
// oracle that the explicit construction is cross-checked against.
inline std::vector<OmegaTable> search_omega(const Scm& L, const Scm& H, const Tau& tau,
                                            const InterventionSets& sets, Relation relation) {
    return check_abstraction(L, H, tau, sets, relation).tables;
}

// A pair of distinct single-variable interventions that the low-soft
// relation can never separate: same solved values on the variable under
// every exogenous setting and same replacement image, different tables.
struct AmbiguityPair {
    std::size_t j1 = 0, j2 = 0;   // indices into the high list
    std::string variable;
};

inline std::vector<AmbiguityPair> detect_ambiguity(const Scm& H,
                                                   const std::vector<Intervention>& js) {
    std::vector<AmbiguityPair> out;
    for (std::size_t a = 0; a < js.size(); ++a) {
        if (js[a].entries().size() != 1) continue;
        for (std::size_t b = a + 1; b < js.size(); ++b) {
            if (js[b].entries().size() != 1) continue;
            if (js[a].entries()[0].target != js[b].entries()[0].target) continue;
            if (js[a].entries()[0].pa_table == js[b].entries()[0].pa_table) continue;
            if (image(H, js[a]).ranks != image(H, js[b]).ranks) continue;

            int target = js[a].entries()[0].target;
            Scm Ha = apply_intervention(H, js[a]);
            Scm Hb = apply_intervention(H, js[b]);
            bool same_solutions = true;
            std::vector<int> u(H.exo().size(), 0);
            do {
                if (Ha.solve(u)[static_cast<std::size_t>(target)] !=
                    Hb.solve(u)[static_cast<std::size_t>(target)]) {
                    same_solutions = false;
                    break;
                }
            } while (H.exo_space().next(u));
            if (same_solutions)
                out.push_back({a, b, H.endo()[static_cast<std::size_t>(target)].name});
        }
    }
    return out;
}

} // namespace scax
