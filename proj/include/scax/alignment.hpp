#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "scax/abstraction.hpp"
#include "scax/intervention.hpp"
#include "scax/scm.hpp"
#include "scax/tau.hpp"

namespace scax {

struct PiDecl {
    std::string high_var;
    std::vector<std::string> low_vars;
    int line = 0, col = 0;
};

struct AlignmentDecl {
    std::string name;
    std::string tau_name;
    std::vector<PiDecl> pis;
    int line = 0, col = 0;
};

struct FactorizationViolation {
    std::string high_var;
    NamedSetting x1, x2;   // agree on Pi(Y), tau_Y differs
    Value v1 = 0, v2 = 0;
};

struct AlignmentReport {
    std::vector<FactorizationViolation> violations;
    bool endo_disjoint = true;
    bool exo_disjoint = true;
    std::vector<std::string> uncovered_low;   // permitted; reported
    bool constructive() const { return endo_disjoint && exo_disjoint; }
    bool ok() const { return violations.empty(); }
};

// Picks one preimage among `count` candidates; index 0 is the canonical
// (first in enumeration order) choice.
using PreimageSelector = std::function<std::size_t(std::size_t count)>;

inline PreimageSelector canonical_preimage() {
    return [](std::size_t) { return std::size_t(0); };
}

inline PreimageSelector seeded_preimage(std::uint64_t seed) {
    auto rng = std::make_shared<std::mt19937_64>(seed);
    return [rng](std::size_t count) { return static_cast<std::size_t>((*rng)() % count); };
}

// An alignment maps every high-level variable to a cluster of low-level
// variables of the same kind, such that its tau map factors through the
// cluster. Factorization is checked semantically by enumeration: the tau
// map must be constant in every variable outside the cluster.
class Alignment {
public:
    static std::optional<Alignment> compile(const Scm& low, const Scm& high, const Tau& tau,
                                            const AlignmentDecl& decl, Diagnostics& diags) {
        tau.bind_check(low, high);
        Alignment a;
        a.name_ = decl.name;
        a.tau_ = tau.name();
        a.low_ = low.name();
        a.high_ = high.name();
        std::size_t before = diags.size();
        auto failed = [&] {
            for (std::size_t i = before; i < diags.size(); ++i)
                if (diags[i].severity == Severity::Error) return true;
            return false;
        };

        std::map<std::string, const PiDecl*> by_var;
        for (const auto& p : decl.pis) {
            if (!by_var.emplace(p.high_var, &p).second)
                diags.push_back({Severity::Error, "duplicate-cluster",
                                 "alignment '" + decl.name + "' assigns '" + p.high_var +
                                     "' two clusters",
                                 p.line, p.col});
            if (!high.find(p.high_var))
                diags.push_back({Severity::Error, "unknown-variable",
                                 "alignment '" + decl.name + "' clusters '" + p.high_var +
                                     "', which is not a variable of model '" + high.name() + "'",
                                 p.line, p.col});
        }
        auto fill = [&](VarKind kind, std::vector<std::vector<VarRef>>& out) {
            const auto& vars = kind == VarKind::Endogenous ? high.endo() : high.exo();
            for (const auto& hv : vars) {
                auto it = by_var.find(hv.name);
                if (it == by_var.end()) {
                    diags.push_back({Severity::Error, "incomplete-alignment",
                                     "alignment '" + decl.name + "' gives no cluster for '" +
                                         hv.name + "'",
                                     decl.line, decl.col});
                    out.emplace_back();
                    continue;
                }
                std::vector<VarRef> cluster;
                for (const auto& lname : it->second->low_vars) {
                    auto ref = low.find(lname);
                    if (!ref) {
                        diags.push_back({Severity::Error, "unknown-variable",
                                         "cluster of '" + hv.name + "' names '" + lname +
                                             "', which is not a variable of model '" + low.name() +
                                             "'",
                                         it->second->line, it->second->col});
                    } else if (ref->kind != kind) {
                        diags.push_back({Severity::Error, "alignment-kind-violation",
                                         "cluster of '" + hv.name + "' names '" + lname +
                                             "' of the wrong kind (endogenous clusters hold "
                                             "endogenous variables, exogenous ones exogenous)",
                                         it->second->line, it->second->col});
                    } else {
                        cluster.push_back(*ref);
                    }
                }
                std::sort(cluster.begin(), cluster.end());
                cluster.erase(std::unique(cluster.begin(), cluster.end()), cluster.end());
                out.push_back(std::move(cluster));
            }
        };
        fill(VarKind::Endogenous, a.endo_pi_);
        fill(VarKind::Exogenous, a.exo_pi_);
        if (failed()) return std::nullopt;
        return a;
    }

    const std::string& name() const { return name_; }
    const std::string& tau_name() const { return tau_; }
    const std::string& low_model() const { return low_; }
    const std::string& high_model() const { return high_; }
    const std::vector<std::vector<VarRef>>& endo_pi() const { return endo_pi_; }
    const std::vector<std::vector<VarRef>>& exo_pi() const { return exo_pi_; }

    void bind_check(const Scm& low, const Scm& high, const Tau& tau) const {
        if (low.name() != low_ || high.name() != high_ || tau.name() != tau_)
            raise("cross-model", "alignment '" + name_ + "' was built for tau '" + tau_ + "' on '" +
                                     low_ + "' -> '" + high_ + "'");
    }

private:
    std::string name_, tau_, low_, high_;
    std::vector<std::vector<VarRef>> endo_pi_;   // aligned with high.endo()
    std::vector<std::vector<VarRef>> exo_pi_;    // aligned with high.exo()
};

namespace detail {

// Exhaustive dependence check: scans the joint domain of leaves(tau_Y)
// and reports inputs that agree on Pi(Y) but map to different values.
inline void check_factorization(const Scm& low, const Scm& high, const CompiledFn& fn,
                                const std::string& high_var, const std::vector<VarRef>& cluster,
                                std::vector<FactorizationViolation>& out) {
    std::vector<std::size_t> inside;   // positions of fn parents inside the cluster
    for (std::size_t k = 0; k < fn.parents.size(); ++k)
        if (std::binary_search(cluster.begin(), cluster.end(), fn.parents[k])) inside.push_back(k);
    if (inside.size() == fn.parents.size()) return;   // syntactically factored

    // Group every parent assignment by its projection onto the cluster.
    std::map<std::vector<int>, std::pair<std::vector<int>, int>> first_seen;
    std::vector<int> assignment(fn.parents.size(), 0);
    std::uint64_t r = 0;
    do {
        std::vector<int> key;
        key.reserve(inside.size());
        for (auto k : inside) key.push_back(assignment[k]);
        int value = fn.table[r];
        auto [it, fresh] = first_seen.emplace(key, std::make_pair(assignment, value));
        if (!fresh && it->second.second != value) {
            FactorizationViolation v;
            v.high_var = high_var;
            for (std::size_t k = 0; k < fn.parents.size(); ++k) {
                const auto& vd = low.var(fn.parents[k]);
                v.x1[vd.name] = vd.domain.value_at(it->second.first[k]);
                v.x2[vd.name] = vd.domain.value_at(assignment[k]);
            }
            const Domain& target = high.require(high_var).kind == VarKind::Endogenous
                                       ? high.endo()[static_cast<std::size_t>(
                                             high.require(high_var).index)].domain
                                       : high.exo()[static_cast<std::size_t>(
                                             high.require(high_var).index)].domain;
            v.v1 = target.value_at(it->second.second);
            v.v2 = target.value_at(value);
            out.push_back(std::move(v));
            return;   // one witness per variable keeps the report readable
        }
        ++r;
    } while (fn.parent_space.next(assignment));
}

inline bool pairwise_disjoint(const std::vector<std::vector<VarRef>>& clusters) {
    std::vector<VarRef> all;
    for (const auto& c : clusters) all.insert(all.end(), c.begin(), c.end());
    std::sort(all.begin(), all.end());
    return std::adjacent_find(all.begin(), all.end()) == all.end();
}

} // namespace detail

// Checks both factorization conditions exhaustively, cluster disjointness
// (the constructive flag) and coverage. Violations are report entries,
// not errors.
inline AlignmentReport validate_alignment(const Scm& low, const Scm& high, const Tau& tau,
                                          const Alignment& pi) {
    pi.bind_check(low, high, tau);
    AlignmentReport rep;
    for (std::size_t k = 0; k < high.endo().size(); ++k)
        detail::check_factorization(low, high, tau.endo_fns()[k], high.endo()[k].name,
                                    pi.endo_pi()[k], rep.violations);
    for (std::size_t k = 0; k < high.exo().size(); ++k)
        detail::check_factorization(low, high, tau.exo_fns()[k], high.exo()[k].name,
                                    pi.exo_pi()[k], rep.violations);
    rep.endo_disjoint = detail::pairwise_disjoint(pi.endo_pi());
    rep.exo_disjoint = detail::pairwise_disjoint(pi.exo_pi());

    std::vector<bool> covered_endo(low.endo().size(), false), covered_exo(low.exo().size(), false);
    for (const auto& c : pi.endo_pi())
        for (const auto& v : c) covered_endo[static_cast<std::size_t>(v.index)] = true;
    for (const auto& c : pi.exo_pi())
        for (const auto& v : c) covered_exo[static_cast<std::size_t>(v.index)] = true;
    for (std::size_t k = 0; k < covered_endo.size(); ++k)
        if (!covered_endo[k]) rep.uncovered_low.push_back(low.endo()[k].name);
    for (std::size_t k = 0; k < covered_exo.size(); ++k)
        if (!covered_exo[k]) rep.uncovered_low.push_back(low.exo()[k].name);
    return rep;
}

// The per-cluster factored map tau_Y restricted to val(Pi(Y)): variables
// outside the cluster are pinned to their first domain value, which the
// factorization check has shown to be irrelevant.
class ClusterMap {
public:
    ClusterMap(const Scm& low, const CompiledFn& fn, std::vector<VarRef> cluster, int target_size)
        : cluster_(std::move(cluster)), target_size_(target_size) {
        std::vector<std::size_t> sizes;
        for (const auto& v : cluster_) sizes.push_back(low.var(v).domain.size());
        space_ = JointSpace(sizes);
        table_ = fn.materialize_over(cluster_, space_, low.endo().size(), low.exo().size());
        buckets_.resize(static_cast<std::size_t>(target_size_));
        for (std::uint64_t r = 0; r < table_.size(); ++r)
            buckets_[static_cast<std::size_t>(table_[r])].push_back(r);
    }

    const std::vector<VarRef>& cluster() const { return cluster_; }
    const JointSpace& space() const { return space_; }
    int apply(const std::vector<int>& cluster_ords) const { return table_[space_.rank(cluster_ords)]; }

    // Canonical (or selector-chosen) preimage of a target ordinal.
    std::vector<int> preimage(int target_ord, const PreimageSelector& pick) const {
        const auto& matches = buckets_[static_cast<std::size_t>(target_ord)];
        if (matches.empty())
            raise("no-preimage", "cluster map has no preimage for target ordinal " +
                                     std::to_string(target_ord) + "; it is not surjective");
        return space_.unrank(matches[pick(matches.size())]);
    }

private:
    std::vector<VarRef> cluster_;
    JointSpace space_;
    std::vector<int> table_;
    std::vector<std::vector<std::uint64_t>> buckets_;   // target ordinal -> preimage ranks
    int target_size_ = 0;
};

// The canonical preimage of a high-level value under the factored map of
// one high-level variable, as a partial setting on its cluster.
inline NamedSetting preimage(const Scm& low, const Scm& high, const Tau& tau, const Alignment& pi,
                             const std::string& high_var, Value y,
                             const PreimageSelector& pick = canonical_preimage()) {
    pi.bind_check(low, high, tau);
    VarRef ref = high.require(high_var);
    const VarDecl& hv = high.var(ref);
    auto ord = hv.domain.ordinal_of(y);
    if (!ord)
        raise("domain-violation",
              "value " + std::to_string(y) + " is outside the domain of '" + high_var + "'");
    const auto& cluster = ref.kind == VarKind::Endogenous
                              ? pi.endo_pi()[static_cast<std::size_t>(ref.index)]
                              : pi.exo_pi()[static_cast<std::size_t>(ref.index)];
    const auto& fn = ref.kind == VarKind::Endogenous
                         ? tau.endo_fns()[static_cast<std::size_t>(ref.index)]
                         : tau.exo_fns()[static_cast<std::size_t>(ref.index)];
    ClusterMap cm(low, fn, cluster, static_cast<int>(hv.domain.size()));
    auto ords = cm.preimage(*ord, pick);
    NamedSetting out;
    for (std::size_t k = 0; k < cluster.size(); ++k)
        out[low.var(cluster[k]).name] = low.var(cluster[k]).domain.value_at(ords[k]);
    return out;
}

struct ExplicitOmegaOptions {
    PreimageSelector pick = canonical_preimage();
    // Also materialize each g_Y over the full high-level space and require
    // it to be constant across non-parents of the original equation.
    bool verify_full_space = false;
};

// The explicit intervention map of a constructive soft abstraction:
// g_Y(y, u) = tau_Y(F^i over Pi(Y) at a preimage of (y, u)). Targets whose
// table comes out equal to the original equation are dropped; a low-level
// intervention inside a cluster need not surface at the high level.
inline Intervention explicit_omega(const Scm& low, const Scm& high, const Tau& tau,
                                   const Alignment& pi, const Intervention& i,
                                   const ExplicitOmegaOptions& opt = {}) {
    pi.bind_check(low, high, tau);
    i.bind_check(low);
    AlignmentReport rep = validate_alignment(low, high, tau, pi);
    if (!rep.ok())
        raise("alignment-invalid",
              "alignment '" + pi.name() + "' fails factorization for '" +
                  rep.violations.front().high_var + "'");

    Scm Li = apply_intervention(low, i);
    std::vector<int> targets = i.targets();

    // Per-variable cluster maps, shared by preimage construction.
    std::vector<ClusterMap> endo_maps, exo_maps;
    for (std::size_t k = 0; k < high.endo().size(); ++k)
        endo_maps.emplace_back(low, tau.endo_fns()[k], pi.endo_pi()[k],
                               static_cast<int>(high.endo()[k].domain.size()));
    for (std::size_t k = 0; k < high.exo().size(); ++k)
        exo_maps.emplace_back(low, tau.exo_fns()[k], pi.exo_pi()[k],
                              static_cast<int>(high.exo()[k].domain.size()));

    // With disjoint clusters a per-cluster preimage composes into a joint
    // one. Overlapping clusters need a genuinely joint preimage, picked by
    // scanning the full low-level space.
    const bool disjoint = rep.constructive();
    std::vector<std::vector<std::uint64_t>> endo_buckets, exo_buckets;
    if (!disjoint) {
        endo_buckets.resize(high.endo_space().size());
        for (std::uint64_t r = 0; r < low.endo_space().size(); ++r)
            endo_buckets[tau.map_endo_rank(r)].push_back(r);
        exo_buckets.resize(high.exo_space().size());
        for (std::uint64_t r = 0; r < low.exo_space().size(); ++r)
            exo_buckets[tau.map_exo_rank(r)].push_back(r);
    }

    // Builds g_Y(y, u) for one full high-level setting.
    auto g_value = [&](std::size_t y_idx, const std::vector<int>& y_ords,
                       const std::vector<int>& u_ords) -> int {
        std::vector<int> x(low.endo().size(), 0), e(low.exo().size(), 0);
        if (disjoint) {
            for (std::size_t k = 0; k < endo_maps.size(); ++k) {
                auto pre = endo_maps[k].preimage(y_ords[k], opt.pick);
                const auto& cluster = endo_maps[k].cluster();
                for (std::size_t c = 0; c < cluster.size(); ++c)
                    x[static_cast<std::size_t>(cluster[c].index)] = pre[c];
            }
            for (std::size_t k = 0; k < exo_maps.size(); ++k) {
                auto pre = exo_maps[k].preimage(u_ords[k], opt.pick);
                const auto& cluster = exo_maps[k].cluster();
                for (std::size_t c = 0; c < cluster.size(); ++c)
                    e[static_cast<std::size_t>(cluster[c].index)] = pre[c];
            }
        } else {
            const auto& xm = endo_buckets[high.endo_space().rank(y_ords)];
            const auto& em = exo_buckets[high.exo_space().rank(u_ords)];
            if (xm.empty() || em.empty())
                raise("no-preimage", "tau has no preimage for a high-level setting");
            low.endo_space().unrank(xm[opt.pick(xm.size())], x);
            low.exo_space().unrank(em[opt.pick(em.size())], e);
        }
        // One simultaneous application of the intervened equations on the
        // cluster of Y, mapped forward through the factored tau.
        const auto& cluster = endo_maps[y_idx].cluster();
        std::vector<int> cluster_out(cluster.size());
        for (std::size_t c = 0; c < cluster.size(); ++c)
            cluster_out[c] =
                Li.equations()[static_cast<std::size_t>(cluster[c].index)].eval_ordinal(x, e);
        return endo_maps[y_idx].apply(cluster_out);
    };

    std::vector<Intervention::Entry> entries;
    for (std::size_t y_idx = 0; y_idx < high.endo().size(); ++y_idx) {
        const auto& cluster = pi.endo_pi()[y_idx];
        bool hit = std::any_of(targets.begin(), targets.end(), [&](int t) {
            return std::binary_search(cluster.begin(), cluster.end(),
                                      VarRef{VarKind::Endogenous, t});
        });
        if (!hit) continue;

        const CompiledFn& original = high.equations()[y_idx];
        CompiledFn fn;
        fn.parents = original.parents;
        fn.parent_space = original.parent_space;
        fn.target_domain_size = original.target_domain_size;
        fn.table.reserve(original.table.size());

        std::vector<int> y_ords(high.endo().size(), 0), u_ords(high.exo().size(), 0);
        std::vector<int> assignment(fn.parents.size(), 0);
        do {
            std::fill(y_ords.begin(), y_ords.end(), 0);
            std::fill(u_ords.begin(), u_ords.end(), 0);
            for (std::size_t k = 0; k < fn.parents.size(); ++k) {
                const VarRef& p = fn.parents[k];
                (p.kind == VarKind::Endogenous ? y_ords[static_cast<std::size_t>(p.index)]
                                               : u_ords[static_cast<std::size_t>(p.index)]) =
                    assignment[k];
            }
            fn.table.push_back(g_value(y_idx, y_ords, u_ords));
        } while (fn.parent_space.next(assignment));

        if (opt.verify_full_space) {
            // Re-derive g_Y over all of val(Y) x val(U); any dependence on a
            // non-parent means the explicit form is not well defined here.
            std::vector<int> y(high.endo().size(), 0);
            do {
                std::vector<int> u(high.exo().size(), 0);
                do {
                    std::vector<int> proj(fn.parents.size());
                    for (std::size_t k = 0; k < fn.parents.size(); ++k) {
                        const VarRef& p = fn.parents[k];
                        proj[k] = p.kind == VarKind::Endogenous
                                      ? y[static_cast<std::size_t>(p.index)]
                                      : u[static_cast<std::size_t>(p.index)];
                    }
                    if (g_value(y_idx, y, u) != fn.table[fn.parent_space.rank(proj)])
                        raise("ill-defined",
                              "explicit g for '" + high.endo()[y_idx].name +
                                  "' depends on a non-parent of the original equation");
                } while (high.exo_space().next(u));
            } while (high.endo_space().next(y));
        }

        if (fn.table == original.table) continue;   // unchanged; not an intervention on Y

        Intervention::Entry e;
        e.target = static_cast<int>(y_idx);
        e.fn = std::move(fn);
        entries.push_back(std::move(e));
    }
    return Intervention::from_tables(high, std::move(entries));
}

struct CrosscheckEntry {
    std::size_t low_index = 0;
    bool matches_oracle = false;
    bool in_admissible_set = false;   // some J member is table-identical
    std::string explicit_display, oracle_display;
};

struct CrosscheckReport {
    std::vector<CrosscheckEntry> entries;
    std::size_t mismatches = 0;
};

// Necessity check for the explicit form: on inputs where soft abstraction
// holds, the explicit construction must reproduce the unique brute-force
// omega for every admissible low-level intervention.
inline CrosscheckReport crosscheck_explicit(const Scm& low, const Scm& high, const Tau& tau,
                                            const Alignment& pi, const InterventionSets& sets,
                                            const ExplicitOmegaOptions& opt = {}) {
    CheckReport soft = check_abstraction(low, high, tau, sets, Relation::Soft);
    if (!soft.holds)
        raise("precondition-violated",
              "soft abstraction does not hold, so there is no unique omega to cross-check" +
                  (soft.failure ? ": " + *soft.failure : std::string()));
    const OmegaTable& table = soft.tables.front();

    CrosscheckReport rep;
    for (std::size_t a = 0; a < soft.low_kept.size(); ++a) {
        const Intervention& i = sets.low[soft.low_kept[a]];
        const Intervention& oracle_j = sets.high[soft.high_kept[table.assign[a]]];
        Intervention explicit_j = explicit_omega(low, high, tau, pi, i, opt);

        CrosscheckEntry entry;
        entry.low_index = soft.low_kept[a];
        entry.matches_oracle =
            intervened_tables(high, explicit_j) == intervened_tables(high, oracle_j);
        entry.explicit_display = explicit_j.display(high);
        entry.oracle_display = oracle_j.display(high);
        for (const auto& j : sets.high)
            if (intervened_tables(high, explicit_j) == intervened_tables(high, j))
                entry.in_admissible_set = true;
        if (!entry.matches_oracle) ++rep.mismatches;
        rep.entries.push_back(std::move(entry));
    }
    return rep;
}

inline Alignment make_alignment(const Scm& low, const Scm& high, const Tau& tau,
                                const AlignmentDecl& decl) {
    Diagnostics diags;
    auto a = Alignment::compile(low, high, tau, decl, diags);
    if (!a) {
        std::string msg = "invalid alignment '" + decl.name + "':";
        for (const auto& d : diags) msg += "\n  " + d.str();
        raise("invalid-alignment", msg);
    }
    return *a;
}

} // namespace scax
