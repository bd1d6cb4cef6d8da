#pragma once

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

#include "scax/scm.hpp"

namespace scax {

struct ReplacementDecl {
    std::string target;
    ExprPtr expr;
    int line = 0, col = 0;
};

// Empty replacement list denotes the empty intervention `eps`.
struct InterventionDecl {
    std::vector<ReplacementDecl> replacements;
    int line = 0, col = 0;
};

// A hard or soft replacement of structural equations on a subset of the
// endogenous variables of one model. Replacements may read at most the
// parents of the equation they replace and must stay inside the target's
// domain; hardness is a derived property (every replacement table is
// constant), so a syntactically soft expression that denotes a constant
// counts as hard.
class Intervention {
public:
    struct Entry {
        int target = 0;               // endogenous index
        ExprPtr source;               // absent for table-built replacements
        CompiledFn fn;
        std::vector<int> pa_table;    // materialized over the original parents
    };

    static std::optional<Intervention> compile(const Scm& m, const InterventionDecl& decl,
                                               Diagnostics& diags) {
        Intervention out;
        out.model_ = m.name();
        std::size_t before = diags.size();
        auto failed = [&] {
            for (std::size_t i = before; i < diags.size(); ++i)
                if (diags[i].severity == Severity::Error) return true;
            return false;
        };

        std::vector<ReplacementDecl> sorted = decl.replacements;
        for (const auto& r : sorted) {
            auto ref = m.find(r.target);
            if (!ref || ref->kind != VarKind::Endogenous) {
                diags.push_back({Severity::Error, "unknown-target",
                                 "intervention target '" + r.target +
                                     "' is not an endogenous variable of model '" + m.name() + "'",
                                 r.line, r.col});
            }
        }
        if (failed()) return std::nullopt;
        std::sort(sorted.begin(), sorted.end(), [&](const auto& a, const auto& b) {
            return m.require(a.target).index < m.require(b.target).index;
        });

        for (const auto& r : sorted) {
            VarRef ref = m.require(r.target);
            const VarDecl& target = m.endo()[static_cast<std::size_t>(ref.index)];
            if (!out.entries_.empty() && out.entries_.back().target == ref.index) {
                diags.push_back({Severity::Error, "duplicate-target",
                                 "intervention assigns '" + r.target + "' twice", r.line, r.col});
                continue;
            }

            auto original = leaves(*target.equation);
            for (const auto& leaf : leaves(*r.expr)) {
                if (!m.find(leaf)) {
                    diags.push_back({Severity::Error, "unknown-variable",
                                     "replacement for '" + r.target + "' reads undeclared variable '" +
                                         leaf + "'",
                                     r.line, r.col});
                } else if (!original.count(leaf)) {
                    diags.push_back({Severity::Error, "new-parent-violation",
                                     "replacement for '" + r.target + "' reads '" + leaf +
                                         "', which is not a parent of its original equation",
                                     r.line, r.col});
                }
            }
            if (failed()) continue;

            Diagnostics closure;
            auto fn = m.compile_function(*r.expr, target.domain,
                                         "replacement for '" + r.target + "'", r.line, r.col, closure);
            for (auto d : closure) {
                if (d.code == "domain-closure-violation") d.code = "type-violation";
                diags.push_back(d);
            }
            if (!fn) continue;
            Entry e;
            e.target = ref.index;
            e.source = r.expr;
            e.fn = std::move(*fn);
            e.pa_table = materialize_over_parents(m, e);
            out.entries_.push_back(std::move(e));
        }
        if (failed()) return std::nullopt;
        return out;
    }

    static Intervention empty(const Scm& m) {
        Intervention out;
        out.model_ = m.name();
        return out;
    }

    const std::string& model() const { return model_; }
    const std::vector<Entry>& entries() const { return entries_; }
    bool is_empty() const { return entries_.empty(); }

    std::vector<int> targets() const {
        std::vector<int> out;
        for (const auto& e : entries_) out.push_back(e.target);
        return out;
    }

    // Hard iff every replacement denotes a constant function.
    bool is_hard() const {
        return std::all_of(entries_.begin(), entries_.end(),
                           [](const Entry& e) { return e.fn.is_constant(); });
    }

    // Constant ordinals of a hard intervention, aligned with entries().
    std::vector<int> hard_ordinals() const {
        std::vector<int> out;
        for (const auto& e : entries_) {
            if (!e.fn.is_constant())
                raise("not-hard", "intervention has a non-constant replacement");
            out.push_back(e.fn.table.front());
        }
        return out;
    }

    void bind_check(const Scm& m) const {
        if (m.name() != model_)
            raise("cross-model", "intervention was built against model '" + model_ +
                                     "', not '" + m.name() + "'");
    }

    std::string display(const Scm& m) const {
        if (entries_.empty()) return "eps";
        std::string out;
        for (const auto& e : entries_) {
            if (!out.empty()) out += ", ";
            const VarDecl& v = m.endo()[static_cast<std::size_t>(e.target)];
            out += v.name + " <- ";
            if (e.source) out += to_string(*e.source, v.domain.boolean_display());
            else out += "<table over " + parent_list(m, e) + ">";
        }
        return out;
    }

    // Table-identical interventions are interchangeable everywhere: same
    // targets and same replacement tables over the original parents.
    friend bool operator==(const Intervention& a, const Intervention& b) {
        if (a.model_ != b.model_ || a.entries_.size() != b.entries_.size()) return false;
        for (std::size_t i = 0; i < a.entries_.size(); ++i) {
            if (a.entries_[i].target != b.entries_[i].target) return false;
            if (a.entries_[i].pa_table != b.entries_[i].pa_table) return false;
        }
        return true;
    }

    static std::vector<int> materialize_over_parents(const Scm& m, const Entry& e) {
        const CompiledFn& original = m.equations()[static_cast<std::size_t>(e.target)];
        return e.fn.materialize_over(original.parents, original.parent_space, m.endo().size(),
                                     m.exo().size());
    }

    // Used by explicit-omega construction, which produces table-backed
    // replacements with no source expression.
    static Intervention from_tables(const Scm& m, std::vector<Entry> entries) {
        Intervention out;
        out.model_ = m.name();
        std::sort(entries.begin(), entries.end(),
                  [](const Entry& a, const Entry& b) { return a.target < b.target; });
        for (auto& e : entries) {
            e.pa_table = materialize_over_parents(m, e);
            out.entries_.push_back(std::move(e));
        }
        return out;
    }

private:
    std::string parent_list(const Scm& m, const Entry& e) const {
        std::string out = "(";
        for (std::size_t k = 0; k < e.fn.parents.size(); ++k) {
            if (k) out += ", ";
            out += m.var(e.fn.parents[k]).name;
        }
        return out + ")";
    }

    std::string model_;
    std::vector<Entry> entries_;   // sorted by target index
};

// Per-variable equation tables of the intervened model, each over the
// original equation's parents. This is the identity under which two
// interventions count as the same model change; in particular replacing
// an equation with itself collapses to the empty intervention.
inline std::vector<std::vector<int>> intervened_tables(const Scm& m, const Intervention& i) {
    i.bind_check(m);
    std::vector<std::vector<int>> out;
    for (std::size_t k = 0; k < m.endo().size(); ++k) {
        const Intervention::Entry* hit = nullptr;
        for (const auto& e : i.entries())
            if (e.target == static_cast<int>(k)) hit = &e;
        out.push_back(hit ? hit->pa_table : m.equations()[k].table);
    }
    return out;
}

inline Intervention make_intervention(const Scm& m, const InterventionDecl& decl) {
    Diagnostics diags;
    auto i = Intervention::compile(m, decl, diags);
    if (!i) {
        std::string msg = "invalid intervention on model '" + m.name() + "':";
        for (const auto& d : diags) msg += "\n  " + d.str();
        raise(diags.empty() ? "invalid-intervention" : diags.front().code, msg);
    }
    return *i;
}

// Returns the intervened model: replaced equations on the targets,
// everything else untouched. Domains and weights are unchanged; parents
// only shrink, so the result stays acyclic by construction.
inline Scm apply_intervention(const Scm& m, const Intervention& i) {
    i.bind_check(m);
    std::vector<std::pair<int, std::pair<ExprPtr, CompiledFn>>> repl;
    for (const auto& e : i.entries()) repl.emplace_back(e.target, std::make_pair(e.source, e.fn));
    return m.with_replaced_equations(repl);
}

} // namespace scax
