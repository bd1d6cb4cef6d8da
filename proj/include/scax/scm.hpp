#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "scax/common.hpp"
#include "scax/domain.hpp"
#include "scax/expr.hpp"

namespace scax {

struct Rational {
    long long num = 0;
    long long den = 1;

    std::string str() const {
        if (den == 1) return std::to_string(num);
        return std::to_string(num) + "/" + std::to_string(den);
    }
    friend bool operator==(const Rational&, const Rational&) = default;
};

struct VarDecl {
    VarKind kind = VarKind::Endogenous;
    std::string name;
    Domain domain;
    ExprPtr equation;     // endogenous only
    int line = 0, col = 0;
};

struct WeightDecl {
    std::map<std::string, Value> setting;   // total exogenous setting
    Rational weight;
    int line = 0, col = 0;
};

// Raw model declaration as parsed or assembled programmatically.
struct ScmDecl {
    std::string name;
    std::vector<VarDecl> vars;
    std::vector<WeightDecl> weights;
    int line = 0, col = 0;
};

// A value assignment keyed by variable name. std::map keeps display and
// comparison order deterministic.
using NamedSetting = std::map<std::string, Value>;

// Restriction of a setting to a variable subset. Projecting onto the full
// assigned set is the identity.
inline NamedSetting project(const NamedSetting& s, const std::set<std::string>& vars) {
    NamedSetting out;
    for (const auto& v : vars) {
        auto it = s.find(v);
        if (it == s.end()) raise("unknown-variable", "projection onto unassigned variable '" + v + "'");
        out.emplace(v, it->second);
    }
    return out;
}

// A structural function compiled to a lookup table over the joint domain
// of its parents. Parents are in canonical (kind, index) order.
struct CompiledFn {
    std::vector<VarRef> parents;
    JointSpace parent_space;       // joint domain of `parents`
    std::vector<int> table;        // output ordinals into the target domain
    int target_domain_size = 0;

    int eval_ordinal(const std::vector<int>& endo_ords, const std::vector<int>& exo_ords) const {
        std::uint64_t r = 0;
        for (std::size_t k = 0; k < parents.size(); ++k) {
            const VarRef& p = parents[k];
            int ord = p.kind == VarKind::Endogenous ? endo_ords[static_cast<std::size_t>(p.index)]
                                                    : exo_ords[static_cast<std::size_t>(p.index)];
            r = r * parent_space.size_at(k) + static_cast<std::uint64_t>(ord);
        }
        return table[r];
    }

    bool is_constant() const {
        return std::all_of(table.begin(), table.end(), [&](int v) { return v == table.front(); });
    }

    // Re-tabulates the function over a parent superset, so functions with
    // different leaf sets become comparable on a common input space.
    std::vector<int> materialize_over(const std::vector<VarRef>& supers,
                                      const JointSpace& super_space,
                                      std::size_t n_endo, std::size_t n_exo) const {
        for (const auto& p : parents)
            if (std::find(supers.begin(), supers.end(), p) == supers.end())
                raise("internal", "materialize_over requires a parent superset");
        std::vector<int> endo_ords(n_endo, 0), exo_ords(n_exo, 0);
        std::vector<int> assignment(supers.size(), 0);
        std::vector<int> out;
        out.reserve(super_space.size());
        do {
            for (std::size_t k = 0; k < supers.size(); ++k) {
                const VarRef& p = supers[k];
                (p.kind == VarKind::Endogenous ? endo_ords[static_cast<std::size_t>(p.index)]
                                               : exo_ords[static_cast<std::size_t>(p.index)]) =
                    assignment[k];
            }
            out.push_back(eval_ordinal(endo_ords, exo_ords));
        } while (super_space.next(assignment));
        return out;
    }
};

// A finite-domain structural causal model, validated and compiled for
// exhaustive evaluation. Variables are kept in name order; that order,
// together with each domain's declared value order, fixes the canonical
// enumeration of settings.
class Scm {
public:
    static std::optional<Scm> compile(const ScmDecl& decl, Diagnostics& diags) {
        Scm m;
        m.name_ = decl.name;
        std::size_t before = diags.size();
        auto failed = [&] {
            for (std::size_t i = before; i < diags.size(); ++i)
                if (diags[i].severity == Severity::Error) return true;
            return false;
        };

        std::vector<VarDecl> sorted = decl.vars;
        std::stable_sort(sorted.begin(), sorted.end(),
                         [](const VarDecl& a, const VarDecl& b) { return a.name < b.name; });
        std::set<std::string> seen;
        for (const auto& v : sorted) {
            if (!seen.insert(v.name).second)
                diags.push_back({Severity::Error, "duplicate-variable",
                                 "variable '" + v.name + "' declared twice in model '" + decl.name + "'",
                                 v.line, v.col});
            for (auto d : v.domain.validate()) {
                d.line = v.line;
                d.col = v.col;
                diags.push_back(d);
            }
            if (v.kind == VarKind::Endogenous) m.endo_.push_back(v);
            else m.exo_.push_back(v);
        }
        for (std::size_t i = 0; i < m.endo_.size(); ++i)
            m.index_[m.endo_[i].name] = {VarKind::Endogenous, static_cast<int>(i)};
        for (std::size_t i = 0; i < m.exo_.size(); ++i)
            m.index_[m.exo_[i].name] = {VarKind::Exogenous, static_cast<int>(i)};
        if (failed()) return std::nullopt;

        try {
            m.endo_space_ = JointSpace(m.domain_sizes(m.endo_));
            m.exo_space_ = JointSpace(m.domain_sizes(m.exo_));
        } catch (const Error& err) {
            diags.push_back({Severity::Error, err.kind(),
                             "model '" + decl.name + "': " + err.what(), decl.line, decl.col});
            return std::nullopt;
        }

        // Resolve equation leaves; the leaf set of an equation is its
        // parent set.
        std::vector<std::vector<int>> endo_parents(m.endo_.size());
        for (std::size_t i = 0; i < m.endo_.size(); ++i) {
            const VarDecl& v = m.endo_[i];
            if (!v.equation) {
                diags.push_back({Severity::Error, "missing-equation",
                                 "endogenous variable '" + v.name + "' has no structural equation",
                                 v.line, v.col});
                continue;
            }
            for (const auto& leaf : leaves(*v.equation)) {
                auto it = m.index_.find(leaf);
                if (it == m.index_.end()) {
                    diags.push_back({Severity::Error, "unknown-variable",
                                     "equation for '" + v.name + "' reads undeclared variable '" +
                                         leaf + "'",
                                     v.line, v.col});
                } else if (it->second.kind == VarKind::Endogenous) {
                    endo_parents[i].push_back(it->second.index);
                }
            }
        }
        if (failed()) return std::nullopt;

        if (!m.topo_sort(endo_parents, diags)) return std::nullopt;

        for (std::size_t i = 0; i < m.endo_.size(); ++i) {
            auto fn = m.compile_function(*m.endo_[i].equation, m.endo_[i].domain,
                                         "equation for '" + m.endo_[i].name + "'",
                                         m.endo_[i].line, m.endo_[i].col, diags);
            if (fn) m.equations_.push_back(std::move(*fn));
        }
        m.compile_weights(decl.weights, diags);
        if (failed()) return std::nullopt;
        return m;
    }

    const std::string& name() const { return name_; }
    const std::vector<VarDecl>& endo() const { return endo_; }
    const std::vector<VarDecl>& exo() const { return exo_; }
    const JointSpace& endo_space() const { return endo_space_; }
    const JointSpace& exo_space() const { return exo_space_; }
    const std::vector<CompiledFn>& equations() const { return equations_; }
    const std::vector<std::size_t>& topo_order() const { return topo_; }
    const std::vector<std::pair<std::uint64_t, Rational>>& weights() const { return weights_; }

    const VarDecl& var(const VarRef& r) const {
        return r.kind == VarKind::Endogenous ? endo_[static_cast<std::size_t>(r.index)]
                                             : exo_[static_cast<std::size_t>(r.index)];
    }

    std::optional<VarRef> find(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    VarRef require(const std::string& name) const {
        auto r = find(name);
        if (!r) raise("unknown-variable", "model '" + name_ + "' has no variable '" + name + "'");
        return *r;
    }

    // Compiles an expression into a table, collecting closure violations
    // against the target domain. Leaves must already resolve in this model.
    std::optional<CompiledFn> compile_function(const Expr& e, const Domain& target,
                                               const std::string& what, int line, int col,
                                               Diagnostics& diags) const {
        CompiledFn fn;
        for (const auto& leaf : leaves(e)) fn.parents.push_back(require(leaf));
        std::sort(fn.parents.begin(), fn.parents.end());
        std::vector<std::size_t> sizes;
        for (const auto& p : fn.parents) sizes.push_back(var(p).domain.size());
        try {
            fn.parent_space = JointSpace(sizes);
        } catch (const Error& err) {
            diags.push_back({Severity::Error, err.kind(), what + ": " + err.what(), line, col});
            return std::nullopt;
        }
        fn.target_domain_size = static_cast<int>(target.size());

        std::vector<int> assignment(fn.parents.size(), 0);
        NamedSetting env;
        int reported = 0;
        fn.table.reserve(fn.parent_space.size());
        do {
            for (std::size_t k = 0; k < fn.parents.size(); ++k)
                env[var(fn.parents[k]).name] = var(fn.parents[k]).domain.value_at(assignment[k]);
            Value out;
            try {
                out = eval(e, [&](const std::string& n) { return env.at(n); });
            } catch (const Error& err) {
                diags.push_back({Severity::Error, err.kind(),
                                 what + ": " + err.what() + " at " + describe(env), line, col});
                return std::nullopt;
            }
            auto ord = target.ordinal_of(out);
            if (!ord) {
                if (reported++ < 3)
                    diags.push_back({Severity::Error, "domain-closure-violation",
                                     what + " produces " + std::to_string(out) +
                                         " outside domain '" + target.name() + "' at " +
                                         describe(env),
                                     line, col});
                fn.table.push_back(0);
            } else {
                fn.table.push_back(*ord);
            }
        } while (fn.parent_space.next(assignment));
        if (reported > 0) return std::nullopt;
        return fn;
    }

    // Evaluates every structural equation once at (x, e) simultaneously.
    // This is not a solve: x need not be consistent with the equations.
    std::vector<int> eval_equations(const std::vector<int>& endo_ords,
                                    const std::vector<int>& exo_ords) const {
        std::vector<int> out(endo_.size());
        for (std::size_t i = 0; i < endo_.size(); ++i)
            out[i] = equations_[i].eval_ordinal(endo_ords, exo_ords);
        return out;
    }

    // Allocation-free variant for tight enumeration loops.
    void eval_equations_into(const std::vector<int>& endo_ords, const std::vector<int>& exo_ords,
                             std::vector<int>& out) const {
        out.resize(endo_.size());
        for (std::size_t i = 0; i < endo_.size(); ++i)
            out[i] = equations_[i].eval_ordinal(endo_ords, exo_ords);
    }

    // Deterministic solve: evaluates equations in topological order.
    std::vector<int> solve(const std::vector<int>& exo_ords) const {
        std::vector<int> x(endo_.size(), 0);
        for (std::size_t i : topo_) x[i] = equations_[i].eval_ordinal(x, exo_ords);
        return x;
    }

    // Name-keyed conversions ------------------------------------------------

    std::vector<int> to_ordinals(const NamedSetting& s, VarKind kind) const {
        const auto& vars = kind == VarKind::Endogenous ? endo_ : exo_;
        std::vector<int> out(vars.size());
        if (s.size() != vars.size())
            raise("partial-setting", "expected a total setting over " + std::to_string(vars.size()) +
                                         " variables of model '" + name_ + "'");
        for (std::size_t i = 0; i < vars.size(); ++i) {
            auto it = s.find(vars[i].name);
            if (it == s.end())
                raise("unknown-variable", "setting does not assign '" + vars[i].name + "'");
            auto ord = vars[i].domain.ordinal_of(it->second);
            if (!ord)
                raise("domain-violation", "value " + std::to_string(it->second) +
                                              " is outside the domain of '" + vars[i].name + "'");
            out[i] = *ord;
        }
        return out;
    }

    NamedSetting to_named(const std::vector<int>& ords, VarKind kind) const {
        const auto& vars = kind == VarKind::Endogenous ? endo_ : exo_;
        NamedSetting out;
        for (std::size_t i = 0; i < vars.size(); ++i)
            out[vars[i].name] = vars[i].domain.value_at(ords[i]);
        return out;
    }

    std::string display(const std::vector<int>& ords, VarKind kind) const {
        const auto& vars = kind == VarKind::Endogenous ? endo_ : exo_;
        std::string out = "(";
        for (std::size_t i = 0; i < vars.size(); ++i) {
            if (i) out += ", ";
            out += vars[i].name + "=" + vars[i].domain.display(vars[i].domain.value_at(ords[i]));
        }
        return out + ")";
    }

    // Copy with some equations swapped out. The replacements were compiled
    // against this model and their parents are subsets of the original
    // ones, so the existing topological order stays valid.
    Scm with_replaced_equations(
        const std::vector<std::pair<int, std::pair<ExprPtr, CompiledFn>>>& repl) const {
        Scm out = *this;
        for (const auto& [idx, sf] : repl) {
            out.endo_[static_cast<std::size_t>(idx)].equation = sf.first;
            out.equations_[static_cast<std::size_t>(idx)] = sf.second;
        }
        return out;
    }

    friend bool operator==(const Scm& a, const Scm& b) {
        if (a.name_ != b.name_ || a.endo_.size() != b.endo_.size() || a.exo_.size() != b.exo_.size())
            return false;
        auto var_eq = [](const VarDecl& x, const VarDecl& y) {
            if (x.name != y.name || !(x.domain == y.domain)) return false;
            if (!x.equation != !y.equation) return false;
            return !x.equation || structurally_equal(*x.equation, *y.equation);
        };
        for (std::size_t i = 0; i < a.endo_.size(); ++i)
            if (!var_eq(a.endo_[i], b.endo_[i])) return false;
        for (std::size_t i = 0; i < a.exo_.size(); ++i)
            if (!var_eq(a.exo_[i], b.exo_[i])) return false;
        return a.weights_ == b.weights_;
    }

private:
    static std::string describe(const NamedSetting& env) {
        std::string out = "(";
        bool first = true;
        for (const auto& [k, v] : env) {
            if (!first) out += ", ";
            first = false;
            out += k + "=" + std::to_string(v);
        }
        return out + ")";
    }

    std::vector<std::size_t> domain_sizes(const std::vector<VarDecl>& vars) const {
        std::vector<std::size_t> out;
        for (const auto& v : vars) out.push_back(v.domain.size());
        return out;
    }

    bool topo_sort(const std::vector<std::vector<int>>& parents, Diagnostics& diags) {
        std::size_t n = endo_.size();
        std::vector<std::vector<int>> children(n);
        std::vector<int> indegree(n, 0);
        for (std::size_t i = 0; i < n; ++i) {
            std::set<int> ps(parents[i].begin(), parents[i].end());
            for (int p : ps) {
                children[static_cast<std::size_t>(p)].push_back(static_cast<int>(i));
                ++indegree[i];
            }
        }
        // Kahn with min-index selection keeps the order deterministic.
        std::set<int> ready;
        for (std::size_t i = 0; i < n; ++i)
            if (indegree[i] == 0) ready.insert(static_cast<int>(i));
        while (!ready.empty()) {
            int v = *ready.begin();
            ready.erase(ready.begin());
            topo_.push_back(static_cast<std::size_t>(v));
            for (int c : children[static_cast<std::size_t>(v)])
                if (--indegree[static_cast<std::size_t>(c)] == 0) ready.insert(c);
        }
        if (topo_.size() != n) {
            std::string cyc;
            for (std::size_t i = 0; i < n; ++i)
                if (indegree[i] > 0) cyc += (cyc.empty() ? "" : ", ") + endo_[i].name;
            diags.push_back({Severity::Error, "cyclic-model",
                             "model '" + name_ + "' has a dependency cycle through: " + cyc});
            return false;
        }
        return true;
    }

    void compile_weights(const std::vector<WeightDecl>& ws, Diagnostics& diags) {
        for (const auto& w : ws) {
            if (w.weight.num < 0 || w.weight.den <= 0) {
                diags.push_back({Severity::Error, "negative-weight",
                                 "exogenous weight must be a non-negative rational", w.line, w.col});
                continue;
            }
            try {
                auto ords = to_ordinals(w.setting, VarKind::Exogenous);
                weights_.emplace_back(exo_space_.rank(ords), w.weight);
            } catch (const Error& err) {
                diags.push_back({Severity::Error, err.kind(),
                                 std::string("weights entry: ") + err.what(), w.line, w.col});
            }
        }
        std::sort(weights_.begin(), weights_.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        for (std::size_t i = 1; i < weights_.size(); ++i)
            if (weights_[i].first == weights_[i - 1].first)
                diags.push_back({Severity::Error, "duplicate-weight",
                                 "two weights for the same exogenous setting in model '" + name_ + "'"});
    }

    std::string name_;
    std::vector<VarDecl> endo_, exo_;   // name-sorted
    std::map<std::string, VarRef> index_;
    JointSpace endo_space_, exo_space_;
    std::vector<CompiledFn> equations_;
    std::vector<std::size_t> topo_;
    std::vector<std::pair<std::uint64_t, Rational>> weights_;
};

inline Scm make_scm(const ScmDecl& decl) {
    Diagnostics diags;
    auto m = Scm::compile(decl, diags);
    if (!m) {
        std::string msg = "invalid model '" + decl.name + "':";
        for (const auto& d : diags) msg += "\n  " + d.str();
        raise("invalid-model", msg);
    }
    return *m;
}

// Name-keyed conveniences ---------------------------------------------------

inline NamedSetting solve(const Scm& m, const NamedSetting& exo) {
    return m.to_named(m.solve(m.to_ordinals(exo, VarKind::Exogenous)), VarKind::Endogenous);
}

inline NamedSetting eval_equations(const Scm& m, const NamedSetting& endo, const NamedSetting& exo) {
    return m.to_named(m.eval_equations(m.to_ordinals(endo, VarKind::Endogenous),
                                       m.to_ordinals(exo, VarKind::Exogenous)),
                      VarKind::Endogenous);
}

} // namespace scax
