#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "scax/restriction.hpp"
#include "scax/scm.hpp"

namespace scax {

struct TauMapDecl {
    std::string high_var;
    ExprPtr expr;
    int line = 0, col = 0;
};

struct TauDecl {
    std::string name;
    std::string low_model, high_model;
    std::vector<TauMapDecl> maps;
    int line = 0, col = 0;
};

// Surjective maps between the total settings of two models: tau_Y from
// low endogenous settings to high endogenous settings and tau_U between
// the exogenous ones. Each high-level variable is given by one expression
// over low-level variables of the matching kind; surjectivity is joint,
// checked by enumeration, since per-variable maps may be correlated.
class Tau {
public:
    static std::optional<Tau> compile(const Scm& low, const Scm& high, const TauDecl& decl,
                                      Diagnostics& diags) {
        Tau t;
        t.name_ = decl.name;
        t.low_ = low.name();
        t.high_ = high.name();
        std::size_t before = diags.size();
        auto failed = [&] {
            for (std::size_t i = before; i < diags.size(); ++i)
                if (diags[i].severity == Severity::Error) return true;
            return false;
        };

        std::map<std::string, const TauMapDecl*> by_var;
        for (const auto& m : decl.maps) {
            if (!by_var.emplace(m.high_var, &m).second)
                diags.push_back({Severity::Error, "duplicate-map",
                                 "tau '" + decl.name + "' maps '" + m.high_var + "' twice", m.line,
                                 m.col});
            if (!high.find(m.high_var))
                diags.push_back({Severity::Error, "unknown-variable",
                                 "tau '" + decl.name + "' maps '" + m.high_var +
                                     "', which is not a variable of model '" + high.name() + "'",
                                 m.line, m.col});
        }
        auto compile_side = [&](VarKind kind, std::vector<CompiledFn>& fns) {
            const auto& vars = kind == VarKind::Endogenous ? high.endo() : high.exo();
            for (const auto& hv : vars) {
                auto it = by_var.find(hv.name);
                if (it == by_var.end()) {
                    diags.push_back({Severity::Error, "incomplete-tau",
                                     "tau '" + decl.name + "' gives no map for high-level variable '" +
                                         hv.name + "'",
                                     decl.line, decl.col});
                    continue;
                }
                const TauMapDecl& md = *it->second;
                for (const auto& leaf : leaves(*md.expr)) {
                    auto ref = low.find(leaf);
                    if (!ref) {
                        diags.push_back({Severity::Error, "unknown-variable",
                                         "tau map for '" + hv.name + "' reads '" + leaf +
                                             "', which is not a variable of model '" + low.name() +
                                             "'",
                                         md.line, md.col});
                    } else if (ref->kind != kind) {
                        diags.push_back({Severity::Error, "tau-kind-violation",
                                         "tau map for '" + hv.name + "' reads '" + leaf +
                                             "' of the wrong kind (endogenous maps read endogenous "
                                             "variables, exogenous maps read exogenous ones)",
                                         md.line, md.col});
                    }
                }
                if (failed()) continue;
                auto fn = low.compile_function(*md.expr, hv.domain, "tau map for '" + hv.name + "'",
                                               md.line, md.col, diags);
                if (fn) {
                    fns.push_back(std::move(*fn));
                    if (kind == VarKind::Endogenous) t.endo_exprs_.push_back(md.expr);
                    else t.exo_exprs_.push_back(md.expr);
                }
            }
        };
        compile_side(VarKind::Endogenous, t.endo_fns_);
        compile_side(VarKind::Exogenous, t.exo_fns_);
        if (failed()) return std::nullopt;

        t.build_rank_map(low, high, VarKind::Endogenous, t.endo_rank_, diags, decl);
        t.build_rank_map(low, high, VarKind::Exogenous, t.exo_rank_, diags, decl);
        if (failed()) return std::nullopt;
        return t;
    }

    const std::string& name() const { return name_; }
    const std::string& low_model() const { return low_; }
    const std::string& high_model() const { return high_; }
    const std::vector<CompiledFn>& endo_fns() const { return endo_fns_; }
    const std::vector<CompiledFn>& exo_fns() const { return exo_fns_; }
    const std::vector<ExprPtr>& endo_exprs() const { return endo_exprs_; }
    const std::vector<ExprPtr>& exo_exprs() const { return exo_exprs_; }

    // Low-level rank -> high-level rank, for total settings.
    std::uint64_t map_endo_rank(std::uint64_t low_rank) const { return endo_rank_[low_rank]; }
    std::uint64_t map_exo_rank(std::uint64_t low_rank) const { return exo_rank_[low_rank]; }

    void bind_check(const Scm& low, const Scm& high) const {
        if (low.name() != low_ || high.name() != high_)
            raise("cross-model", "tau '" + name_ + "' relates models '" + low_ + "' -> '" + high_ +
                                     "', not '" + low.name() + "' -> '" + high.name() + "'");
    }

    // {tau_Y(x) | x in rs}, canonically ordered over the high-level space.
    std::vector<std::uint64_t> image_of(const RestrictionSet& rs) const {
        std::vector<std::uint64_t> out;
        out.reserve(rs.ranks.size());
        for (auto r : rs.ranks) out.push_back(endo_rank_[r]);
        std::sort(out.begin(), out.end());
        out.erase(std::unique(out.begin(), out.end()), out.end());
        return out;
    }

    NamedSetting apply_endo(const Scm& low, const Scm& high, const NamedSetting& x) const {
        auto ords = low.to_ordinals(x, VarKind::Endogenous);
        auto rank = low.endo_space().rank(ords);
        return high.to_named(high.endo_space().unrank(endo_rank_[rank]), VarKind::Endogenous);
    }

    NamedSetting apply_exo(const Scm& low, const Scm& high, const NamedSetting& e) const {
        auto ords = low.to_ordinals(e, VarKind::Exogenous);
        auto rank = low.exo_space().rank(ords);
        return high.to_named(high.exo_space().unrank(exo_rank_[rank]), VarKind::Exogenous);
    }

private:
    void build_rank_map(const Scm& low, const Scm& high, VarKind kind,
                        std::vector<std::uint64_t>& out, Diagnostics& diags, const TauDecl& decl) {
        const JointSpace& lo = kind == VarKind::Endogenous ? low.endo_space() : low.exo_space();
        const JointSpace& hi = kind == VarKind::Endogenous ? high.endo_space() : high.exo_space();
        const auto& fns = kind == VarKind::Endogenous ? endo_fns_ : exo_fns_;
        std::size_t n_vars = kind == VarKind::Endogenous ? low.endo().size() : low.exo().size();
        std::vector<int> ords(n_vars, 0), other;
        std::vector<int> hi_ords(fns.size(), 0);
        std::vector<bool> seen(hi.size(), false);
        out.reserve(lo.size());
        do {
            for (std::size_t k = 0; k < fns.size(); ++k)
                hi_ords[k] = kind == VarKind::Endogenous ? fns[k].eval_ordinal(ords, other)
                                                         : fns[k].eval_ordinal(other, ords);
            std::uint64_t r = hi.rank(hi_ords);
            seen[r] = true;
            out.push_back(r);
        } while (lo.next(ords));

        for (std::uint64_t r = 0; r < hi.size(); ++r) {
            if (!seen[r]) {
                const char* side = kind == VarKind::Endogenous ? "endogenous" : "exogenous";
                diags.push_back({Severity::Error, "non-surjective-tau",
                                 "tau '" + name_ + "' never reaches the " + side +
                                     " high-level setting " +
                                     high.display(hi.unrank(r), kind),
                                 decl.line, decl.col});
                return;   // one witness is enough
            }
        }
    }

    std::string name_, low_, high_;
    std::vector<CompiledFn> endo_fns_, exo_fns_;   // aligned with high.endo()/high.exo()
    std::vector<ExprPtr> endo_exprs_, exo_exprs_;
    std::vector<std::uint64_t> endo_rank_, exo_rank_;
};

inline Tau make_tau(const Scm& low, const Scm& high, const TauDecl& decl) {
    Diagnostics diags;
    auto t = Tau::compile(low, high, decl, diags);
    if (!t) {
        std::string msg = "invalid tau '" + decl.name + "':";
        for (const auto& d : diags) msg += "\n  " + d.str();
        raise("invalid-tau", msg);
    }
    return *t;
}

} // namespace scax
