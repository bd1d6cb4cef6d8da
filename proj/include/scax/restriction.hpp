#pragma once

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "scax/intervention.hpp"
#include "scax/scm.hpp"

namespace scax {

// The joint image of an intervention's replacement vector: the set of
// partial settings over the targets that the replacements can produce.
struct ImageSet {
    std::vector<int> targets;            // endogenous indices, ascending
    JointSpace target_space;             // joint domain of the targets
    std::vector<std::uint64_t> ranks;    // members, ascending

    bool contains(std::uint64_t r) const {
        return std::binary_search(ranks.begin(), ranks.end(), r);
    }
};

// A set of total endogenous settings of one model, canonically ordered by
// enumeration rank so equality and inclusion are bit-exact.
struct RestrictionSet {
    std::string model;
    std::string intervention;
    std::vector<std::uint64_t> ranks;    // ascending

    friend bool operator==(const RestrictionSet& a, const RestrictionSet& b) {
        return a.model == b.model && a.ranks == b.ranks;
    }
};

enum class ImageMode {
    Parents,   // enumerate the joint domain of the replacements' parents
    Full       // enumerate all of val(X) x val(E); debug cross-check
};

// Evaluates the replacement vector jointly, once per input, and collects
// the produced partial settings on the targets. The replacements of a
// hard intervention yield a singleton. Per-variable images would
// overapproximate correlated replacements, hence the joint evaluation.
inline ImageSet image(const Scm& m, const Intervention& i, ImageMode mode = ImageMode::Parents) {
    i.bind_check(m);
    ImageSet out;
    std::vector<std::size_t> tsizes;
    for (const auto& e : i.entries()) {
        out.targets.push_back(e.target);
        tsizes.push_back(m.endo()[static_cast<std::size_t>(e.target)].domain.size());
    }
    out.target_space = JointSpace(tsizes);

    std::set<std::uint64_t> seen;
    std::vector<int> endo_ords(m.endo().size(), 0), exo_ords(m.exo().size(), 0);
    std::vector<int> tuple(i.entries().size(), 0);
    auto emit = [&] {
        for (std::size_t k = 0; k < i.entries().size(); ++k)
            tuple[k] = i.entries()[k].fn.eval_ordinal(endo_ords, exo_ords);
        seen.insert(out.target_space.rank(tuple));
    };

    if (mode == ImageMode::Parents) {
        // Parents determine the outputs, so scanning their joint domain
        // yields the same set as the full scan.
        std::vector<VarRef> parents;
        for (const auto& e : i.entries())
            parents.insert(parents.end(), e.fn.parents.begin(), e.fn.parents.end());
        std::sort(parents.begin(), parents.end());
        parents.erase(std::unique(parents.begin(), parents.end()), parents.end());
        std::vector<std::size_t> psizes;
        for (const auto& p : parents) psizes.push_back(m.var(p).domain.size());
        JointSpace pspace{psizes};
        std::vector<int> assignment(parents.size(), 0);
        do {
            for (std::size_t k = 0; k < parents.size(); ++k) {
                const VarRef& p = parents[k];
                (p.kind == VarKind::Endogenous ? endo_ords[static_cast<std::size_t>(p.index)]
                                               : exo_ords[static_cast<std::size_t>(p.index)]) =
                    assignment[k];
            }
            emit();
        } while (pspace.next(assignment));
    } else {
        std::fill(endo_ords.begin(), endo_ords.end(), 0);
        do {
            std::fill(exo_ords.begin(), exo_ords.end(), 0);
            do {
                emit();
            } while (m.exo_space().next(exo_ords));
        } while (m.endo_space().next(endo_ords));
    }
    out.ranks.assign(seen.begin(), seen.end());
    return out;
}

// Soft restriction set: all total endogenous settings whose projection
// onto the targets lies in the joint image of the replacements. The empty
// intervention restricts nothing and yields all of val(X).
inline RestrictionSet soft_restriction(const Scm& m, const Intervention& i,
                                       ImageMode mode = ImageMode::Parents) {
    ImageSet img = image(m, i, mode);
    std::vector<bool> member(img.target_space.size(), false);
    for (auto r : img.ranks) member[r] = true;

    RestrictionSet out;
    out.model = m.name();
    out.intervention = i.display(m);
    const JointSpace& xs = m.endo_space();
    std::vector<int> tuple(img.targets.size(), 0);
    for (std::uint64_t r = 0; r < xs.size(); ++r) {
        for (std::size_t k = 0; k < img.targets.size(); ++k)
            tuple[k] = xs.digit(r, static_cast<std::size_t>(img.targets[k]));
        if (member[img.target_space.rank(tuple)]) out.ranks.push_back(r);
    }
    return out;
}

// Restriction set of a hard intervention: settings matching the constants
// on the targets. Coincides with the soft restriction on hard inputs.
inline RestrictionSet hard_restriction(const Scm& m, const Intervention& i) {
    i.bind_check(m);
    if (!i.is_hard()) raise("not-hard", "restriction set of a non-constant intervention");
    return soft_restriction(m, i);
}

// Hard ordering: i1 precedes i2 iff the targets nest and the constants
// agree on the smaller set.
inline bool precedes_hard(const Scm& m, const Intervention& i1, const Intervention& i2) {
    i1.bind_check(m);
    i2.bind_check(m);
    std::vector<int> c1 = i1.hard_ordinals(), c2 = i2.hard_ordinals();
    for (std::size_t a = 0; a < i1.entries().size(); ++a) {
        bool found = false;
        for (std::size_t b = 0; b < i2.entries().size(); ++b) {
            if (i2.entries()[b].target == i1.entries()[a].target) {
                if (c2[b] != c1[a]) return false;
                found = true;
                break;
            }
        }
        if (!found) return false;
    }
    return true;
}

// Soft ordering: i1 precedes i2 iff its soft restriction contains the
// other one. Reflexive and transitive; both interventions must live on m.
inline bool precedes_soft(const Scm& m, const Intervention& i1, const Intervention& i2) {
    RestrictionSet r1 = soft_restriction(m, i1);
    RestrictionSet r2 = soft_restriction(m, i2);
    return std::includes(r1.ranks.begin(), r1.ranks.end(), r2.ranks.begin(), r2.ranks.end());
}

// Members of a restriction set as name-keyed settings, in canonical order.
inline std::vector<NamedSetting> expand(const Scm& m, const RestrictionSet& rs) {
    std::vector<NamedSetting> out;
    out.reserve(rs.ranks.size());
    for (auto r : rs.ranks) out.push_back(m.to_named(m.endo_space().unrank(r), VarKind::Endogenous));
    return out;
}

} // namespace scax
