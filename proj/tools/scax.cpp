// Command-line checker for soft causal abstraction between finite-domain
// structural causal models. Subcommands cover the three abstraction
// relations, restriction sets, intervention orderings, ambiguity
// detection and the explicit intervention map of constructive
// abstractions.
//
// Exit codes: 0 success / relation holds, 1 relation does not hold,
// 2 validation error, 3 usage error.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "scax/abstraction.hpp"
#include "scax/alignment.hpp"
#include "scax/fixtures.hpp"
#include "scax/io.hpp"

using json = nlohmann::ordered_json;
using namespace scax;

namespace {

constexpr int kExitHolds = 0;
constexpr int kExitDoesNotHold = 1;
constexpr int kExitValidation = 2;
constexpr int kExitUsage = 3;

struct CliError {
    int code;
    std::string message;
};

[[noreturn]] void usage_error(const std::string& msg) { throw CliError{kExitUsage, msg}; }
[[noreturn]] void validation_error(const std::string& msg) { throw CliError{kExitValidation, msg}; }

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) validation_error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Workspace load_workspace(const std::string& path) {
    ParseResult res = parse_workspace(read_file(path));
    for (const auto& d : res.diagnostics) std::cerr << path << ":" << d.str() << "\n";
    if (!res.workspace) validation_error("workspace '" + path + "' failed validation");
    return std::move(*res.workspace);
}

const Scm& resolve_model(const Workspace& w, const std::string& name) {
    const Scm* m = w.find_model(name);
    if (!m) usage_error("no model named '" + name + "' in the workspace");
    return *m;
}

const Tau& resolve_tau(const Workspace& w, const std::string& name) {
    if (!name.empty()) {
        const Tau* t = w.find_tau(name);
        if (!t) usage_error("no tau named '" + name + "' in the workspace");
        return *t;
    }
    if (w.taus.size() != 1)
        usage_error(w.taus.empty() ? "the workspace declares no tau map"
                                   : "several tau maps declared; pick one with --tau");
    return w.taus.front();
}

const InterventionSets& resolve_sets(const Workspace& w, const std::string& name) {
    if (!name.empty()) {
        const InterventionSets* s = w.find_sets(name);
        if (!s) usage_error("no interventions named '" + name + "' in the workspace");
        return *s;
    }
    if (w.intervention_sets.size() != 1)
        usage_error(w.intervention_sets.empty()
                        ? "the workspace declares no interventions"
                        : "several intervention sets declared; pick one with --interventions");
    return w.intervention_sets.front();
}

const Alignment& resolve_alignment(const Workspace& w, const std::string& name) {
    if (!name.empty()) {
        const Alignment* a = w.find_alignment(name);
        if (!a) usage_error("no alignment named '" + name + "' in the workspace");
        return *a;
    }
    if (w.alignments.size() != 1)
        usage_error(w.alignments.empty() ? "the workspace declares no alignment"
                                         : "several alignments declared; pick one with --alignment");
    return w.alignments.front();
}

std::string display_setting(const Scm& m, VarKind, const NamedSetting& s) {
    std::string out = "(";
    bool first = true;
    for (const auto& [name, value] : s) {
        if (!first) out += ", ";
        first = false;
        auto ref = m.find(name);
        out += name + "=";
        out += ref ? m.var(*ref).domain.display(value) : std::to_string(value);
    }
    return out + ")";
}

json setting_json(const NamedSetting& s) {
    json out = json::object();
    for (const auto& [name, value] : s) out[name] = value;
    return out;
}

json counterexample_json(const Scm& L, const Scm& H, const InterventionSets& sets,
                         const Counterexample& cex) {
    json out = json::object();
    out["low"] = sets.low[cex.low_index].display(L);
    out["high"] = sets.high[cex.high_index].display(H);
    if (cex.endo) out["x"] = setting_json(*cex.endo);
    out["e"] = setting_json(cex.exo);
    out["lhs"] = setting_json(cex.lhs);
    out["rhs"] = setting_json(cex.rhs);
    return out;
}

void print_counterexample(const Scm& L, const Scm& H, const Counterexample& cex,
                          std::ostream& os) {
    if (cex.endo) os << "    at x = " << display_setting(L, VarKind::Endogenous, *cex.endo) << ", ";
    else os << "    at ";
    os << "e = " << display_setting(L, VarKind::Exogenous, cex.exo) << "\n";
    os << "    lhs " << display_setting(H, VarKind::Endogenous, cex.lhs) << "\n";
    os << "    rhs " << display_setting(H, VarKind::Endogenous, cex.rhs) << "\n";
}

// Per-target function table of an intervention entry, one row per parent
// assignment.
void print_entry_table(const Scm& m, const Intervention::Entry& e, std::ostream& os) {
    const VarDecl& target = m.endo()[static_cast<std::size_t>(e.target)];
    os << "  g[" << target.name << "] over (";
    for (std::size_t k = 0; k < e.fn.parents.size(); ++k)
        os << (k ? ", " : "") << m.var(e.fn.parents[k]).name;
    os << "):\n";
    std::vector<int> assignment(e.fn.parents.size(), 0);
    std::uint64_t r = 0;
    do {
        os << "    (";
        for (std::size_t k = 0; k < e.fn.parents.size(); ++k) {
            const auto& vd = m.var(e.fn.parents[k]);
            os << (k ? ", " : "") << vd.name << "=" << vd.domain.display(vd.domain.value_at(assignment[k]));
        }
        os << ") -> " << target.domain.display(target.domain.value_at(e.fn.table[r])) << "\n";
        ++r;
    } while (e.fn.parent_space.next(assignment));
}

json entry_table_json(const Scm& m, const Intervention::Entry& e) {
    const VarDecl& target = m.endo()[static_cast<std::size_t>(e.target)];
    json out = json::object();
    out["target"] = target.name;
    json parents = json::array();
    for (const auto& p : e.fn.parents) parents.push_back(m.var(p).name);
    out["parents"] = parents;
    json rows = json::array();
    std::vector<int> assignment(e.fn.parents.size(), 0);
    std::uint64_t r = 0;
    do {
        json row = json::object();
        json args = json::object();
        for (std::size_t k = 0; k < e.fn.parents.size(); ++k) {
            const auto& vd = m.var(e.fn.parents[k]);
            args[vd.name] = vd.domain.value_at(assignment[k]);
        }
        row["args"] = args;
        row["value"] = target.domain.value_at(e.fn.table[r]);
        rows.push_back(row);
        ++r;
    } while (e.fn.parent_space.next(assignment));
    out["entries"] = rows;
    return out;
}

Relation parse_relation(const std::string& s) {
    if (s == "tau") return Relation::Tau;
    if (s == "low-soft") return Relation::LowSoft;
    if (s == "soft") return Relation::Soft;
    usage_error("unknown relation '" + s + "' (expected tau, low-soft or soft)");
}

int cmd_check(const std::string& path, const std::string& relation_name, const std::string& low_name,
              const std::string& high_name, const std::string& tau_name,
              const std::string& sets_name, bool machine) {
    Workspace w = load_workspace(path);
    const Tau& tau = resolve_tau(w, tau_name);
    const Scm& L = resolve_model(w, low_name.empty() ? tau.low_model() : low_name);
    const Scm& H = resolve_model(w, high_name.empty() ? tau.high_model() : high_name);
    const InterventionSets& sets = resolve_sets(w, sets_name);
    Relation relation = parse_relation(relation_name);

    CheckReport rep;
    try {
        rep = check_abstraction(L, H, tau, sets, relation);
    } catch (const Error& e) {
        validation_error(e.what());
    }

    if (machine) {
        json out = json::object();
        out["command"] = "check";
        out["relation"] = to_string(relation);
        out["low"] = L.name();
        out["high"] = H.name();
        out["tau"] = tau.name();
        out["interventions"] = sets.name;
        out["holds"] = rep.holds;
        json tables = json::array();
        for (const auto& t : rep.tables) {
            json table = json::array();
            for (std::size_t a = 0; a < t.assign.size(); ++a) {
                json entry = json::object();
                entry["low"] = sets.low[rep.low_kept[a]].display(L);
                entry["high"] = sets.high[rep.high_kept[t.assign[a]]].display(H);
                entry["kind"] = to_string(t.kinds[a]);
                table.push_back(entry);
            }
            tables.push_back(table);
        }
        out["omega_tables"] = tables;
        json pruned = json::array();
        for (std::size_t a = 0; a < rep.low_kept.size(); ++a)
            for (std::size_t b = 0; b < rep.high_kept.size(); ++b) {
                const auto& po = rep.pairs[a][b];
                if (po.restriction_match && po.counterexample)
                    pruned.push_back(counterexample_json(L, H, sets, *po.counterexample));
            }
        out["pruned"] = pruned;
        json amb = json::array();
        for (const auto& [i, j1, j2] : rep.ambiguity_witnesses) {
            json witness = json::object();
            witness["low"] = sets.low[i].display(L);
            witness["high_1"] = sets.high[j1].display(H);
            witness["high_2"] = sets.high[j2].display(H);
            amb.push_back(witness);
        }
        out["ambiguity_witnesses"] = amb;
        if (rep.failure) out["failure"] = *rep.failure;
        if (rep.counterexample)
            out["counterexample"] = counterexample_json(L, H, sets, *rep.counterexample);
        json warnings = json::array();
        for (const auto& n : rep.notes) warnings.push_back(n.str());
        out["warnings"] = warnings;
        std::cout << out.dump(2) << "\n";
    } else {
        std::cout << "relation: " << to_string(relation) << "\n";
        std::cout << "models: " << L.name() << " -> " << H.name() << " (tau " << tau.name()
                  << ", interventions " << sets.name << ")\n";
        std::cout << "verdict: " << (rep.holds ? "holds" : "does not hold") << "\n";
        if (rep.failure) std::cout << "reason: " << *rep.failure << "\n";
        std::cout << "admissible omega tables: " << rep.tables.size() << "\n";
        for (std::size_t t = 0; t < rep.tables.size(); ++t) {
            std::cout << "omega #" << (t + 1) << ":\n";
            for (std::size_t a = 0; a < rep.tables[t].assign.size(); ++a) {
                std::cout << "  " << sets.low[rep.low_kept[a]].display(L) << "  =>  "
                          << sets.high[rep.high_kept[rep.tables[t].assign[a]]].display(H) << "  ["
                          << to_string(rep.tables[t].kinds[a]) << "]\n";
            }
        }
        bool any_pruned = false;
        for (std::size_t a = 0; a < rep.low_kept.size(); ++a)
            for (std::size_t b = 0; b < rep.high_kept.size(); ++b) {
                const auto& po = rep.pairs[a][b];
                if (!(po.restriction_match && po.counterexample)) continue;
                if (!any_pruned) std::cout << "pruned candidates:\n";
                any_pruned = true;
                std::cout << "  " << sets.low[rep.low_kept[a]].display(L) << "  =/=>  "
                          << sets.high[rep.high_kept[b]].display(H) << "\n";
                print_counterexample(L, H, *po.counterexample, std::cout);
            }
        if (rep.counterexample && !rep.holds) {
            std::cout << "counterexample:\n";
            print_counterexample(L, H, *rep.counterexample, std::cout);
        }
        if (!rep.ambiguity_witnesses.empty()) {
            std::cout << "ambiguity witnesses:\n";
            for (const auto& [i, j1, j2] : rep.ambiguity_witnesses)
                std::cout << "  " << sets.low[i].display(L) << " admits both "
                          << sets.high[j1].display(H) << " and " << sets.high[j2].display(H)
                          << "\n";
        }
        for (const auto& n : rep.notes) std::cout << n.str() << "\n";
    }
    return rep.holds ? kExitHolds : kExitDoesNotHold;
}

int cmd_omega(const std::string& path, const std::string& align_name,
              const std::string& intervention_text, bool compare_oracle, std::uint64_t seed,
              bool use_seed, const std::string& sets_name, bool machine) {
    Workspace w = load_workspace(path);
    const Alignment& pi = resolve_alignment(w, align_name);
    const Tau* tau = w.find_tau(pi.tau_name());
    const Scm& L = resolve_model(w, tau->low_model());
    const Scm& H = resolve_model(w, tau->high_model());

    Intervention i = Intervention::empty(L);
    try {
        i = parse_intervention(L, intervention_text);
    } catch (const Error& e) {
        usage_error(std::string("bad intervention literal: ") + e.what());
    }

    ExplicitOmegaOptions opt;
    if (use_seed) opt.pick = seeded_preimage(seed);
    Intervention j = Intervention::empty(H);
    try {
        j = explicit_omega(L, H, *tau, pi, i, opt);
    } catch (const Error& e) {
        validation_error(e.what());
    }

    std::optional<bool> oracle_match;
    std::string oracle_display;
    if (compare_oracle) {
        const InterventionSets& sets = resolve_sets(w, sets_name);
        CheckReport rep;
        try {
            rep = check_abstraction(L, H, *tau, sets, Relation::Soft);
        } catch (const Error& e) {
            validation_error(e.what());
        }
        if (!rep.holds)
            validation_error("soft abstraction does not hold on these intervention sets; "
                             "there is no oracle omega to compare against");
        std::size_t pos = rep.low_kept.size();
        for (std::size_t a = 0; a < rep.low_kept.size(); ++a)
            if (sets.low[rep.low_kept[a]] == i) pos = a;
        if (pos == rep.low_kept.size())
            validation_error("intervention '" + i.display(L) +
                             "' is not in the admissible low-level set '" + sets.name + "'");
        const Intervention& oracle_j = sets.high[rep.high_kept[rep.tables.front().assign[pos]]];
        oracle_match = intervened_tables(H, j) == intervened_tables(H, oracle_j);
        oracle_display = oracle_j.display(H);
    }

    if (machine) {
        json out = json::object();
        out["command"] = "omega";
        out["alignment"] = pi.name();
        out["intervention"] = i.display(L);
        out["omega"] = j.display(H);
        json tables = json::array();
        for (const auto& e : j.entries()) tables.push_back(entry_table_json(H, e));
        out["tables"] = tables;
        if (oracle_match) {
            out["oracle"] = oracle_display;
            out["matches_oracle"] = *oracle_match;
        }
        std::cout << out.dump(2) << "\n";
    } else {
        std::cout << "intervention: " << i.display(L) << "\n";
        std::cout << "omega(i): " << j.display(H) << "\n";
        for (const auto& e : j.entries()) print_entry_table(H, e, std::cout);
        if (oracle_match)
            std::cout << "oracle: " << (*oracle_match ? "matches" : "MISMATCHES")
                      << " the unique soft omega (" << oracle_display << ")\n";
    }
    if (oracle_match && !*oracle_match) return kExitDoesNotHold;
    return kExitHolds;
}

int cmd_restrict(const std::string& path, const std::string& model_name,
                 const std::string& intervention_text, bool machine) {
    Workspace w = load_workspace(path);
    const Scm& m = resolve_model(w, model_name);
    Intervention i = Intervention::empty(m);
    try {
        i = parse_intervention(m, intervention_text);
    } catch (const Error& e) {
        usage_error(std::string("bad intervention literal: ") + e.what());
    }
    RestrictionSet rs = soft_restriction(m, i);
    auto settings = expand(m, rs);
    if (machine) {
        json out = json::object();
        out["command"] = "restrict";
        out["model"] = m.name();
        out["intervention"] = i.display(m);
        out["count"] = settings.size();
        json list = json::array();
        for (const auto& s : settings) list.push_back(setting_json(s));
        out["settings"] = list;
        std::cout << out.dump(2) << "\n";
    } else {
        std::cout << "soft restriction of " << i.display(m) << " on " << m.name() << ": "
                  << settings.size() << " settings\n";
        for (const auto& s : settings)
            std::cout << "  " << display_setting(m, VarKind::Endogenous, s) << "\n";
    }
    return kExitHolds;
}

int cmd_order(const std::string& path, const std::string& model_name, const std::string& a_text,
              const std::string& b_text, bool machine) {
    Workspace w = load_workspace(path);
    const Scm& m = resolve_model(w, model_name);
    Intervention a = Intervention::empty(m), b = Intervention::empty(m);
    try {
        a = parse_intervention(m, a_text);
        b = parse_intervention(m, b_text);
    } catch (const Error& e) {
        usage_error(std::string("bad intervention literal: ") + e.what());
    }
    bool ab = precedes_soft(m, a, b);
    bool ba = precedes_soft(m, b, a);
    if (machine) {
        json out = json::object();
        out["command"] = "order";
        out["model"] = m.name();
        out["a"] = a.display(m);
        out["b"] = b.display(m);
        out["a_precedes_b"] = ab;
        out["b_precedes_a"] = ba;
        std::cout << out.dump(2) << "\n";
    } else {
        std::cout << "a = " << a.display(m) << "\n";
        std::cout << "b = " << b.display(m) << "\n";
        std::cout << "a precedes b: " << (ab ? "true" : "false") << "\n";
        std::cout << "b precedes a: " << (ba ? "true" : "false") << "\n";
    }
    return ab ? kExitHolds : kExitDoesNotHold;
}

int cmd_ambiguity(const std::string& path, const std::string& model_name,
                  const std::string& sets_name, bool machine) {
    Workspace w = load_workspace(path);
    const Scm& m = resolve_model(w, model_name);
    const InterventionSets& sets = resolve_sets(w, sets_name);
    const std::vector<Intervention>* js = nullptr;
    if (sets.high_model == m.name()) js = &sets.high;
    else if (sets.low_model == m.name()) js = &sets.low;
    else usage_error("model '" + m.name() + "' is not part of interventions '" + sets.name + "'");

    auto pairs = detect_ambiguity(m, *js);
    if (machine) {
        json out = json::object();
        out["command"] = "ambiguity";
        out["model"] = m.name();
        out["interventions"] = sets.name;
        json list = json::array();
        for (const auto& p : pairs) {
            json pair = json::object();
            pair["variable"] = p.variable;
            pair["j1"] = (*js)[p.j1].display(m);
            pair["j2"] = (*js)[p.j2].display(m);
            list.push_back(pair);
        }
        out["pairs"] = list;
        std::cout << out.dump(2) << "\n";
    } else {
        std::cout << "ambiguous intervention pairs on " << m.name() << ": " << pairs.size() << "\n";
        for (const auto& p : pairs)
            std::cout << "  on " << p.variable << ": " << (*js)[p.j1].display(m) << "  vs  "
                      << (*js)[p.j2].display(m) << "\n";
    }
    return pairs.empty() ? kExitDoesNotHold : kExitHolds;
}

int cmd_validate(const std::string& path, bool machine) {
    ParseResult res = parse_workspace(read_file(path));
    if (machine) {
        json out = json::object();
        out["command"] = "validate";
        out["ok"] = res.workspace.has_value();
        json diags = json::array();
        for (const auto& d : res.diagnostics) {
            json diag = json::object();
            diag["severity"] = d.severity == Severity::Error
                                   ? "error"
                                   : (d.severity == Severity::Warning ? "warning" : "info");
            diag["code"] = d.code;
            diag["message"] = d.message;
            diag["line"] = d.line;
            diag["col"] = d.col;
            diags.push_back(diag);
        }
        out["diagnostics"] = diags;
        std::cout << out.dump(2) << "\n";
    } else {
        for (const auto& d : res.diagnostics) std::cout << path << ":" << d.str() << "\n";
        std::cout << (res.workspace ? "workspace is valid" : "workspace is invalid") << "\n";
    }
    return res.workspace ? kExitHolds : kExitValidation;
}

int cmd_fixtures(const std::string& name, const std::string& out_dir) {
    const std::vector<std::pair<std::string, std::string_view>> all = {
        {"fig2", fixtures::fig2}, {"fig3", fixtures::fig3}, {"fig4", fixtures::fig4}};
    if (!out_dir.empty()) {
        for (const auto& [n, text] : all) {
            std::string p = out_dir + "/" + n + ".sca";
            std::ofstream out(p, std::ios::binary);
            if (!out) validation_error("cannot write '" + p + "'");
            out << text;
            std::cout << "wrote " << p << "\n";
        }
        return kExitHolds;
    }
    if (name.empty()) {
        for (const auto& [n, text] : all) std::cout << n << "\n";
        return kExitHolds;
    }
    for (const auto& [n, text] : all)
        if (n == name) {
            std::cout << text;
            return kExitHolds;
        }
    usage_error("unknown fixture '" + name + "' (have: fig2, fig3, fig4)");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"finite-domain checker for soft causal abstraction between SCMs"};
    app.require_subcommand(1);
    std::string format = "human";

    std::string ws, relation = "soft", low, high, tau, sets, align_name, intervention, a_text,
                    b_text, model, fixture_name, out_dir;
    bool compare_oracle = false;
    std::uint64_t seed = 0;

    auto add_format = [&](CLI::App* cmd) {
        cmd->add_option("--format", format, "output format")->check(CLI::IsMember({"human", "machine"}));
    };

    CLI::App* check = app.add_subcommand("check", "decide an abstraction relation");
    check->add_option("workspace", ws, "workspace file (.sca)")->required();
    check->add_option("--relation", relation, "tau, low-soft or soft")->required();
    check->add_option("--low", low, "low-level model name");
    check->add_option("--high", high, "high-level model name");
    check->add_option("--tau", tau, "tau map name");
    check->add_option("--interventions", sets, "interventions name");
    add_format(check);

    CLI::App* omega = app.add_subcommand("omega", "explicit intervention map of an alignment");
    omega->add_option("workspace", ws, "workspace file (.sca)")->required();
    omega->add_option("-i,--intervention", intervention, "low-level intervention literal")->required();
    omega->add_option("-a,--alignment", align_name, "alignment name");
    omega->add_option("--interventions", sets, "interventions name (for --compare-oracle)");
    auto* seed_opt = omega->add_option("--seed", seed, "randomized preimage selector seed");
    omega->add_flag("--compare-oracle", compare_oracle,
                    "cross-check against the brute-force soft omega");
    add_format(omega);

    CLI::App* restrict_cmd = app.add_subcommand("restrict", "soft restriction set of an intervention");
    restrict_cmd->add_option("workspace", ws, "workspace file (.sca)")->required();
    restrict_cmd->add_option("-m,--model", model, "model name")->required();
    restrict_cmd->add_option("-i,--intervention", intervention, "intervention literal")->required();
    add_format(restrict_cmd);

    CLI::App* order = app.add_subcommand("order", "soft intervention ordering");
    order->add_option("workspace", ws, "workspace file (.sca)")->required();
    order->add_option("-m,--model", model, "model name")->required();
    order->add_option("-a", a_text, "first intervention literal")->required();
    order->add_option("-b", b_text, "second intervention literal")->required();
    add_format(order);

    CLI::App* ambiguity = app.add_subcommand("ambiguity", "detect indistinguishable intervention pairs");
    ambiguity->add_option("workspace", ws, "workspace file (.sca)")->required();
    ambiguity->add_option("-m,--model", model, "model name")->required();
    ambiguity->add_option("--interventions", sets, "interventions name");
    add_format(ambiguity);

    CLI::App* validate = app.add_subcommand("validate", "parse and validate a workspace");
    validate->add_option("workspace", ws, "workspace file (.sca)")->required();
    add_format(validate);

    CLI::App* fixtures_cmd = app.add_subcommand("fixtures", "print or write the bundled workspaces");
    fixtures_cmd->add_option("name", fixture_name, "fixture name (fig2, fig3, fig4)");
    fixtures_cmd->add_option("--out", out_dir, "write all fixtures into a directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_name() == "CallForHelp" || e.get_name() == "CallForAllHelp")
            return app.exit(e);
        std::cerr << e.what() << "\n";
        return kExitUsage;
    }

    bool machine = format == "machine";
    try {
        if (app.got_subcommand(check))
            return cmd_check(ws, relation, low, high, tau, sets, machine);
        if (app.got_subcommand(omega))
            return cmd_omega(ws, align_name, intervention, compare_oracle, seed,
                             seed_opt->count() > 0, sets, machine);
        if (app.got_subcommand(restrict_cmd)) return cmd_restrict(ws, model, intervention, machine);
        if (app.got_subcommand(order)) return cmd_order(ws, model, a_text, b_text, machine);
        if (app.got_subcommand(ambiguity)) return cmd_ambiguity(ws, model, sets, machine);
        if (app.got_subcommand(validate)) return cmd_validate(ws, machine);
        if (app.got_subcommand(fixtures_cmd)) return cmd_fixtures(fixture_name, out_dir);
    } catch (const CliError& e) {
        std::cerr << "error: " << e.message << "\n";
        return e.code;
    } catch (const Error& e) {
        std::cerr << "error [" << e.kind() << "]: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitUsage;
}
