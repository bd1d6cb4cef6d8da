#include <catch2/catch_amalgamated.hpp>

#include "scax/fixtures.hpp"
#include "support.hpp"

using namespace scax;
using testsupport::iv;
using testsupport::load;

namespace {

Workspace& fig2() {
    static Workspace w = load(fixtures::fig2);
    return w;
}
Workspace& fig3() {
    static Workspace w = load(fixtures::fig3);
    return w;
}
InterventionSets sets_of(const Scm& L, const Scm& H, std::vector<Intervention> lows,
                         std::vector<Intervention> highs) {
    InterventionSets s;
    s.name = "adhoc";
    s.low_model = L.name();
    s.high_model = H.name();
    s.low = std::move(lows);
    s.high = std::move(highs);
    return s;
}

const Intervention& assigned(const CheckReport& rep, const InterventionSets& sets,
                             std::size_t table, std::size_t kept_low) {
    return sets.high[rep.high_kept[rep.tables[table].assign[kept_low]]];
}

} // namespace

TEST_CASE("fig2: the doubled input maps to the hard Y2 <- T") {
    const Scm& L = *fig2().find_model("L");
    const Scm& H = *fig2().find_model("H");
    const Tau& tau = fig2().taus.front();
    const InterventionSets& sets = fig2().intervention_sets.front();

    CheckReport rep = check_abstraction(L, H, tau, sets, Relation::LowSoft);
    CHECK(rep.holds);
    REQUIRE(rep.tables.size() == 1);
    CHECK(assigned(rep, sets, 0, 0).is_empty());                    // eps -> eps
    CHECK(assigned(rep, sets, 0, 1).display(H) == "Y2 <- T");       // i -> (Y2 <- T)
    CHECK(rep.ambiguity_witnesses.empty());
}

TEST_CASE("fig2: every single-variable hard intervention is abstracted") {
    const Scm& L = *fig2().find_model("L");
    const Scm& H = *fig2().find_model("H");
    const Tau& tau = fig2().taus.front();

    std::vector<Intervention> lows{Intervention::empty(L)};
    for (const char* v : {"X1", "X2", "X3"})
        for (Value c = 0; c < 16; ++c)
            lows.push_back(iv(L, std::string(v) + " <- " + std::to_string(c)));
    std::vector<Intervention> highs{Intervention::empty(H)};
    for (const char* v : {"Y1", "Y2", "Y3"})
        for (const char* c : {"F", "T"})
            highs.push_back(iv(H, std::string(v) + " <- " + c));

    CheckReport rep = check_abstraction(L, H, tau, sets_of(L, H, lows, highs), Relation::Tau);
    CHECK(rep.holds);
    REQUIRE(rep.tables.size() == 1);
    // Spot-check the parity mapping: X1 <- 3 lands on Y1 <- F, X1 <- 4 on Y1 <- T.
    const InterventionSets s = sets_of(L, H, lows, highs);
    CHECK(assigned(rep, s, 0, 4).display(H) == "Y1 <- F");
    CHECK(assigned(rep, s, 0, 5).display(H) == "Y1 <- T");
}

TEST_CASE("identity abstraction on identical models") {
    const Scm& H = *fig2().find_model("H");
    TauDecl td;
    td.name = "id";
    td.low_model = td.high_model = "H";
    for (const char* v : {"Y1", "Y2", "Y3"}) td.maps.push_back({v, testsupport::E(v)});
    for (const char* v : {"U1", "U2"}) td.maps.push_back({v, testsupport::E(v)});
    Tau tau = make_tau(H, H, td);

    auto sets = sets_of(H, H, {Intervention::empty(H)}, {Intervention::empty(H)});
    for (Relation r : {Relation::Tau, Relation::LowSoft, Relation::Soft}) {
        CheckReport rep = check_abstraction(H, H, tau, sets, r);
        CHECK(rep.holds);
        REQUIRE(rep.tables.size() == 1);
        CHECK(assigned(rep, sets, 0, 0).is_empty());
    }
}

TEST_CASE("surjectivity failure: an unreachable high-level intervention") {
    const Scm& L = *fig2().find_model("L");
    const Scm& H = *fig2().find_model("H");
    const Tau& tau = fig2().taus.front();
    auto sets = sets_of(L, H, {Intervention::empty(L)},
                        {Intervention::empty(H), iv(H, "Y2 <- F")});
    CheckReport rep = check_abstraction(L, H, tau, sets, Relation::Tau);
    CHECK(!rep.holds);
    CHECK(rep.tables.empty());
    REQUIRE(rep.failure);
    CHECK(rep.failure->find("surjective") != std::string::npos);
    CHECK(rep.failure->find("Y2 <- F") != std::string::npos);
}

TEST_CASE("the tau relation rejects soft interventions") {
    const Scm& L = *fig2().find_model("L");
    const Scm& H = *fig2().find_model("H");
    CHECK_THROWS_MATCHES(
        check_abstraction(L, H, fig2().taus.front(), fig2().intervention_sets.front(),
                          Relation::Tau),
        Error, Catch::Matchers::Predicate<Error>(
                   [](const Error& e) { return e.kind() == "non-hard-intervention"; }));
}

TEST_CASE("fig3: low-soft admits two omega tables, soft exactly one") {
    const Scm& L = *fig3().find_model("L");
    const Scm& H = *fig3().find_model("H");
    const Tau& tau = fig3().taus.front();
    const InterventionSets& sets = fig3().intervention_sets.front();

    CheckReport low = check_abstraction(L, H, tau, sets, Relation::LowSoft);
    CHECK(low.holds);
    CHECK(low.tables.size() == 2);
    // Both sum and product-sum interventions accept both high candidates.
    REQUIRE(low.candidates.size() == 3);
    CHECK(low.candidates[1].size() == 2);
    CHECK(low.candidates[2].size() == 2);
    CHECK(low.ambiguity_witnesses.size() == 2);

    CheckReport soft = check_abstraction(L, H, tau, sets, Relation::Soft);
    CHECK(soft.holds);
    REQUIRE(soft.tables.size() == 1);
    CHECK(assigned(soft, sets, 0, 1).display(H) == "Y3 <- [Y1 = Y2]");
    CHECK(assigned(soft, sets, 0, 2).display(H) == "Y3 <- Y1 and Y2");
    CHECK(soft.ambiguity_witnesses.empty());
}

TEST_CASE("fig3: the counterexample excluding the conjunction is pinned exactly") {
    const Scm& L = *fig3().find_model("L");
    const Scm& H = *fig3().find_model("H");
    const Tau& tau = fig3().taus.front();
    const InterventionSets& sets = fig3().intervention_sets.front();

    CheckReport soft = check_abstraction(L, H, tau, sets, Relation::Soft);
    // kept index 1 = X3 <- X1 + X2, kept index 2 = Y3 <- Y1 and Y2.
    const PairOutcome& po = soft.pairs[1][2];
    CHECK(po.restriction_match);
    CHECK(!po.consistent);
    REQUIRE(po.counterexample);
    const Counterexample& cex = *po.counterexample;
    REQUIRE(cex.endo);
    CHECK(*cex.endo == NamedSetting{{"X1", 1}, {"X2", 1}, {"X3", 1}});
    CHECK(cex.exo == NamedSetting{{"U1", 1}, {"U2", 1}});
    CHECK(cex.lhs == NamedSetting{{"Y1", 0}, {"Y2", 1}, {"Y3", 1}});   // [F, T, T]
    CHECK(cex.rhs == NamedSetting{{"Y1", 0}, {"Y2", 1}, {"Y3", 0}});   // [F, T, F]
}

TEST_CASE("fig3: singleton intervention sets behave like the full fixture") {
    const Scm& L = *fig3().find_model("L");
    const Scm& H = *fig3().find_model("H");
    const Tau& tau = fig3().taus.front();
    Intervention i1 = iv(L, "X3 <- (X1 + X2) mod 16");
    Intervention j = iv(H, "Y3 <- [Y1 = Y2]");
    Intervention jp = iv(H, "Y3 <- Y1 and Y2");

    // With J = {j} the soft relation holds and omega is unique.
    CheckReport ok = check_abstraction(L, H, tau, sets_of(L, H, {i1}, {j}), Relation::Soft);
    CHECK(ok.holds);
    CHECK(ok.tables.size() == 1);

    // With J = {j'} alone it fails, witnessed by the same settings.
    CheckReport bad = check_abstraction(L, H, tau, sets_of(L, H, {i1}, {jp}), Relation::Soft);
    CHECK(!bad.holds);
    REQUIRE(bad.counterexample);
    CHECK(*bad.counterexample->endo == NamedSetting{{"X1", 1}, {"X2", 1}, {"X3", 1}});
    CHECK(bad.counterexample->exo == NamedSetting{{"U1", 1}, {"U2", 1}});

    // Under low-soft both candidates survive for the single low-level
    // intervention; a lone intervention cannot cover both, so no
    // surjective assignment exists, but the ambiguity is witnessed.
    CheckReport amb = check_abstraction(L, H, tau, sets_of(L, H, {i1}, {j, jp}), Relation::LowSoft);
    CHECK(amb.candidates[0].size() == 2);
    REQUIRE(amb.ambiguity_witnesses.size() == 1);
    CHECK(!amb.holds);
    CHECK(amb.tables.empty());
}

TEST_CASE("search_omega returns every admissible assignment") {
    const Scm& L = *fig3().find_model("L");
    const Scm& H = *fig3().find_model("H");
    const Tau& tau = fig3().taus.front();
    const InterventionSets& sets = fig3().intervention_sets.front();
    CHECK(search_omega(L, H, tau, sets, Relation::LowSoft).size() == 2);
    CHECK(search_omega(L, H, tau, sets, Relation::Soft).size() == 1);
    CHECK(search_omega(L, H, tau, sets_of(L, H, {}, {}), Relation::Soft).size() == 1);
}

TEST_CASE("exactly one ambiguous pair in the fig3 high-level set") {
    const Scm& H = *fig3().find_model("H");
    const InterventionSets& sets = fig3().intervention_sets.front();
    auto pairs = detect_ambiguity(H, sets.high);
    REQUIRE(pairs.size() == 1);
    CHECK(pairs[0].variable == "Y3");
    CHECK(sets.high[pairs[0].j1].display(H) == "Y3 <- [Y1 = Y2]");
    CHECK(sets.high[pairs[0].j2].display(H) == "Y3 <- Y1 and Y2");
}

TEST_CASE("a detected ambiguous pair predicts multiple low-soft omega tables") {
    // The high-level set contains an indistinguishable pair and low-soft
    // abstraction holds, so the intervention map cannot be unique.
    const Scm& L = *fig3().find_model("L");
    const Scm& H = *fig3().find_model("H");
    const InterventionSets& sets = fig3().intervention_sets.front();
    REQUIRE(!detect_ambiguity(H, sets.high).empty());
    CheckReport low = check_abstraction(L, H, fig3().taus.front(), sets, Relation::LowSoft);
    REQUIRE(low.holds);
    CHECK(low.tables.size() >= 2);
}

TEST_CASE("hard interventions with distinct constants are never ambiguous") {
    const Scm& H = *fig2().find_model("H");
    std::vector<Intervention> js;
    for (const char* v : {"Y1", "Y2", "Y3"})
        for (const char* c : {"F", "T"})
            js.push_back(iv(H, std::string(v) + " <- " + c));
    CHECK(detect_ambiguity(H, js).empty());
}

TEST_CASE("table-identical pairs are not reported as ambiguous") {
    const Scm& H = *fig3().find_model("H");
    std::vector<Intervention> js{iv(H, "Y3 <- Y1 or Y2"), iv(H, "Y3 <- Y1 or Y2")};
    CHECK(detect_ambiguity(H, js).empty());
}

TEST_CASE("duplicate interventions are dropped with a warning") {
    const Scm& L = *fig3().find_model("L");
    const Scm& H = *fig3().find_model("H");
    const Tau& tau = fig3().taus.front();
    auto sets = sets_of(L, H, {Intervention::empty(L), iv(L, "X3 <- (X1 + X2) mod 16")},
                        {Intervention::empty(H), iv(H, "Y3 <- [Y1 = Y2]"),
                         iv(H, "Y3 <- [Y2 = Y1]")});   // same table, different syntax
    CheckReport rep = check_abstraction(L, H, tau, sets, Relation::Soft);
    CHECK(rep.high_kept.size() == 2);
    bool warned = false;
    for (const auto& n : rep.notes) warned |= n.code == "duplicate-intervention";
    CHECK(warned);
    CHECK(rep.holds);
}

TEST_CASE("quotient instances: soft abstraction holds with a unique, well-behaved omega") {
    std::mt19937 rng(47);
    for (int trial = 0; trial < 40; ++trial) {
        auto q = testsupport::make_quotient(rng);
        const Scm& L = q.low();
        const Scm& H = q.high();
        CheckReport soft = check_abstraction(L, H, q.tau(), q.sets(), Relation::Soft);
        REQUIRE(soft.holds);
        REQUIRE(soft.tables.size() == 1);   // uniqueness

        // Fixed point: eps maps to eps.
        REQUIRE(q.sets().low[soft.low_kept[0]].is_empty());
        CHECK(assigned(soft, q.sets(), 0, 0).is_empty());

        // Soft implies low-soft on the same input.
        CheckReport low = check_abstraction(L, H, q.tau(), q.sets(), Relation::LowSoft);
        CHECK(low.holds);

        // Order preservation along omega.
        for (std::size_t a = 0; a < soft.low_kept.size(); ++a)
            for (std::size_t b = 0; b < soft.low_kept.size(); ++b) {
                const Intervention& ia = q.sets().low[soft.low_kept[a]];
                const Intervention& ib = q.sets().low[soft.low_kept[b]];
                if (!precedes_soft(L, ia, ib)) continue;
                CHECK(precedes_soft(H, assigned(soft, q.sets(), 0, a),
                                    assigned(soft, q.sets(), 0, b)));
            }

        // Hard reduction: the three relations agree on the hard subsets.
        InterventionSets sub;
        sub.name = "hard-sub";
        sub.low_model = L.name();
        sub.high_model = H.name();
        for (std::size_t a = 0; a < soft.low_kept.size(); ++a) {
            const Intervention& ia = q.sets().low[soft.low_kept[a]];
            const Intervention& ja = assigned(soft, q.sets(), 0, a);
            if (!ia.is_hard() || !ja.is_hard()) continue;
            sub.low.push_back(ia);
            bool seen = false;
            for (const auto& j : sub.high) seen |= j == ja;
            if (!seen) sub.high.push_back(ja);
        }
        CheckReport rt = check_abstraction(L, H, q.tau(), sub, Relation::Tau);
        CheckReport rl = check_abstraction(L, H, q.tau(), sub, Relation::LowSoft);
        CheckReport rs = check_abstraction(L, H, q.tau(), sub, Relation::Soft);
        CHECK(rt.holds);
        CHECK(rl.holds);
        CHECK(rs.holds);
        CHECK(rt.tables.size() == rl.tables.size());
        CHECK(rl.tables.size() == rs.tables.size());

        // Breaking a constant at restriction level fails all three alike.
        if (!sub.low.empty() && !sub.high.empty() && !sub.high.back().is_empty()) {
            InterventionSets broken = sub;
            const Intervention& last = broken.high.back();
            const auto& entry = last.entries().front();
            const VarDecl& target = H.endo()[static_cast<std::size_t>(entry.target)];
            Value flipped = target.domain.value_at((entry.fn.table.front() + 1) %
                                                   static_cast<int>(target.domain.size()));
            broken.high.back() =
                iv(H, target.name + " <- " + std::to_string(flipped));
            bool t = check_abstraction(L, H, q.tau(), broken, Relation::Tau).holds;
            bool l = check_abstraction(L, H, q.tau(), broken, Relation::LowSoft).holds;
            bool s = check_abstraction(L, H, q.tau(), broken, Relation::Soft).holds;
            CHECK(t == l);
            CHECK(l == s);
        }
    }
}

TEST_CASE("tau maps may read several low-level variables jointly") {
    // Y1 abstracts the parity of the pair (X1, X2); no per-variable
    // factorization exists, but the relations do not need one.
    Workspace w = testsupport::load(R"(
domain B = F T
model L {
  exo E1 : B
  exo E2 : B
  eq X1 : B = E1
  eq X2 : B = E2
}
model H {
  exo U1 : B
  eq Y1 : B = U1
}
tau mix : L -> H {
  map Y1 = X1 xor X2
  map U1 = E1 xor E2
}
interventions main : L -> H {
  low eps
  low X1 <- not E1, X2 <- not E2
  high eps
}
)");
    const Scm& L = *w.find_model("L");
    const Scm& H = *w.find_model("H");
    CheckReport rep =
        check_abstraction(L, H, w.taus.front(), w.intervention_sets.front(), Relation::Soft);
    // Negating both inputs preserves the joint parity, so the double
    // negation is one more way of changing nothing.
    CHECK(rep.holds);
    REQUIRE(rep.tables.size() == 1);
    CHECK(rep.tables[0].assign == std::vector<std::size_t>{0, 0});
}

TEST_CASE("check rejects mismatched model bindings") {
    const Scm& L = *fig2().find_model("L");
    const Scm& H = *fig2().find_model("H");
    CHECK_THROWS_MATCHES(
        check_abstraction(H, L, fig2().taus.front(), fig2().intervention_sets.front(),
                          Relation::LowSoft),
        Error,
        Catch::Matchers::Predicate<Error>([](const Error& e) { return e.kind() == "cross-model"; }));
}
