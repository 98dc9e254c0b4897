#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "blockfn/diagonalizer.hpp"
#include "blockfn/spec_io.hpp"

using namespace blockfn;

namespace {

class Silent : public Functional {
public:
    std::optional<Computation> run(std::int64_t, const Oracle&) const override { return std::nullopt; }
    std::string id() const override { return "silent"; }
};

// Output is the oracle value at the input, read with use = input.
class Echo : public Functional {
public:
    std::optional<Computation> run(std::int64_t input, const Oracle& o) const override {
        if (input < 0 || input >= static_cast<std::int64_t>(o.size()) || o[input] < 0) return std::nullopt;
        return Computation{o[input], input};
    }
    std::string id() const override { return "echo"; }
};

std::vector<ElementId> standard_order(std::size_t n) {
    std::vector<ElementId> v(n);
    std::iota(v.begin(), v.end(), ElementId{0});
    return v;
}

bool all_zero(const Delta02Approx& c) {
    for (const auto& row : c.g) {
        if (std::any_of(row.begin(), row.end(), [](auto v) { return v != 0; })) return false;
    }
    return true;
}

}  // namespace

TEST_SUITE("diagonalizer") {

TEST_CASE("table functionals") {
    TableFunctional t("t");
    CHECK(t.add({0, {1, 0}, {1, 1}}));
    CHECK(t.add({1, {}, {7, -1}}));
    CHECK(t.add({0, {1, 0}, {1, 1}}));  // repeated entry
    CHECK_FALSE(t.add({0, {1}, {2, 0}}));  // compatible prefix, other answer
    CHECK(t.add({0, {0}, {3, 0}}));      // incompatible prefix
    CHECK(t.run(0, {1, 0, 5}) == Computation{1, 1});
    CHECK(t.run(0, {0, 1}) == Computation{3, 0});
    CHECK_FALSE(t.run(0, {1, 1}).has_value());
    CHECK(t.run(1, {}) == Computation{7, -1});
    CHECK_FALSE(t.run(2, {1, 0}).has_value());
    CHECK(t.incoherent().empty());

    const TableFunctional back = TableFunctional::from_json(t.to_json());
    CHECK(back.id() == "t");
    CHECK(back.entries().size() == t.entries().size());
    for (const Oracle& o : {Oracle{1, 0}, Oracle{0, 0}, Oracle{1, 1}}) CHECK(back.run(0, o) == t.run(0, o));
}

TEST_CASE("recording functionals") {
    const Echo echo;
    RecordingFunctional rec(echo);
    CHECK(rec.run(1, {4, 5, 6}) == Computation{5, 1});
    CHECK_FALSE(rec.run(3, {4, 5, 6}).has_value());
    CHECK(rec.run(0, {4}) == Computation{4, 0});
    CHECK(rec.table().entries().size() == 2);
    CHECK(rec.conflicts().empty());
    CHECK(rec.table().run(1, {4, 5, 9}) == Computation{5, 1});
    CHECK_FALSE(rec.table().run(1, {9, 5}).has_value());

    std::vector<std::int64_t> outs;
    const auto all = run_prefix(echo, 2, {3, 2, 1}, outs);
    REQUIRE(all.has_value());
    CHECK(outs == std::vector<std::int64_t>{3, 2, 1});
    CHECK(all->use == 2);
    CHECK_FALSE(run_prefix(echo, 3, {3, 2, 1}, outs).has_value());
}

TEST_CASE("no requirements leave C empty") {
    DiagonalOptions opt;
    opt.stages = 10;
    const CopiesRun run = diagonalize_against_copies(canonical_example(), {}, {}, {}, {}, opt);
    CHECK(run.phases.empty());
    CHECK(all_zero(run.c));
}

TEST_CASE("silent functionals never act") {
    const BlockFunction f = canonical_example();
    const Silent silent;
    std::vector<std::vector<ElementId>> orders(21, standard_order(60));
    RecordedStream copy(orders);
    DiagonalOptions opt;
    opt.stages = 20;
    const CopiesRun run = diagonalize_against_copies(f, {&copy}, {&silent}, {&silent}, {{0, 0, 0}}, opt);
    CHECK(run.phases.empty());
    CHECK(all_zero(run.c));
    REQUIRE(run.outcomes.size() == 1);
    CHECK(run.outcomes[0].initialised);
    CHECK(run.outcomes[0].satisfied);

    const NFTree frag = max_tree(f, 4, 16);
    const AlphaRun a = alpha_from_run(f, run, frag, tree_rank(frag), OrdinalPresentation::finite(4));
    CHECK(validate_alpha_ce(a.c, a.c.values.x_bound, a.c.values.s_bound).ok);
    for (const auto& row : a.c.r) {
        for (const auto& v : row) CHECK(v == OrdinalValue::of(4));
    }
}

TEST_CASE("replayed run against copies") {
    const BlockFunction f = alternating_control();
    DiagonalOptions opt;
    opt.stages = 40;
    const ReplayReport rep = diagonalize_with_replay(f, 3, opt);
    CHECK(rep.coherent);
    CHECK(rep.conflicts.empty());
    CHECK(rep.live.lemma_violations.empty());
    CHECK(rep.live.requirements.size() == 3);
    CHECK(rep.live.c.g == rep.replay.c.g);
    for (const auto& t : rep.phis) CHECK(t.incoherent().empty());
    for (const auto& t : rep.psis) CHECK(t.incoherent().empty());
    CHECK(validate_delta02(rep.live.c).ok);
    for (std::size_t k = 0; k < rep.live.outcomes.size(); ++k) {
        CHECK(rep.live.outcomes[k].satisfied);
        CHECK(rep.live.outcomes[k].phases <= 6);
        if (rep.live.extracted[k].length() > 0) CHECK(validate(f, rep.live.extracted[k], Strength::Weak).ok);
    }
    // episodes partition the act records
    std::size_t total = 0;
    for (const auto& ep : episodes(rep.live.phases)) {
        REQUIRE_FALSE(ep.empty());
        for (const auto& p : ep) {
            CHECK(p.req == ep.front().req);
            CHECK(p.episode == ep.front().episode);
        }
        for (std::size_t i = 1; i < ep.size(); ++i) CHECK(ep[i].n == ep[i - 1].n + 1);
        total += ep.size();
    }
    CHECK(total == rep.live.phases.size());
    const auto lines = rep.live.records("abc");
    REQUIRE_FALSE(lines.empty());
    CHECK(lines.front().find("abc") != std::string::npos);
}

TEST_CASE("replayed run against listings") {
    DiagonalOptions opt;
    opt.stages = 40;
    for (const char* name : {"canonical", "alternating"}) {
        const ListingReplayReport rep = diagonalize_listing_with_replay(builtin_function(name), 3, 4, opt);
        CAPTURE(name);
        CHECK(rep.coherent);
        CHECK(rep.conflicts.empty());
        CHECK(rep.live.violations.empty());
        CHECK(rep.live.orders == rep.replay.orders);
        for (const auto& o : rep.live.outcomes) CHECK(o.satisfied);
        const StageCopy rebuilt = StageCopy::replay(rep.live.inserts);
        CHECK(rebuilt.order() == rep.live.orders.back());
    }
}

TEST_CASE("alpha variant needs a resolved fragment") {
    DiagonalOptions opt;
    opt.stages = 30;
    CHECK_THROWS_AS(diagonalize_alpha_ce(alternating_control(), 2, OrdinalPresentation::finite(6), opt, 5, 20),
                    BlockError);
}

}  // TEST_SUITE
