#include <doctest.h>

#include "blockfn/approximations.hpp"

using namespace blockfn;

namespace {

// Changes of g(x, .) counted directly from the table.
std::size_t flips(const std::vector<std::uint8_t>& row) {
    std::size_t n = 0;
    for (std::size_t s = 1; s < row.size(); ++s) n += row[s] != row[s - 1];
    return n;
}

AlphaCEApprox small_valid() {
    AlphaCEApprox a = random_alpha_ce(5, 3, 12, OrdinalPresentation::finite(3));
    REQUIRE(validate_alpha_ce(a, 3, 12).ok);
    return a;
}

}  // namespace

TEST_SUITE("approximations") {

TEST_CASE("random delta02 tables") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const Delta02Approx a = random_delta02(seed, 6, 40, 4);
        CHECK(validate_delta02(a).ok);
        CHECK(a.settle_stage <= a.s_bound);
        for (std::size_t x = 0; x < a.x_bound; ++x) {
            CHECK(a.at(x, 0) == 0);
            CHECK(flips(a.g[x]) == a.changes(x));
            CHECK(a.changes(x) <= 4);
            for (std::size_t s = a.settle_stage; s <= a.s_bound; ++s) CHECK(a.at(x, s) == limit(a, x, a.s_bound));
        }
    }
    CHECK(random_delta02(9, 6, 40, 4).g == random_delta02(9, 6, 40, 4).g);
}

TEST_CASE("budget zero never changes") {
    const Delta02Approx a = random_delta02(1, 8, 30, 0);
    for (std::size_t x = 0; x < 8; ++x) CHECK(a.changes(x) == 0);
}

TEST_CASE("random alpha-c.e. tables") {
    for (std::uint64_t top : {0u, 1u, 2u, 3u, 6u}) {
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            const AlphaCEApprox a = random_alpha_ce(seed, 4, 20, OrdinalPresentation::finite(top));
            CAPTURE(top);
            CAPTURE(seed);
            CHECK(validate_alpha_ce(a, 4, 20).ok);
            // r drops at every change, so a finite top bounds the changes.
            for (std::size_t x = 0; x < 4; ++x) CHECK(flips(a.values.g[x]) <= top);
        }
    }
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const AlphaCEApprox a = random_alpha_ce(seed, 4, 30, OrdinalPresentation::omega_sum(1, 2));
        CHECK(validate_alpha_ce(a, 4, 30).ok);
    }
}

TEST_CASE("validator conditions") {
    {
        AlphaCEApprox a = small_valid();
        a.values.g[1][0] = 1;
        const auto r = validate_alpha_ce(a, 3, 12);
        CHECK(r.condition == 1);
        CHECK(r.x == 1);
        // the computable variant drops that requirement
        CHECK(validate_alpha_computable(a, 3, 12).condition != 1);
    }
    {
        AlphaCEApprox a = small_valid();
        a.r[0][0] = OrdinalValue::of(2);
        CHECK(validate_alpha_ce(a, 3, 12).condition == 2);
        a = small_valid();
        a.r[2].pop_back();
        CHECK(validate_alpha_ce(a, 3, 12).condition == 2);
    }
    {
        AlphaCEApprox a = small_valid();
        a.r[0][4] = OrdinalValue::of(9);
        CHECK(validate_alpha_ce(a, 3, 12).condition == 3);
    }
    {
        AlphaCEApprox a = AlphaCEApprox{OrdinalPresentation::finite(3), Delta02Approx::zeros(1, 6), {}};
        a.r.assign(1, std::vector<OrdinalValue>(7, OrdinalValue::of(3)));
        a.values.settle_stage = 6;
        a.values.g[0] = {0, 0, 1, 1, 1, 1, 1};
        const auto r = validate_alpha_ce(a, 1, 6);
        CHECK(r.condition == 4);
        CHECK(r.s == 2);
        for (std::size_t s = 2; s <= 6; ++s) a.r[0][s] = OrdinalValue::of(1);
        CHECK(validate_alpha_ce(a, 1, 6).ok);
        a.values.settle_stage = 1;
        CHECK(validate_alpha_ce(a, 1, 6).condition == 5);
    }
}

TEST_CASE("limits") {
    Delta02Approx a = Delta02Approx::zeros(1, 5);
    a.settle_stage = 3;
    a.g[0] = {0, 1, 1, 1, 1, 1};
    CHECK(limit(a, 0, 5) == 1);
    a.g[0][4] = 0;
    CHECK_THROWS_AS(limit(a, 0, 5), BlockError);
}

TEST_CASE("json round trip") {
    const AlphaCEApprox a = random_alpha_ce(3, 4, 15, OrdinalPresentation::omega_sum(1, 1));
    const AlphaCEApprox b = alpha_ce_from_json(to_json(a));
    CHECK(b.values.g == a.values.g);
    CHECK(b.r == a.r);
    CHECK(b.presentation.top == a.presentation.top);
    CHECK(b.values.settle_stage == a.values.settle_stage);
    CHECK(ordinal_from_json(to_json(OrdinalValue{2, 5})) == OrdinalValue{2, 5});
    CHECK_THROWS_AS(ordinal_from_json(nlohmann::json("w")), BlockError);
    nlohmann::json bad = to_json(a.values);
    bad["g"][0][0] = 2;
    CHECK_THROWS_AS(delta02_from_json(bad), BlockError);
}

}  // TEST_SUITE
