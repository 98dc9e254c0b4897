#include <doctest.h>

#include <algorithm>
#include <random>

#include "blockfn/omega_copy.hpp"
#include "blockfn/spec_io.hpp"

using namespace blockfn;

namespace {

StageCopy initial_copy(std::int64_t n) {
    StageCopy c;
    c.insert_run(0, n);
    return c;
}

// Positions of every id, after the fact.
std::vector<std::int64_t> positions(const StageCopy& c) {
    std::vector<std::int64_t> out(c.size());
    for (std::int64_t p = 0; p < c.size(); ++p) out[c.at(p)] = p;
    return out;
}

}  // namespace

TEST_SUITE("omega_copy") {

TEST_CASE("insert and pi agree with a plain list") {
    std::mt19937_64 rng(7);
    StageCopy c;
    std::vector<ElementId> list;
    for (int step = 0; step < 400; ++step) {
        const auto pos = static_cast<std::int64_t>(rng() % (list.size() + 1));
        const ElementId id = c.insert(pos);
        CHECK(id == static_cast<ElementId>(step));
        list.insert(list.begin() + pos, id);
        if (step % 37 == 0) c.next_stage();
    }
    CHECK(c.order() == list);
    for (std::size_t p = 0; p < list.size(); ++p) {
        CHECK(c.pi(list[p]) == static_cast<std::int64_t>(p));
        CHECK(c.at(static_cast<std::int64_t>(p)) == list[p]);
    }
    CHECK_THROWS_AS(c.insert(c.size() + 1), BlockError);
}

TEST_CASE("insert_run returns consecutive ids") {
    StageCopy c = initial_copy(3);
    const auto ids = c.insert_run(1, 4);
    REQUIRE(ids.size() == 4);
    for (std::size_t i = 0; i < ids.size(); ++i) CHECK(c.pi(ids[i]) == 1 + static_cast<std::int64_t>(i));
    CHECK(c.pi(1) == 5);
}

TEST_CASE("replay reproduces every stage") {
    std::mt19937_64 rng(11);
    StageCopy c = initial_copy(5);
    std::vector<std::vector<ElementId>> snapshots{c.order()};
    for (int s = 0; s < 12; ++s) {
        c.next_stage();
        for (int k = 0; k < 3; ++k) c.insert(static_cast<std::int64_t>(rng() % (c.size() + 1)));
        snapshots.push_back(c.order());
    }
    CHECK(StageCopy::replay(c.history()).order() == c.order());
    for (std::size_t s = 0; s < snapshots.size(); ++s) CHECK(StageCopy::replay(c.history(), s).order() == snapshots[s]);
}

TEST_CASE("positions never decrease") {
    std::mt19937_64 rng(3);
    StageCopy c = initial_copy(10);
    auto before = positions(c);
    for (int step = 0; step < 200; ++step) {
        c.insert(static_cast<std::int64_t>(rng() % (c.size() + 1)));
        const auto after = positions(c);
        for (std::size_t id = 0; id < before.size(); ++id) CHECK(after[id] >= before[id]);
        before = after;
    }
}

TEST_CASE("f at a stage") {
    const BlockFunction f = canonical_example();
    FView fv(f);
    const std::int64_t n = blocks_of_prefix(f, 6).back().interval.hi + 1;
    StageCopy c = initial_copy(n);
    for (ElementId id = 0; id < static_cast<ElementId>(n); ++id) {
        const auto img = f_at_stage(fv, c, id);
        REQUIRE(img.has_value());
        CHECK(c.pi(*img) == f_value(f, c.pi(id)));
    }
    c.insert(0);
    const auto img = f_at_stage(f, c, 0);
    REQUIRE(img.has_value());
    CHECK(c.pi(*img) == f_value(f, c.pi(0)));
    const auto table = f_table(fv, c);
    CHECK(table.size() == static_cast<std::size_t>(n) + 1);
    CHECK(table[0] == *img);
}

TEST_CASE("extends_to") {
    CHECK(extends_to({0, 2, 5}, {1, 4, 8}));
    CHECK(extends_to({0, 2, 5}, {0, 2, 5}));
    CHECK_FALSE(extends_to({0, 2, 5}, {1, 2, 9}));
    CHECK_FALSE(extends_to({3, 4}, {2, 9}));
    CHECK(extends_to({}, {}));
    CHECK_THROWS_AS(extends_to({0, 1}, {0}), BlockError);
    CHECK_THROWS_AS(extends_to({1, 1}, {2, 3}), BlockError);
}

TEST_CASE("restore_block re-seats a shifted block") {
    for (const char* name : {"canonical", "alternating"}) {
        const BlockFunction f = builtin_function(name);
        FView fv(f);
        const auto blocks = blocks_of_prefix(f, 12);
        for (std::size_t b = 0; b < blocks.size(); ++b) {
            const PlacedBlock& blk = blocks[b];
            if (blk.type->size() < 2) continue;
            StageCopy c = initial_copy(blocks.back().interval.hi + 1);
            std::vector<ElementId> ids;
            for (std::int64_t p = blk.interval.lo; p <= blk.interval.hi; ++p) ids.push_back(c.at(p));
            c.insert(blk.interval.lo);  // pushes the block off its boundaries
            const auto before = positions(c);
            const RestorePlan plan = restore_block(fv, c, ids, *blk.type, blk.interval.lo, 400);
            CAPTURE(name);
            CAPTURE(b);
            CHECK(plan.moved);
            CHECK(plan.target.interval.lo >= blk.interval.lo);
            for (std::size_t k = 0; k < ids.size(); ++k) {
                CHECK(c.pi(ids[k]) == plan.target.interval.lo + plan.witness[k]);
                CHECK(f_value(f, c.pi(ids[k])) == c.pi(ids[blk.type->map[k]]));
            }
            for (std::size_t id = 0; id < before.size(); ++id) CHECK(c.pi(id) >= before[id]);
            for (std::int64_t p = 0; p < blk.interval.lo; ++p) CHECK(c.at(p) == static_cast<ElementId>(p));
            // a loop cut open keeps its wider gap, and loops embed only into equal loops
            StageCopy cut = initial_copy(blocks.back().interval.hi + 1);
            cut.insert(blk.interval.lo + 1);
            CHECK_THROWS_AS(restore_block(fv, cut, ids, *blk.type, -1, 200), BlockError);
            for (std::size_t i = 1; i < plan.insertions.size(); ++i) {
                CHECK(plan.insertions[i].position > plan.insertions[i - 1].position);
            }
        }
    }
}

TEST_CASE("restore_block refuses the frozen region") {
    const BlockFunction f = canonical_example();
    FView fv(f);
    const auto blocks = blocks_of_prefix(f, 6);
    const PlacedBlock* two = nullptr;
    for (const auto& b : blocks) {
        if (b.type->size() == 2) {
            two = &b;
            break;
        }
    }
    REQUIRE(two != nullptr);
    StageCopy c = initial_copy(blocks.back().interval.hi + 1);
    const std::vector<ElementId> ids{c.at(two->interval.lo), c.at(two->interval.hi)};
    c.insert(two->interval.lo);
    StageCopy open = c;
    CHECK_NOTHROW(restore_block(fv, open, ids, *two->type, two->interval.lo, 400));
    CHECK_THROWS_AS(restore_block(fv, c, ids, *two->type, c.size(), 400), BlockError);
    CHECK_THROWS_AS(restore_block(fv, c, {ids[0]}, *two->type, -1, 400), BlockError);
}

TEST_CASE("event records") {
    CHECK(insert_event({3, 5, 9}) == R"({"stage":3,"op":"insert","position":5,"id":9})");
    CHECK(freeze_event(4, 2) == R"({"stage":4,"op":"freeze","position":2})");
}

}  // TEST_SUITE
