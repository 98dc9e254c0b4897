#include <doctest.h>

#include <algorithm>
#include <functional>

#include "blockfn/coding_trees.hpp"
#include "blockfn/spec_io.hpp"
#include "oracles.hpp"

using namespace blockfn;

namespace {

// Rank straight from the node structure; leaves below a node count as rank 0.
int naive_rank(const NFTree& t, int id) {
    const NFNode& n = t.nodes[id];
    int r = id > 0 && n.any_child ? 1 : 0;
    for (int c : n.children) r = std::max(r, naive_rank(t, c) + 1);
    return r;
}

bool any_vulnerable(const BlockFunction& f, const CodingSequence& s) {
    for (const auto& l : link_analysis(f, s)) {
        if (l.vulnerable_at) return true;
    }
    return false;
}

}  // namespace

TEST_SUITE("coding_trees") {

TEST_CASE("weak fragment of the canonical example") {
    const BlockFunction f = canonical_example();
    const NFTree t = max_tree(f, 7, 40);
    CHECK(t.strength == Strength::Weak);
    CHECK_FALSE(t.truncated);
    const TreeRank r = tree_rank(t);
    REQUIRE(r.root.has_value());
    CHECK(r.unresolved.empty());
    CHECK(*r.root <= OrdinalValue::of(6));
    CHECK(r.root->finite == static_cast<std::uint64_t>(naive_rank(t, 0)));
    for (std::size_t i = 0; i < t.nodes.size(); i += 97) CHECK(r.node_rank[i] == naive_rank(t, static_cast<int>(i)));
}

TEST_CASE("normal-form lengths match the naive enumerator") {
    for (const char* name : {"canonical", "alternating"}) {
        const BlockFunction f = builtin_function(name);
        for (std::size_t blocks : {5u, 7u}) {
            const std::int64_t n = horizon_elements(f, blocks);
            for (bool strong : {true, false}) {
                const NFTree t = normal_form_tree(f, 4, blocks, strong ? Strength::Strong : Strength::Weak);
                // a leaf one step below the depth limit still counts
                std::size_t want = 0;
                for (const auto& s : oracle::enumerate(f, n, 5, strong)) want = std::max(want, s.length());
                CAPTURE(name);
                CAPTURE(blocks);
                CAPTURE(strong);
                CHECK(t.max_length() == want);
            }
        }
    }
}

TEST_CASE("tree ranks of an unresolved fragment") {
    const NFTree t = max_tree(alternating_control(), 4, 20);
    const TreeRank r = tree_rank(t);
    CHECK_FALSE(r.root.has_value());
    CHECK_FALSE(r.unresolved.empty());
    for (int u : r.unresolved) CHECK(r.node_rank[u] == -1);
}

TEST_CASE("minrank of the canonical example") {
    const BlockFunction f = canonical_example();
    const MinRankResult m = min_rank(f, 5, 40);
    CHECK(m.root == OrdinalValue::of(3));
    CHECK(m.tree.nodes.size() == 3835);
    std::size_t vulnerable = 0;
    for (std::size_t i = 1; i < m.tree.nodes.size(); ++i) {
        if (!any_vulnerable(f, m.tree.sequence(static_cast<int>(i)))) continue;
        ++vulnerable;
        CHECK(m.node_rank[i] == 0);
    }
    CHECK(vulnerable > 0);
}

TEST_CASE("minrank edge cases") {
    CHECK(min_rank(identity_function(), 5, 20).root.is_zero());
    CHECK_THROWS_AS(min_rank(alternating_control(), 5, 20), BlockError);
}

TEST_CASE("permitted moves") {
    const BlockFunction f = canonical_example();
    const NFTree t = normal_form_tree(f, 3, 30, Strength::Strong);
    std::size_t checked = 0;
    for (std::size_t i = 1; i < t.nodes.size(); ++i) {
        const CodingSequence s = t.sequence(static_cast<int>(i));
        if (s.length() < 2) continue;
        const auto moved = find_permitted(f, s, s.intervals.back().hi + 1, 200);
        if (!moved) continue;
        REQUIRE(moved->seq.length() == s.length());
        CHECK(moved->seq.intervals.back().lo > s.intervals.back().hi);
        const auto psi = permits(f, s, moved->seq);
        REQUIRE(psi.has_value());
        CHECK(preserves_f(f, *psi));
        const OrderMap& a = s.maps.back();
        const OrderMap& b = moved->seq.maps.back();
        for (std::int64_t z = a.domain.lo; z <= a.domain.hi; ++z) CHECK((*psi)(a(z)) == b(z));
        // no move back down
        CHECK_FALSE(permits(f, moved->seq, s).has_value());
        ++checked;
    }
    CHECK(checked > 0);
}

TEST_CASE("pair tree ranks") {
    for (int r : {0, 2, 4, 6}) {
        const PairTreeReport p = pair_tree_rank(RankedTree::path(r));
        CHECK(p.violations.empty());
        CHECK(p.claim_checks > 0);
        CHECK(p.rank_star <= OrdinalValue::of(static_cast<std::uint64_t>(r)));
    }
    const RankedTree t6 = builtin_tree6();
    CHECK(t6.root_rank() == 6);
    const PairTreeReport p = pair_tree_rank(t6);
    CHECK(p.violations.empty());
    CHECK(p.rank_star <= OrdinalValue::of(6));

    RankedTree bad = RankedTree::path(2);
    bad.rank[{0}] = 0;
    CHECK_THROWS_AS(pair_tree_rank(bad), BlockError);
}

TEST_CASE("ordinal values") {
    const OrdinalValue w{1, 0};
    CHECK(w.is_limit());
    CHECK(OrdinalValue::of(1000) < w);
    CHECK(w.successor() == OrdinalValue{1, 1});
    CHECK(OrdinalValue::of(0).is_zero());
}

}  // TEST_SUITE
