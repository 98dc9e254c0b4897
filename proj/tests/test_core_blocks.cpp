#include <doctest.h>

#include <random>
#include <set>

#include "blockfn/core_blocks.hpp"
#include "blockfn/spec_io.hpp"
#include "oracles.hpp"

using namespace blockfn;

namespace {

std::vector<int> sizes_of(const std::vector<PlacedBlock>& bs) {
    std::vector<int> out;
    for (const auto& b : bs) out.push_back(b.type->size());
    return out;
}

// f restricted to a tuple: which entries map onto which.
std::set<std::pair<std::size_t, std::size_t>> pattern(const BlockFunction& f, const std::vector<std::int64_t>& t) {
    std::set<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t i = 0; i < t.size(); ++i) {
        for (std::size_t j = 0; j < t.size(); ++j) {
            if (f_value(f, t[i]) == t[j]) out.insert({i, j});
        }
    }
    return out;
}

}  // namespace

TEST_SUITE("core_blocks") {

TEST_CASE("block_of on the canonical example") {
    const BlockFunction f = canonical_example();
    CHECK(block_of(f, 5).interval == Interval{5, 7});
    CHECK(block_of(f, 0).interval == Interval{0, 0});
    CHECK(block_of(f, 4).interval == Interval{4, 4});
}

TEST_CASE("blocks tile an initial segment") {
    for (const char* name : {"canonical", "alternating", "successor", "tree6"}) {
        const BlockFunction f = builtin_function(name);
        std::int64_t next = 0;
        for (std::int64_t n = 0; n < 300; ++n) {
            const PlacedBlock b = block_of(f, n);
            CHECK(b.interval.lo <= n);
            CHECK(n <= b.interval.hi);
            if (n == next) {
                CHECK(b.interval.lo == n);
                next = b.interval.hi + 1;
            }
            for (std::int64_t x = b.interval.lo; x <= b.interval.hi; ++x) {
                const std::int64_t y = f_value(f, x);
                CHECK(y >= b.interval.lo);
                CHECK(y <= b.interval.hi);
            }
        }
    }
}

TEST_CASE("blocks_of_prefix") {
    const BlockFunction f = canonical_example();
    const auto bs = blocks_of_prefix(f, 7);
    CHECK(sizes_of(bs) == std::vector<int>{1, 1, 2, 1, 3, 2, 4});
    CHECK(bs.back().interval.hi == 13);
    CHECK(blocks_of_prefix(f, 0).empty());

    const BlockFunction t = tree_example(builtin_tree6());
    const auto tb = blocks_of_prefix(t, 2);
    CHECK(*tb[0].type == loop_type(1));
    // The first odd block is the sandwich block of the first tree node.
    const Numbering ell = tree_numbering(builtin_tree6());
    CHECK(*tb[1].type == sandwich_block(builtin_tree6().nonroot_nodes().front(), ell));
}

TEST_CASE("alpha string and counting prefix") {
    const BlockFunction f = canonical_example();
    const auto bs = blocks_of_prefix(f, 15);
    CHECK(sizes_of(bs) == std::vector<int>{1, 1, 2, 1, 3, 2, 4, 1, 5, 2, 6, 3, 7, 1, 8});
    const auto alpha = alpha_string(f, 15);
    REQUIRE(alpha.size() == 15);
    for (std::size_t i = 0; i < 15; ++i) {
        for (std::size_t j = 0; j < 15; ++j) CHECK((alpha[i] == alpha[j]) == (bs[i].type->size() == bs[j].type->size()));
    }
    const auto counts = counting_prefix(f, 15);
    std::size_t total = 0;
    for (auto c : counts) total += c;
    CHECK(total == 15);
    CHECK(counts[alpha[0]] == 5);
    CHECK(alpha_string(f, 0).empty());

    const auto alt = alpha_string(alternating_control(), 4);
    CHECK(alt[0] == alt[2]);
    CHECK(alt[1] == alt[3]);
    CHECK(alt[0] != alt[1]);
}

TEST_CASE("loop types") {
    CHECK(loop_type(1).map == std::vector<int>{0});
    CHECK(loop_type(2).map == std::vector<int>{1, 0});
    CHECK(is_indecomposable(loop_type(3)));
    CHECK_NOTHROW(check_block_type(loop_type(5)));
    CHECK_THROWS_AS(check_block_type(BlockType{{0, 2, 1}}), BlockError);
}

TEST_CASE("embeds small cases") {
    CHECK(embeds(loop_type(2), loop_type(2)) == std::vector<int>{0, 1});
    CHECK_FALSE(embeds(loop_type(2), loop_type(3)).has_value());
    for (int j = 1; j <= 8; ++j) {
        for (int k = 1; k <= 8; ++k) CHECK(embeds(loop_type(j), loop_type(k)).has_value() == (j == k));
    }
}

TEST_CASE("embeds agrees with brute force on small pairs") {
    // Exhaustive over every pair with combined size <= 6.
    for (int a = 1; a <= 5; ++a) {
        const auto from = enumerate_types(a);
        for (int b = a; a + b <= 6; ++b) {
            for (const auto& into : enumerate_types(b)) {
                for (const auto& t : from) REQUIRE(embeds(t, into) == oracle::embeds(t, into));
            }
        }
    }
}

TEST_CASE("embedding composition") {
    std::mt19937_64 rng(7);
    std::vector<BlockType> pool;
    for (int k = 1; k <= 4; ++k) {
        for (const auto& t : enumerate_types(k)) pool.push_back(t);
    }
    for (int trial = 0; trial < 3000; ++trial) {
        const BlockType& i = pool[rng() % pool.size()];
        const BlockType& j = pool[rng() % pool.size()];
        const BlockType& k = pool[rng() % pool.size()];
        const auto w1 = embeds(i, j);
        const auto w2 = embeds(j, k);
        if (!w1 || !w2) continue;
        std::vector<int> w(i.size());
        for (int x = 0; x < i.size(); ++x) w[x] = (*w2)[(*w1)[x]];
        for (int x = 0; x < i.size(); ++x) CHECK(k.map[w[x]] == w[i.map[x]]);
        CHECK(embeds(i, k).has_value());
    }
}

TEST_CASE("a block embedding into a concatenation lands in one block") {
    std::vector<BlockType> pool;
    for (int k = 1; k <= 4; ++k) {
        for (const auto& t : enumerate_types(k)) pool.push_back(t);
    }
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 400; ++trial) {
        const BlockType& i = pool[rng() % pool.size()];
        const BlockType& j = pool[rng() % pool.size()];
        const BlockType& k = pool[rng() % pool.size()];
        if (j.size() + k.size() > 10) continue;
        BlockType cat;
        for (int v : j.map) cat.map.push_back(v);
        for (int v : k.map) cat.map.push_back(v + j.size());
        const bool any = oracle::embeds(i, cat).has_value();
        CHECK(any == (embeds(i, j).has_value() || embeds(i, k).has_value()));
    }
}

TEST_CASE("sandwich blocks") {
    Numbering ell;
    ell.explicit_entries[{0}] = 1;
    const BlockType b = sandwich_block({0}, ell);
    CHECK(b.size() == 12);
    CHECK(sandwich_size({0}, ell) == 12);
    CHECK(is_indecomposable(b));

    const BlockType even = sandwich_block({0, 1}, ell);
    CHECK(sandwich_size({0, 1}, ell) == 4 + 8 + (std::int64_t{1} << (ell({0, 1}) + 2)));
    CHECK(even.size() % 2 == 0);
    const int x1 = even.size() - 3, x2 = even.size() - 2, x3 = even.size() - 1;
    CHECK(even.map[0] == x3);
    CHECK(even.map[x3] == x2);
    CHECK(even.map[x2] == x1);
    CHECK(even.map[x1] == x1);
    const BlockType odd = sandwich_block({0, 1, 0}, ell);
    CHECK(odd.map[odd.size() - 3] == odd.size() - 2);
    CHECK_THROWS_AS(sandwich_block({}, ell), BlockError);
}

TEST_CASE("pairing numbering is injective on short strings") {
    std::set<std::uint64_t> seen;
    std::function<void(IntString&)> walk = [&](IntString& s) {
        CHECK(seen.insert(pairing_number(s)).second);
        if (s.size() == 3) return;
        for (std::uint64_t n = 0; n < 5; ++n) {
            s.push_back(n);
            walk(s);
            s.pop_back();
        }
    };
    IntString s;
    walk(s);
    CHECK(pairing_number({}) == 0);
}

TEST_CASE("canonical example flags") {
    const FlagReport rep = verify_flags(canonical_example(), 200);
    CHECK(rep.contradictions.empty());
    CHECK(rep.flags.at(FlagName::AllRecur).status == FlagStatus::Verified);
    CHECK(rep.flags.at(FlagName::AdjacencyUnique).status == FlagStatus::Verified);
    CHECK(rep.flags.at(FlagName::DistinctSizes).status == FlagStatus::Verified);

    // Adjacency and sizes checked directly on the prefix.
    const auto bs = blocks_of_prefix(canonical_example(), 200);
    std::set<std::pair<int, int>> pairs;
    for (std::size_t i = 0; i + 1 < bs.size(); ++i) {
        CHECK(pairs.insert({bs[i].type->size(), bs[i + 1].type->size()}).second);
    }
}

TEST_CASE("successor control embeds nothing later") {
    const BlockFunction f = successor_control();
    const auto bs = blocks_of_prefix(f, 12);
    for (std::size_t i = 0; i < bs.size(); ++i) {
        for (std::size_t j = i + 1; j < bs.size(); ++j) CHECK_FALSE(oracle::embeds(*bs[i].type, *bs[j].type));
    }
    CHECK(classify_spectrum(with_verified_flags(f, 40), 40).cls == SpectrumClass::ExactlyCeDegrees);
}

TEST_CASE("classification") {
    CHECK(classify_spectrum(canonical_example(), 100).cls == SpectrumClass::StrictlyAboveCe);
    CHECK(classify_spectrum(identity_function(), 100).cls == SpectrumClass::ComputableOnly);
    // Longer horizons never fall back to Unknown.
    for (const char* name : {"canonical", "alternating", "successor", "identity"}) {
        const BlockFunction f = with_verified_flags(builtin_function(name), 60);
        bool definite = false;
        for (std::size_t h : {10, 20, 40, 60}) {
            const auto c = classify_spectrum(f, h);
            if (definite) CHECK(c.cls != SpectrumClass::Unknown);
            definite = definite || c.cls != SpectrumClass::Unknown;
        }
    }
}

TEST_CASE("falsified adjacency is reported") {
    BlockFunction f;
    f.name = "repeat";
    f.gen = periodic_gen({loop_ref(2), loop_ref(3)});
    f.flags[FlagName::AdjacencyUnique].status = FlagStatus::Declared;
    const FlagReport rep = verify_flags(f, 20);
    CHECK(rep.flags.at(FlagName::AdjacencyUnique).status == FlagStatus::Falsified);
    CHECK_FALSE(rep.contradictions.empty());
    CHECK_THROWS_AS(classify_spectrum(f, 20), BlockError);
}

TEST_CASE("tree example structure") {
    const RankedTree t = builtin_tree6();
    const BlockFunction f = tree_example(t);
    const auto bs = blocks_of_prefix(f, 100);
    for (std::size_t i = 0; i < bs.size(); i += 2) CHECK(*bs[i].type == loop_type(static_cast<int>(i) + 1));
    std::map<int, BlockType> by_size;
    for (const auto& b : bs) {
        auto [it, fresh] = by_size.emplace(b.type->size(), *b.type);
        if (!fresh) CHECK(it->second == *b.type);
    }
    RankedTree root;
    root.rank[{}] = 0;
    for (const auto& b : blocks_of_prefix(tree_example(root), 30)) CHECK(cycle_signature(*b.type).size() == 1);
    RankedTree bad = RankedTree::path(2);
    bad.rank[{0}] = 2;
    CHECK_THROWS_AS(bad.validate_parity(), BlockError);
}

TEST_CASE("d-free witness") {
    const BlockFunction f = canonical_example();
    const DFreeWitness w = dfree_witness(f, {}, 40);
    CHECK(w.a_bar == Interval{2, 3});

    const std::vector<std::int64_t> b_bar{5, 6, 7};
    const auto [a1, b1] = w.first_response(b_bar);
    CHECK(a1 == std::vector<std::int64_t>{3, 4});
    CHECK(b1 == std::vector<std::int64_t>{6, 7, 8});

    const auto [a2, b2] = w.second_response(f, {{5, 7}}, 7, 200);
    std::vector<std::int64_t> before{2, 3, 5, 6, 7}, after = a2;
    after.insert(after.end(), b2.begin(), b2.end());
    CHECK(pattern(f, before) == pattern(f, after));
    CHECK(a2.front() > 7);
}

}  // TEST_SUITE
