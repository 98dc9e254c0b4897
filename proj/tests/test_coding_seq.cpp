#include <doctest.h>

#include <set>

#include "blockfn/coding_seq.hpp"
#include "blockfn/search.hpp"
#include "blockfn/spec_io.hpp"
#include "oracles.hpp"

using namespace blockfn;

namespace {

// L1 -> L2 -> (L1, L3) at the start of the canonical example.
CodingSequence canonical_three() {
    CodingSequence s;
    s.strength = Strength::Strong;
    s.intervals = {{0, 0}, {2, 3}, {4, 7}};
    s.maps = {{{0, 0}, {2}}, {{2, 3}, {4, 5}}};
    return s;
}

std::set<std::string> texts(const std::vector<CodingSequence>& v) {
    std::set<std::string> out;
    for (const auto& s : v) out.insert(to_text(s));
    return out;
}

std::vector<CodingSequence> strong_nf(const BlockFunction& f, std::size_t depth, std::size_t blocks) {
    const NFTree t = normal_form_tree(f, depth, blocks, Strength::Strong);
    std::vector<CodingSequence> out;
    for (std::size_t i = 1; i < t.nodes.size(); ++i) out.push_back(t.sequence(static_cast<int>(i)));
    return out;
}

}  // namespace

TEST_SUITE("coding_seq") {

TEST_CASE("validate") {
    const BlockFunction f = canonical_example();
    CHECK(validate(f, canonical_three()).ok);

    CodingSequence one;
    one.intervals = {{5, 7}};
    CHECK(validate(f, one).ok);

    CodingSequence same;
    same.intervals = {{2, 3}, {2, 3}};
    same.maps = {OrderMap::identity({2, 3})};
    const auto r = validate(f, same, Strength::Weak);
    CHECK_FALSE(r.ok);
    CHECK(r.condition == 4);

    CodingSequence split = canonical_three();
    split.intervals[1] = {2, 2};
    CHECK(validate(f, split).condition == 1);

    CodingSequence down = canonical_three();
    down.maps[1].image = {5, 4};
    CHECK(validate(f, down).condition == 2);

    CodingSequence overlap = canonical_three();
    overlap.intervals[1] = {0, 3};
    overlap.maps[0] = {{0, 0}, {2}};
    overlap.maps[1] = {{0, 3}, {4, 5, 6, 7}};
    CHECK_FALSE(validate(f, overlap, Strength::Strong).ok);
}

TEST_CASE("compose") {
    const BlockFunction f = canonical_example();
    const CodingSequence s = canonical_three();
    CHECK(compose(s, 1, 2) == s.maps[0]);
    CHECK(preserves_f(f, compose(s, 1, 3)));
    CHECK_THROWS_AS(compose(s, 2, 2), BlockError);
    CHECK_THROWS_AS(compose(s, 1, 4), BlockError);

    // compose(2,4) after compose(1,2) is compose(1,4), checked pointwise.
    for (const auto& seq : strong_nf(f, 5, 30)) {
        if (seq.length() < 4) continue;
        const OrderMap a = compose(seq, 1, 2), b = compose(seq, 2, 4), c = compose(seq, 1, 4);
        for (std::int64_t x = seq.intervals[0].lo; x <= seq.intervals[0].hi; ++x) CHECK(b(a(x)) == c(x));
    }
}

TEST_CASE("parity law on searched sequences") {
    for (const char* name : {"canonical", "alternating"}) {
        const BlockFunction f = builtin_function(name);
        for (const auto& seq : strong_nf(f, 5, 24)) {
            for (std::size_t i = 1; i < seq.length(); ++i) {
                for (std::size_t j = i + 1; j <= seq.length(); ++j) {
                    CHECK(preserves_f(f, compose(seq, i, j)) == ((j - i) % 2 == 0));
                }
            }
        }
    }
}

TEST_CASE("search agrees with the naive enumerator") {
    struct Case {
        const char* name;
        std::int64_t horizon;
        std::size_t max_len;
    };
    for (const Case& c : {Case{"canonical", 10, 4}, Case{"canonical", 12, 4}, Case{"alternating", 12, 4},
                          Case{"successor", 12, 3}, Case{"identity", 8, 3}}) {
        const BlockFunction f = builtin_function(c.name);
        for (bool strong : {true, false}) {
            SearchOptions opt;
            opt.max_len = c.max_len;
            opt.horizon = c.horizon;
            opt.strength = strong ? Strength::Strong : Strength::Weak;
            const SearchResult got = search(f, opt);
            REQUIRE_FALSE(got.truncated);
            const auto want = oracle::enumerate(f, c.horizon, c.max_len, strong);
            CAPTURE(c.name);
            CAPTURE(strong);
            CHECK(got.sequences.size() == want.size());
            CHECK(texts(got.sequences) == texts(want));
            for (const auto& s : got.sequences) CHECK(validate(f, s).ok);
            CHECK(std::is_sorted(got.sequences.begin(), got.sequences.end(), canonical_less));
        }
    }
}

TEST_CASE("search is deterministic") {
    SearchOptions opt;
    opt.max_len = 4;
    opt.horizon = 14;
    const auto a = search(canonical_example(), opt);
    const auto b = search(canonical_example(), opt);
    CHECK(a.sequences == b.sequences);
}

TEST_CASE("alternating control has long strong sequences") {
    const NFTree t = normal_form_tree(alternating_control(), 6, 20, Strength::Strong);
    CHECK(t.horizon == 30);
    CHECK(t.max_length() >= 6);
}

TEST_CASE("strengthen") {
    const BlockFunction f = alternating_control();
    const CodingSequence strong = canonical_three();
    CHECK(strengthen(canonical_example(), strong) == strong);

    SearchOptions opt;
    opt.max_len = 3;
    opt.horizon = 15;
    opt.strength = Strength::Weak;
    std::size_t done = 0;
    for (const auto& w : search(f, opt).sequences) {
        if (w.length() < 2 || !increase_certifiable(f, w)) continue;
        const Strengthened s = strengthen_traced(f, w);
        CHECK(validate(f, s.seq, Strength::Strong).ok);
        for (std::size_t k = 0; k + 1 < s.seq.length(); ++k) {
            const OrderMap whole = compose(w, s.source_index[k], s.source_index[k + 1]);
            for (std::int64_t x = s.seq.intervals[k].lo; x <= s.seq.intervals[k].hi; ++x) CHECK(s.seq.maps[k](x) == whole(x));
        }
        CHECK(strengthen(f, s.seq) == s.seq);
        ++done;
    }
    CHECK(done > 0);
}

TEST_CASE("links on the canonical example") {
    const BlockFunction f = canonical_example();
    CodingSequence one;
    one.intervals = {{5, 7}};
    for (const auto& l : link_analysis(f, one)) {
        CHECK_FALSE(l.vulnerable_at.has_value());
        CHECK_FALSE(l.broken_at.has_value());
    }
    for (const auto& seq : strong_nf(f, 5, 30)) {
        bool vulnerable_by_3 = false;
        for (const auto& l : link_analysis(f, seq)) {
            if (l.vulnerable_at) {
                CHECK(*l.vulnerable_at >= l.witnessed_at);
                vulnerable_by_3 = vulnerable_by_3 || *l.vulnerable_at <= 3;
                if (*l.vulnerable_at + 2 <= seq.length()) {
                    REQUIRE(l.broken_at.has_value());
                    CHECK(*l.broken_at <= *l.vulnerable_at + 2);
                }
            }
            if (l.broken_at) {
                REQUIRE(l.vulnerable_at.has_value());
                CHECK(*l.broken_at >= *l.vulnerable_at);
                // A broken link ends the sequence.
                CHECK(*l.broken_at == seq.length());
            }
        }
        if (seq.length() >= 3) CHECK(vulnerable_by_3);
    }
}

}  // TEST_SUITE
