// One PASS/FAIL line per acceptance criterion. Exit status 1 when any fails.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "blockfn/diagonalizer.hpp"
#include "blockfn/encoder.hpp"
#include "blockfn/spec_io.hpp"
#include "oracles.hpp"

using namespace blockfn;

namespace {

constexpr double kSearchSeconds = 60.0;
constexpr std::uint64_t kRandomTypePairs = 20000;

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok && pass) detail << "failed: " << what << "; ";
        pass = pass && ok;
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---- 1 -----------------------------------------------------------------------------

void length_bound(Outcome& o) {
    const auto t0 = std::chrono::steady_clock::now();
    const NFTree t = normal_form_tree(canonical_example(), 6, 40, Strength::Strong);
    const double secs = seconds_since(t0);
    bool three = false;
    for (const auto& n : t.nodes) three = three || n.length == 3;
    o.require(!t.truncated, "search truncated");
    o.require(three, "no length-3 sequence");
    o.require(t.max_length() <= 5, "sequence longer than 5");
    o.require(secs < kSearchSeconds, "search too slow");
    o.detail << "max length " << t.max_length() << ", " << t.nodes.size() << " nodes, " << secs << " s";
}

// ---- 2 -----------------------------------------------------------------------------

void minrank_three(Outcome& o) {
    const BlockFunction f = canonical_example();
    const MinRankResult m = min_rank(f, 5, 40);
    o.require(m.root == OrdinalValue::of(3), "minrank is " + m.root.str());
    std::size_t vulnerable = 0;
    for (std::size_t i = 1; i < m.tree.nodes.size(); ++i) {
        bool v = false;
        for (const auto& l : link_analysis(f, m.tree.sequence(static_cast<int>(i)))) v = v || l.vulnerable_at.has_value();
        if (!v) continue;
        ++vulnerable;
        o.require(m.node_rank[i] == 0, "vulnerable node with positive minrank");
    }
    o.detail << "minrank " << m.root.str() << ", " << vulnerable << " vulnerable sequences all at 0";
}

// ---- 3 -----------------------------------------------------------------------------

void max_tree_bound(Outcome& o) {
    const NFTree t = max_tree(canonical_example(), 7, 40);
    const TreeRank r = tree_rank(t);
    o.require(r.unresolved.empty(), "unknown frontier");
    o.require(r.root.has_value() && *r.root <= OrdinalValue::of(6), "rank above 6");
    o.detail << "fragment rank " << (r.root ? r.root->str() : "?") << ", " << t.nodes.size() << " nodes";
}

// ---- 4 -----------------------------------------------------------------------------

struct StrengthenTally {
    std::size_t inputs = 0, already = 0, strengthened = 0, refused = 0;
};

void strengthen_all(Outcome& o, const BlockFunction& f, const SearchResult& found, StrengthenTally& tally) {
    for (const auto& w : found.sequences) {
        ++tally.inputs;
        if (validate(f, w, Strength::Strong).ok) {
            o.require(strengthen(f, w) == w, "strong input changed");
            ++tally.already;
            continue;
        }
        if (!increase_certifiable(f, w)) {
            bool threw = false;
            try {
                strengthen(f, w);
            } catch (const BlockError&) {
                threw = true;
            }
            o.require(threw, "uncertifiable input was strengthened");
            ++tally.refused;
            continue;
        }
        const Strengthened s = strengthen_traced(f, w);
        o.require(validate(f, s.seq, Strength::Strong).ok, "output fails strong validation");
        for (std::size_t k = 0; k + 1 < s.seq.length(); ++k) {
            const OrderMap whole = compose(w, s.source_index[k], s.source_index[k + 1]);
            for (std::int64_t x = s.seq.intervals[k].lo; x <= s.seq.intervals[k].hi; ++x) {
                o.require(s.seq.maps[k](x) == whole(x), "output map is not a restriction of a composite");
            }
        }
        ++tally.strengthened;
    }
}

void weak_to_strong(Outcome& o) {
    const BlockFunction f = alternating_control();
    SearchOptions opt;
    opt.max_len = 4;
    opt.strength = Strength::Weak;
    StrengthenTally capped, full;
    opt.horizon = 30;
    const SearchResult at30 = search(f, opt);
    strengthen_all(o, f, at30, capped);
    opt.horizon = 15;
    opt.node_cap = 200'000'000;
    const SearchResult at15 = search(f, opt);
    o.require(!at15.truncated, "15-element search truncated");
    strengthen_all(o, f, at15, full);
    o.detail << "30 elements: " << capped.strengthened << " strengthened, " << capped.already << " already strong, "
             << capped.refused << " refused" << (at30.truncated ? " (node cap reached)" : "")
             << "; 15 elements exhaustive: " << full.strengthened << " strengthened, " << full.already
             << " already strong, " << full.refused << " refused";
}

// ---- 5 -----------------------------------------------------------------------------

void sequence_encoder(Outcome& o) {
    const BlockFunction f = alternating_control();
    std::size_t bits = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Delta02Approx x = random_delta02(seed, 6, 40, 4);
        LazySequence seq = LazySequence::from_search(f, 20, 4, 4096);
        EncodeOptions opt;
        opt.seed = seed;
        const RunTranscript t = encode_with_sequence(f, seq, x, 40, opt);
        for (std::size_t e = 0; e < 6; ++e) {
            o.require(decode_bit(f, t, final_values(f, t, e), e) == limit(x, e, 40), "decoded bit differs from the limit");
            ++bits;
        }
        o.require(check_padding_stability(f, t).empty(), "padding moved");
        o.require(check_restraint_discipline(t).empty(), "restraint violated");
        o.require(check_segment_intervals(t).empty(), "segment off its interval");
        o.require(check_composition(f, t).empty(), "segment maps do not compose");
    }
    o.detail << "20 runs, " << bits << " bits decoded";
}

// ---- 6 -----------------------------------------------------------------------------

AlphaCEApprox three_changes() {
    AlphaCEApprox a;
    a.presentation = OrdinalPresentation::finite(3);
    a.values = Delta02Approx::zeros(1, 12);
    a.values.budget = 3;
    a.values.settle_stage = 8;
    a.values.g[0] = {0, 0, 1, 1, 0, 0, 1, 1, 1, 1, 1, 1, 1};
    a.r.assign(1, std::vector<OrdinalValue>(13, OrdinalValue::of(3)));
    for (std::size_t s = 2; s <= 12; ++s) a.r[0][s] = OrdinalValue::of(s < 4 ? 2 : s < 6 ? 1 : 0);
    return a;
}

void tree_encoder(Outcome& o) {
    const BlockFunction f = canonical_example();
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const AlphaCEApprox x = random_alpha_ce(seed, 3, 20, OrdinalPresentation::finite(2));
        EncodeOptions opt;
        opt.seed = seed;
        const RunTranscript t = encode_with_tree(f, 5, 40, x, 20, opt);
        for (std::size_t e = 0; e < 3; ++e) {
            o.require(decode_bit(f, t, final_values(f, t, e), e) == limit(x, e, 20), "decoded bit differs from the limit");
        }
        o.require(check_padding_stability(f, t).empty() && check_restraint_discipline(t).empty(), "invariant broken");
    }
    bool budget_error = false;
    try {
        encode_with_tree(f, 5, 40, three_changes(), 12);
    } catch (const RankBudgetError&) {
        budget_error = true;
    }
    o.require(budget_error, "three changes did not raise the rank budget error");
    o.detail << "10 runs at 2 round-trip, three changes raise the rank budget error";
}

// ---- 7 -----------------------------------------------------------------------------

void diagonalizers(Outcome& o) {
    const BlockFunction f = canonical_example();
    DiagonalOptions opt;
    opt.stages = 40;
    const ReplayReport rep = diagonalize_with_replay(f, 3, opt);
    o.require(rep.coherent && rep.conflicts.empty(), "replay not coherent");
    o.require(rep.live.requirements.size() >= 3, "fewer than 3 requirements");
    o.require(rep.live.lemma_violations.empty(), "stage equalities fail");
    std::size_t most = 0;
    for (std::size_t k = 0; k < rep.live.outcomes.size(); ++k) {
        const auto& out = rep.live.outcomes[k];
        o.require(out.satisfied, "requirement unsettled");
        o.require(out.phases <= 6, "more than 6 phases");
        most = std::max(most, out.phases);
        if (rep.live.extracted[k].length() > 0) {
            o.require(validate(f, rep.live.extracted[k], Strength::Weak).ok, "extracted sequence invalid");
        }
    }
    const ListingReplayReport lis = diagonalize_listing_with_replay(f, 3, 4, opt);
    o.require(lis.coherent && lis.conflicts.empty(), "listing replay not coherent");
    o.require(lis.live.violations.empty(), "reserved values break the phase pattern");
    for (const auto& out : lis.live.outcomes) o.require(out.satisfied, "listing requirement unsettled");
    o.detail << "copies: " << rep.live.phases.size() << " acts, at most " << most << " phases; listing: "
             << lis.live.phases.size() << " acts";
}

// ---- 8 -----------------------------------------------------------------------------

void alpha_output(Outcome& o) {
    DiagonalOptions opt;
    opt.stages = 40;
    const AlphaRun a = diagonalize_alpha_ce(canonical_example(), 3, OrdinalPresentation::finite(6), opt);
    const ApproxReport r = validate_alpha_ce(a.c, a.c.values.x_bound, a.c.values.s_bound);
    o.require(r.ok, r.message);
    o.detail << a.notes.size() << " rank assignments, C validates for 6";
}

// ---- 9 -----------------------------------------------------------------------------

// Each prefix block of `node`, taken at its first occurrence after the previous
// one; sandwich points go to sandwich points and loops to the same loops.
std::optional<CodingSequence> node_sequence(const std::vector<PlacedBlock>& blocks,
                                            const IntString& node, const Numbering& ell) {
    CodingSequence s;
    s.strength = Strength::Strong;
    std::size_t from = 0;
    for (std::size_t len = 1; len <= node.size(); ++len) {
        const IntString prefix(node.begin(), node.begin() + static_cast<std::ptrdiff_t>(len));
        const BlockType want = sandwich_block(prefix, ell);
        while (from < blocks.size() && !(*blocks[from].type == want)) ++from;
        if (from == blocks.size()) return std::nullopt;
        const Interval iv = blocks[from].interval;
        ++from;
        if (!s.intervals.empty()) {
            const Interval prev = s.intervals.back();
            const std::int64_t grow = iv.size() - prev.size();
            std::vector<std::int64_t> image;
            for (std::int64_t p = 0; p < prev.size(); ++p) image.push_back(iv.lo + p + (p >= prev.size() - 3 ? grow : 0));
            s.maps.push_back({prev, image});
        }
        s.intervals.push_back(iv);
    }
    return s;
}

void tree_structure(Outcome& o) {
    const RankedTree tree = builtin_tree6();
    o.require(tree.root_rank() == 6, "root rank is not 6");
    tree.validate_parity();
    const BlockFunction f = tree_example(tree);
    const FlagReport flags = verify_flags(f, 100);
    o.require(flags.contradictions.empty(), "flag contradictions");
    for (const auto& [name, st] : f.flags) {
        if (st.status != FlagStatus::Declared) continue;
        o.require(flags.flags.at(name).status == FlagStatus::Verified, std::string("flag not verified: ") + to_string(name));
    }
    const Numbering ell = tree_numbering(tree);
    const auto blocks = blocks_of_prefix(f, 200);
    std::size_t sequences = 0;
    for (const auto& node : tree.nonroot_nodes()) {
        const auto s = node_sequence(blocks, node, ell);
        o.require(s.has_value(), "prefix block missing from the first 200 blocks");
        if (!s) continue;
        o.require(validate(f, *s, Strength::Strong).ok, "node sequence fails strong validation");
        if (node.size() > 1) {
            const auto parent = node_sequence(blocks, IntString(node.begin(), node.end() - 1), ell);
            o.require(parent && parent->intervals == std::vector<Interval>(s->intervals.begin(), s->intervals.end() - 1),
                      "node sequence does not extend its parent");
        }
        ++sequences;
    }
    const PairTreeReport p = pair_tree_rank(tree);
    o.require(p.violations.empty(), "claim inequality fails");
    o.require(p.rank_star <= OrdinalValue::of(6), "pair tree rank above 6");
    o.detail << sequences << " node sequences validate, pair tree rank " << p.rank_star.str() << " over " << p.nodes
             << " nodes, " << p.claim_checks << " claim checks";
}

// ---- 10 ----------------------------------------------------------------------------

bool same_embedding(const BlockType& a, const BlockType& b) { return embeds(a, b) == oracle::embeds(a, b); }

BlockType random_type(std::mt19937_64& rng, int k) {
    for (;;) {
        BlockType t;
        for (int i = 0; i < k; ++i) t.map.push_back(static_cast<int>(rng() % static_cast<std::uint64_t>(k)));
        if (is_indecomposable(t)) return t;
    }
}

void oracle_cross_checks(Outcome& o) {
    std::vector<std::vector<BlockType>> types(7);
    for (int k = 1; k <= 6; ++k) types[k] = enumerate_types(k);
    std::uint64_t pairs = 0;
    // every pair with combined size at most 8
    for (int a = 1; a <= 6; ++a) {
        for (int b = 1; a + b <= 8 && b <= 6; ++b) {
            for (const auto& x : types[a]) {
                for (const auto& y : types[b]) {
                    o.require(same_embedding(x, y), "embeds differs from brute force");
                    ++pairs;
                }
            }
        }
    }
    // size 1 against every size 7 type comes down to the fixed points
    for (const auto& y : enumerate_types(7)) {
        o.require(same_embedding(loop_type(1), y), "embeds differs from brute force");
        ++pairs;
    }
    for (int j = 1; j <= 8; ++j) {
        for (int k = 1; k <= 8; ++k) {
            o.require(same_embedding(loop_type(j), loop_type(k)), "loop embedding differs");
            ++pairs;
        }
    }
    std::mt19937_64 rng(2024);
    for (std::uint64_t i = 0; i < kRandomTypePairs; ++i) {
        const int a = 5 + static_cast<int>(rng() % 4), b = 5 + static_cast<int>(rng() % 4);
        o.require(same_embedding(random_type(rng, a), random_type(rng, b)), "embeds differs on a sampled pair");
        ++pairs;
    }

    std::uint64_t instances = 0;
    for (const char* name : {"canonical", "alternating", "successor", "identity", "tree6"}) {
        const BlockFunction f = builtin_function(name);
        for (std::int64_t n = 6; n <= 12; n += 3) {
            for (bool strong : {true, false}) {
                SearchOptions opt;
                opt.max_len = 4;
                opt.horizon = n;
                opt.strength = strong ? Strength::Strong : Strength::Weak;
                opt.node_cap = 50'000'000;
                const SearchResult got = search(f, opt);
                o.require(!got.truncated, "search truncated");
                auto want = oracle::enumerate(f, n, 4, strong);
                std::sort(want.begin(), want.end(), canonical_less);
                o.require(got.sequences == want,
                          std::string("search differs from the enumerator on ") + name);
                ++instances;
            }
        }
    }
    o.detail << pairs << " type pairs, " << instances << " search instances";
}

}  // namespace

int main() {
    const std::pair<const char*, std::function<void(Outcome&)>> criteria[] = {
        {"canonical length bound", length_bound},
        {"canonical minrank", minrank_three},
        {"maximal tree bound", max_tree_bound},
        {"weak to strong", weak_to_strong},
        {"sequence encoder round trip", sequence_encoder},
        {"tree encoder", tree_encoder},
        {"diagonalizers", diagonalizers},
        {"alpha-c.e. output", alpha_output},
        {"tree example structure", tree_structure},
        {"oracle cross-checks", oracle_cross_checks},
    };
    int failed = 0;
    int index = 0;
    for (const auto& [name, run] : criteria) {
        ++index;
        Outcome o;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            run(o);
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << "exception: " << e.what();
        }
        std::printf("%s %2d %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", index, name, o.detail.str().c_str(),
                    seconds_since(t0));
        std::fflush(stdout);
        failed += o.pass ? 0 : 1;
    }
    return failed == 0 ? 0 : 1;
}
