#include "blockfn/encoder.hpp"

#include <algorithm>
#include <functional>
#include <unordered_map>

#include <json.hpp>

#include "blockfn/spec_io.hpp"

namespace blockfn {

// ---- greedy extension and the lazy sequence ------------------------------------

namespace {

PlacedBlock first_block_at_or_after(FView& fv, std::int64_t x) {
    PlacedBlock b = fv.block(x);
    if (b.interval.lo < x) b = fv.block(b.interval.hi + 1);
    return b;
}

}  // namespace

std::optional<CodingSequence> greedy_extend(FView& fv, const CodingSequence& seq, std::int64_t min_start,
                                            std::size_t horizon_blocks) {
    const std::size_t n = seq.length();
    if (n < 2) throw BlockError("greedy_extend needs a sequence of length at least 2");
    const Interval prev = seq.intervals[n - 2];
    const Interval cur = seq.intervals[n - 1];
    const OrderMap& phi = seq.maps[n - 2];

    struct Component {
        TypeRef type;
        std::vector<std::int64_t> pts;
    };
    std::vector<int> comp(static_cast<std::size_t>(cur.size()), -1);
    std::vector<Component> comps;
    for (std::int64_t x = prev.lo; x <= prev.hi;) {
        const PlacedBlock b = fv.block(x);
        Component c{b.type, {}};
        for (std::int64_t z = b.interval.lo; z <= b.interval.hi; ++z) {
            const std::int64_t y = phi(z);
            c.pts.push_back(y);
            comp[static_cast<std::size_t>(y - cur.lo)] = static_cast<int>(comps.size());
        }
        comps.push_back(std::move(c));
        x = b.interval.hi + 1;
    }

    OrderMap next;
    next.domain = cur;
    next.image.assign(static_cast<std::size_t>(cur.size()), -1);
    std::int64_t cursor = first_block_at_or_after(fv, std::max(min_start, cur.hi + 1)).interval.lo;
    for (std::int64_t y = cur.lo; y <= cur.hi; ++y) {
        const auto idx = static_cast<std::size_t>(y - cur.lo);
        if (next.image[idx] >= 0) continue;
        if (comp[idx] < 0) {
            next.image[idx] = cursor++;
            continue;
        }
        const Component& c = comps[static_cast<std::size_t>(comp[idx])];
        PlacedBlock target = first_block_at_or_after(fv, cursor);
        std::vector<int> w;
        while (w.empty()) {
            if (target.block_index >= horizon_blocks) return std::nullopt;
            for (auto& cand : embeds_all(*c.type, *target.type, 256)) {
                bool fits = true;
                for (std::size_t t = 0; t + 1 < cand.size() && fits; ++t) {
                    fits = cand[t + 1] - cand[t] >= c.pts[t + 1] - c.pts[t];
                }
                if (fits) {
                    w = cand;
                    break;
                }
            }
            if (w.empty()) target = fv.block(target.interval.hi + 1);
        }
        for (std::size_t t = 0; t < c.pts.size(); ++t) {
            const std::int64_t base = target.interval.lo + w[t];
            const std::int64_t stop = t + 1 < c.pts.size() ? c.pts[t + 1] : c.pts[t] + 1;
            for (std::int64_t z = c.pts[t]; z < stop; ++z) next.image[static_cast<std::size_t>(z - cur.lo)] = base + (z - c.pts[t]);
        }
        cursor = target.interval.lo + w.back() + 1;
    }

    CodingSequence out = seq;
    out.strength = Strength::Strong;
    const Interval grown{fv.block(next.image.front()).interval.lo, fv.block(next.image.back()).interval.hi};
    out.intervals.push_back(grown);
    out.maps.push_back(std::move(next));
    if (!preserves_f(fv, phi.then(out.maps.back()))) return std::nullopt;
    return out;
}

LazySequence::LazySequence(const BlockFunction& f, CodingSequence seed, std::size_t horizon_blocks)
    : fv_(f), seq_(std::move(seed)), horizon_blocks_(horizon_blocks) {
    if (seq_.length() < 2) throw BlockError("sequence seed needs two intervals");
    const auto rep = validate(f, seq_, Strength::Strong);
    if (!rep.ok) throw BlockError("sequence seed is not a coding sequence: " + rep.message);
}

LazySequence LazySequence::from_search(const BlockFunction& f, std::size_t seed_blocks, std::size_t lookahead,
                                       std::size_t horizon_blocks) {
    const NFTree tree = normal_form_tree(f, 2, seed_blocks, Strength::Strong);
    std::vector<CodingSequence> seeds;
    for (std::size_t id = 1; id < tree.nodes.size(); ++id) {
        if (tree.nodes[id].length == 2) seeds.push_back(tree.sequence(static_cast<int>(id)));
    }
    std::sort(seeds.begin(), seeds.end(), canonical_less);
    FView fv(f);
    // Probing stays near the seed window; the full horizon is for the run itself.
    const std::size_t probe_blocks = std::min(horizon_blocks, 8 * seed_blocks);
    for (const auto& s : seeds) {
        std::optional<CodingSequence> cur = s;
        for (std::size_t k = 0; k < lookahead && cur; ++k) cur = greedy_extend(fv, *cur, 0, probe_blocks);
        if (cur) {
            LazySequence out(f, s, horizon_blocks);
            out.seq_ = *cur;
            return out;
        }
    }
    throw BlockError("no searched seed survives the extension rule");
}

OrderMap LazySequence::compose(std::size_t i, std::size_t j) const {
    if (i == j) return OrderMap::identity(interval(i));
    return blockfn::compose(seq_, i, j);
}

void LazySequence::extend(std::int64_t min_start, std::uint64_t stage) {
    auto next = greedy_extend(fv_, seq_, min_start, horizon_blocks_);
    if (!next || !validate(fv_.function(), *next, Strength::Strong).ok) {
        throw EncodeError("coding sequence certificate cannot supply an interval starting at or above " +
                              std::to_string(min_start),
                          stage);
    }
    seq_ = std::move(*next);
}

void LazySequence::extend_to_length(std::size_t n) {
    while (seq_.length() < n) extend(0, 0);
}

std::size_t LazySequence::next_index(std::size_t after, int parity, std::int64_t min_start, std::uint64_t stage) {
    for (std::size_t l = after + 1;; ++l) {
        while (l > seq_.length()) extend(min_start, stage);
        if (static_cast<int>(l % 2) == parity && interval(l).lo >= min_start) return l;
    }
}

// ---- the stage engine ---------------------------------------------------------------

namespace {

struct Move {
    Interval target;
    OrderMap map;  // old interval -> positions inside target
    std::size_t index = 0;
    std::string kind;
    std::size_t extra = 0;  // extensions still owed on entry
};

struct Segment {
    std::size_t e = 0;
    std::size_t index = 0;
    Interval interval;
    std::vector<ElementId> initial;
    std::vector<ElementId> ids;
};

class Planner {
public:
    virtual ~Planner() = default;
    virtual Move enter(std::size_t e, std::uint64_t stage, std::int64_t min_start) = 0;
    virtual Move move(const Segment& seg, bool flip, std::uint64_t stage, std::int64_t min_start) = 0;
    virtual Move entry_step(const Segment&, std::size_t, std::uint64_t stage) {
        throw EncodeError("planner owes no entry steps", stage);
    }
};

class Engine {
public:
    Engine(const BlockFunction& f, const Delta02Approx& x, std::size_t stages, const EncodeOptions& opt,
           EncodeMode mode)
        : fv_(f), x_(x), stages_(stages), opt_(opt) {
        if (x.s_bound < stages) throw BlockError("approximation has fewer stages than the run");
        t_.mode = mode;
        t_.function_name = f.name;
        t_.config_hash = opt.config_hash;
        t_.seed = opt.seed;
        t_.stages = stages;
        t_.x = x;
    }

    RunTranscript run(Planner& planner) {
        snapshot();
        for (std::size_t s = 0; s < stages_; ++s) {
            copy_.next_stage();
            const std::uint64_t stage = s + 1;
            step(planner, s, stage);
            if (s < x_.x_bound) enter(planner, s, stage);
            snapshot();
        }
        t_.inserts = copy_.history();
        return std::move(t_);
    }

private:
    struct Unit {
        int segment = -1;  // index into segs_, or -1 for a padding block
        std::vector<ElementId> ids;
        TypeRef type;
        std::int64_t old_pos = 0;
    };

    void note(const std::vector<ElementId>& ids, int owner, std::uint64_t stage) {
        for (ElementId id : ids) {
            if (t_.owner.size() <= id) {
                t_.owner.resize(id + 1, -1);
                t_.born.resize(id + 1, 0);
            }
            t_.owner[id] = owner;
            t_.born[id] = stage;
        }
    }

    std::vector<Unit> units() {
        std::vector<Unit> out;
        std::int64_t p = 0;
        std::size_t next_seg = 0;
        std::vector<std::size_t> by_pos(segs_.size());
        for (std::size_t i = 0; i < segs_.size(); ++i) by_pos[i] = i;
        std::sort(by_pos.begin(), by_pos.end(),
                  [&](std::size_t a, std::size_t b) { return segs_[a].interval.lo < segs_[b].interval.lo; });
        while (p < copy_.size()) {
            if (next_seg < by_pos.size() && segs_[by_pos[next_seg]].interval.lo == p) {
                const Segment& sg = segs_[by_pos[next_seg]];
                out.push_back({static_cast<int>(by_pos[next_seg]), sg.ids, nullptr, p});
                p = sg.interval.hi + 1;
                ++next_seg;
                continue;
            }
            const PlacedBlock b = fv_.block(p);
            Unit u;
            u.type = b.type;
            u.old_pos = p;
            for (std::int64_t z = b.interval.lo; z <= b.interval.hi; ++z) u.ids.push_back(copy_.at(z));
            out.push_back(std::move(u));
            p = b.interval.hi + 1;
        }
        return out;
    }

    void step(Planner& planner, std::size_t s, std::uint64_t stage) {
        for (const Unit& u : units()) {
            const std::int64_t at = copy_.pi(u.ids.front());
            if (u.segment < 0) {
                if (at == u.old_pos) continue;
                const RestorePlan plan = restore_block(fv_, copy_, u.ids, *u.type, at - 1, opt_.horizon_blocks);
                note(plan.below, -1, stage);
                note(plan.inside, -1, stage);
                continue;
            }
            Segment& sg = segs_[static_cast<std::size_t>(u.segment)];
            const bool flip = x_.at(sg.e, s + 1) != x_.at(sg.e, s);
            if (!flip && at == sg.interval.lo) continue;
            apply(sg, planner.move(sg, flip, stage, at), at, stage);
        }
    }

    void apply(Segment& sg, const Move& mv, std::int64_t at, std::uint64_t stage) {
        if (mv.target.lo < at) throw EncodeError("segment target lies below the segment", stage);
        std::vector<std::int64_t> tgt;
        for (std::int64_t z = sg.interval.lo; z <= sg.interval.hi; ++z) tgt.push_back(mv.map(z));
        const int owner = static_cast<int>(sg.e);
        note(copy_.insert_run(at, mv.target.lo - at), -1, stage);
        note(copy_.insert_run(mv.target.lo, tgt.front() - mv.target.lo), owner, stage);
        for (std::size_t i = 0; i + 1 < sg.ids.size(); ++i) {
            note(copy_.insert_run(copy_.pi(sg.ids[i]) + 1, tgt[i + 1] - tgt[i] - 1), owner, stage);
        }
        note(copy_.insert_run(copy_.pi(sg.ids.back()) + 1, mv.target.hi - tgt.back()), owner, stage);
        sg.ids.clear();
        for (std::int64_t z = mv.target.lo; z <= mv.target.hi; ++z) sg.ids.push_back(copy_.at(z));
        t_.events.push_back({stage, sg.e, mv.target, mv.kind, mv.index, mv.map});
        sg.interval = mv.target;
        sg.index = mv.index;
    }

    void enter(Planner& planner, std::size_t e, std::uint64_t stage) {
        const std::int64_t len = copy_.size();
        Move mv = planner.enter(e, stage, len);
        note(copy_.insert_run(len, mv.target.lo - len), -1, stage);
        Segment sg;
        sg.e = e;
        sg.index = mv.index;
        sg.interval = mv.target;
        sg.ids = copy_.insert_run(mv.target.lo, mv.target.size());
        note(sg.ids, static_cast<int>(e), stage);
        sg.initial = sg.ids;
        t_.events.push_back({stage, e, mv.target, "enter", mv.index, {}});
        segs_.push_back(std::move(sg));
        for (std::size_t k = mv.extra; k > 0; --k) {
            Segment& cur = segs_.back();
            apply(cur, planner.entry_step(cur, k, stage), cur.interval.lo, stage);
        }
    }

    void snapshot() {
        StageSnapshot snap;
        snap.stage = copy_.stage();
        snap.order = copy_.order();
        for (const Segment& sg : segs_) snap.layout.push_back({sg.e, sg.index, sg.interval, sg.initial, sg.ids});
        t_.snapshots.push_back(std::move(snap));
    }

    FView fv_;
    const Delta02Approx& x_;
    std::size_t stages_;
    EncodeOptions opt_;
    StageCopy copy_;
    std::vector<Segment> segs_;
    RunTranscript t_;
};

int parity_for(int bit) { return bit == 0 ? 1 : 0; }

class SequencePlanner : public Planner {
public:
    SequencePlanner(LazySequence& seq, const Delta02Approx& x) : seq_(seq), x_(x) {}

    Move enter(std::size_t e, std::uint64_t stage, std::int64_t min_start) override {
        const std::size_t l = seq_.next_index(0, parity_for(x_.at(e, stage)), min_start, stage);
        return {seq_.interval(l), {}, l, "enter"};
    }

    Move move(const Segment& sg, bool flip, std::uint64_t stage, std::int64_t min_start) override {
        const std::size_t l = seq_.next_index(sg.index, parity_for(x_.at(sg.e, stage)), min_start, stage);
        return {seq_.interval(l), seq_.compose(sg.index, l), l, flip ? "extend" : "lateral"};
    }

private:
    LazySequence& seq_;
    const Delta02Approx& x_;
};

// ---- tree planner ---------------------------------------------------------------

std::string shape_key(FView& fv, const CodingSequence& s) {
    std::string key;
    for (std::size_t i = 0; i < s.length(); ++i) {
        const Interval iv = s.intervals[i];
        key += '[';
        for (std::int64_t x = iv.lo; x <= iv.hi;) {
            const PlacedBlock b = fv.block(x);
            key += '(';
            for (int v : b.type->map) key += std::to_string(v) + ',';
            key += ')';
            x = b.interval.hi + 1;
        }
        key += ']';
        if (i + 1 < s.length()) {
            key += '{';
            for (std::int64_t y : s.maps[i].image) key += std::to_string(y - s.intervals[i + 1].lo) + ',';
            key += '}';
        }
    }
    return key;
}

// Types of the blocks of an interval, in order.
std::vector<TypeRef> pattern_of(FView& fv, Interval iv) {
    std::vector<TypeRef> out;
    for (std::int64_t x = iv.lo; x <= iv.hi;) {
        const PlacedBlock b = fv.block(x);
        out.push_back(b.type);
        x = b.interval.hi + 1;
    }
    return out;
}

// First start >= min_start where the block pattern occurs with no gap.
std::optional<std::int64_t> find_pattern(FView& fv, const std::vector<TypeRef>& pat, std::int64_t min_start,
                                         std::size_t horizon_blocks) {
    PlacedBlock b = first_block_at_or_after(fv, min_start);
    for (; b.block_index < horizon_blocks; b = fv.block(b.interval.hi + 1)) {
        std::int64_t x = b.interval.lo;
        bool ok = true;
        for (const auto& t : pat) {
            const PlacedBlock c = fv.block(x);
            if (!(*c.type == *t)) {
                ok = false;
                break;
            }
            x = c.interval.hi + 1;
        }
        if (ok) return b.interval.lo;
    }
    return std::nullopt;
}

class TreePlanner : public Planner {
public:
    TreePlanner(const BlockFunction& f, const MinRankResult& mr, const AlphaCEApprox& x, std::size_t horizon)
        : f_(f), fv_(f), mr_(mr), x_(x), horizon_(horizon) {
        for (std::size_t id = 1; id < mr.tree.nodes.size(); ++id) {
            const CodingSequence s = mr.tree.sequence(static_cast<int>(id));
            const std::string k = shape_key(fv_, s);
            auto [it, fresh] = rank_.emplace(k, mr.node_rank[id]);
            if (!fresh) it->second = std::max(it->second, mr.node_rank[id]);
            nodes_[k].push_back(static_cast<int>(id));
        }
    }

    std::vector<CodingSequence> current;  // by e

    Move enter(std::size_t e, std::uint64_t stage, std::int64_t min_start) override {
        std::size_t flips = 0;
        for (std::size_t s = 1; s <= stage; ++s) flips += x_.at(e, s) != x_.at(e, s - 1);
        const int need = need_rank(e, stage) + static_cast<int>(flips);
        std::optional<CodingSequence> best;
        for (int c : mr_.tree.nodes[0].children) {
            if (mr_.node_rank[c] < need) continue;
            const CodingSequence s = mr_.tree.sequence(c);
            auto at = find_pattern(fv_, pattern_of(fv_, s.intervals[0]), min_start, horizon_);
            if (!at) continue;
            if (!best || *at < best->intervals[0].lo) {
                best = CodingSequence{};
                best->strength = Strength::Strong;
                best->intervals.push_back({*at, *at + s.intervals[0].size() - 1});
            }
        }
        if (!best) throw RankBudgetError("no length-1 sequence of minrank " + std::to_string(need), stage);
        if (current.size() <= e) current.resize(e + 1);
        current[e] = *best;
        return {best->intervals[0], {}, 1, "enter", flips};
    }

    Move entry_step(const Segment& sg, std::size_t remaining, std::uint64_t stage) override {
        CodingSequence& cs = current.at(sg.e);
        cs = child(cs, need_rank(sg.e, stage) + static_cast<int>(remaining) - 1, cs.intervals.back().hi + 1, stage);
        return {cs.intervals.back(), cs.maps.back(), cs.length(), "extend"};
    }

    Move move(const Segment& sg, bool flip, std::uint64_t stage, std::int64_t min_start) override {
        CodingSequence& cs = current.at(sg.e);
        const int need = need_rank(sg.e, stage);
        CodingSequence next;
        OrderMap map;
        if (flip) {
            next = child(cs, need, min_start, stage);
            map = next.maps.back();
        } else {
            next = lateral(cs, need, min_start, stage);
            map = lateral_map_;
        }
        cs = next;
        return {cs.intervals.back(), map, cs.length(), flip ? "extend" : "lateral"};
    }

private:
    int need_rank(std::size_t e, std::uint64_t stage) const {
        const OrdinalValue r = x_.r.at(e).at(stage);
        if (r.omega_coeff > 0) return 1 << 20;
        return static_cast<int>(r.finite);
    }

    int rank_of(const CodingSequence& s) {
        auto it = rank_.find(shape_key(fv_, s));
        return it == rank_.end() ? -1 : it->second;
    }

    CodingSequence child(const CodingSequence& cs, int need, std::int64_t min_start, std::uint64_t stage) {
        const std::string key = shape_key(fv_, cs);
        auto it = nodes_.find(key);
        const std::int64_t floor = std::max(min_start, cs.intervals.back().hi + 1);
        if (it != nodes_.end()) {
            for (int tmpl : it->second) {
                const CodingSequence ts = mr_.tree.sequence(tmpl);
                for (int c : mr_.tree.nodes[tmpl].children) {
                    if (mr_.node_rank[c] < need) continue;
                    const CodingSequence cseq = mr_.tree.sequence(c);
                    const Interval last = cseq.intervals.back();
                    auto at = find_pattern(fv_, pattern_of(fv_, last), floor, horizon_);
                    if (!at) continue;
                    CodingSequence out = cs;
                    OrderMap m;
                    m.domain = cs.intervals.back();
                    for (std::int64_t z = m.domain.lo; z <= m.domain.hi; ++z) {
                        const std::int64_t tz = ts.intervals.back().lo + (z - m.domain.lo);
                        m.image.push_back(cseq.maps.back()(tz) - last.lo + *at);
                    }
                    out.intervals.push_back({*at, *at + last.size() - 1});
                    out.maps.push_back(std::move(m));
                    if (validate(f_, out, Strength::Strong).ok && rank_of(out) >= need) return out;
                }
            }
        }
        if (need <= 0 && cs.length() >= 2) {
            if (auto g = greedy_extend(fv_, cs, floor, horizon_)) {
                if (validate(f_, *g, Strength::Strong).ok) return *g;
            }
        }
        throw RankBudgetError("no child of minrank " + std::to_string(need) + " for a sequence of length " +
                                  std::to_string(cs.length()),
                              stage);
    }

    CodingSequence lateral(const CodingSequence& cs, int need, std::int64_t min_start, std::uint64_t stage) {
        const Interval last = cs.intervals.back();
        if (auto at = find_pattern(fv_, pattern_of(fv_, last), min_start, horizon_)) {
            CodingSequence out = cs;
            lateral_map_.domain = last;
            lateral_map_.image.clear();
            for (std::int64_t z = last.lo; z <= last.hi; ++z) lateral_map_.image.push_back(z - last.lo + *at);
            out.intervals.back() = {*at, *at + last.size() - 1};
            if (cs.length() >= 2) out.maps.back() = cs.maps.back().then(lateral_map_);
            if (validate(f_, out, Strength::Strong).ok) return out;
        }
        if (need <= 0) {
            if (auto pm = find_permitted(f_, cs, min_start, horizon_)) {
                if (validate(f_, pm->seq, Strength::Strong).ok) {
                    lateral_map_ = pm->psi;
                    return pm->seq;
                }
            }
        }
        throw EncodeError("no permitted sequence starts at or above " + std::to_string(min_start), stage);
    }

    const BlockFunction& f_;
    FView fv_;
    const MinRankResult& mr_;
    const AlphaCEApprox& x_;
    std::size_t horizon_;
    std::map<std::string, int> rank_;
    std::map<std::string, std::vector<int>> nodes_;
    OrderMap lateral_map_;
};

}  // namespace

RunTranscript encode_with_sequence(const BlockFunction& f, LazySequence& seq, const Delta02Approx& x,
                                   std::size_t stages, const EncodeOptions& opt) {
    if (!f.holds(FlagName::EmbedsLaterCofinite)) {
        throw BlockError("encoding needs blocks that embed into later blocks");
    }
    SequencePlanner planner(seq, x);
    Engine engine(f, x, stages, opt, EncodeMode::Sequence);
    RunTranscript t = engine.run(planner);
    t.sequence = seq.prefix();
    return t;
}

RunTranscript encode_with_tree(const BlockFunction& f, std::size_t depth, std::size_t tree_blocks,
                               const AlphaCEApprox& x, std::size_t stages, const EncodeOptions& opt) {
    if (!f.holds(FlagName::AllRecur)) throw BlockError("tree encoding needs recurring block types");
    const MinRankResult mr = min_rank(f, depth, tree_blocks);
    TreePlanner planner(f, mr, x, opt.horizon_blocks);
    Engine engine(f, x.values, stages, opt, EncodeMode::Tree);
    RunTranscript t = engine.run(planner);
    t.tree_sequences = planner.current;
    return t;
}

// ---- transcripts and decoding --------------------------------------------------------

StageCopy RunTranscript::copy_at(std::uint64_t s) const { return StageCopy::replay(inserts, s); }

namespace {

const char* mode_name(EncodeMode m) { return m == EncodeMode::Sequence ? "sequence" : "tree"; }

std::vector<ElementId> values_at(FView& fv, const std::vector<ElementId>& order, const std::vector<ElementId>& ids) {
    std::unordered_map<ElementId, std::int64_t> pos;
    for (std::size_t p = 0; p < order.size(); ++p) pos[order[p]] = static_cast<std::int64_t>(p);
    std::vector<ElementId> out;
    for (ElementId id : ids) {
        auto it = pos.find(id);
        if (it == pos.end()) throw BlockError("element missing from snapshot");
        const std::int64_t v = fv.f(it->second);
        out.push_back(v < static_cast<std::int64_t>(order.size()) ? order[static_cast<std::size_t>(v)] : kNoValue);
    }
    return out;
}

std::vector<std::int64_t> positions_at(const std::vector<ElementId>& order, const std::vector<ElementId>& ids) {
    std::unordered_map<ElementId, std::int64_t> pos;
    for (std::size_t p = 0; p < order.size(); ++p) pos[order[p]] = static_cast<std::int64_t>(p);
    std::vector<std::int64_t> out;
    for (ElementId id : ids) out.push_back(pos.at(id));
    return out;
}

}  // namespace

std::vector<std::string> RunTranscript::records() const {
    std::vector<std::string> out;
    nlohmann::ordered_json h;
    h["record"] = "header";
    h["tool"] = kToolVersion;
    h["config_hash"] = config_hash;
    h["function"] = function_name;
    h["mode"] = mode_name(mode);
    h["stages"] = stages;
    h["seed"] = seed;
    out.push_back(h.dump());
    std::size_t ins = 0, ev = 0;
    for (std::uint64_t s = 1; s <= stages; ++s) {
        for (; ins < inserts.size() && inserts[ins].stage == s; ++ins) out.push_back(insert_event(inserts[ins]));
        for (; ev < events.size() && events[ev].stage == s; ++ev) {
            nlohmann::ordered_json j;
            j["stage"] = s;
            j["op"] = "segment";
            j["e"] = events[ev].e;
            j["interval"] = {events[ev].interval.lo, events[ev].interval.hi};
            j["move"] = events[ev].move;
            j["index"] = events[ev].index;
            out.push_back(j.dump());
        }
        nlohmann::ordered_json j;
        j["stage"] = s;
        j["op"] = "summary";
        j["length"] = snapshots.at(s).order.size();
        std::vector<int> xs;
        for (std::size_t e = 0; e < x.x_bound; ++e) xs.push_back(x.at(e, s));
        j["x"] = xs;
        out.push_back(j.dump());
    }
    return out;
}

std::vector<ElementId> final_values(const BlockFunction& f, const RunTranscript& t, std::size_t e) {
    FView fv(f);
    const StageSnapshot& last = t.snapshots.back();
    return values_at(fv, last.order, last.layout.at(e).initial);
}

int decode_bit(const BlockFunction& f, const RunTranscript& t, const std::vector<ElementId>& values, std::size_t e) {
    if (e + 1 >= t.snapshots.size() || t.snapshots[e + 1].layout.size() <= e) {
        throw BlockError("index " + std::to_string(e) + " never entered the run");
    }
    FView fv(f);
    const StageSnapshot& intro = t.snapshots[e + 1];
    const SegmentLayout& seg = intro.layout[e];
    const int bit = t.x.at(e, e + 1);
    if (values == values_at(fv, intro.order, seg.initial)) return bit;
    for (std::size_t s = e + 2; s < t.snapshots.size(); ++s) {
        const SegmentLayout& later = t.snapshots[s].layout.at(e);
        if (later.index % 2 != seg.index % 2) {
            if (values == values_at(fv, t.snapshots[s].order, seg.initial)) return 1 - bit;
            break;
        }
    }
    throw BlockError("values on the initial coding elements of " + std::to_string(e) +
                     " match neither configuration");
}

ElementId decode_f(const BlockFunction& f, const RunTranscript& t, const std::vector<int>& limits, ElementId id) {
    if (id >= t.owner.size()) throw BlockError("id " + std::to_string(id) + " is not in the transcript");
    FView fv(f);
    const std::uint64_t b = t.born[id];
    if (t.owner[id] < 0) return values_at(fv, t.snapshots.at(b).order, {id}).front();
    const auto e = static_cast<std::size_t>(t.owner[id]);
    for (std::uint64_t s = b; s < t.snapshots.size(); ++s) {
        if (t.x.at(e, s) == limits.at(e)) return values_at(fv, t.snapshots[s].order, {id}).front();
    }
    throw BlockError("approximation never reaches the given limit");
}

// ---- property checks ------------------------------------------------------------------

std::vector<std::string> check_padding_stability(const BlockFunction& f, const RunTranscript& t) {
    std::vector<std::string> bad;
    FView fv(f);
    std::vector<ElementId> first(t.owner.size(), kNoValue);
    for (std::size_t s = 0; s < t.snapshots.size(); ++s) {
        const auto& order = t.snapshots[s].order;
        std::vector<ElementId> all(order.begin(), order.end());
        const auto vals = values_at(fv, order, all);
        for (std::size_t k = 0; k < all.size(); ++k) {
            const ElementId id = all[k];
            if (t.owner[id] >= 0) continue;
            if (first[id] == kNoValue) {
                first[id] = vals[k];
            } else if (first[id] != vals[k]) {
                bad.push_back("padding " + std::to_string(id) + " changed value at stage " + std::to_string(s));
            }
        }
    }
    return bad;
}

std::vector<std::string> check_restraint_discipline(const RunTranscript& t) {
    std::vector<std::string> bad;
    for (std::size_t s = 0; s + 1 < t.snapshots.size(); ++s) {
        const auto& a = t.snapshots[s];
        const auto& b = t.snapshots[s + 1];
        bool flipped_below = false;
        for (std::size_t e = 0; e < a.layout.size(); ++e) {
            flipped_below = flipped_below || t.x.at(e, s + 1) != t.x.at(e, s);
            const ElementId r = a.layout[e].segment.back();
            const auto before = positions_at(a.order, {r}).front();
            const auto after = positions_at(b.order, {r}).front();
            if (after != before && !flipped_below) {
                bad.push_back("insertion below the restraint of " + std::to_string(e) + " at stage " +
                              std::to_string(s + 1) + " without a change at or above its priority");
            }
        }
    }
    return bad;
}

std::vector<std::string> check_segment_intervals(const RunTranscript& t) {
    std::vector<std::string> bad;
    for (const auto& snap : t.snapshots) {
        for (const auto& seg : snap.layout) {
            const auto pos = positions_at(snap.order, seg.segment);
            bool ok = !pos.empty() && static_cast<std::int64_t>(pos.size()) == seg.interval.size();
            for (std::size_t k = 0; ok && k < pos.size(); ++k) ok = pos[k] == seg.interval.lo + static_cast<std::int64_t>(k);
            if (!ok) {
                bad.push_back("segment of " + std::to_string(seg.e) + " off its interval at stage " +
                              std::to_string(snap.stage));
            }
        }
    }
    return bad;
}

std::vector<std::string> check_finite_displacement(const RunTranscript& t) {
    std::vector<std::string> bad;
    const auto& last = t.snapshots.back();
    std::vector<ElementId> all = last.order;
    for (ElementId id : all) {
        const std::uint64_t b = t.born[id];
        // Highest index whose segment starts at or below the element when it appears.
        const auto& birth = t.snapshots.at(b);
        const auto p0 = positions_at(birth.order, {id}).front();
        int top = -1;
        for (const auto& seg : birth.layout) {
            if (seg.interval.lo <= p0) top = std::max(top, static_cast<int>(seg.e));
        }
        std::size_t moved = 0, allowed = 0;
        for (std::size_t s = b; s + 1 < t.snapshots.size(); ++s) {
            const auto p = positions_at(t.snapshots[s].order, {id}).front();
            const auto q = positions_at(t.snapshots[s + 1].order, {id}).front();
            moved += q != p;
            bool flip = false;
            for (int e = 0; e <= top; ++e) flip = flip || t.x.at(static_cast<std::size_t>(e), s + 1) != t.x.at(static_cast<std::size_t>(e), s);
            allowed += flip;
        }
        if (moved > allowed) bad.push_back("element " + std::to_string(id) + " displaced more often than allowed");
    }
    return bad;
}

std::vector<std::string> check_composition(const BlockFunction& f, const RunTranscript& t) {
    std::vector<std::string> bad;
    std::size_t ev = 0;
    for (std::size_t s = 0; s + 1 < t.snapshots.size(); ++s) {
        const auto& a = t.snapshots[s];
        const auto& b = t.snapshots[s + 1];
        std::map<std::size_t, const SegmentEvent*> moved;
        for (; ev < t.events.size() && t.events[ev].stage <= s + 1; ++ev) {
            if (t.events[ev].move != "enter") moved[t.events[ev].e] = &t.events[ev];
        }
        for (const auto& seg : a.layout) {
            const auto p = positions_at(a.order, seg.segment);
            const auto q = positions_at(b.order, seg.segment);
            auto it = moved.find(seg.e);
            for (std::size_t k = 0; k < p.size(); ++k) {
                const std::int64_t want = it == moved.end() ? p[k] : it->second->map(p[k]);
                if (q[k] != want) {
                    bad.push_back("segment of " + std::to_string(seg.e) + " left its map images at stage " +
                                  std::to_string(s + 1));
                    break;
                }
            }
            if (t.mode == EncodeMode::Sequence && it != moved.end()) {
                const OrderMap c = it->second->index == seg.index ? OrderMap::identity(seg.interval)
                                                                  : compose(t.sequence, seg.index, it->second->index);
                if (!(c == it->second->map)) bad.push_back("segment move is not a composite of the sequence maps");
            }
        }
    }
    // Same parity positions keep the values on the initial elements, opposite ones do not.
    FView fv(f);
    for (std::size_t s = 1; s < t.snapshots.size(); ++s) {
        for (const auto& seg : t.snapshots[s].layout) {
            const auto& intro = t.snapshots.at(seg.e + 1);
            const auto& first = intro.layout.at(seg.e);
            const bool same = values_at(fv, t.snapshots[s].order, first.initial) == values_at(fv, intro.order, first.initial);
            if (same != (seg.index % 2 == first.index % 2)) {
                bad.push_back("parity law fails for " + std::to_string(seg.e) + " at stage " + std::to_string(s));
            }
        }
    }
    return bad;
}

}  // namespace blockfn
