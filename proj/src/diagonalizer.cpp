#include "blockfn/diagonalizer.hpp"

#include <algorithm>
#include <set>

#include "blockfn/search.hpp"
#include "blockfn/spec_io.hpp"

namespace blockfn {

// ---- functionals ----------------------------------------------------------------

namespace {

bool compatible(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b) {
    const std::size_t n = std::min(a.size(), b.size());
    return std::equal(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(n), b.begin());
}

std::string entry_str(const TableFunctional::Entry& e) {
    return "input " + std::to_string(e.input) + " use " + std::to_string(e.result.use) + " output " +
           std::to_string(e.result.output);
}

}  // namespace

bool TableFunctional::add(Entry e) {
    if (static_cast<std::int64_t>(e.prefix.size()) != e.result.use + 1) {
        throw BlockError("table entry prefix must have length use + 1");
    }
    for (std::size_t k : by_input_[e.input]) {
        const Entry& old = entries_[k];
        if (!compatible(old.prefix, e.prefix)) continue;
        if (old.result == e.result && old.prefix == e.prefix) return true;
        if (old.result != e.result || old.prefix.size() != e.prefix.size()) return false;
    }
    by_input_[e.input].push_back(entries_.size());
    entries_.push_back(std::move(e));
    return true;
}

std::optional<Computation> TableFunctional::run(std::int64_t input, const Oracle& oracle) const {
    auto it = by_input_.find(input);
    if (it == by_input_.end()) return std::nullopt;
    for (std::size_t k : it->second) {
        const Entry& e = entries_[k];
        if (oracle.size() < e.prefix.size()) continue;
        if (std::equal(e.prefix.begin(), e.prefix.end(), oracle.begin())) return e.result;
    }
    return std::nullopt;
}

std::vector<std::string> TableFunctional::incoherent() const {
    std::vector<std::string> bad;
    for (const auto& [input, ks] : by_input_) {
        for (std::size_t a = 0; a < ks.size(); ++a) {
            for (std::size_t b = a + 1; b < ks.size(); ++b) {
                const Entry& x = entries_[ks[a]];
                const Entry& y = entries_[ks[b]];
                if (compatible(x.prefix, y.prefix)) bad.push_back(entry_str(x) + " clashes with " + entry_str(y));
            }
        }
    }
    return bad;
}

nlohmann::json TableFunctional::to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& e : entries_) {
        rows.push_back({{"input", e.input}, {"prefix", e.prefix}, {"output", e.result.output}, {"use", e.result.use}});
    }
    return {{"id", name_}, {"entries", rows}};
}

TableFunctional TableFunctional::from_json(const nlohmann::json& j) {
    TableFunctional t(j.value("id", std::string("table")));
    for (const auto& r : j.at("entries")) {
        Entry e{r.at("input").get<std::int64_t>(), r.at("prefix").get<std::vector<std::int64_t>>(),
                {r.at("output").get<std::int64_t>(), r.at("use").get<std::int64_t>()}};
        if (!t.add(std::move(e))) throw BlockError("functional table is not use-consistent");
    }
    return t;
}

std::optional<Computation> RecordingFunctional::run(std::int64_t input, const Oracle& oracle) const {
    auto r = inner_.run(input, oracle);
    if (!r) return r;
    if (r->use >= static_cast<std::int64_t>(oracle.size())) {
        conflicts_.push_back(inner_.id() + ": use beyond the oracle for input " + std::to_string(input));
        return std::nullopt;
    }
    TableFunctional::Entry e{input, Oracle(oracle.begin(), oracle.begin() + (r->use + 1)), *r};
    if (!table_.add(e)) conflicts_.push_back(inner_.id() + ": " + entry_str(e));
    return r;
}

std::optional<Computation> run_prefix(const Functional& fn, std::int64_t hi, const Oracle& oracle,
                                      std::vector<std::int64_t>& outputs) {
    outputs.clear();
    std::int64_t use = -1;
    for (std::int64_t k = 0; k <= hi; ++k) {
        auto r = fn.run(k, oracle);
        if (!r) return std::nullopt;
        outputs.push_back(r->output);
        use = std::max(use, r->use);
    }
    return Computation{0, use};
}

// ---- shared helpers ---------------------------------------------------------------------

namespace {

// Position of every id in an order; -1 for ids not present.
std::vector<std::int64_t> positions(const std::vector<ElementId>& order) {
    ElementId top = 0;
    for (ElementId id : order) top = std::max(top, id + 1);
    std::vector<std::int64_t> pos(top, -1);
    for (std::size_t p = 0; p < order.size(); ++p) pos[order[p]] = static_cast<std::int64_t>(p);
    return pos;
}

// f^L indexed by id.
Oracle f_oracle(FView& fv, const std::vector<ElementId>& order) {
    const auto pos = positions(order);
    Oracle out(pos.size(), -1);
    const auto len = static_cast<std::int64_t>(order.size());
    for (std::size_t id = 0; id < pos.size(); ++id) {
        if (pos[id] < 0) continue;
        const std::int64_t v = fv.f(pos[id]);
        if (v < len) out[id] = static_cast<std::int64_t>(order[static_cast<std::size_t>(v)]);
    }
    return out;
}

Oracle bits_oracle(const std::vector<int>& bits) { return Oracle(bits.begin(), bits.end()); }

std::vector<std::int64_t> slice(const Oracle& o, std::int64_t hi) {
    std::vector<std::int64_t> out;
    for (std::int64_t k = 0; k <= hi; ++k) out.push_back(k < static_cast<std::int64_t>(o.size()) ? o[k] : -1);
    return out;
}

// Ends the copy at a block boundary, then appends one more block.
void grow_one_block(FView& fv, StageCopy& copy) {
    const std::int64_t len = copy.size();
    if (len > 0 && !fv.is_block_start(len)) {
        const PlacedBlock b = fv.block(len);
        copy.insert_run(len, b.interval.hi + 1 - len);
    }
    const PlacedBlock b = fv.block(copy.size());
    copy.insert_run(copy.size(), b.interval.size());
}

bool order_extends(const std::vector<ElementId>& before, const std::vector<ElementId>& after) {
    std::set<ElementId> seen;
    for (ElementId id : after) {
        if (!seen.insert(id).second) return false;
    }
    std::size_t k = 0;
    for (ElementId id : after) {
        if (k < before.size() && before[k] == id) ++k;
    }
    return k == before.size();
}

bool same_record(const PhaseRecord& a, const PhaseRecord& b) {
    return a.req == b.req && a.episode == b.episode && a.n == b.n && a.stage == b.stage && a.x == b.x &&
           a.u == b.u && a.v == b.v && a.m == b.m && a.restraint == b.restraint;
}

bool same_records(const std::vector<PhaseRecord>& a, const std::vector<PhaseRecord>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (!same_record(a[i], b[i])) return false;
    }
    return true;
}

nlohmann::ordered_json phase_json(const PhaseRecord& r) {
    nlohmann::ordered_json j;
    j["stage"] = r.stage;
    j["op"] = "phase";
    j["req"] = r.req;
    j["episode"] = r.episode;
    j["n"] = r.n;
    j["x"] = r.x;
    j["u"] = r.u;
    j["v"] = r.v;
    j["m"] = r.m;
    return j;
}

}  // namespace

std::vector<std::vector<PhaseRecord>> episodes(const std::vector<PhaseRecord>& phases) {
    std::map<std::pair<std::size_t, std::size_t>, std::vector<PhaseRecord>> by;
    for (const auto& r : phases) by[{r.req, r.episode}].push_back(r);
    std::vector<std::vector<PhaseRecord>> out;
    for (auto& [k, v] : by) out.push_back(std::move(v));
    return out;
}

std::vector<ElementId> RecordedStream::order_at(const DiagonalState& st) {
    if (st.stage >= orders_.size()) throw BlockError("recorded copy stream ran out of stages");
    return orders_[st.stage];
}

// ---- extraction and the stage lemma --------------------------------------------------

CodingSequence extract_weak(const BlockFunction& f, const std::vector<PhaseRecord>& episode,
                            const std::vector<std::vector<ElementId>>& orders) {
    FView fv(f);
    CodingSequence seq;
    seq.strength = Strength::Weak;
    std::vector<std::vector<std::int64_t>> pos;
    for (std::size_t i = 0; i < episode.size(); ++i) {
        const PhaseRecord& r = episode[i];
        const auto& order = orders.at(r.stage);
        pos.push_back(positions(order));
        const std::int64_t bound = i == 0 ? r.u : std::max(episode[i - 1].m, r.u);
        std::int64_t lo = -1, hi = -1;
        for (std::int64_t id = 0; id <= bound; ++id) {
            if (id >= static_cast<std::int64_t>(pos.back().size()) || pos.back()[id] < 0) {
                throw BlockError("extraction: id " + std::to_string(id) + " absent at stage " + std::to_string(r.stage));
            }
            const std::int64_t p = pos.back()[id];
            lo = lo < 0 ? p : std::min(lo, p);
            hi = std::max(hi, p);
        }
        Interval iv{i == 0 ? 0 : fv.block(lo).interval.lo, fv.block(hi).interval.hi};
        seq.intervals.push_back(iv);
        if (i > 0) {
            const Interval prev = seq.intervals[i - 1];
            const auto& prev_order = orders.at(episode[i - 1].stage);
            OrderMap m;
            m.domain = prev;
            for (std::int64_t p = prev.lo; p <= prev.hi; ++p) {
                if (p >= static_cast<std::int64_t>(prev_order.size())) throw BlockError("extraction: interval beyond the copy");
                const ElementId id = prev_order[static_cast<std::size_t>(p)];
                m.image.push_back(id < pos.back().size() ? pos.back()[id] : -1);
            }
            seq.maps.push_back(std::move(m));
        }
    }
    return seq;
}

std::vector<std::string> check_stage_lemma(const BlockFunction& f, const std::vector<PhaseRecord>& episode,
                                           const Delta02Approx& c,
                                           const std::vector<std::vector<ElementId>>& orders) {
    FView fv(f);
    std::vector<std::string> bad;
    std::vector<Oracle> fo;
    for (const auto& r : episode) fo.push_back(f_oracle(fv, orders.at(r.stage)));
    auto c_prefix = [&](std::uint64_t s, std::int64_t hi) {
        std::vector<int> out;
        for (std::int64_t x = 0; x <= hi && x < static_cast<std::int64_t>(c.x_bound); ++x) out.push_back(c.at(x, s));
        return out;
    };
    const std::string tag = "requirement " + std::to_string(episode.empty() ? 0 : episode[0].req);
    for (std::size_t a = 0; a < episode.size(); ++a) {
        for (std::size_t b = a + 2; b < episode.size(); b += 2) {
            if (c_prefix(episode[a].stage, episode[a].v) != c_prefix(episode[b].stage, episode[a].v)) {
                bad.push_back(tag + ": C prefix differs between phases " + std::to_string(a) + " and " + std::to_string(b));
            }
            if (slice(fo[a], episode[a].m) != slice(fo[b], episode[a].m)) {
                bad.push_back(tag + ": f prefix differs between phases " + std::to_string(a) + " and " + std::to_string(b));
            }
        }
        if (a + 1 < episode.size() && slice(fo[a], episode[a].u) == slice(fo[a + 1], episode[a].u)) {
            bad.push_back(tag + ": f prefix up to the use unchanged after phase " + std::to_string(a));
        }
    }
    return bad;
}

// ---- the construction against copies -------------------------------------------------

namespace {

struct ReqState {
    bool initialised = false;
    std::int64_t x = -1;
    std::size_t episode = 0;
    std::size_t phase = 0;
    std::int64_t m_prev = -1;
    std::uint64_t last_injury = 0;
};

struct Attention {
    std::int64_t u = 0, v = 0, m = 0;
};

std::optional<Attention> attention(FView& fv, const Functional& phi, const Functional& psi, const ReqState& st,
                                   const std::vector<ElementId>& order, const std::vector<int>& c_col) {
    const Oracle fo = f_oracle(fv, order);
    auto r1 = phi.run(st.x, fo);
    if (!r1 || r1->output != c_col.at(static_cast<std::size_t>(st.x))) return std::nullopt;
    const std::int64_t bound = std::max(st.m_prev, r1->use);
    const auto pos = positions(order);
    std::int64_t top = -1;
    for (std::int64_t id = 0; id <= bound; ++id) {
        if (id >= static_cast<std::int64_t>(pos.size()) || pos[id] < 0) return std::nullopt;
        top = std::max(top, pos[id]);
    }
    std::int64_t hi = top < 0 ? -1 : fv.block(top).interval.hi;
    if (hi >= static_cast<std::int64_t>(order.size())) return std::nullopt;
    std::int64_t m = bound;
    for (std::int64_t p = 0; p <= hi; ++p) m = std::max(m, static_cast<std::int64_t>(order[static_cast<std::size_t>(p)]));
    std::vector<std::int64_t> outs;
    auto r2 = run_prefix(psi, m, bits_oracle(c_col), outs);
    if (!r2) return std::nullopt;
    for (std::int64_t k = 0; k <= m; ++k) {
        if (k >= static_cast<std::int64_t>(fo.size()) || fo[k] < 0 || outs[k] != fo[k]) return std::nullopt;
    }
    return Attention{r1->use, r2->use, m};
}

}  // namespace

CopiesRun diagonalize_against_copies(const BlockFunction& f, std::vector<CopyStream*> copies,
                                     std::vector<const Functional*> phis, std::vector<const Functional*> psis,
                                     std::vector<Requirement> reqs, const DiagonalOptions& opt) {
    std::sort(reqs.begin(), reqs.end());
    for (const auto& r : reqs) {
        if (r.target >= copies.size() || r.phi >= phis.size() || r.psi >= psis.size()) {
            throw BlockError("requirement refers to a missing copy or functional");
        }
    }
    FView fv(f);
    const std::size_t S = opt.stages;
    CopiesRun run;
    run.requirements = reqs;
    run.c = Delta02Approx::zeros(S + 2, S);
    run.orders.assign(copies.size(), {});
    std::vector<ReqState> st(reqs.size());
    std::vector<bool> broken(copies.size(), false);
    std::vector<std::string> broken_note(copies.size());
    std::int64_t used_max = -1;

    auto column = [&](std::uint64_t s) {
        std::vector<int> col;
        for (std::size_t x = 0; x < run.c.x_bound; ++x) col.push_back(run.c.at(x, s));
        return col;
    };

    for (std::uint64_t s = 0; s <= S; ++s) {
        DiagonalState view;
        view.stage = s;
        view.c = column(s);
        for (const auto& q : st) {
            view.x_of.push_back(q.initialised ? q.x : -1);
            view.episode_of.push_back(q.episode);
            view.phase_of.push_back(q.phase);
        }
        for (std::size_t e = 0; e < copies.size(); ++e) {
            auto order = copies[e]->order_at(view);
            if (!broken[e] && !run.orders[e].empty() && !order_extends(run.orders[e].back(), order)) {
                broken[e] = true;
                broken_note[e] = "copy " + std::to_string(e) + " is not a growing linear order at stage " + std::to_string(s);
            }
            run.orders[e].push_back(std::move(order));
        }
        if (s == S) break;

        const std::size_t considered = std::min<std::size_t>(reqs.size(), s);
        int act = -1;
        Attention found;
        for (std::size_t k = 0; k < considered && act < 0; ++k) {
            if (!st[k].initialised || broken[reqs[k].target]) continue;
            if (auto a = attention(fv, *phis[reqs[k].phi], *psis[reqs[k].psi], st[k], run.orders[reqs[k].target][s],
                                   view.c)) {
                act = static_cast<int>(k);
                found = *a;
            }
        }
        for (std::size_t x = 0; x < run.c.x_bound; ++x) run.c.g[x][s + 1] = run.c.g[x][s];
        if (act >= 0) {
            ReqState& q = st[static_cast<std::size_t>(act)];
            PhaseRecord rec;
            rec.req = static_cast<std::size_t>(act);
            rec.episode = q.episode;
            rec.n = q.phase;
            rec.stage = s;
            rec.x = q.x;
            rec.u = found.u;
            rec.v = found.v;
            rec.m = found.m;
            for (std::int64_t y = 0; y <= found.v && y < static_cast<std::int64_t>(view.c.size()); ++y) {
                rec.restraint.push_back(view.c[static_cast<std::size_t>(y)]);
            }
            run.phases.push_back(rec);
            auto& cell = run.c.g[static_cast<std::size_t>(q.x)][s + 1];
            cell = static_cast<std::uint8_t>(1 - cell);
            q.phase += 1;
            q.m_prev = found.m;
            used_max = std::max(used_max, found.v);
            for (std::size_t k = static_cast<std::size_t>(act) + 1; k < st.size(); ++k) {
                if (st[k].initialised) {
                    st[k].initialised = false;
                    st[k].last_injury = s + 1;
                }
            }
        } else {
            for (std::size_t k = 0; k < considered; ++k) {
                if (st[k].initialised) continue;
                if (used_max + 1 >= static_cast<std::int64_t>(run.c.x_bound)) break;
                st[k].initialised = true;
                st[k].x = ++used_max;
                st[k].episode += 1;
                st[k].phase = 0;
                st[k].m_prev = -1;
                break;
            }
        }
    }

    const auto final_col = column(S);
    std::size_t changes = 0;
    for (std::size_t x = 0; x < run.c.x_bound; ++x) changes = std::max(changes, run.c.changes(x));
    run.c.budget = changes;
    run.c.settle_stage = 0;
    for (const auto& r : run.phases) run.c.settle_stage = std::max<std::size_t>(run.c.settle_stage, r.stage + 1);

    for (std::size_t k = 0; k < reqs.size(); ++k) {
        RequirementOutcome o;
        o.req = reqs[k];
        o.episode = st[k].episode;
        o.x = st[k].initialised ? st[k].x : -1;
        o.last_injury = st[k].last_injury;
        o.initialised = st[k].initialised;
        o.phases = st[k].initialised ? st[k].phase + 1 : 0;
        o.target_broken = broken[reqs[k].target];
        o.note = broken_note[reqs[k].target];
        o.satisfied = o.target_broken || !st[k].initialised ||
                      !attention(fv, *phis[reqs[k].phi], *psis[reqs[k].psi], st[k], run.orders[reqs[k].target][S],
                                 final_col);
        run.outcomes.push_back(o);
    }

    auto eps = episodes(run.phases);
    run.extracted.assign(reqs.size(), {});
    for (const auto& ep : eps) {
        const auto& orders = run.orders[reqs[ep[0].req].target];
        auto bad = check_stage_lemma(f, ep, run.c, orders);
        run.lemma_violations.insert(run.lemma_violations.end(), bad.begin(), bad.end());
        if (ep[0].episode == st[ep[0].req].episode) run.extracted[ep[0].req] = extract_weak(f, ep, orders);
    }
    return run;
}

std::vector<std::string> CopiesRun::records(const std::string& config_hash) const {
    std::vector<std::string> out;
    nlohmann::ordered_json h;
    h["record"] = "header";
    h["tool"] = kToolVersion;
    h["config_hash"] = config_hash;
    h["construction"] = "copies";
    h["requirements"] = requirements.size();
    h["stages"] = c.s_bound;
    out.push_back(h.dump());
    for (const auto& r : phases) out.push_back(phase_json(r).dump());
    for (std::size_t k = 0; k < outcomes.size(); ++k) {
        const auto& o = outcomes[k];
        nlohmann::ordered_json j;
        j["op"] = "outcome";
        j["req"] = k;
        j["target"] = o.req.target;
        j["phi"] = o.req.phi;
        j["psi"] = o.req.psi;
        j["x"] = o.x;
        j["phases"] = o.phases;
        j["last_injury"] = o.last_injury;
        j["satisfied"] = o.satisfied;
        j["extracted_length"] = k < extracted.size() ? extracted[k].length() : 0;
        out.push_back(j.dump());
    }
    return out;
}

// ---- tracking adversary ---------------------------------------------------------------

struct TrackingAdversary::Impl {
    struct Track {
        std::int64_t x = -1;
        std::size_t episode = 0;
        CodingSequence cs;
        std::size_t index = 1;
        int bit = 0;
        std::vector<ElementId> initial;
        std::vector<ElementId> segment;
        std::vector<std::int64_t> even, odd;
    };

    class Phi : public Functional {
    public:
        explicit Phi(const Impl& a) : a_(a) {}
        std::string id() const override { return "phi" + std::to_string(a_.req); }
        std::optional<Computation> run(std::int64_t input, const Oracle& oracle) const override {
            for (const auto& t : a_.tracks) {
                if (t.x != input) continue;
                const auto use = static_cast<std::int64_t>(*std::max_element(t.initial.begin(), t.initial.end()));
                if (use >= static_cast<std::int64_t>(oracle.size())) return std::nullopt;
                std::vector<std::int64_t> vals;
                for (ElementId id : t.initial) vals.push_back(oracle[id]);
                if (vals == t.even) return Computation{0, use};
                if (!t.odd.empty() && vals == t.odd) return Computation{1, use};
                return std::nullopt;
            }
            return std::nullopt;
        }

    private:
        const Impl& a_;
    };

    class Psi : public Functional {
    public:
        explicit Psi(const Impl& a) : a_(a) {}
        std::string id() const override { return "psi" + std::to_string(a_.req); }
        std::optional<Computation> run(std::int64_t input, const Oracle& oracle) const override {
            if (input < 0 || input >= static_cast<std::int64_t>(a_.current.size())) return std::nullopt;
            const std::int64_t v = a_.current[static_cast<std::size_t>(input)];
            if (v < 0) return std::nullopt;
            auto it = a_.owner.find(static_cast<ElementId>(input));
            if (it == a_.owner.end()) return Computation{v, -1};
            const Track& t = a_.tracks[it->second];
            if (t.x >= static_cast<std::int64_t>(oracle.size()) || oracle[t.x] != t.bit) return std::nullopt;
            return Computation{v, t.x};
        }

    private:
        const Impl& a_;
    };

    Impl(const BlockFunction& f, std::size_t req, std::size_t depth, std::size_t blocks, std::size_t horizon)
        : f(f), fv(f), req(req), depth(depth), tree_blocks(blocks), horizon(horizon), phi(*this), psi(*this) {}

    const BlockFunction& f;
    FView fv;
    std::size_t req;
    std::size_t depth, tree_blocks, horizon;
    StageCopy copy;
    std::vector<Track> tracks;
    std::map<ElementId, std::size_t> owner;
    Oracle current;
    std::map<std::size_t, NFTree> trees;
    std::size_t longest = 0;
    Phi phi;
    Psi psi;

    const NFTree& tree(std::size_t blocks) {
        auto it = trees.find(blocks);
        if (it == trees.end()) it = trees.emplace(blocks, normal_form_tree(f, depth, blocks, Strength::Strong)).first;
        return it->second;
    }

    // Longest strong normal-form sequence whose first interval starts at or above `from`.
    CodingSequence choose(std::int64_t from) {
        for (std::size_t blocks = tree_blocks; blocks <= 4 * tree_blocks; blocks *= 2) {
            const NFTree& t = tree(blocks);
            std::optional<CodingSequence> best;
            for (std::size_t id = 1; id < t.nodes.size(); ++id) {
                int root = static_cast<int>(id);
                while (t.nodes[root].parent > 0) root = t.nodes[root].parent;
                if (t.nodes[root].last.lo < from) continue;
                if (best && t.nodes[id].length < best->length()) continue;
                CodingSequence s = t.sequence(static_cast<int>(id));
                if (!best || s.length() > best->length() || canonical_less(s, *best)) best = std::move(s);
            }
            if (best && best->length() >= 2) return *best;
        }
        CodingSequence one;
        one.strength = Strength::Strong;
        PlacedBlock b = fv.block(from);
        if (b.interval.lo < from) b = fv.block(b.interval.hi + 1);
        one.intervals.push_back(b.interval);
        return one;
    }

    std::vector<std::int64_t> values_on(const std::vector<ElementId>& ids) {
        std::vector<std::int64_t> out;
        for (ElementId id : ids) {
            auto v = f_at_stage(fv, copy, id);
            out.push_back(v ? static_cast<std::int64_t>(*v) : -1);
        }
        return out;
    }

    void start(std::int64_t x, std::size_t episode) {
        Track t;
        t.x = x;
        t.episode = episode;
        t.cs = choose(copy.size());
        longest = std::max(longest, t.cs.length());
        const Interval first = t.cs.intervals[0];
        copy.insert_run(copy.size(), first.lo - copy.size());
        t.initial = copy.insert_run(first.lo, first.size());
        t.segment = t.initial;
        for (ElementId id : t.initial) owner[id] = tracks.size();
        t.even = values_on(t.initial);
        tracks.push_back(std::move(t));
    }

    void move(Track& t) {
        const std::size_t ti = static_cast<std::size_t>(&t - tracks.data());
        const Interval cur = t.cs.intervals[t.index - 1];
        const Interval next = t.cs.intervals[t.index];
        const OrderMap& phi_map = t.cs.maps[t.index - 1];
        struct Above {
            std::vector<ElementId> ids;
            TypeRef type;
        };
        std::vector<Above> above;
        for (std::int64_t p = cur.hi + 1; p < copy.size();) {
            const PlacedBlock b = fv.block(p);
            Above a{{}, b.type};
            for (std::int64_t z = b.interval.lo; z <= b.interval.hi && z < copy.size(); ++z) a.ids.push_back(copy.at(z));
            if (static_cast<int>(a.ids.size()) == b.type->size()) above.push_back(std::move(a));
            p = b.interval.hi + 1;
        }
        std::vector<std::int64_t> tgt;
        for (std::int64_t z = cur.lo; z <= cur.hi; ++z) tgt.push_back(phi_map(z));
        auto coding = [&](const std::vector<ElementId>& ids) {
            for (ElementId id : ids) owner[id] = ti;
        };
        copy.insert_run(cur.lo, next.lo - cur.lo);
        coding(copy.insert_run(next.lo, tgt.front() - next.lo));
        for (std::size_t i = 0; i + 1 < t.segment.size(); ++i) {
            coding(copy.insert_run(copy.pi(t.segment[i]) + 1, tgt[i + 1] - tgt[i] - 1));
        }
        coding(copy.insert_run(copy.pi(t.segment.back()) + 1, next.hi - tgt.back()));
        t.segment.clear();
        for (std::int64_t z = next.lo; z <= next.hi; ++z) t.segment.push_back(copy.at(z));
        for (const auto& a : above) {
            const std::int64_t at = copy.pi(a.ids.front());
            restore_block(fv, copy, a.ids, *a.type, at - 1, horizon);
        }
        t.index += 1;
        t.bit ^= 1;
        if (t.odd.empty()) t.odd = values_on(t.initial);
    }

    std::vector<ElementId> stage(const DiagonalState& st) {
        copy.next_stage();
        const std::int64_t x = st.x_of.at(req);
        if (x >= 0 && (tracks.empty() || tracks.back().episode != st.episode_of.at(req))) {
            start(x, st.episode_of.at(req));
        } else if (x >= 0 && !tracks.empty()) {
            Track& t = tracks.back();
            if (st.c.at(static_cast<std::size_t>(t.x)) != t.bit && t.index < t.cs.length()) move(t);
        }
        grow_one_block(fv, copy);
        current = f_oracle(fv, copy.order());
        return copy.order();
    }
};

TrackingAdversary::TrackingAdversary(const BlockFunction& f, std::size_t req, std::size_t depth,
                                     std::size_t tree_blocks, std::size_t horizon_blocks)
    : impl_(std::make_unique<Impl>(f, req, depth, tree_blocks, horizon_blocks)) {}
TrackingAdversary::~TrackingAdversary() = default;
std::vector<ElementId> TrackingAdversary::order_at(const DiagonalState& st) { return impl_->stage(st); }
const Functional& TrackingAdversary::phi() const { return impl_->phi; }
const Functional& TrackingAdversary::psi() const { return impl_->psi; }
std::size_t TrackingAdversary::longest_used() const { return impl_->longest; }

ReplayReport diagonalize_with_replay(const BlockFunction& f, std::size_t requirements, const DiagonalOptions& opt,
                                     std::size_t depth, std::size_t tree_blocks) {
    ReplayReport rep;
    std::vector<std::unique_ptr<TrackingAdversary>> adv;
    std::vector<std::unique_ptr<RecordingFunctional>> rphi, rpsi;
    std::vector<CopyStream*> copies;
    std::vector<const Functional*> phis, psis;
    std::vector<Requirement> reqs;
    for (std::size_t k = 0; k < requirements; ++k) {
        adv.push_back(std::make_unique<TrackingAdversary>(f, k, depth, tree_blocks, opt.horizon_blocks));
        rphi.push_back(std::make_unique<RecordingFunctional>(adv.back()->phi()));
        rpsi.push_back(std::make_unique<RecordingFunctional>(adv.back()->psi()));
        copies.push_back(adv.back().get());
        phis.push_back(rphi.back().get());
        psis.push_back(rpsi.back().get());
        reqs.push_back({k, k, k});
    }
    rep.live = diagonalize_against_copies(f, copies, phis, psis, reqs, opt);
    for (std::size_t k = 0; k < requirements; ++k) {
        rep.phis.push_back(rphi[k]->table());
        rep.psis.push_back(rpsi[k]->table());
        for (const auto* r : {rphi[k].get(), rpsi[k].get()}) {
            rep.conflicts.insert(rep.conflicts.end(), r->conflicts().begin(), r->conflicts().end());
        }
    }
    std::vector<std::unique_ptr<RecordedStream>> streams;
    std::vector<CopyStream*> copies2;
    std::vector<const Functional*> phis2, psis2;
    for (std::size_t k = 0; k < requirements; ++k) {
        streams.push_back(std::make_unique<RecordedStream>(rep.live.orders[k]));
        copies2.push_back(streams.back().get());
        phis2.push_back(&rep.phis[k]);
        psis2.push_back(&rep.psis[k]);
    }
    rep.replay = diagonalize_against_copies(f, copies2, phis2, psis2, reqs, opt);
    rep.coherent = rep.conflicts.empty() && same_records(rep.live.phases, rep.replay.phases) &&
                   rep.live.c.g == rep.replay.c.g;
    return rep;
}

// ---- listing variant ---------------------------------------------------------------

std::vector<int> RecordedListing::column_at(std::uint64_t stage, const std::vector<ElementId>&,
                                            const std::vector<std::vector<ElementId>>&) {
    if (stage > x_.s_bound) throw BlockError("recorded listing ran out of stages");
    std::vector<int> col;
    for (std::size_t x = 0; x < x_.x_bound; ++x) col.push_back(x_.at(x, stage));
    return col;
}

namespace {

struct Restrained {
    std::vector<ElementId> ids;
    TypeRef type;
    std::vector<std::int64_t> values;
};

struct ListReq {
    bool initialised = false;
    std::size_t episode = 0;
    std::size_t phase = 0;
    std::vector<ElementId> reserved;
    TypeRef reserved_type;
    std::vector<Restrained> restrained;
    std::uint64_t last_injury = 0;
};

std::vector<std::int64_t> values_of(FView& fv, const StageCopy& copy, const std::vector<ElementId>& ids) {
    std::vector<std::int64_t> out;
    for (ElementId id : ids) {
        auto v = f_at_stage(fv, copy, id);
        out.push_back(v ? static_cast<std::int64_t>(*v) : -1);
    }
    return out;
}

bool one_block(FView& fv, const StageCopy& copy, const std::vector<ElementId>& ids) {
    const PlacedBlock b = fv.block(copy.pi(ids.front()));
    return b.interval.lo == copy.pi(ids.front()) && b.interval.hi == copy.pi(ids.back());
}

struct ListAttention {
    std::int64_t u = 0, v = 0;
};

std::optional<ListAttention> list_attention(FView& fv, const StageCopy& copy, const Functional& phi,
                                            const Functional& psi, const ListReq& q, const std::vector<int>& x) {
    const Oracle fo = f_oracle(fv, copy.order());
    const Oracle xo = bits_oracle(x);
    std::int64_t u = -1;
    for (ElementId l : q.reserved) {
        auto r = phi.run(static_cast<std::int64_t>(l), xo);
        if (!r || r->output != fo[l]) return std::nullopt;
        u = std::max(u, r->use);
    }
    if (u >= static_cast<std::int64_t>(x.size())) return std::nullopt;
    std::vector<std::int64_t> outs;
    auto r2 = run_prefix(psi, u, fo, outs);
    if (!r2) return std::nullopt;
    for (std::int64_t y = 0; y <= u; ++y) {
        if (outs[y] != x[static_cast<std::size_t>(y)]) return std::nullopt;
    }
    return ListAttention{u, r2->use};
}

}  // namespace

ListingRun diagonalize_against_listing(const BlockFunction& f, std::vector<ListingStream*> listing,
                                       std::vector<const Functional*> phis, std::vector<const Functional*> psis,
                                       std::vector<Requirement> reqs, const DiagonalOptions& opt) {
    std::sort(reqs.begin(), reqs.end());
    for (const auto& r : reqs) {
        if (r.target >= listing.size() || r.phi >= phis.size() || r.psi >= psis.size()) {
            throw BlockError("requirement refers to a missing listing entry or functional");
        }
    }
    FView fv(f);
    StageCopy copy;
    ListingRun run;
    run.requirements = reqs;
    run.x.assign(listing.size(), {});
    std::vector<ListReq> st(reqs.size());
    const std::size_t S = opt.stages;

    for (std::uint64_t s = 0; s <= S; ++s) {
        if (s > 0) copy.next_stage();
        std::vector<std::vector<ElementId>> reserved;
        for (const auto& q : st) reserved.push_back(q.initialised ? q.reserved : std::vector<ElementId>{});
        for (std::size_t e = 0; e < listing.size(); ++e) run.x[e].push_back(listing[e]->column_at(s, copy.order(), reserved));
        if (s == S) {
            run.orders.push_back(copy.order());
            break;
        }

        const std::size_t considered = std::min<std::size_t>(reqs.size(), s);
        int act = -1;
        ListAttention found;
        for (std::size_t k = 0; k < considered && act < 0; ++k) {
            if (!st[k].initialised) continue;
            if (auto a = list_attention(fv, copy, *phis[reqs[k].phi], *psis[reqs[k].psi], st[k],
                                        run.x[reqs[k].target][s])) {
                act = static_cast<int>(k);
                found = *a;
            }
        }
        run.orders.push_back(copy.order());
        if (act >= 0) {
            ListReq& q = st[static_cast<std::size_t>(act)];
            PhaseRecord rec;
            rec.req = static_cast<std::size_t>(act);
            rec.episode = q.episode;
            rec.n = q.phase;
            rec.stage = s;
            rec.u = found.u;
            rec.v = found.v;
            rec.restraint.assign(q.reserved.begin(), q.reserved.end());
            run.phases.push_back(rec);
            if (q.phase == 0) {
                // Blocks holding or lying below an element of the use, other than the reserved one.
                std::int64_t top = -1;
                for (std::int64_t id = 0; id <= found.v; ++id) {
                    if (copy.contains(static_cast<ElementId>(id))) top = std::max(top, copy.pi(static_cast<ElementId>(id)));
                }
                const std::int64_t own = copy.pi(q.reserved.front());
                for (std::int64_t p = 0; p <= top && p < copy.size();) {
                    const PlacedBlock b = fv.block(p);
                    if (b.interval.lo != own && b.interval.hi < copy.size()) {
                        Restrained r{{}, b.type, {}};
                        for (std::int64_t z = b.interval.lo; z <= b.interval.hi; ++z) r.ids.push_back(copy.at(z));
                        r.values = values_of(fv, copy, r.ids);
                        q.restrained.push_back(std::move(r));
                    }
                    p = b.interval.hi + 1;
                }
            }
            if (q.phase % 2 == 0) {
                std::size_t guard = 0;
                do {
                    if (++guard > opt.horizon_blocks) throw BlockError("reserved block cannot be split");
                    copy.insert(copy.pi(q.reserved.front()));
                } while (one_block(fv, copy, q.reserved));
            } else {
                restore_block(fv, copy, q.reserved, *q.reserved_type, copy.pi(q.reserved.front()) - 1, opt.horizon_blocks);
            }
            for (auto& r : q.restrained) {
                if (values_of(fv, copy, r.ids) != r.values) {
                    restore_block(fv, copy, r.ids, *r.type, copy.pi(r.ids.front()) - 1, opt.horizon_blocks);
                }
            }
            q.phase += 1;
            for (std::size_t k = static_cast<std::size_t>(act) + 1; k < st.size(); ++k) {
                if (st[k].initialised) {
                    st[k].initialised = false;
                    st[k].last_injury = s + 1;
                }
            }
        } else {
            for (std::size_t k = 0; k < considered; ++k) {
                if (st[k].initialised) continue;
                grow_one_block(fv, copy);
                PlacedBlock b = fv.block(copy.size());
                while (b.interval.size() < 2) {
                    copy.insert_run(copy.size(), b.interval.size());
                    if (b.block_index > opt.horizon_blocks) throw BlockError("no block of size two or more within horizon");
                    b = fv.block(copy.size());
                }
                ListReq& q = st[k];
                q = ListReq{true, q.episode + 1, 0, copy.insert_run(b.interval.lo, b.interval.size()), b.type, {}, q.last_injury};
                break;
            }
        }
        grow_one_block(fv, copy);
    }
    run.inserts = copy.history();

    // Outcomes, reserved-value pattern and the listing lemma.
    for (std::size_t k = 0; k < reqs.size(); ++k) {
        RequirementOutcome o;
        o.req = reqs[k];
        o.episode = st[k].episode;
        o.last_injury = st[k].last_injury;
        o.initialised = st[k].initialised;
        o.phases = st[k].initialised ? st[k].phase + 1 : 0;
        o.satisfied = !st[k].initialised ||
                      !list_attention(fv, copy, *phis[reqs[k].phi], *psis[reqs[k].psi], st[k], run.x[reqs[k].target][S]);
        run.outcomes.push_back(o);
    }
    for (const auto& ep : episodes(run.phases)) {
        const std::string tag = "requirement " + std::to_string(ep[0].req);
        const auto& ids = ep[0].restraint;
        std::vector<std::vector<std::int64_t>> vals;
        for (const auto& r : ep) {
            const Oracle fo = f_oracle(fv, run.orders[r.stage]);
            std::vector<std::int64_t> v;
            for (ElementId id : ids) v.push_back(fo[id]);
            vals.push_back(v);
        }
        const auto& xs = run.x[reqs[ep[0].req].target];
        auto xpre = [&](std::uint64_t s) {
            std::vector<int> out;
            for (std::int64_t y = 0; y <= ep[0].u; ++y) out.push_back(xs[s].at(static_cast<std::size_t>(y)));
            return out;
        };
        for (std::size_t n = 1; n < ep.size(); ++n) {
            if ((n % 2 == 0) != (vals[n] == vals[0])) {
                run.violations.push_back(tag + ": reserved values break the even/odd pattern at phase " + std::to_string(n));
            }
            if (n % 2 == 0 && xpre(ep[n].stage) != xpre(ep[0].stage)) {
                run.violations.push_back(tag + ": listing prefix differs at even phase " + std::to_string(n));
            }
            if (xpre(ep[n].stage) == xpre(ep[n - 1].stage)) {
                run.violations.push_back(tag + ": listing prefix unchanged entering phase " + std::to_string(n));
            }
        }
    }
    return run;
}

std::vector<std::string> ListingRun::records(const std::string& config_hash) const {
    std::vector<std::string> out;
    nlohmann::ordered_json h;
    h["record"] = "header";
    h["tool"] = kToolVersion;
    h["config_hash"] = config_hash;
    h["construction"] = "listing";
    h["requirements"] = requirements.size();
    h["stages"] = orders.empty() ? 0 : orders.size() - 1;
    out.push_back(h.dump());
    std::size_t ph = 0;
    for (const auto& r : inserts) {
        while (ph < phases.size() && phases[ph].stage < r.stage) out.push_back(phase_json(phases[ph++]).dump());
        out.push_back(insert_event(r));
    }
    while (ph < phases.size()) out.push_back(phase_json(phases[ph++]).dump());
    for (std::size_t k = 0; k < outcomes.size(); ++k) {
        nlohmann::ordered_json j;
        j["op"] = "outcome";
        j["req"] = k;
        j["phases"] = outcomes[k].phases;
        j["last_injury"] = outcomes[k].last_injury;
        j["satisfied"] = outcomes[k].satisfied;
        out.push_back(j.dump());
    }
    return out;
}

// ---- parity listing adversary --------------------------------------------------------

struct ParityListing::Impl {
    // One per reserved block watched; the parity point flips with the block,
    // marker points name the split configurations.
    struct Track {
        std::vector<ElementId> ids;
        std::int64_t parity = 0;
        std::vector<std::int64_t> even;
        std::vector<std::vector<std::int64_t>> odd;
        std::vector<std::int64_t> markers;  // one more than odd configurations
    };

    class Phi : public Functional {
    public:
        explicit Phi(const Impl& a) : a_(a) {}
        std::string id() const override { return "listing-phi" + std::to_string(a_.req); }
        std::optional<Computation> run(std::int64_t input, const Oracle& x) const override {
            for (const auto& t : a_.tracks) {
                auto it = std::find(t.ids.begin(), t.ids.end(), static_cast<ElementId>(input));
                if (it == t.ids.end()) continue;
                const auto slot = static_cast<std::size_t>(it - t.ids.begin());
                if (t.parity >= static_cast<std::int64_t>(x.size())) return std::nullopt;
                if (x[t.parity] == 0) return Computation{t.even[slot], t.parity};
                for (std::size_t k = 0; k < t.odd.size(); ++k) {
                    const std::int64_t here = t.markers[k], next = t.markers[k + 1];
                    if (next >= static_cast<std::int64_t>(x.size())) return std::nullopt;
                    if (x[here] == 1 && x[next] == 0) return Computation{t.odd[k][slot], next};
                }
                return std::nullopt;
            }
            return std::nullopt;
        }

    private:
        const Impl& a_;
    };

    class Psi : public Functional {
    public:
        explicit Psi(const Impl& a) : a_(a) {}
        std::string id() const override { return "listing-psi" + std::to_string(a_.req); }
        std::optional<Computation> run(std::int64_t input, const Oracle& fo) const override {
            for (const auto& t : a_.tracks) {
                const auto use = static_cast<std::int64_t>(t.ids.back());
                auto read = [&]() -> std::optional<std::vector<std::int64_t>> {
                    if (use >= static_cast<std::int64_t>(fo.size())) return std::nullopt;
                    std::vector<std::int64_t> v;
                    for (ElementId id : t.ids) v.push_back(fo[id]);
                    return v;
                };
                if (input == t.parity) {
                    auto v = read();
                    if (!v) return std::nullopt;
                    return Computation{*v == t.even ? 0 : 1, use};
                }
                for (std::size_t k = 0; k < t.markers.size(); ++k) {
                    if (input != t.markers[k]) continue;
                    auto v = read();
                    if (!v) return std::nullopt;
                    // Marker k is set once configuration k has been seen.
                    std::size_t seen = t.odd.size();
                    for (std::size_t j = 0; j < t.odd.size(); ++j) {
                        if (*v == t.odd[j]) seen = j + 1;
                    }
                    return Computation{k < seen ? 1 : 0, use};
                }
            }
            return Computation{0, -1};
        }

    private:
        const Impl& a_;
    };

    Impl(const BlockFunction& f, std::size_t req, std::int64_t point, std::size_t width, std::size_t budget)
        : fv(f), req(req), next_point(point), budget(budget), x(width, 0), phi(*this), psi(*this) {}

    FView fv;
    std::size_t req;
    std::int64_t next_point;
    std::size_t budget;
    std::size_t used = 0;
    std::vector<int> x;
    std::vector<Track> tracks;
    Phi phi;
    Psi psi;

    std::optional<std::int64_t> fresh() {
        if (next_point >= static_cast<std::int64_t>(x.size())) return std::nullopt;
        return next_point++;
    }

    std::vector<int> column(const std::vector<ElementId>& order, const std::vector<std::vector<ElementId>>& reserved) {
        const auto& ids = reserved.at(req);
        if (ids.empty()) return x;
        const Oracle fo = f_oracle(fv, order);
        std::vector<std::int64_t> vals;
        for (ElementId id : ids) vals.push_back(fo[id]);
        if (tracks.empty() || tracks.back().ids != ids) {
            auto p = fresh();
            auto m = fresh();
            if (!p || !m) return x;
            tracks.push_back({ids, *p, vals, {}, {*m}});
            return x;
        }
        Track& t = tracks.back();
        int want = 0;
        std::optional<std::size_t> config;
        if (vals != t.even) {
            want = 1;
            for (std::size_t k = 0; k < t.odd.size(); ++k) {
                if (t.odd[k] == vals) config = k;
            }
        }
        if (want == x[static_cast<std::size_t>(t.parity)]) return x;
        if (used >= budget) return x;
        if (want == 1 && !config) {
            auto m = fresh();
            if (!m) return x;
            t.odd.push_back(vals);
            t.markers.push_back(*m);
            config = t.odd.size() - 1;
        }
        if (want == 1) x[static_cast<std::size_t>(t.markers[*config])] = 1;
        x[static_cast<std::size_t>(t.parity)] = want;
        ++used;
        return x;
    }
};

ParityListing::ParityListing(const BlockFunction& f, std::size_t req, std::int64_t point, std::size_t width,
                             std::size_t budget)
    : impl_(std::make_unique<Impl>(f, req, point, width, budget)) {}
ParityListing::~ParityListing() = default;
std::vector<int> ParityListing::column_at(std::uint64_t, const std::vector<ElementId>& order,
                                          const std::vector<std::vector<ElementId>>& reserved) {
    return impl_->column(order, reserved);
}
const Functional& ParityListing::phi() const { return impl_->phi; }
const Functional& ParityListing::psi() const { return impl_->psi; }

ListingReplayReport diagonalize_listing_with_replay(const BlockFunction& f, std::size_t requirements,
                                                    std::size_t budget, const DiagonalOptions& opt) {
    ListingReplayReport rep;
    const std::size_t width = 4 * budget + 8;
    std::vector<std::unique_ptr<ParityListing>> adv;
    std::vector<std::unique_ptr<RecordingFunctional>> rphi, rpsi;
    std::vector<ListingStream*> lists;
    std::vector<const Functional*> phis, psis;
    std::vector<Requirement> reqs;
    for (std::size_t k = 0; k < requirements; ++k) {
        adv.push_back(std::make_unique<ParityListing>(f, k, 0, width, budget));
        rphi.push_back(std::make_unique<RecordingFunctional>(adv.back()->phi()));
        rpsi.push_back(std::make_unique<RecordingFunctional>(adv.back()->psi()));
        lists.push_back(adv.back().get());
        phis.push_back(rphi.back().get());
        psis.push_back(rpsi.back().get());
        reqs.push_back({k, k, k});
    }
    rep.live = diagonalize_against_listing(f, lists, phis, psis, reqs, opt);
    std::vector<TableFunctional> tphi, tpsi;
    for (std::size_t k = 0; k < requirements; ++k) {
        tphi.push_back(rphi[k]->table());
        tpsi.push_back(rpsi[k]->table());
        for (const auto* r : {rphi[k].get(), rpsi[k].get()}) {
            rep.conflicts.insert(rep.conflicts.end(), r->conflicts().begin(), r->conflicts().end());
        }
    }
    std::vector<std::unique_ptr<RecordedListing>> recorded;
    std::vector<ListingStream*> lists2;
    std::vector<const Functional*> phis2, psis2;
    for (std::size_t k = 0; k < requirements; ++k) {
        Delta02Approx a = Delta02Approx::zeros(width, opt.stages);
        for (std::size_t s = 0; s <= opt.stages; ++s) {
            for (std::size_t y = 0; y < width; ++y) a.g[y][s] = static_cast<std::uint8_t>(rep.live.x[k][s][y]);
        }
        recorded.push_back(std::make_unique<RecordedListing>(std::move(a)));
        lists2.push_back(recorded.back().get());
        phis2.push_back(&tphi[k]);
        psis2.push_back(&tpsi[k]);
    }
    rep.replay = diagonalize_against_listing(f, lists2, phis2, psis2, reqs, opt);
    rep.coherent = rep.conflicts.empty() && same_records(rep.live.phases, rep.replay.phases) &&
                   rep.live.orders == rep.replay.orders;
    return rep;
}

// ---- alpha-c.e. variant ---------------------------------------------------------------

namespace {

std::optional<int> located_rank(const BlockFunction& f, const CodingSequence& seq, const NFTree& tree,
                                const TreeRank& ranks) {
    FView fv(f);
    std::optional<int> best;
    const Interval first = seq.intervals.at(0);
    for (std::int64_t p = first.lo; p <= first.hi;) {
        const PlacedBlock b = fv.block(p);
        p = b.interval.hi + 1;
        CodingSequence nf;
        nf.strength = Strength::Weak;
        nf.intervals.push_back(b.interval);
        for (std::size_t i = 0; i < seq.maps.size(); ++i) {
            OrderMap m = seq.maps[i].restrict(nf.intervals.back());
            const auto [lo, hi] = std::minmax_element(m.image.begin(), m.image.end());
            nf.intervals.push_back({fv.block(*lo).interval.lo, fv.block(*hi).interval.hi});
            nf.maps.push_back(std::move(m));
        }
        if (!validate(f, nf, Strength::Weak).ok) continue;
        int node = 0;
        for (std::size_t i = 0; i < nf.length() && node >= 0; ++i) {
            int next = -1;
            for (int c : tree.nodes[node].children) {
                if (!(tree.nodes[c].last == nf.intervals[i])) continue;
                if (i > 0 && tree.nodes[c].map != nf.maps[i - 1].image) continue;
                next = c;
                break;
            }
            node = next;
        }
        if (node > 0 && ranks.node_rank[node] >= 0) best = std::max(best.value_or(-1), ranks.node_rank[node]);
    }
    return best;
}

}  // namespace

AlphaRun alpha_from_run(const BlockFunction& f, const CopiesRun& run, const NFTree& fragment, const TreeRank& ranks,
                        const OrdinalPresentation& p) {
    AlphaRun out;
    out.run = run;
    out.c.presentation = p;
    out.c.values = run.c;
    out.c.r.assign(run.c.x_bound, std::vector<OrdinalValue>(run.c.s_bound + 1, p.top));
    for (const auto& ep : episodes(run.phases)) {
        const auto& orders = run.orders[run.requirements[ep[0].req].target];
        OrdinalValue prev = p.top;
        for (std::size_t i = 0; i < ep.size(); ++i) {
            if (prev.is_zero()) throw BlockError("requirement needs a change below rank 0 at stage " + std::to_string(ep[i].stage + 1));
            const std::vector<PhaseRecord> head(ep.begin(), ep.begin() + static_cast<std::ptrdiff_t>(i + 1));
            const CodingSequence cs = extract_weak(f, head, orders);
            const auto located = located_rank(f, cs, fragment, ranks);
            OrdinalValue next;
            if (prev.is_limit()) {
                if (!located) throw BlockError("no located sequence below a limit rank");
                next = OrdinalValue::of(static_cast<std::uint64_t>(*located));
            } else {
                next = {prev.omega_coeff, prev.finite - 1};
                std::uint64_t fallback = p.top.finite > cs.length() ? p.top.finite - cs.length() : 0;
                const OrdinalValue cand = OrdinalValue::of(located ? static_cast<std::uint64_t>(*located) : fallback);
                if (cand < next) next = cand;
            }
            out.notes.push_back("x=" + std::to_string(ep[i].x) + " stage " + std::to_string(ep[i].stage + 1) + " rank " +
                                next.str() + (located ? " located" : " by length"));
            for (std::size_t s = ep[i].stage + 1; s <= run.c.s_bound; ++s) {
                out.c.r[static_cast<std::size_t>(ep[i].x)][s] = next;
            }
            prev = next;
        }
    }
    return out;
}

AlphaRun diagonalize_alpha_ce(const BlockFunction& f, std::size_t requirements, const OrdinalPresentation& p,
                              const DiagonalOptions& opt, std::size_t depth, std::size_t tree_blocks) {
    const NFTree fragment = max_tree(f, depth, tree_blocks);
    const TreeRank ranks = tree_rank(fragment);
    if (!ranks.root) throw BlockError("weak fragment leaves an unresolved frontier");
    if (p.top < *ranks.root) throw BlockError("presentation lies below the fragment rank " + ranks.root->str());
    const ReplayReport rep = diagonalize_with_replay(f, requirements, opt);
    return alpha_from_run(f, rep.live, fragment, ranks, p);
}

}  // namespace blockfn
