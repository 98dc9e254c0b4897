#include "blockfn/omega_copy.hpp"

#include <algorithm>

#include <json.hpp>

namespace blockfn {

ElementId StageCopy::insert(std::int64_t position) {
    if (position < 0 || position > size()) throw BlockError("insert position out of range");
    const ElementId id = pos_.size();
    order_.insert(order_.begin() + position, id);
    pos_.push_back(position);
    dirty_from_ = std::min(dirty_from_, static_cast<std::size_t>(position));
    history_.push_back({stage_, position, id});
    return id;
}

std::vector<ElementId> StageCopy::insert_run(std::int64_t position, std::int64_t count) {
    std::vector<ElementId> out;
    for (std::int64_t k = 0; k < count; ++k) out.push_back(insert(position + k));
    return out;
}

void StageCopy::refresh() const {
    for (std::size_t p = dirty_from_; p < order_.size(); ++p) pos_[order_[p]] = static_cast<std::int64_t>(p);
    dirty_from_ = order_.size();
}

std::int64_t StageCopy::pi(ElementId id) const {
    if (!contains(id)) throw BlockError("unknown element id " + std::to_string(id));
    refresh();
    return pos_[id];
}

ElementId StageCopy::at(std::int64_t position) const {
    if (position < 0 || position >= size()) throw BlockError("position out of range");
    return order_[static_cast<std::size_t>(position)];
}

StageCopy StageCopy::replay(const std::vector<InsertRecord>& history, std::uint64_t last_stage) {
    StageCopy c;
    for (const auto& r : history) {
        if (r.stage > last_stage) break;
        c.stage_ = r.stage;
        if (c.insert(r.position) != r.id) throw BlockError("history does not replay: id mismatch");
    }
    if (last_stage != std::numeric_limits<std::uint64_t>::max()) c.stage_ = last_stage;
    return c;
}

std::optional<ElementId> f_at_stage(FView& fv, const StageCopy& copy, ElementId id) {
    const std::int64_t v = fv.f(copy.pi(id));
    if (v >= copy.size()) return std::nullopt;
    return copy.at(v);
}

std::optional<ElementId> f_at_stage(const BlockFunction& f, const StageCopy& copy, ElementId id) {
    FView fv(f);
    return f_at_stage(fv, copy, id);
}

std::vector<ElementId> f_table(FView& fv, const StageCopy& copy) {
    std::vector<ElementId> out(copy.order().size(), kNoValue);
    for (std::int64_t p = 0; p < copy.size(); ++p) {
        const std::int64_t v = fv.f(p);
        if (v < copy.size()) out[copy.at(p)] = copy.at(v);
    }
    return out;
}

bool extends_to(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b) {
    if (a.size() != b.size()) throw BlockError("extends_to: length mismatch");
    for (std::size_t i = 1; i < a.size(); ++i) {
        if (a[i] <= a[i - 1] || b[i] <= b[i - 1]) throw BlockError("extends_to: tuples must increase");
    }
    if (a.empty()) return true;
    if (b[0] < a[0]) return false;
    for (std::size_t i = 1; i < a.size(); ++i) {
        if (b[i] - b[i - 1] < a[i] - a[i - 1]) return false;
    }
    return true;
}

RestorePlan restore_block(FView& fv, StageCopy& copy, const std::vector<ElementId>& ids,
                          const BlockType& old_type, std::int64_t frozen_below, std::size_t horizon_blocks) {
    if (ids.empty() || static_cast<int>(ids.size()) != old_type.size()) {
        throw BlockError("restore_block: ids do not match the block type");
    }
    std::vector<std::int64_t> cur;
    for (ElementId id : ids) cur.push_back(copy.pi(id));

    RestorePlan plan;
    // Search from the block holding the first id; a block starting below it
    // cannot be used.
    PlacedBlock b = fv.block(cur[0]);
    std::optional<std::vector<int>> w;
    for (;;) {
        if (b.block_index >= horizon_blocks) throw BlockError("restore_block: no embedding target within horizon");
        if (b.interval.lo >= cur[0]) {
            for (auto& cand : embeds_all(old_type, *b.type, 256)) {
                std::vector<std::int64_t> tgt;
                for (int v : cand) tgt.push_back(b.interval.lo + v);
                if (extends_to(cur, tgt)) {
                    w = cand;
                    break;
                }
            }
        }
        if (w) break;
        b = fv.block(b.interval.hi + 1);
    }
    plan.target = b;
    plan.witness = *w;

    const std::int64_t lo = b.interval.lo;
    auto run = [&](std::int64_t at, std::int64_t count, std::vector<ElementId>& into) {
        if (count <= 0) return;
        if (at <= frozen_below) throw BlockError("restore_block: frozen region would be disturbed");
        plan.insertions.push_back({at, count});
        auto fresh = copy.insert_run(at, count);
        into.insert(into.end(), fresh.begin(), fresh.end());
    };
    // Below the target block, then inside it before the first id.
    const std::int64_t gap_below = lo - cur[0];
    run(cur[0], gap_below, plan.below);
    run(lo, (*w)[0], plan.inside);
    for (std::size_t t = 0; t + 1 < ids.size(); ++t) {
        const std::int64_t need = (*w)[t + 1] - (*w)[t] - (cur[t + 1] - cur[t]);
        run(copy.pi(ids[t]) + 1, need, plan.inside);
    }
    run(copy.pi(ids.back()) + 1, b.interval.hi - (lo + w->back()), plan.inside);
    plan.moved = !plan.insertions.empty();
    return plan;
}

std::string insert_event(const InsertRecord& r) {
    nlohmann::ordered_json j;
    j["stage"] = r.stage;
    j["op"] = "insert";
    j["position"] = r.position;
    j["id"] = r.id;
    return j.dump();
}

std::string freeze_event(std::uint64_t stage, std::int64_t position) {
    nlohmann::ordered_json j;
    j["stage"] = stage;
    j["op"] = "freeze";
    j["position"] = position;
    return j.dump();
}

}  // namespace blockfn
