#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "blockfn/coding_seq.hpp"

namespace blockfn {

// Creation-ordered and never reused.
using ElementId = std::uint64_t;

struct InsertRecord {
    std::uint64_t stage = 0;
    std::int64_t position = 0;
    ElementId id = 0;
    bool operator==(const InsertRecord&) const = default;
};

// A finite stage of a copy of (omega,<). Elements keep their ids; positions
// are derived from the current order.
class StageCopy {
public:
    // Throws BlockError when position > size().
    ElementId insert(std::int64_t position);
    // `count` new elements at position, position+1, ...; returns their ids.
    std::vector<ElementId> insert_run(std::int64_t position, std::int64_t count);

    std::int64_t pi(ElementId id) const;
    bool contains(ElementId id) const { return id < pos_.size(); }
    ElementId at(std::int64_t position) const;
    std::int64_t size() const { return static_cast<std::int64_t>(order_.size()); }
    std::uint64_t stage() const { return stage_; }
    void next_stage() { ++stage_; }

    const std::vector<ElementId>& order() const { return order_; }
    const std::vector<InsertRecord>& history() const { return history_; }

    // Rebuilds the copy from its log, keeping stage records up to `last_stage`.
    static StageCopy replay(const std::vector<InsertRecord>& history,
                            std::uint64_t last_stage = std::numeric_limits<std::uint64_t>::max());

private:
    void refresh() const;

    std::vector<ElementId> order_;
    mutable std::vector<std::int64_t> pos_;  // by id
    mutable std::size_t dirty_from_ = 0;
    std::vector<InsertRecord> history_;
    std::uint64_t stage_ = 0;
};

// The id at position f(pi(id)), or none when that position is not in the copy.
std::optional<ElementId> f_at_stage(FView& fv, const StageCopy& copy, ElementId id);
std::optional<ElementId> f_at_stage(const BlockFunction& f, const StageCopy& copy, ElementId id);

// f on every id of the copy, indexed by id; kNoValue where undefined.
inline constexpr ElementId kNoValue = std::numeric_limits<ElementId>::max();
std::vector<ElementId> f_table(FView& fv, const StageCopy& copy);

// b1 >= a1 and every gap of b is at least the matching gap of a.
// Throws BlockError on a length mismatch or a tuple that is not increasing.
bool extends_to(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b);

struct Insertion {
    std::int64_t position = 0;  // position of the first new element
    std::int64_t count = 0;
};

struct RestorePlan {
    bool moved = false;
    PlacedBlock target;
    std::vector<int> witness;             // offsets of the ids inside the target
    std::vector<Insertion> insertions;    // increasing positions, as executed
    std::vector<ElementId> below;         // new elements placed under the target block
    std::vector<ElementId> inside;        // new elements that complete the target block
};

// Re-seats `ids`, once a block of type `old_type`, into the first block at or
// above their current position that `old_type` embeds into, respecting the
// current gaps. Insertions at positions <= frozen_below are refused.
// Throws BlockError when no target lies within `horizon_blocks` blocks.
RestorePlan restore_block(FView& fv, StageCopy& copy, const std::vector<ElementId>& ids,
                          const BlockType& old_type, std::int64_t frozen_below, std::size_t horizon_blocks);

// Line records with a fixed field order.
std::string insert_event(const InsertRecord& r);
std::string freeze_event(std::uint64_t stage, std::int64_t position);

}  // namespace blockfn
