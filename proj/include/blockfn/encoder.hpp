#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "blockfn/approximations.hpp"
#include "blockfn/coding_trees.hpp"
#include "blockfn/omega_copy.hpp"

namespace blockfn {

class EncodeError : public BlockError {
public:
    EncodeError(const std::string& what, std::uint64_t stage) : BlockError(what), stage(stage) {}
    std::uint64_t stage;
};

// No tree node of sufficient minrank; the approximation asks for more moves than f allows.
class RankBudgetError : public EncodeError {
public:
    using EncodeError::EncodeError;
};

// One extension step of a sequence of length >= 2: points in the image of the
// previous map keep their f-pattern in the first block above `min_start`
// that receives it, the other points take the next free positions.
std::optional<CodingSequence> greedy_extend(FView& fv, const CodingSequence& seq, std::int64_t min_start,
                                            std::size_t horizon_blocks);

// Stand-in for an infinite coding sequence: a searched seed plus the greedy
// extension rule, instantiated on demand. Indices are 1-based.
class LazySequence {
public:
    LazySequence(const BlockFunction& f, CodingSequence seed, std::size_t horizon_blocks);
    // First length-2 normal-form node within `seed_blocks` blocks whose greedy
    // continuation survives `lookahead` further steps inside 8 * seed_blocks blocks.
    static LazySequence from_search(const BlockFunction& f, std::size_t seed_blocks, std::size_t lookahead,
                                    std::size_t horizon_blocks);

    const CodingSequence& prefix() const { return seq_; }
    std::size_t length() const { return seq_.length(); }
    const Interval& interval(std::size_t i) const { return seq_.intervals.at(i - 1); }
    OrderMap compose(std::size_t i, std::size_t j) const;

    // Least l > after with l odd (parity 1) or even (parity 0) and a_l >= min_start.
    // Throws EncodeError when the extension rule fails inside the horizon.
    std::size_t next_index(std::size_t after, int parity, std::int64_t min_start, std::uint64_t stage);
    void extend_to_length(std::size_t n);

private:
    void extend(std::int64_t min_start, std::uint64_t stage);

    FView fv_;
    CodingSequence seq_;
    std::size_t horizon_blocks_;
};

struct SegmentLayout {
    std::size_t e = 0;
    std::size_t index = 0;  // interval index, or length of the tree sequence
    Interval interval;
    std::vector<ElementId> initial;
    std::vector<ElementId> segment;
};

struct StageSnapshot {
    std::uint64_t stage = 0;
    std::vector<ElementId> order;
    std::vector<SegmentLayout> layout;  // by e
};

struct SegmentEvent {
    std::uint64_t stage = 0;
    std::size_t e = 0;
    Interval interval;
    std::string move;  // "enter", "extend" or "lateral"
    std::size_t index = 0;
    OrderMap map;      // old interval -> new interval; empty on "enter"
};

enum class EncodeMode { Sequence, Tree };

struct RunTranscript {
    EncodeMode mode = EncodeMode::Sequence;
    std::string function_name;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::size_t stages = 0;
    Delta02Approx x;
    std::vector<InsertRecord> inserts;
    std::vector<StageSnapshot> snapshots;  // snapshots[s] is the copy at stage s
    std::vector<int> owner;                // by id: -1 padding, else e
    std::vector<std::uint64_t> born;       // by id
    std::vector<SegmentEvent> events;
    CodingSequence sequence;               // instantiated prefix (sequence mode)
    std::vector<CodingSequence> tree_sequences;  // final sequence per e (tree mode)

    StageCopy copy_at(std::uint64_t s) const;
    // Line records: header, then per stage inserts, segment events and a summary.
    std::vector<std::string> records() const;
};

struct EncodeOptions {
    std::size_t horizon_blocks = 4096;  // restore, extension and pattern scans
    std::uint64_t seed = 0;
    std::string config_hash;
};

RunTranscript encode_with_sequence(const BlockFunction& f, LazySequence& seq, const Delta02Approx& x,
                                   std::size_t stages, const EncodeOptions& opt = {});

// Ranks come from min_rank(f, depth, tree_blocks).
RunTranscript encode_with_tree(const BlockFunction& f, std::size_t depth, std::size_t tree_blocks,
                               const AlphaCEApprox& x, std::size_t stages, const EncodeOptions& opt = {});

std::vector<ElementId> final_values(const BlockFunction& f, const RunTranscript& t, std::size_t e);
// Throws BlockError when the values match neither configuration.
int decode_bit(const BlockFunction& f, const RunTranscript& t, const std::vector<ElementId>& values, std::size_t e);
// Throws BlockError for an id the transcript never created.
ElementId decode_f(const BlockFunction& f, const RunTranscript& t, const std::vector<int>& limits, ElementId id);

// Each checker returns human-readable violations; empty means the property holds.
std::vector<std::string> check_padding_stability(const BlockFunction& f, const RunTranscript& t);
std::vector<std::string> check_restraint_discipline(const RunTranscript& t);
std::vector<std::string> check_segment_intervals(const RunTranscript& t);
std::vector<std::string> check_finite_displacement(const RunTranscript& t);
std::vector<std::string> check_composition(const BlockFunction& f, const RunTranscript& t);

}  // namespace blockfn
