#pragma once

#include <cstdint>
#include <vector>

#include "blockfn/coding_seq.hpp"

namespace blockfn {

struct SearchOptions {
    std::size_t max_len = 4;
    std::int64_t horizon = 0;  // elements; intervals lie inside [0, horizon)
    Strength strength = Strength::Strong;
    std::uint64_t node_cap = 5'000'000;
};

struct SearchResult {
    std::vector<CodingSequence> sequences;  // canonical order
    bool truncated = false;
    std::uint64_t nodes = 0;

    std::size_t max_length() const;
};

// Every valid sequence with intervals inside the horizon, all interval choices
// and all maps. Only practical for a dozen or so elements.
SearchResult search(const BlockFunction& f, const SearchOptions& opt);

// Number of elements covered by the first `blocks` blocks.
std::int64_t horizon_elements(const BlockFunction& f, std::size_t blocks);

// Search tree restricted to normal-form sequences: the first interval is a single
// block and each later interval is the block closure of the previous image. Any
// valid sequence restricts to a normal-form one of the same length.
//
// A child is stored only when each of its last-interval blocks could still be
// carried into some block by a further map; the others are leaves and are
// accounted for by the parent's `any_child` flag.
struct NFNode {
    int parent = -1;
    std::size_t length = 0;
    Interval last;
    std::vector<std::int64_t> map;  // from the parent's last interval
    std::vector<int> children;
    bool any_child = false;   // some valid one-interval extension exists
    bool expanded = false;    // children were enumerated
};

struct NFTree {
    Strength strength = Strength::Strong;
    std::size_t depth_limit = 0;
    std::size_t horizon_blocks = 0;
    std::int64_t horizon = 0;
    bool truncated = false;
    std::vector<NFNode> nodes;  // nodes[0] is the empty sequence

    CodingSequence sequence(int id) const;
    // Longest sequence shown to exist (a stored node or a leaf below one).
    std::size_t max_length() const;
    // Nodes at the depth limit that still have extensions.
    std::vector<int> unknown_frontier() const;
};

NFTree normal_form_tree(const BlockFunction& f, std::size_t depth_limit, std::size_t horizon_blocks,
                        Strength strength, std::uint64_t node_cap = 5'000'000);

}  // namespace blockfn
