#pragma once

#include <compare>
#include <optional>
#include <string>
#include <vector>

#include "blockfn/search.hpp"

namespace blockfn {

// omega * omega_coeff + finite
struct OrdinalValue {
    std::uint64_t omega_coeff = 0;
    std::uint64_t finite = 0;

    static OrdinalValue of(std::uint64_t n) { return {0, n}; }
    auto operator<=>(const OrdinalValue&) const = default;
    bool is_zero() const { return omega_coeff == 0 && finite == 0; }
    bool is_limit() const { return omega_coeff > 0 && finite == 0; }
    bool is_successor() const { return finite > 0; }
    OrdinalValue successor() const { return {omega_coeff, finite + 1}; }
    std::string str() const;
};

// ---- maximal tree -------------------------------------------------------------

// Weak normal-form sequences up to `depth` intervals over the first `horizon_blocks` blocks.
NFTree max_tree(const BlockFunction& f, std::size_t depth, std::size_t horizon_blocks);

struct TreeRank {
    std::optional<OrdinalValue> root;  // empty when the frontier is unresolved
    std::vector<int> node_rank;        // -1 where undetermined
    std::vector<int> unresolved;       // frontier nodes that still have extensions
};

TreeRank tree_rank(const NFTree& tree);

// One line per node: {"id","parent","length","last","rank","any_child","expanded"}.
std::string dump_fragment(const NFTree& tree, const std::vector<int>& ranks);

// ---- permits ----------------------------------------------------------------------

// Least psi from the last interval of `from` to that of `to`, or none.
std::optional<OrderMap> permits(const BlockFunction& f, const CodingSequence& from, const CodingSequence& to);
std::optional<OrderMap> permits(FView& fv, const CodingSequence& from, const CodingSequence& to);

// A sequence permitted by `seq` whose last interval starts at or after `min_start`:
// each block of the last interval moves to the next later block of its type,
// keeping the order and the map from the previous interval.
struct PermittedMove {
    CodingSequence seq;
    OrderMap psi;
};
std::optional<PermittedMove> find_permitted(const BlockFunction& f, const CodingSequence& seq,
                                            std::int64_t min_start, std::size_t horizon_blocks);

// ---- minimal tree ------------------------------------------------------------------

struct MinRankResult {
    OrdinalValue root;
    NFTree tree;                  // strong normal-form fragment
    std::vector<int> node_rank;   // minrank per node, -1 for the root entry
    std::vector<bool> certified;  // node reaches a recurrent class
};

// Throws BlockError when the fragment is truncated or leaves an unresolved frontier.
MinRankResult min_rank(const BlockFunction& f, std::size_t depth, std::size_t horizon_blocks);

// ---- pair tree --------------------------------------------------------------------

struct PairTreeReport {
    OrdinalValue rank_star;
    std::uint64_t nodes = 0;              // nodes of the pair tree, root included
    std::uint64_t claim_checks = 0;
    std::vector<std::string> violations;  // failed claim inequalities
};

// Throws BlockError when the rank function is not parity consistent.
PairTreeReport pair_tree_rank(const RankedTree& tree);

}  // namespace blockfn
