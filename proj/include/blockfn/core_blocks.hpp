#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace blockfn {

// A finite endomap on positions 0..k-1 that no proper prefix splits off.
struct BlockType {
    std::vector<int> map;

    int size() const { return static_cast<int>(map.size()); }

    bool operator==(const BlockType&) const = default;
    // Canonical order: by size, then lexicographically by the graph of map.
    std::strong_ordering operator<=>(const BlockType& other) const;
};

using TypeRef = std::shared_ptr<const BlockType>;

class BlockError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

bool is_closed_map(const BlockType& t);
bool is_indecomposable(const BlockType& t);
// Throws BlockError when either invariant fails.
void check_block_type(const BlockType& t);

BlockType loop_type(int k);
// Shared, cached handle for loop_type(k).
TypeRef loop_ref(int k);
TypeRef make_ref(BlockType t);

// Sorted lengths of the cycles of the map. An f-preserving injection sends
// distinct cycles onto distinct cycles of the same length.
std::vector<int> cycle_signature(const BlockType& t);

// Lexicographically least strictly increasing w with J(w(x)) = w(I(x)).
std::optional<std::vector<int>> embeds(const BlockType& from, const BlockType& into);
// Every witness in lexicographic order, at most `cap` of them.
std::vector<std::vector<int>> embeds_all(const BlockType& from, const BlockType& into, std::size_t cap = 64);

// All indecomposable types of size k in canonical order, 1 <= k <= 8.
std::vector<BlockType> enumerate_types(int k);

// ---- finite integer strings and their numbering -------------------------

using IntString = std::vector<std::uint64_t>;

std::uint64_t cantor_pair(std::uint64_t a, std::uint64_t b);
// ell(empty) = 0, ell(s ^ n) = pair(ell(s), n) + 1. Injective.
std::uint64_t pairing_number(const IntString& s);

// Numbering used for sandwich loop exponents: explicit entries first, the
// pairing numbering otherwise.
struct Numbering {
    std::map<IntString, std::uint64_t> explicit_entries;
    std::uint64_t operator()(const IntString& s) const;
};

// x0 + loops for each nonempty prefix + x1 + x2 + x3.
BlockType sandwich_block(const IntString& sigma, const Numbering& ell);
std::int64_t sandwich_size(const IntString& sigma, const Numbering& ell);

// ---- ranked finite trees (nodes are prefix-closed strings) ----------------

struct RankedTree {
    std::map<IntString, int> rank;  // includes the root (empty string)

    bool contains(const IntString& s) const { return rank.count(s) != 0; }
    int root_rank() const;
    std::vector<IntString> children(const IntString& s) const;
    // Nonempty nodes in shortlex order.
    std::vector<IntString> nonroot_nodes() const;
    // Throws BlockError on non prefix-closed node sets, on rank not
    // decreasing along edges, or on rank parity differing from depth parity.
    void validate_parity() const;
    // The actual well-founded rank of every node.
    std::map<IntString, int> true_ranks() const;

    // Path 0^k of the given even rank; node 0^k has rank rank-k.
    static RankedTree path(int rank);
};

// Numbering 1 + shortlex index over the nonempty nodes of the tree.
Numbering tree_numbering(const RankedTree& t);

// ---- block functions ----------------------------------------------------

class Generator {
public:
    virtual ~Generator() = default;
    virtual TypeRef at(std::size_t i) const = 0;
    virtual std::string kind() const = 0;
    // True when every finite run of consecutive types recurs infinitely often.
    virtual bool runs_recur() const { return false; }
};

using GenPtr = std::shared_ptr<const Generator>;

enum class FlagStatus { Undeclared, Declared, Verified, Falsified };

const char* to_string(FlagStatus s);
FlagStatus flag_status_from_string(const std::string& s);

enum class FlagName {
    AllRecur,            // every occurring type occurs infinitely often
    EmbedsLaterCofinite, // all but finitely many blocks embed into a later block
    InfinitelyManyIsolated, // infinitely many blocks embed into no later block
    AdjacencyUnique,     // no ordered pair of types is adjacent twice
    DistinctSizes,       // distinct occurring types have distinct sizes
    Rigid,               // occurring types embed only into themselves
    IdentityAe,          // identity almost everywhere
};

const std::vector<FlagName>& all_flag_names();
const char* to_string(FlagName f);
FlagName flag_name_from_string(const std::string& s);

struct FlagState {
    FlagStatus status = FlagStatus::Undeclared;
    std::int64_t horizon = 0;
    std::string witness;
};

struct BlockFunction {
    std::string name;
    GenPtr gen;
    std::map<FlagName, FlagState> flags;

    TypeRef type_at(std::size_t i) const { return gen->at(i); }
    FlagStatus status(FlagName f) const;
    bool holds(FlagName f) const;  // declared or verified
};

struct Interval {
    std::int64_t lo = 0;
    std::int64_t hi = 0;  // inclusive
    std::int64_t size() const { return hi - lo + 1; }
    bool operator==(const Interval&) const = default;
};

struct PlacedBlock {
    Interval interval;
    std::size_t block_index = 0;
    TypeRef type;
};

PlacedBlock block_of(const BlockFunction& f, std::int64_t n);
std::int64_t f_value(const BlockFunction& f, std::int64_t n);
std::vector<PlacedBlock> blocks_of_prefix(const BlockFunction& f, std::size_t m);

// Distinct types in canonical order; indices are stable for a given prefix.
struct BlockTable {
    std::vector<TypeRef> entries;
    Numbering godel;

    static BlockTable of_types(const std::vector<TypeRef>& types);
    std::size_t index_of(const BlockType& t) const;
};

BlockTable table_for_prefix(const BlockFunction& f, std::size_t m);
std::vector<std::size_t> alpha_string(const BlockFunction& f, std::size_t m);
std::vector<std::size_t> alpha_string(const BlockFunction& f, std::size_t m, const BlockTable& table);
// c_f restricted to the prefix, indexed like the table.
std::vector<std::size_t> counting_prefix(const BlockFunction& f, std::size_t m);

// Dense picture of the first blocks: per-element block index and f value.
struct Window {
    std::vector<std::int64_t> start;  // one entry per block plus the total
    std::vector<TypeRef> types;
    std::vector<int> elem_block;
    std::vector<int> fval;

    int blocks() const { return static_cast<int>(types.size()); }
    int elements() const { return static_cast<int>(fval.size()); }
    int block_lo(int b) const { return static_cast<int>(start[b]); }
    int block_hi(int b) const { return static_cast<int>(start[b + 1]) - 1; }

    static Window of_blocks(const BlockFunction& f, std::size_t m);
    // All blocks lying entirely inside [0, n).
    static Window of_elements(const BlockFunction& f, std::int64_t n);
};

// ---- example families ----------------------------------------------------

GenPtr periodic_gen(std::vector<TypeRef> period);
GenPtr loops_gen(int first, int step);            // L_first, L_{first+step}, ...
GenPtr loops_recurring_gen(int first, int step);  // rows first; first,first+step; ...
GenPtr interleave_gen(GenPtr even, GenPtr odd);
GenPtr prefixed_gen(std::vector<TypeRef> prefix, GenPtr tail);
GenPtr tree_odd_gen(RankedTree tree, GenPtr loops);

BlockFunction canonical_example();
BlockFunction alternating_control();
BlockFunction successor_control();
BlockFunction identity_function();
BlockFunction tree_example(const RankedTree& tree);

// Helpers exposed for tests and serialization.
const RankedTree* tree_of(const Generator& g);
int loops_recurring_value(int first, int step, std::size_t i);

// ---- flags and classification ---------------------------------------------

struct FlagReport {
    std::map<FlagName, FlagState> flags;  // status after verification
    std::vector<std::string> contradictions;
    // Per-type findings over the horizon, indexed like table_for_prefix.
    std::vector<bool> type_recurs;
    std::vector<bool> type_embeds_later;
};

// Checks every declared flag up to the horizon (in blocks). Scans for later
// occurrences reach at most scan_limit blocks.
FlagReport verify_flags(const BlockFunction& f, std::size_t horizon, std::size_t scan_limit = 0);
// Returns f with the statuses found by verify_flags.
BlockFunction with_verified_flags(const BlockFunction& f, std::size_t horizon);

enum class SpectrumClass { ComputableOnly, ExactlyCeDegrees, StrictlyAboveCe, Unknown };
const char* to_string(SpectrumClass c);

struct Classification {
    SpectrumClass cls = SpectrumClass::Unknown;
    std::size_t horizon = 0;
    std::string reason;
};

// Throws BlockError when declared flags contradict each other or the horizon.
Classification classify_spectrum(const BlockFunction& f, std::size_t horizon);

// ---- d-free witness --------------------------------------------------------

struct DFreeWitness {
    std::vector<std::int64_t> c_bar;
    Interval a_bar;
    std::size_t a_block = 0;

    // (a+1, b+1): same order type, the values of f on a change.
    std::pair<std::vector<std::int64_t>, std::vector<std::int64_t>>
    first_response(const std::vector<std::int64_t>& b_bar) const;

    // Re-seat a_bar and each block of b_blocks into later blocks they embed
    // into, all above `floor`. Returns (a'', b''), concatenated per block.
    std::pair<std::vector<std::int64_t>, std::vector<std::int64_t>>
    second_response(const BlockFunction& f, const std::vector<Interval>& b_blocks,
                    std::int64_t floor, std::size_t horizon) const;
};

DFreeWitness dfree_witness(const BlockFunction& f, const std::vector<std::int64_t>& c_bar,
                           std::size_t horizon);

// First block starting at or after `min_pos` that receives an embedding of
// `t`. Searches the first `horizon` blocks.
struct EmbedTarget {
    PlacedBlock block;
    std::vector<int> witness;
};
std::optional<EmbedTarget> find_embedding_target(const BlockFunction& f, const BlockType& t,
                                                 std::int64_t min_pos, std::size_t horizon);

}  // namespace blockfn
