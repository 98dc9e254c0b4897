#pragma once

#include <optional>
#include <string>
#include <vector>

#include "blockfn/core_blocks.hpp"

namespace blockfn {

// Pointwise map on a domain interval.
struct OrderMap {
    Interval domain;
    std::vector<std::int64_t> image;  // image[x - domain.lo]

    std::int64_t operator()(std::int64_t x) const { return image.at(static_cast<std::size_t>(x - domain.lo)); }
    bool operator==(const OrderMap&) const = default;

    static OrderMap identity(Interval d);
    OrderMap then(const OrderMap& next) const;  // next after this
    OrderMap restrict(Interval d) const;
};

enum class Strength { Weak, Strong };
const char* to_string(Strength s);

struct CodingSequence {
    std::vector<Interval> intervals;
    std::vector<OrderMap> maps;  // maps[i] : intervals[i] -> intervals[i+1]
    Strength strength = Strength::Weak;

    std::size_t length() const { return intervals.size(); }
    bool operator==(const CodingSequence& o) const { return intervals == o.intervals && maps == o.maps; }
};

// Canonical order: length, last b, then intervals and maps lexicographically.
bool canonical_less(const CodingSequence& a, const CodingSequence& b);

// Cached view of f on an initial segment, grown on demand.
class FView {
public:
    explicit FView(const BlockFunction& f) : f_(&f) {}
    std::int64_t f(std::int64_t x);
    PlacedBlock block(std::int64_t x);
    bool is_block_start(std::int64_t x);
    bool is_block_end(std::int64_t x);
    const BlockFunction& function() const { return *f_; }

private:
    void grow_to(std::int64_t x);
    const BlockFunction* f_;
    std::vector<std::int64_t> starts_{0};
    std::vector<TypeRef> types_;
};

struct ValidationReport {
    bool ok = true;
    int condition = 0;      // 1..5 as in the definition, 0 when ok
    int index = 0;          // 1-based interval or map index
    std::int64_t point = -1;
    std::string message;
};

// Validates against the given strength (defaults to the sequence's own).
ValidationReport validate(const BlockFunction& f, const CodingSequence& seq);
ValidationReport validate(const BlockFunction& f, const CodingSequence& seq, Strength s);

// phi_{j-1} o ... o phi_i : interval i -> interval j (1-based, i < j <= length).
OrderMap compose(const CodingSequence& seq, std::size_t i, std::size_t j);
bool preserves_f(FView& fv, const OrderMap& m);
bool preserves_f(const BlockFunction& f, const OrderMap& m);

struct Strengthened {
    CodingSequence seq;
    std::vector<std::size_t> source_index;  // 1-based input interval for each output interval
};

// Finite-scale weak-to-strong conversion. Strong inputs come back unchanged.
Strengthened strengthen_traced(const BlockFunction& f, const CodingSequence& seq);
CodingSequence strengthen(const BlockFunction& f, const CodingSequence& seq);
// True when strengthen_traced would find a trimmed first interval and a second index.
bool increase_certifiable(const BlockFunction& f, const CodingSequence& seq);

struct LinkReport {
    std::vector<std::int64_t> link;
    std::size_t witnessed_at = 0;
    std::optional<std::size_t> vulnerable_at;
    std::optional<std::size_t> broken_at;
};

std::vector<LinkReport> link_analysis(const BlockFunction& f, const CodingSequence& seq);
bool has_vulnerable_link(const BlockFunction& f, const CodingSequence& seq);

// {"strength", "intervals": [[a,b],...], "maps": [[...],...]}
std::string to_text(const CodingSequence& seq);
CodingSequence from_text(const std::string& text);

}  // namespace blockfn
