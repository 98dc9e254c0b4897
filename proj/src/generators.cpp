#include "generator_types.hpp"

namespace blockfn {

using namespace detail;

namespace {

std::map<FlagName, FlagState> declare(std::initializer_list<FlagName> names) {
    std::map<FlagName, FlagState> out;
    for (FlagName n : names) out[n].status = FlagStatus::Declared;
    return out;
}

}  // namespace

int loops_recurring_value(int first, int step, std::size_t i) {
    // rows: first; first, first+step; first, first+step, first+2*step; ...
    std::size_t row = 0;
    while ((row + 1) * (row + 2) / 2 <= i) ++row;
    const std::size_t pos = i - row * (row + 1) / 2;
    return first + step * static_cast<int>(pos);
}

GenPtr periodic_gen(std::vector<TypeRef> period) { return std::make_shared<PeriodicGen>(std::move(period)); }
GenPtr loops_gen(int first, int step) { return std::make_shared<LoopsGen>(first, step); }
GenPtr loops_recurring_gen(int first, int step) { return std::make_shared<LoopsRecurringGen>(first, step); }
GenPtr interleave_gen(GenPtr even, GenPtr odd) {
    return std::make_shared<InterleaveGen>(std::move(even), std::move(odd));
}
GenPtr prefixed_gen(std::vector<TypeRef> prefix, GenPtr tail) {
    return std::make_shared<PrefixedGen>(std::move(prefix), std::move(tail));
}
GenPtr tree_odd_gen(RankedTree tree, GenPtr loops) {
    return std::make_shared<TreeOddGen>(std::move(tree), std::move(loops));
}

const RankedTree* tree_of(const Generator& g) {
    if (auto* t = dynamic_cast<const TreeOddGen*>(&g)) return &t->tree();
    if (auto* i = dynamic_cast<const InterleaveGen*>(&g)) {
        if (auto* r = tree_of(*i->odd())) return r;
        return tree_of(*i->even());
    }
    if (auto* p = dynamic_cast<const PrefixedGen*>(&g)) return tree_of(*p->tail());
    return nullptr;
}

BlockFunction canonical_example() {
    BlockFunction f;
    f.name = "canonical";
    f.gen = interleave_gen(loops_gen(1, 1), loops_recurring_gen(1, 1));
    f.flags = declare({FlagName::AllRecur, FlagName::EmbedsLaterCofinite, FlagName::AdjacencyUnique,
                       FlagName::DistinctSizes, FlagName::Rigid});
    return f;
}

BlockFunction alternating_control() {
    BlockFunction f;
    f.name = "alternating";
    f.gen = periodic_gen({loop_ref(1), loop_ref(2)});
    f.flags = declare({FlagName::AllRecur, FlagName::EmbedsLaterCofinite, FlagName::DistinctSizes, FlagName::Rigid});
    return f;
}

BlockFunction successor_control() {
    BlockFunction f;
    f.name = "successor";
    f.gen = loops_gen(2, 1);
    f.flags = declare({FlagName::InfinitelyManyIsolated, FlagName::AdjacencyUnique, FlagName::DistinctSizes,
                       FlagName::Rigid});
    return f;
}

BlockFunction identity_function() {
    BlockFunction f;
    f.name = "identity";
    f.gen = periodic_gen({loop_ref(1)});
    f.flags = declare({FlagName::IdentityAe, FlagName::DistinctSizes});
    return f;
}

BlockFunction tree_example(const RankedTree& tree) {
    BlockFunction f;
    f.name = "tree";
    f.gen = interleave_gen(loops_gen(1, 2), tree_odd_gen(tree, loops_recurring_gen(1, 2)));
    f.flags = declare({FlagName::AllRecur, FlagName::EmbedsLaterCofinite, FlagName::AdjacencyUnique,
                       FlagName::DistinctSizes});
    return f;
}

}  // namespace blockfn
