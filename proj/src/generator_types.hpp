#pragma once

#include "blockfn/core_blocks.hpp"

namespace blockfn::detail {

class PeriodicGen : public Generator {
public:
    explicit PeriodicGen(std::vector<TypeRef> period) : period_(std::move(period)) {
        if (period_.empty()) throw BlockError("periodic generator needs a nonempty period");
        for (const auto& t : period_) check_block_type(*t);
    }
    TypeRef at(std::size_t i) const override { return period_[i % period_.size()]; }
    std::string kind() const override { return "periodic"; }
    bool runs_recur() const override { return true; }
    const std::vector<TypeRef>& period() const { return period_; }

private:
    std::vector<TypeRef> period_;
};

class LoopsGen : public Generator {
public:
    LoopsGen(int first, int step) : first_(first), step_(step) {
        if (first < 1 || step < 1) throw BlockError("loop generator parameters must be positive");
    }
    TypeRef at(std::size_t i) const override { return loop_ref(first_ + step_ * static_cast<int>(i)); }
    std::string kind() const override { return "loops"; }
    int first() const { return first_; }
    int step() const { return step_; }

private:
    int first_, step_;
};

class LoopsRecurringGen : public Generator {
public:
    LoopsRecurringGen(int first, int step) : first_(first), step_(step) {
        if (first < 1 || step < 1) throw BlockError("loop generator parameters must be positive");
    }
    TypeRef at(std::size_t i) const override { return loop_ref(loops_recurring_value(first_, step_, i)); }
    std::string kind() const override { return "loops_recurring"; }
    int first() const { return first_; }
    int step() const { return step_; }

private:
    int first_, step_;
};

class InterleaveGen : public Generator {
public:
    InterleaveGen(GenPtr even, GenPtr odd) : even_(std::move(even)), odd_(std::move(odd)) {}
    TypeRef at(std::size_t i) const override { return i % 2 == 0 ? even_->at(i / 2) : odd_->at(i / 2); }
    std::string kind() const override { return "interleave"; }
    const GenPtr& even() const { return even_; }
    const GenPtr& odd() const { return odd_; }

private:
    GenPtr even_, odd_;
};

class PrefixedGen : public Generator {
public:
    PrefixedGen(std::vector<TypeRef> prefix, GenPtr tail) : prefix_(std::move(prefix)), tail_(std::move(tail)) {
        for (const auto& t : prefix_) check_block_type(*t);
    }
    TypeRef at(std::size_t i) const override {
        return i < prefix_.size() ? prefix_[i] : tail_->at(i - prefix_.size());
    }
    std::string kind() const override { return "prefixed"; }
    bool runs_recur() const override { return prefix_.empty() && tail_->runs_recur(); }
    const GenPtr& tail() const { return tail_; }
    const std::vector<TypeRef>& prefix() const { return prefix_; }

private:
    std::vector<TypeRef> prefix_;
    GenPtr tail_;
};

// Odd blocks of the tree family: sandwich blocks at even steps, loops at odd steps.
class TreeOddGen : public Generator {
public:
    TreeOddGen(RankedTree tree, GenPtr loops) : tree_(std::move(tree)), loops_(std::move(loops)) {
        tree_.validate_parity();
        const Numbering ell = tree_numbering(tree_);
        for (const auto& node : tree_.nonroot_nodes()) blocks_.push_back(make_ref(sandwich_block(node, ell)));
    }
    TypeRef at(std::size_t t) const override {
        if (blocks_.empty()) return loops_->at(t);
        if (t % 2 == 0) return blocks_[(t / 2) % blocks_.size()];
        return loops_->at((t - 1) / 2);
    }
    std::string kind() const override { return "tree_odd"; }
    const RankedTree& tree() const { return tree_; }
    const GenPtr& loops() const { return loops_; }

private:
    RankedTree tree_;
    GenPtr loops_;
    std::vector<TypeRef> blocks_;
};

}  // namespace blockfn::detail
