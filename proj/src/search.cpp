#include "blockfn/search.hpp"

#include <algorithm>
#include <functional>
#include <map>

namespace blockfn {

std::size_t SearchResult::max_length() const {
    std::size_t best = 0;
    for (const auto& s : sequences) best = std::max(best, s.length());
    return best;
}

std::int64_t horizon_elements(const BlockFunction& f, std::size_t blocks) {
    std::int64_t n = 0;
    for (std::size_t i = 0; i < blocks; ++i) n += f.type_at(i)->size();
    return n;
}

namespace {

// Embedding targets of each type inside the window, as absolute positions.
class TargetCache {
public:
    explicit TargetCache(const Window& w) : w_(w) {}

    const std::vector<std::vector<int>>& of(const TypeRef& t) {
        auto it = cache_.find(t.get());
        if (it != cache_.end()) return it->second;
        std::vector<std::vector<int>> out;
        for (int b = 0; b < w_.blocks(); ++b) {
            for (auto& e : embeds_all(*t, *w_.types[b], 16)) {
                for (int& x : e) x += w_.block_lo(b);
                out.push_back(std::move(e));
            }
        }
        return cache_.emplace(t.get(), std::move(out)).first->second;
    }

private:
    const Window& w_;
    std::map<const BlockType*, std::vector<std::vector<int>>> cache_;
};

// Enumerates maps phi: [lo, hi] -> [y_min, y_max], strictly increasing with
// phi(x) >= x, such that phi composed after `prev` preserves f on the previous
// interval. Optional pruning keeps only maps whose image of every block could
// still be carried onto an embedding target.
class MapBuilder {
public:
    const Window& w;
    int lo = 0, hi = -1;
    int y_min = 0, y_max = -1;
    // previous step (absent for the first map)
    int prev_lo = 0, prev_hi = -1;
    const std::vector<int>* prev_map = nullptr;
    bool need_nonpreserving = false;
    TargetCache* targets = nullptr;  // extendability pruning when set
    std::uint64_t* node_budget = nullptr;
    std::function<bool(const std::vector<int>&)> on_map;  // return true to stop

    explicit MapBuilder(const Window& win) : w(win) {}

    // Returns true when stopped early (by callback or by the node budget).
    bool run() {
        const int k = hi - lo + 1;
        phi_.assign(k, -1);
        pre_.assign(k, -1);
        if (prev_map) {
            comp_.assign(prev_hi - prev_lo + 1, -1);
            preimages_.assign(prev_hi - prev_lo + 1, {});
            for (int z = prev_lo; z <= prev_hi; ++z) {
                pre_[(*prev_map)[z - prev_lo] - lo] = z;
                preimages_[w.fval[z] - prev_lo].push_back(z);
            }
        }
        if (targets) {
            surv_.assign(k, {});
            block_first_.assign(k, 0);
            for (int p = lo; p <= hi; ++p) {
                const int b = w.elem_block[p];
                block_first_[p - lo] = w.block_lo(b);
            }
        }
        stopped_ = false;
        step(lo);
        return stopped_;
    }

private:
    std::vector<int> phi_, pre_, comp_;
    std::vector<std::vector<int>> preimages_;
    std::vector<std::vector<int>> surv_;
    std::vector<int> block_first_;
    bool stopped_ = false;

    bool check_comp(int z) const {
        const int cz = comp_[z - prev_lo];
        const int fz = w.fval[z];
        const int cfz = comp_[fz - prev_lo];
        if (cfz >= 0 && w.fval[cz] != cfz) return false;
        for (int zz : preimages_[z - prev_lo]) {
            const int c = comp_[zz - prev_lo];
            if (c >= 0 && w.fval[c] != cz) return false;
        }
        return true;
    }

    bool preserves() const {
        for (int x = lo; x <= hi; ++x) {
            if (w.fval[phi_[x - lo]] != phi_[w.fval[x] - lo]) return false;
        }
        return true;
    }

    void step(int p) {
        if (stopped_) return;
        if (node_budget) {
            if (*node_budget == 0) {
                stopped_ = true;
                return;
            }
            --*node_budget;
        }
        if (p > hi) {
            if (need_nonpreserving && preserves()) return;
            if (on_map(phi_)) stopped_ = true;
            return;
        }
        const int idx = p - lo;
        int y_lo = std::max({p, y_min, idx > 0 ? phi_[idx - 1] + 1 : 0});
        int y_hi = std::min(y_max, w.elements() - 1 - (hi - p));
        const bool first_in_block = targets && block_first_[idx] == p;
        const std::vector<std::vector<int>>* tl = nullptr;
        int local = 0;
        if (targets) {
            const int b = w.elem_block[p];
            tl = &targets->of(w.types[b]);
            local = p - w.block_lo(b);
            int bound = -1;
            if (first_in_block) {
                for (const auto& t : *tl) bound = std::max(bound, t[0]);
            } else {
                for (int ti : surv_[idx - 1]) {
                    const auto& t = (*tl)[ti];
                    bound = std::max(bound, phi_[idx - 1] + t[local] - t[local - 1]);
                }
            }
            y_hi = std::min(y_hi, bound);
        }
        for (int y = y_lo; y <= y_hi && !stopped_; ++y) {
            if (targets) {
                auto& s = surv_[idx];
                s.clear();
                if (first_in_block) {
                    for (int ti = 0; ti < static_cast<int>(tl->size()); ++ti) {
                        if ((*tl)[ti][0] >= y) s.push_back(ti);
                    }
                } else {
                    const int gap = y - phi_[idx - 1];
                    for (int ti : surv_[idx - 1]) {
                        const auto& t = (*tl)[ti];
                        if (t[local] - t[local - 1] >= gap) s.push_back(ti);
                    }
                }
                if (s.empty()) continue;
            }
            phi_[idx] = y;
            const int z = prev_map ? pre_[idx] : -1;
            if (z >= 0) {
                comp_[z - prev_lo] = y;
                if (!check_comp(z)) {
                    comp_[z - prev_lo] = -1;
                    continue;
                }
            }
            step(p + 1);
            if (z >= 0) comp_[z - prev_lo] = -1;
        }
        phi_[idx] = -1;
    }
};

CodingSequence to_sequence(const std::vector<std::pair<int, int>>& ivs, const std::vector<std::vector<int>>& maps,
                           Strength s) {
    CodingSequence seq;
    seq.strength = s;
    for (const auto& [a, b] : ivs) seq.intervals.push_back({a, b});
    for (std::size_t i = 0; i < maps.size(); ++i) {
        OrderMap m;
        m.domain = seq.intervals[i];
        m.image.assign(maps[i].begin(), maps[i].end());
        seq.maps.push_back(std::move(m));
    }
    return seq;
}

struct Exhaustive {
    const Window& w;
    const SearchOptions& opt;
    SearchResult& res;
    std::uint64_t budget;
    std::vector<std::pair<int, int>> ivs;
    std::vector<std::vector<int>> maps;

    void dfs() {
        if (res.truncated) return;
        if (!ivs.empty()) res.sequences.push_back(to_sequence(ivs, maps, opt.strength));
        if (ivs.size() >= opt.max_len) return;
        const int nb = w.blocks();
        for (int ba = 0; ba < nb; ++ba) {
            for (int bb = ba; bb < nb; ++bb) {
                const int a = w.block_lo(ba), b = w.block_hi(bb);
                if (ivs.empty()) {
                    ivs.push_back({a, b});
                    dfs();
                    ivs.pop_back();
                    continue;
                }
                const auto [plo, phi] = ivs.back();
                if (opt.strength == Strength::Strong && a <= phi) continue;
                if (b < phi || b - a < phi - plo) continue;
                MapBuilder mb(w);
                mb.lo = plo;
                mb.hi = phi;
                mb.y_min = a;
                mb.y_max = b;
                if (ivs.size() >= 2) {
                    mb.prev_lo = ivs[ivs.size() - 2].first;
                    mb.prev_hi = ivs[ivs.size() - 2].second;
                    mb.prev_map = &maps.back();
                }
                mb.need_nonpreserving = ivs.size() == 1;
                mb.node_budget = &budget;
                std::vector<std::vector<int>> found;
                mb.on_map = [&found](const std::vector<int>& m) {
                    found.push_back(m);
                    return false;
                };
                mb.run();
                for (auto& m : found) {
                    ivs.push_back({a, b});
                    maps.push_back(std::move(m));
                    dfs();
                    maps.pop_back();
                    ivs.pop_back();
                }
                if (budget == 0) {
                    res.truncated = true;
                    return;
                }
            }
        }
    }
};

// ---- normal-form tree -------------------------------------------------------------

class NFBuilder {
public:
    NFBuilder(const BlockFunction& f, std::size_t depth, std::size_t blocks, Strength strength, std::uint64_t cap)
        : w_(Window::of_blocks(f, blocks)), targets_(w_), cap_(cap) {
        tree_.strength = strength;
        tree_.depth_limit = depth;
        tree_.horizon_blocks = blocks;
        tree_.horizon = w_.elements();
    }

    NFTree build() {
        tree_.nodes.push_back(NFNode{});
        tree_.nodes[0].expanded = true;
        if (tree_.depth_limit == 0) {
            tree_.nodes[0].expanded = false;
        }
        for (int b = 0; b < w_.blocks() && tree_.depth_limit > 0; ++b) {
            NFNode n;
            n.parent = 0;
            n.length = 1;
            n.last = {w_.block_lo(b), w_.block_hi(b)};
            n.any_child = any_child(n);
            if (n.any_child) add(std::move(n));
        }
        tree_.nodes[0].any_child = !tree_.nodes[0].children.empty();
        for (std::size_t id = 1; id < tree_.nodes.size() && !tree_.truncated; ++id) {
            if (tree_.nodes[id].length >= tree_.depth_limit) continue;
            expand(static_cast<int>(id));
        }
        return std::move(tree_);
    }

private:
    Window w_;
    TargetCache targets_;
    std::uint64_t cap_;
    NFTree tree_;

    int strong_min(const NFNode& n) const {
        return tree_.strength == Strength::Strong ? static_cast<int>(n.last.hi) + 1 : 0;
    }

    void add(NFNode n) {
        if (tree_.nodes.size() >= cap_) {
            tree_.truncated = true;
            return;
        }
        const int id = static_cast<int>(tree_.nodes.size());
        tree_.nodes[n.parent].children.push_back(id);
        tree_.nodes.push_back(std::move(n));
    }

    std::vector<int> map_of(const NFNode& n) const { return {n.map.begin(), n.map.end()}; }

    void expand(int id) {
        NFNode& node = tree_.nodes[id];
        node.expanded = true;
        if (!node.any_child) return;
        const NFNode copy = node;
        std::vector<std::vector<int>> found;
        MapBuilder mb(w_);
        mb.lo = static_cast<int>(copy.last.lo);
        mb.hi = static_cast<int>(copy.last.hi);
        mb.y_min = strong_min(copy);
        mb.y_max = w_.elements() - 1;
        std::vector<int> prev;
        if (copy.length >= 2) {
            const NFNode& parent = tree_.nodes[copy.parent];
            mb.prev_lo = static_cast<int>(parent.last.lo);
            mb.prev_hi = static_cast<int>(parent.last.hi);
            prev = map_of(copy);
            mb.prev_map = &prev;
        }
        mb.need_nonpreserving = copy.length == 1;
        mb.targets = &targets_;
        mb.on_map = [&found](const std::vector<int>& m) {
            found.push_back(m);
            return false;
        };
        mb.run();
        for (auto& m : found) {
            NFNode child;
            child.parent = id;
            child.length = copy.length + 1;
            child.last = {w_.block_lo(w_.elem_block[m.front()]), w_.block_hi(w_.elem_block[m.back()])};
            child.map.assign(m.begin(), m.end());
            child.any_child = any_child(child);
            add(std::move(child));
            if (tree_.truncated) return;
        }
    }

    bool any_child(const NFNode& n) {
        if (n.length == 1) return nonpreserving_exists(n);
        const NFNode& parent = tree_.nodes[n.parent];
        return composite_feasible(parent.last, n.map, n.last, strong_min(n));
    }

    bool nonpreserving_exists(const NFNode& n) {
        std::uint64_t budget = 200000;
        MapBuilder mb(w_);
        mb.lo = static_cast<int>(n.last.lo);
        mb.hi = static_cast<int>(n.last.hi);
        mb.y_min = strong_min(n);
        mb.y_max = w_.elements() - 1;
        mb.need_nonpreserving = true;
        mb.node_budget = &budget;
        bool found = false;
        mb.on_map = [&found](const std::vector<int>&) {
            found = true;
            return true;
        };
        mb.run();
        if (!found && budget == 0) tree_.truncated = true;
        return found;
    }

    // Is there a next map whose composite with `map` sends every block of the
    // previous interval onto an embedding target, all values respecting order?
    bool composite_feasible(Interval prev, const std::vector<std::int64_t>& map, Interval cur, int smin) {
        struct Part {
            int z_lo, z_hi;
            const std::vector<std::vector<int>>* targets;
        };
        std::vector<Part> parts;
        for (int z = static_cast<int>(prev.lo); z <= prev.hi;) {
            const int b = w_.elem_block[z];
            parts.push_back({w_.block_lo(b), w_.block_hi(b), &targets_.of(w_.types[b])});
            z = w_.block_hi(b) + 1;
        }
        const int plo = static_cast<int>(prev.lo);
        const int last_pos = static_cast<int>(cur.hi);
        const int top = w_.elements() - 1;
        // Greedy placement of free points is optimal, so a DFS over targets suffices.
        std::function<bool(std::size_t, int, int)> go = [&](std::size_t k, int pos, int val) -> bool {
            if (k == parts.size()) {
                for (int p = pos; p <= last_pos; ++p) {
                    val = std::max({p, val + 1, smin});
                    if (val > top) return false;
                }
                return true;
            }
            const Part& part = parts[k];
            const int m = part.z_hi - part.z_lo + 1;
            for (const auto& t : *part.targets) {
                bool ok = true;
                int v = val;
                int p = pos;
                for (int j = 0; j < m && ok; ++j) {
                    const int q = static_cast<int>(map[part.z_lo + j - plo]);
                    for (; p < q; ++p) v = std::max({p, v + 1, smin});
                    if (t[j] <= v || t[j] < q || t[j] < smin) ok = false;
                    if (j > 0 && t[j] - t[j - 1] < q - static_cast<int>(map[part.z_lo + j - 1 - plo])) ok = false;
                    v = t[j];
                    p = q + 1;
                }
                if (ok && go(k + 1, p, v)) return true;
            }
            return false;
        };
        return go(0, static_cast<int>(cur.lo), -1);
    }
};

}  // namespace

SearchResult search(const BlockFunction& f, const SearchOptions& opt) {
    SearchResult res;
    const Window w = Window::of_elements(f, opt.horizon);
    Exhaustive ex{w, opt, res, opt.node_cap, {}, {}};
    ex.dfs();
    res.nodes = opt.node_cap - ex.budget;
    std::sort(res.sequences.begin(), res.sequences.end(), canonical_less);
    return res;
}

CodingSequence NFTree::sequence(int id) const {
    std::vector<int> chain;
    for (int x = id; x > 0; x = nodes[x].parent) chain.push_back(x);
    std::reverse(chain.begin(), chain.end());
    CodingSequence seq;
    seq.strength = strength;
    for (std::size_t i = 0; i < chain.size(); ++i) {
        const NFNode& n = nodes[chain[i]];
        seq.intervals.push_back(n.last);
        if (i > 0) {
            OrderMap m;
            m.domain = nodes[chain[i - 1]].last;
            m.image = n.map;
            seq.maps.push_back(std::move(m));
        }
    }
    return seq;
}

std::size_t NFTree::max_length() const {
    std::size_t best = 0;
    for (const auto& n : nodes) best = std::max(best, n.length + (n.any_child ? 1 : 0));
    return best;
}

std::vector<int> NFTree::unknown_frontier() const {
    std::vector<int> out;
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        if (nodes[i].any_child && !nodes[i].expanded) out.push_back(static_cast<int>(i));
    }
    return out;
}

NFTree normal_form_tree(const BlockFunction& f, std::size_t depth_limit, std::size_t horizon_blocks,
                        Strength strength, std::uint64_t node_cap) {
    return NFBuilder(f, depth_limit, horizon_blocks, strength, node_cap).build();
}

}  // namespace blockfn
