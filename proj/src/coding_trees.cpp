#include "blockfn/coding_trees.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <sstream>

#include <json.hpp>

namespace blockfn {

std::string OrdinalValue::str() const {
    if (omega_coeff == 0) return std::to_string(finite);
    std::string s = omega_coeff == 1 ? "w" : "w*" + std::to_string(omega_coeff);
    if (finite > 0) s += "+" + std::to_string(finite);
    return s;
}

// ---- maximal tree ----------------------------------------------------------------

NFTree max_tree(const BlockFunction& f, std::size_t depth, std::size_t horizon_blocks) {
    return normal_form_tree(f, depth, horizon_blocks, Strength::Weak);
}

TreeRank tree_rank(const NFTree& tree) {
    TreeRank out;
    const std::size_t n = tree.nodes.size();
    out.node_rank.assign(n, -1);
    out.unresolved = tree.unknown_frontier();
    if (tree.truncated && out.unresolved.empty()) out.unresolved.push_back(0);
    // children always have larger ids
    for (std::size_t i = n; i-- > 0;) {
        const NFNode& node = tree.nodes[i];
        if (node.any_child && !node.expanded) continue;
        int r = i > 0 && node.any_child ? 1 : 0;
        bool known = true;
        for (int c : node.children) {
            if (out.node_rank[c] < 0) known = false;
            r = std::max(r, out.node_rank[c] + 1);
        }
        if (known) out.node_rank[i] = r;
    }
    if (out.unresolved.empty() && out.node_rank[0] >= 0) {
        out.root = OrdinalValue::of(static_cast<std::uint64_t>(out.node_rank[0]));
    }
    return out;
}

std::string dump_fragment(const NFTree& tree, const std::vector<int>& ranks) {
    std::ostringstream os;
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        const NFNode& n = tree.nodes[i];
        nlohmann::json j;
        j["id"] = i;
        j["parent"] = n.parent;
        j["length"] = n.length;
        if (i > 0) {
            j["last"] = {n.last.lo, n.last.hi};
        } else {
            j["last"] = nullptr;
        }
        j["rank"] = i < ranks.size() ? ranks[i] : -1;
        j["any_child"] = n.any_child;
        j["expanded"] = n.expanded;
        os << j.dump() << '\n';
    }
    return os.str();
}

// ---- permits ------------------------------------------------------------------------

namespace {

struct Candidate {
    std::vector<std::int64_t> image;
};

void require_siblings(const CodingSequence& a, const CodingSequence& b) {
    const std::size_t n = a.length();
    if (n == 0 || b.length() != n) throw BlockError("permits needs two nonempty sequences of equal length");
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (!(a.intervals[i] == b.intervals[i])) throw BlockError("sequences differ before the last interval");
    }
    for (std::size_t i = 0; i + 2 < n; ++i) {
        if (!(a.maps[i] == b.maps[i])) throw BlockError("sequences differ before the last map");
    }
}

}  // namespace

std::optional<OrderMap> permits(const BlockFunction& f, const CodingSequence& from, const CodingSequence& to) {
    FView fv(f);
    return permits(fv, from, to);
}

std::optional<OrderMap> permits(FView& fv, const CodingSequence& from, const CodingSequence& to) {
    require_siblings(from, to);
    const std::size_t n = from.length();
    const Interval src = from.intervals.back();
    const Interval dst = to.intervals.back();
    if (dst.lo <= src.lo) return std::nullopt;

    std::map<std::int64_t, std::int64_t> forced;
    if (n >= 2) {
        const OrderMap& a = from.maps.back();
        const OrderMap& b = to.maps.back();
        for (std::int64_t z = a.domain.lo; z <= a.domain.hi; ++z) forced[a(z)] = b(z);
    }
    std::vector<PlacedBlock> targets;
    for (std::int64_t x = dst.lo; x <= dst.hi;) {
        PlacedBlock b = fv.block(x);
        targets.push_back(b);
        x = b.interval.hi + 1;
    }
    std::vector<std::vector<Candidate>> options;
    for (std::int64_t x = src.lo; x <= src.hi;) {
        const PlacedBlock d = fv.block(x);
        std::vector<Candidate> opts;
        for (const auto& e : targets) {
            for (const auto& w : embeds_all(*d.type, *e.type, 256)) {
                Candidate c;
                bool ok = true;
                for (std::size_t i = 0; i < w.size() && ok; ++i) {
                    const std::int64_t pos = d.interval.lo + static_cast<std::int64_t>(i);
                    const std::int64_t y = e.interval.lo + w[i];
                    if (y < pos) ok = false;
                    auto it = forced.find(pos);
                    if (it != forced.end() && it->second != y) ok = false;
                    c.image.push_back(y);
                }
                if (ok) opts.push_back(std::move(c));
            }
        }
        std::sort(opts.begin(), opts.end(), [](const Candidate& a, const Candidate& b) { return a.image < b.image; });
        options.push_back(std::move(opts));
        x = d.interval.hi + 1;
    }
    std::vector<std::int64_t> image;
    std::function<bool(std::size_t, std::int64_t)> go = [&](std::size_t k, std::int64_t floor) -> bool {
        if (k == options.size()) return true;
        for (const auto& c : options[k]) {
            if (c.image.front() <= floor) continue;
            const std::size_t mark = image.size();
            image.insert(image.end(), c.image.begin(), c.image.end());
            if (go(k + 1, c.image.back())) return true;
            image.resize(mark);
        }
        return false;
    };
    if (!go(0, -1)) return std::nullopt;
    OrderMap psi;
    psi.domain = src;
    psi.image = std::move(image);
    return psi;
}

std::optional<PermittedMove> find_permitted(const BlockFunction& f, const CodingSequence& seq,
                                            std::int64_t min_start, std::size_t horizon_blocks) {
    if (seq.length() == 0) throw BlockError("find_permitted needs a nonempty sequence");
    FView fv(f);
    const Interval src = seq.intervals.back();
    std::int64_t floor = std::max(min_start, src.lo + 1);
    std::vector<std::int64_t> image;
    std::int64_t first_lo = -1, last_hi = -1;
    for (std::int64_t x = src.lo; x <= src.hi;) {
        const PlacedBlock d = fv.block(x);
        bool placed = false;
        for (std::int64_t y = floor; !placed;) {
            const PlacedBlock e = fv.block(y);
            if (e.block_index >= horizon_blocks) return std::nullopt;
            if (e.interval.lo < floor) {
                y = e.interval.hi + 1;
                continue;
            }
            if (auto w = embeds(*d.type, *e.type)) {
                for (int v : *w) image.push_back(e.interval.lo + v);
                if (first_lo < 0) first_lo = e.interval.lo;
                last_hi = e.interval.hi;
                floor = e.interval.hi + 1;
                placed = true;
            }
            y = e.interval.hi + 1;
        }
        x = d.interval.hi + 1;
    }
    PermittedMove out;
    out.psi.domain = src;
    out.psi.image = std::move(image);
    out.seq = seq;
    out.seq.intervals.back() = {first_lo, last_hi};
    if (seq.length() >= 2) out.seq.maps.back() = seq.maps.back().then(out.psi);
    return out;
}

// ---- minimal tree ----------------------------------------------------------------

namespace {

struct ShapeKey {
    int parent;
    std::vector<const BlockType*> types;
    std::vector<std::int64_t> rel;
    bool operator<(const ShapeKey& o) const {
        if (parent != o.parent) return parent < o.parent;
        if (types.size() != o.types.size()) return types.size() < o.types.size();
        for (std::size_t i = 0; i < types.size(); ++i) {
            if (*types[i] != *o.types[i]) return *types[i] < *o.types[i];
        }
        return rel < o.rel;
    }
};

}  // namespace

MinRankResult min_rank(const BlockFunction& f, std::size_t depth, std::size_t horizon_blocks) {
    MinRankResult out;
    out.tree = normal_form_tree(f, depth, horizon_blocks, Strength::Strong);
    const NFTree& tree = out.tree;
    if (tree.truncated) throw BlockError("minimal tree fragment truncated");
    if (!tree.unknown_frontier().empty()) throw BlockError("unresolved frontier: raise the depth");
    const std::size_t n = tree.nodes.size();
    const Window w = Window::of_blocks(f, horizon_blocks);
    FView fv(f);

    std::vector<int> single_block(n, 0);
    std::map<ShapeKey, std::vector<int>> classes;
    std::vector<const std::vector<int>*> class_of(n, nullptr);
    for (std::size_t i = 1; i < n; ++i) {
        const NFNode& node = tree.nodes[i];
        ShapeKey key;
        key.parent = node.parent;
        for (std::int64_t x = node.last.lo; x <= node.last.hi; x = w.block_hi(w.elem_block[x]) + 1) {
            key.types.push_back(w.types[w.elem_block[x]].get());
        }
        for (std::int64_t y : node.map) key.rel.push_back(y - node.last.lo);
        single_block[i] = key.types.size() == 1;
        classes[key].push_back(static_cast<int>(i));
    }
    for (auto& [key, ids] : classes) {
        for (int id : ids) class_of[id] = &ids;
    }
    const bool all_recur = f.holds(FlagName::AllRecur) || f.gen->runs_recur();
    auto recurrent = [&](int id) { return f.gen->runs_recur() || (single_block[id] && all_recur); };

    out.node_rank.assign(n, 0);
    out.node_rank[0] = -1;
    out.certified.assign(n, false);
    std::vector<bool> in_m(n, true);
    in_m[0] = false;
    for (int k = 0;; ++k) {
        std::vector<bool> good(n, false);
        for (std::size_t i = 1; i < n; ++i) {
            const NFNode& node = tree.nodes[i];
            if (k == 0) {
                good[i] = node.any_child;
            } else {
                for (int c : node.children) good[i] = good[i] || in_m[c];
            }
        }
        std::vector<bool> next(n, false);
        bool any = false;
        for (std::size_t i = 1; i < n; ++i) {
            if (!good[i] || !recurrent(static_cast<int>(i))) continue;
            // A good later translate: iterating the translation gives an infinite chain.
            bool later_good = false;
            for (int t : *class_of[i]) {
                if (tree.nodes[t].last.lo > tree.nodes[i].last.lo && good[t]) later_good = true;
            }
            if (later_good) {
                next[i] = true;
                out.certified[i] = true;
                any = true;
            }
        }
        // Close under permitting a certified sibling.
        for (bool changed = any; changed;) {
            changed = false;
            for (std::size_t i = 1; i < n; ++i) {
                if (!good[i] || next[i]) continue;
                const NFNode& node = tree.nodes[i];
                const CodingSequence from = tree.sequence(static_cast<int>(i));
                for (int s : tree.nodes[node.parent].children) {
                    if (!next[s] || tree.nodes[s].last.lo <= node.last.lo) continue;
                    if (tree.nodes[s].last.size() < node.last.size()) continue;
                    if (permits(fv, from, tree.sequence(s))) {
                        next[i] = true;
                        changed = true;
                        break;
                    }
                }
            }
        }
        if (!any) break;
        for (std::size_t i = 1; i < n; ++i) {
            if (next[i]) out.node_rank[i] = k + 1;
        }
        in_m = next;
    }
    std::uint64_t root = 0;
    for (std::size_t i = 1; i < n; ++i) {
        if (tree.nodes[i].length == 1) root = std::max<std::uint64_t>(root, out.node_rank[i] + 1);
    }
    out.root = OrdinalValue::of(root);
    return out;
}

// ---- pair tree ----------------------------------------------------------------------

namespace {

bool strict_prefix(const IntString& a, const IntString& b) {
    return a.size() < b.size() && std::equal(a.begin(), a.end(), b.begin());
}

int claim_bound(int r, bool last_of_side) {
    // the node's own last entry bounds by r+1 (even) or r (odd); the other side's
    // last entry bounds by r (even) or r-1 (odd)
    if (last_of_side) return r % 2 == 0 ? r + 1 : r;
    return r % 2 == 0 ? r : r - 1;
}

}  // namespace

PairTreeReport pair_tree_rank(const RankedTree& tree) {
    tree.validate_parity();
    const std::vector<IntString> nodes = tree.nonroot_nodes();
    const int m = static_cast<int>(nodes.size());
    std::vector<int> rank(m);
    for (int i = 0; i < m; ++i) rank[i] = tree.rank.at(nodes[i]);

    // state: last first-side entry, last second-side entry, whose turn; -1 = none
    struct Memo {
        int rank_star;
        std::uint64_t count;
    };
    std::map<std::tuple<int, int, int>, Memo> memo;
    PairTreeReport rep;

    std::function<Memo(int, int, int)> visit = [&](int s, int t, int turn) -> Memo {
        auto key = std::make_tuple(s, t, turn);
        auto it = memo.find(key);
        if (it != memo.end()) return it->second;
        Memo res{0, 1};
        const int cur = turn == 0 ? s : t;
        for (int c = 0; c < m; ++c) {
            bool ok;
            if (cur < 0) {
                ok = true;
            } else {
                ok = strict_prefix(nodes[cur], nodes[c]) && nodes[cur].size() % 2 == nodes[c].size() % 2;
            }
            if (!ok) continue;
            const Memo child = turn == 0 ? visit(c, t, 1) : visit(s, c, 0);
            res.rank_star = std::max(res.rank_star, child.rank_star + 1);
            res.count += child.count;
        }
        // Claim inequalities for the node whose last entry was just placed.
        if (s >= 0 || t >= 0) {
            const bool last_was_first = turn == 1;
            const int own = last_was_first ? s : t;
            const int other = last_was_first ? t : s;
            const int b1 = claim_bound(rank[own], true);
            ++rep.claim_checks;
            if (res.rank_star > b1) {
                rep.violations.push_back("node ending at rank " + std::to_string(rank[own]) + ": rank* " +
                                         std::to_string(res.rank_star) + " > " + std::to_string(b1));
            }
            if (other >= 0) {
                const int b2 = claim_bound(rank[other], false);
                ++rep.claim_checks;
                if (res.rank_star > b2) {
                    rep.violations.push_back("node with other side at rank " + std::to_string(rank[other]) +
                                             ": rank* " + std::to_string(res.rank_star) + " > " + std::to_string(b2));
                }
            }
        }
        memo.emplace(key, res);
        return res;
    };
    const Memo root = visit(-1, -1, 0);
    ++rep.claim_checks;
    if (root.rank_star > tree.root_rank()) {
        rep.violations.push_back("root rank* " + std::to_string(root.rank_star) + " exceeds " +
                                 std::to_string(tree.root_rank()));
    }
    rep.rank_star = OrdinalValue::of(static_cast<std::uint64_t>(root.rank_star));
    rep.nodes = root.count;
    return rep;
}

}  // namespace blockfn
