#include "blockfn/core_blocks.hpp"

#include <algorithm>
#include <mutex>
#include <numeric>
#include <set>
#include <sstream>

namespace blockfn {

std::strong_ordering BlockType::operator<=>(const BlockType& other) const {
    if (auto c = map.size() <=> other.map.size(); c != 0) return c;
    return map <=> other.map;
}

bool is_closed_map(const BlockType& t) {
    const int k = t.size();
    return std::all_of(t.map.begin(), t.map.end(), [k](int v) { return v >= 0 && v < k; });
}

bool is_indecomposable(const BlockType& t) {
    const int k = t.size();
    if (k == 0 || !is_closed_map(t)) return false;
    // prefix [0,j) is closed iff max(map[0..j)) < j and min(map[j..k)) >= j
    std::vector<int> suffix_min(k + 1, k);
    for (int x = k - 1; x >= 0; --x) suffix_min[x] = std::min(suffix_min[x + 1], t.map[x]);
    int prefix_max = -1;
    for (int j = 1; j < k; ++j) {
        prefix_max = std::max(prefix_max, t.map[j - 1]);
        if (prefix_max < j && suffix_min[j] >= j) return false;
    }
    return true;
}

void check_block_type(const BlockType& t) {
    if (t.size() == 0) throw BlockError("block type of size 0");
    if (!is_closed_map(t)) throw BlockError("block type map leaves [0,k)");
    if (!is_indecomposable(t)) throw BlockError("block type splits into a closed prefix");
}

BlockType loop_type(int k) {
    if (k < 1) throw BlockError("loop length must be positive");
    BlockType t;
    t.map.resize(k);
    for (int x = 0; x < k; ++x) t.map[x] = (x + 1) % k;
    return t;
}

TypeRef loop_ref(int k) {
    if (k > 4096) return std::make_shared<const BlockType>(loop_type(k));
    static std::mutex mu;
    static std::map<int, TypeRef> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(k);
    if (it != cache.end()) return it->second;
    auto ref = std::make_shared<const BlockType>(loop_type(k));
    cache.emplace(k, ref);
    return ref;
}

TypeRef make_ref(BlockType t) { return std::make_shared<const BlockType>(std::move(t)); }

std::vector<int> cycle_signature(const BlockType& t) {
    const int k = t.size();
    std::vector<int> state(k, 0);  // 0 unseen, 1 on current walk, 2 done
    std::vector<int> out;
    for (int s = 0; s < k; ++s) {
        if (state[s]) continue;
        std::vector<int> walk;
        int x = s;
        while (state[x] == 0) {
            state[x] = 1;
            walk.push_back(x);
            x = t.map[x];
        }
        if (state[x] == 1) {
            int len = 1;
            for (int y = t.map[x]; y != x; y = t.map[y]) ++len;
            out.push_back(len);
        }
        for (int w : walk) state[w] = 2;
    }
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

bool sub_multiset(const std::vector<int>& small, const std::vector<int>& big) {
    std::size_t j = 0;
    for (int v : small) {
        while (j < big.size() && big[j] < v) ++j;
        if (j == big.size() || big[j] != v) return false;
        ++j;
    }
    return true;
}

struct EmbedSearch {
    const BlockType& from;
    const BlockType& into;
    std::vector<std::vector<int>> preimages;
    std::vector<int> w;
    std::vector<int> forced;
    std::vector<std::vector<int>>* collect = nullptr;
    std::size_t cap = 0;

    EmbedSearch(const BlockType& a, const BlockType& b)
        : from(a), into(b), preimages(a.size()), w(a.size(), -1), forced(a.size(), -1) {
        for (int x = 0; x < a.size(); ++x) preimages[a.map[x]].push_back(x);
    }

    bool consistent(int x, int y) const {
        const int fx = from.map[x];
        if (fx <= x) {
            const int target = fx == x ? y : w[fx];
            if (into.map[y] != target) return false;
        }
        for (int z : preimages[x]) {
            if (z < x && into.map[w[z]] != y) return false;
        }
        return true;
    }

    bool run(int x, int lo) {
        const int k = from.size();
        const int m = into.size();
        if (x == k) {
            if (!collect) return true;
            collect->push_back(w);
            return collect->size() >= cap;
        }
        const int hi = m - (k - x);
        int first = lo;
        int last = hi;
        if (forced[x] >= 0) {
            if (forced[x] < lo || forced[x] > hi) return false;
            first = last = forced[x];
        }
        for (int y = first; y <= last; ++y) {
            if (!consistent(x, y)) continue;
            const int fx = from.map[x];
            bool set_forced = false;
            if (fx > x) {
                const int v = into.map[y];
                if (v <= y) continue;
                if (forced[fx] >= 0 && forced[fx] != v) continue;
                if (forced[fx] < 0) {
                    forced[fx] = v;
                    set_forced = true;
                }
            }
            w[x] = y;
            if (run(x + 1, y + 1)) return true;
            w[x] = -1;
            if (set_forced) forced[fx] = -1;
        }
        return false;
    }
};

}  // namespace

std::optional<std::vector<int>> embeds(const BlockType& from, const BlockType& into) {
    if (from.size() > into.size()) return std::nullopt;
    if (!sub_multiset(cycle_signature(from), cycle_signature(into))) return std::nullopt;
    EmbedSearch s(from, into);
    if (!s.run(0, 0)) return std::nullopt;
    return s.w;
}

std::vector<std::vector<int>> embeds_all(const BlockType& from, const BlockType& into, std::size_t cap) {
    std::vector<std::vector<int>> out;
    if (from.size() > into.size() || cap == 0) return out;
    if (!sub_multiset(cycle_signature(from), cycle_signature(into))) return out;
    EmbedSearch s(from, into);
    s.collect = &out;
    s.cap = cap;
    s.run(0, 0);
    return out;
}

std::vector<BlockType> enumerate_types(int k) {
    if (k < 1 || k > 8) throw BlockError("enumerate_types supports sizes 1..8");
    std::vector<BlockType> out;
    BlockType t;
    t.map.assign(k, 0);
    while (true) {
        if (is_indecomposable(t)) out.push_back(t);
        int pos = k - 1;
        while (pos >= 0 && t.map[pos] == k - 1) {
            t.map[pos] = 0;
            --pos;
        }
        if (pos < 0) break;
        ++t.map[pos];
    }
    return out;
}

// ---- numbering -------------------------------------------------------------

std::uint64_t cantor_pair(std::uint64_t a, std::uint64_t b) {
    const std::uint64_t s = a + b;
    return s * (s + 1) / 2 + b;
}

std::uint64_t pairing_number(const IntString& s) {
    std::uint64_t v = 0;
    for (std::uint64_t n : s) {
        if (v > (1ULL << 30) || n > (1ULL << 30)) throw BlockError("string number overflow");
        v = cantor_pair(v, n) + 1;
    }
    return v;
}

std::uint64_t Numbering::operator()(const IntString& s) const {
    auto it = explicit_entries.find(s);
    if (it != explicit_entries.end()) return it->second;
    return pairing_number(s);
}

namespace {
constexpr std::uint64_t kMaxLoopExponent = 24;

std::int64_t loop_len_for(const IntString& prefix, const Numbering& ell) {
    const std::uint64_t e = ell(prefix) + 2;
    if (e > kMaxLoopExponent) throw BlockError("sandwich loop 2^" + std::to_string(e) + " too large to materialize");
    return std::int64_t{1} << e;
}
}  // namespace

std::int64_t sandwich_size(const IntString& sigma, const Numbering& ell) {
    if (sigma.empty()) throw BlockError("sandwich block of the empty string");
    std::int64_t total = 4;
    for (std::size_t i = 1; i <= sigma.size(); ++i) {
        total += loop_len_for(IntString(sigma.begin(), sigma.begin() + i), ell);
    }
    return total;
}

BlockType sandwich_block(const IntString& sigma, const Numbering& ell) {
    const std::int64_t size = sandwich_size(sigma, ell);
    BlockType t;
    t.map.resize(size);
    int pos = 1;
    for (std::size_t i = 1; i <= sigma.size(); ++i) {
        const int len = static_cast<int>(loop_len_for(IntString(sigma.begin(), sigma.begin() + i), ell));
        for (int x = 0; x < len; ++x) t.map[pos + x] = pos + (x + 1) % len;
        pos += len;
    }
    const int x1 = pos, x2 = pos + 1, x3 = pos + 2;
    t.map[0] = x3;
    t.map[x3] = x2;
    t.map[x2] = x1;
    t.map[x1] = sigma.size() % 2 == 0 ? x1 : x2;
    return t;
}

// ---- ranked trees ------------------------------------------------------------

int RankedTree::root_rank() const {
    auto it = rank.find(IntString{});
    if (it == rank.end()) throw BlockError("tree has no root");
    return it->second;
}

std::vector<IntString> RankedTree::children(const IntString& s) const {
    std::vector<IntString> out;
    for (auto it = rank.upper_bound(s); it != rank.end(); ++it) {
        const IntString& n = it->first;
        if (n.size() < s.size() || !std::equal(s.begin(), s.end(), n.begin())) break;
        if (n.size() == s.size() + 1) out.push_back(n);
    }
    return out;
}

std::vector<IntString> RankedTree::nonroot_nodes() const {
    std::vector<IntString> out;
    for (const auto& [n, r] : rank) {
        if (!n.empty()) out.push_back(n);
    }
    std::stable_sort(out.begin(), out.end(), [](const IntString& a, const IntString& b) {
        if (a.size() != b.size()) return a.size() < b.size();
        return a < b;
    });
    return out;
}

void RankedTree::validate_parity() const {
    if (!contains({})) throw BlockError("tree has no root");
    if (root_rank() % 2 != 0) throw BlockError("root rank must be even");
    for (const auto& [n, r] : rank) {
        if (r < 0) throw BlockError("negative rank");
        if (static_cast<int>(n.size() % 2) != r % 2) {
            throw BlockError("rank parity differs from depth parity");
        }
        if (!n.empty()) {
            IntString parent(n.begin(), n.end() - 1);
            auto it = rank.find(parent);
            if (it == rank.end()) throw BlockError("node set is not prefix closed");
            if (it->second <= r) throw BlockError("rank does not decrease along an edge");
        }
    }
}

std::map<IntString, int> RankedTree::true_ranks() const {
    std::map<IntString, int> out;
    // longest strings first so children are ready before parents
    std::vector<IntString> order;
    for (const auto& [n, r] : rank) order.push_back(n);
    std::stable_sort(order.begin(), order.end(),
                     [](const IntString& a, const IntString& b) { return a.size() > b.size(); });
    for (const auto& n : order) {
        int best = 0;
        for (const auto& c : children(n)) best = std::max(best, out.at(c) + 1);
        out[n] = best;
    }
    return out;
}

RankedTree RankedTree::path(int r) {
    RankedTree t;
    IntString s;
    for (int k = 0; k <= r; ++k) {
        t.rank[s] = r - k;
        s.push_back(0);
    }
    return t;
}

Numbering tree_numbering(const RankedTree& t) {
    Numbering n;
    std::uint64_t i = 1;
    for (const auto& s : t.nonroot_nodes()) n.explicit_entries[s] = i++;
    return n;
}

// ---- flags -----------------------------------------------------------------------

const char* to_string(FlagStatus s) {
    switch (s) {
        case FlagStatus::Undeclared: return "undeclared";
        case FlagStatus::Declared: return "declared";
        case FlagStatus::Verified: return "verified";
        case FlagStatus::Falsified: return "falsified";
    }
    return "?";
}

FlagStatus flag_status_from_string(const std::string& s) {
    if (s == "undeclared") return FlagStatus::Undeclared;
    if (s == "declared") return FlagStatus::Declared;
    if (s == "verified") return FlagStatus::Verified;
    if (s == "falsified") return FlagStatus::Falsified;
    throw BlockError("unknown flag status '" + s + "'");
}

const std::vector<FlagName>& all_flag_names() {
    static const std::vector<FlagName> names = {
        FlagName::AllRecur, FlagName::EmbedsLaterCofinite, FlagName::InfinitelyManyIsolated,
        FlagName::AdjacencyUnique, FlagName::DistinctSizes, FlagName::Rigid, FlagName::IdentityAe};
    return names;
}

const char* to_string(FlagName f) {
    switch (f) {
        case FlagName::AllRecur: return "all_recur";
        case FlagName::EmbedsLaterCofinite: return "embeds_later_cofinite";
        case FlagName::InfinitelyManyIsolated: return "infinitely_many_isolated";
        case FlagName::AdjacencyUnique: return "adjacency_unique";
        case FlagName::DistinctSizes: return "distinct_sizes";
        case FlagName::Rigid: return "rigid";
        case FlagName::IdentityAe: return "identity_ae";
    }
    return "?";
}

FlagName flag_name_from_string(const std::string& s) {
    for (FlagName f : all_flag_names()) {
        if (s == to_string(f)) return f;
    }
    throw BlockError("unknown flag '" + s + "'");
}

FlagStatus BlockFunction::status(FlagName f) const {
    auto it = flags.find(f);
    return it == flags.end() ? FlagStatus::Undeclared : it->second.status;
}

bool BlockFunction::holds(FlagName f) const {
    const FlagStatus s = status(f);
    return s == FlagStatus::Declared || s == FlagStatus::Verified;
}

// ---- positions --------------------------------------------------------------------

PlacedBlock block_of(const BlockFunction& f, std::int64_t n) {
    if (n < 0) throw BlockError("negative position");
    std::int64_t lo = 0;
    for (std::size_t i = 0;; ++i) {
        TypeRef t = f.type_at(i);
        const std::int64_t hi = lo + t->size() - 1;
        if (n <= hi) return PlacedBlock{{lo, hi}, i, t};
        lo = hi + 1;
    }
}

std::int64_t f_value(const BlockFunction& f, std::int64_t n) {
    PlacedBlock b = block_of(f, n);
    return b.interval.lo + b.type->map[n - b.interval.lo];
}

std::vector<PlacedBlock> blocks_of_prefix(const BlockFunction& f, std::size_t m) {
    std::vector<PlacedBlock> out;
    out.reserve(m);
    std::int64_t lo = 0;
    for (std::size_t i = 0; i < m; ++i) {
        TypeRef t = f.type_at(i);
        out.push_back(PlacedBlock{{lo, lo + t->size() - 1}, i, t});
        lo += t->size();
    }
    return out;
}

BlockTable BlockTable::of_types(const std::vector<TypeRef>& types) {
    BlockTable table;
    std::vector<TypeRef> sorted = types;
    std::sort(sorted.begin(), sorted.end(), [](const TypeRef& a, const TypeRef& b) { return *a < *b; });
    for (const auto& t : sorted) {
        if (table.entries.empty() || !(*table.entries.back() == *t)) table.entries.push_back(t);
    }
    return table;
}

std::size_t BlockTable::index_of(const BlockType& t) const {
    auto it = std::lower_bound(entries.begin(), entries.end(), t,
                               [](const TypeRef& a, const BlockType& b) { return *a < b; });
    if (it == entries.end() || !(**it == t)) throw BlockError("type not in table");
    return static_cast<std::size_t>(it - entries.begin());
}

BlockTable table_for_prefix(const BlockFunction& f, std::size_t m) {
    std::vector<TypeRef> types;
    types.reserve(m);
    for (std::size_t i = 0; i < m; ++i) types.push_back(f.type_at(i));
    BlockTable table = BlockTable::of_types(types);
    if (const RankedTree* t = tree_of(*f.gen)) table.godel = tree_numbering(*t);
    return table;
}

std::vector<std::size_t> alpha_string(const BlockFunction& f, std::size_t m, const BlockTable& table) {
    std::vector<std::size_t> out;
    out.reserve(m);
    for (std::size_t i = 0; i < m; ++i) out.push_back(table.index_of(*f.type_at(i)));
    return out;
}

std::vector<std::size_t> alpha_string(const BlockFunction& f, std::size_t m) {
    return alpha_string(f, m, table_for_prefix(f, m));
}

std::vector<std::size_t> counting_prefix(const BlockFunction& f, std::size_t m) {
    BlockTable table = table_for_prefix(f, m);
    std::vector<std::size_t> counts(table.entries.size(), 0);
    for (std::size_t idx : alpha_string(f, m, table)) ++counts[idx];
    return counts;
}

Window Window::of_blocks(const BlockFunction& f, std::size_t m) {
    Window w;
    w.start.push_back(0);
    for (std::size_t i = 0; i < m; ++i) {
        TypeRef t = f.type_at(i);
        const int lo = static_cast<int>(w.start.back());
        for (int x = 0; x < t->size(); ++x) {
            w.elem_block.push_back(static_cast<int>(i));
            w.fval.push_back(lo + t->map[x]);
        }
        w.types.push_back(t);
        w.start.push_back(lo + t->size());
    }
    return w;
}

Window Window::of_elements(const BlockFunction& f, std::int64_t n) {
    std::size_t m = 0;
    std::int64_t total = 0;
    while (true) {
        const std::int64_t s = f.type_at(m)->size();
        if (total + s > n) break;
        total += s;
        ++m;
    }
    return of_blocks(f, m);
}

// ---- flag verification ------------------------------------------------------------

namespace {

struct TypeLess {
    bool operator()(const TypeRef& a, const TypeRef& b) const { return *a < *b; }
};

bool is_identity_type(const BlockType& t) { return t.size() == 1; }

constexpr std::int64_t kScanElementBudget = 50'000'000;

}  // namespace

FlagReport verify_flags(const BlockFunction& f, std::size_t horizon, std::size_t scan_limit) {
    if (scan_limit == 0) scan_limit = std::min<std::size_t>(4 * horizon * horizon + 64, 400000);
    scan_limit = std::max(scan_limit, horizon);
    FlagReport rep;
    rep.flags = f.flags;
    const BlockTable table = table_for_prefix(f, horizon);
    const std::size_t ntypes = table.entries.size();
    std::vector<std::size_t> alpha = alpha_string(f, horizon, table);

    // Later occurrences of every type seen in the horizon.
    rep.type_recurs.assign(ntypes, false);
    rep.type_embeds_later.assign(ntypes, false);
    std::vector<std::size_t> last_seen(ntypes, 0);
    for (std::size_t i = 0; i < horizon; ++i) last_seen[alpha[i]] = i;
    {
        std::map<TypeRef, std::size_t, TypeLess> pending;
        for (std::size_t k = 0; k < ntypes; ++k) pending.emplace(table.entries[k], k);
        std::map<TypeRef, std::vector<int>, TypeLess> later_types;
        std::int64_t elements = 0;
        for (std::size_t i = 0; i < horizon; ++i) elements += f.type_at(i)->size();
        for (std::size_t i = horizon; i < scan_limit && !pending.empty() && elements < kScanElementBudget; ++i) {
            TypeRef t = f.type_at(i);
            elements += t->size();
            auto it = pending.find(t);
            if (it != pending.end()) {
                rep.type_recurs[it->second] = true;
                rep.type_embeds_later[it->second] = true;
                pending.erase(it);
            }
            if (later_types.size() < 4096 && !later_types.count(t)) later_types.emplace(t, cycle_signature(*t));
        }
        // Types that did not recur: look for a distinct later type receiving an embedding.
        std::vector<std::vector<int>> horizon_sigs;
        for (const auto& t : table.entries) horizon_sigs.push_back(cycle_signature(*t));
        for (std::size_t k = 0; k < ntypes; ++k) {
            if (rep.type_embeds_later[k]) continue;
            const BlockType& from = *table.entries[k];
            const std::vector<int> sig = cycle_signature(from);
            auto try_into = [&](const TypeRef& u, const std::vector<int>& usig) {
                if (u->size() < from.size() || !sub_multiset(sig, usig)) return false;
                return EmbedSearch(from, *u).run(0, 0);
            };
            for (std::size_t j = last_seen[k] + 1; j < horizon && !rep.type_embeds_later[k]; ++j) {
                if (try_into(table.entries[alpha[j]], horizon_sigs[alpha[j]])) rep.type_embeds_later[k] = true;
            }
            for (const auto& [u, usig] : later_types) {
                if (rep.type_embeds_later[k]) break;
                if (u->size() <= from.size() && *u == from) continue;
                if (try_into(u, usig)) rep.type_embeds_later[k] = true;
            }
        }
    }

    auto set = [&](FlagName n, FlagStatus s, std::string witness) {
        FlagState& st = rep.flags[n];
        if (st.status == FlagStatus::Undeclared) return;
        st.status = s;
        st.horizon = static_cast<std::int64_t>(horizon);
        st.witness = std::move(witness);
    };

    // adjacency uniqueness: definitive inside the horizon
    {
        std::map<std::pair<std::size_t, std::size_t>, std::size_t> seen;
        std::string bad;
        for (std::size_t i = 0; i + 1 < horizon && bad.empty(); ++i) {
            auto key = std::make_pair(alpha[i], alpha[i + 1]);
            auto [it, inserted] = seen.emplace(key, i);
            if (!inserted) {
                std::ostringstream os;
                os << "pair at blocks " << it->second << "," << it->second + 1 << " repeats at " << i << ","
                   << i + 1;
                bad = os.str();
            }
        }
        set(FlagName::AdjacencyUnique, bad.empty() ? FlagStatus::Verified : FlagStatus::Falsified, bad);
    }
    // distinct sizes
    {
        std::string bad;
        for (std::size_t k = 1; k < ntypes && bad.empty(); ++k) {
            if (table.entries[k]->size() == table.entries[k - 1]->size()) {
                bad = "two types of size " + std::to_string(table.entries[k]->size());
            }
        }
        set(FlagName::DistinctSizes, bad.empty() ? FlagStatus::Verified : FlagStatus::Falsified, bad);
    }
    // rigidity
    if (f.status(FlagName::Rigid) != FlagStatus::Undeclared) {
        std::string bad;
        for (std::size_t a = 0; a < ntypes && bad.empty(); ++a) {
            for (std::size_t b = 0; b < ntypes && bad.empty(); ++b) {
                if (a == b) continue;
                if (embeds(*table.entries[a], *table.entries[b])) {
                    bad = "type of size " + std::to_string(table.entries[a]->size()) + " embeds into size " +
                          std::to_string(table.entries[b]->size());
                }
            }
        }
        set(FlagName::Rigid, bad.empty() ? FlagStatus::Verified : FlagStatus::Falsified, bad);
    }
    // recurrence: can only be confirmed, never refuted, by a finite scan
    {
        std::size_t missing = 0;
        for (bool r : rep.type_recurs) missing += r ? 0 : 1;
        if (missing == 0) {
            set(FlagName::AllRecur, FlagStatus::Verified, "");
        } else if (rep.flags[FlagName::AllRecur].status != FlagStatus::Undeclared) {
            rep.flags[FlagName::AllRecur].witness =
                std::to_string(missing) + " types without a later occurrence within the scan";
        }
    }
    {
        std::size_t missing = 0;
        for (std::size_t i = 0; i < horizon; ++i) missing += rep.type_embeds_later[alpha[i]] ? 0 : 1;
        if (missing == 0) {
            set(FlagName::EmbedsLaterCofinite, FlagStatus::Verified, "");
        } else if (rep.flags[FlagName::EmbedsLaterCofinite].status != FlagStatus::Undeclared) {
            rep.flags[FlagName::EmbedsLaterCofinite].witness =
                std::to_string(missing) + " blocks without a later embedding within the scan";
        }
    }
    {
        bool late_isolated = false;
        for (std::size_t i = horizon - horizon / 4; i < horizon; ++i) {
            if (!rep.type_embeds_later[alpha[i]]) late_isolated = true;
        }
        if (late_isolated) set(FlagName::InfinitelyManyIsolated, FlagStatus::Verified, "");
    }
    {
        bool tail_identity = true;
        for (std::size_t i = horizon / 2; i < horizon; ++i) {
            if (!is_identity_type(*table.entries[alpha[i]])) tail_identity = false;
        }
        if (tail_identity) set(FlagName::IdentityAe, FlagStatus::Verified, "");
    }

    // contradictions
    auto holds = [&](FlagName n) {
        auto it = rep.flags.find(n);
        return it != rep.flags.end() &&
               (it->second.status == FlagStatus::Declared || it->second.status == FlagStatus::Verified);
    };
    for (const auto& [n, st] : rep.flags) {
        if (st.status == FlagStatus::Falsified) {
            rep.contradictions.push_back(std::string(to_string(n)) + " falsified: " + st.witness);
        }
    }
    if (holds(FlagName::EmbedsLaterCofinite) && holds(FlagName::InfinitelyManyIsolated)) {
        rep.contradictions.push_back("embeds_later_cofinite and infinitely_many_isolated both hold");
    }
    if (holds(FlagName::IdentityAe) && holds(FlagName::AllRecur)) {
        for (const auto& t : table.entries) {
            if (!is_identity_type(*t)) {
                rep.contradictions.push_back("identity_ae with a recurring non-identity type");
                break;
            }
        }
    }
    return rep;
}

BlockFunction with_verified_flags(const BlockFunction& f, std::size_t horizon) {
    BlockFunction g = f;
    g.flags = verify_flags(f, horizon).flags;
    return g;
}

const char* to_string(SpectrumClass c) {
    switch (c) {
        case SpectrumClass::ComputableOnly: return "ComputableOnly";
        case SpectrumClass::ExactlyCeDegrees: return "ExactlyCeDegrees";
        case SpectrumClass::StrictlyAboveCe: return "StrictlyAboveCe";
        case SpectrumClass::Unknown: return "Unknown";
    }
    return "?";
}

Classification classify_spectrum(const BlockFunction& f, std::size_t horizon) {
    FlagReport rep = verify_flags(f, horizon);
    if (!rep.contradictions.empty()) throw BlockError("flag contradiction: " + rep.contradictions.front());
    auto holds = [&](FlagName n) {
        auto it = rep.flags.find(n);
        return it != rep.flags.end() &&
               (it->second.status == FlagStatus::Declared || it->second.status == FlagStatus::Verified);
    };
    Classification c;
    c.horizon = horizon;
    const BlockTable table = table_for_prefix(f, horizon);
    bool only_identity = std::all_of(table.entries.begin(), table.entries.end(),
                                     [](const TypeRef& t) { return is_identity_type(*t); });
    if (holds(FlagName::IdentityAe) || (f.gen->runs_recur() && only_identity)) {
        c.cls = SpectrumClass::ComputableOnly;
        c.reason = "identity almost everywhere";
    } else if (holds(FlagName::InfinitelyManyIsolated)) {
        c.cls = SpectrumClass::ExactlyCeDegrees;
        c.reason = "infinitely many blocks embed into no later block";
    } else if (holds(FlagName::EmbedsLaterCofinite) || holds(FlagName::AllRecur) || f.gen->runs_recur()) {
        c.cls = SpectrumClass::StrictlyAboveCe;
        c.reason = "cofinitely many blocks embed into a later block";
    } else {
        c.cls = SpectrumClass::Unknown;
        c.reason = "flags insufficient";
    }
    return c;
}

// ---- d-free witness -------------------------------------------------------------------

std::optional<EmbedTarget> find_embedding_target(const BlockFunction& f, const BlockType& t,
                                                 std::int64_t min_pos, std::size_t horizon) {
    std::int64_t lo = 0;
    for (std::size_t i = 0; i < horizon; ++i) {
        TypeRef u = f.type_at(i);
        const std::int64_t hi = lo + u->size() - 1;
        if (lo >= min_pos) {
            if (auto w = embeds(t, *u)) return EmbedTarget{PlacedBlock{{lo, hi}, i, u}, *w};
        }
        lo = hi + 1;
    }
    return std::nullopt;
}

DFreeWitness dfree_witness(const BlockFunction& f, const std::vector<std::int64_t>& c_bar,
                           std::size_t horizon) {
    std::int64_t floor = -1;
    for (auto c : c_bar) floor = std::max(floor, c);
    std::int64_t lo = 0;
    for (std::size_t i = 0; i < horizon; ++i) {
        TypeRef t = f.type_at(i);
        if (lo > floor && t->size() > 1) {
            DFreeWitness w;
            w.c_bar = c_bar;
            w.a_bar = {lo, lo + t->size() - 1};
            w.a_block = i;
            return w;
        }
        lo += t->size();
    }
    throw BlockError("no block of size > 1 above the parameters within the horizon");
}

std::pair<std::vector<std::int64_t>, std::vector<std::int64_t>>
DFreeWitness::first_response(const std::vector<std::int64_t>& b_bar) const {
    std::vector<std::int64_t> a, b;
    for (std::int64_t x = a_bar.lo; x <= a_bar.hi; ++x) a.push_back(x + 1);
    for (auto y : b_bar) b.push_back(y + 1);
    return {a, b};
}

std::pair<std::vector<std::int64_t>, std::vector<std::int64_t>>
DFreeWitness::second_response(const BlockFunction& f, const std::vector<Interval>& b_blocks,
                              std::int64_t floor, std::size_t horizon) const {
    std::vector<std::int64_t> a2, b2;
    std::int64_t min_pos = floor + 1;
    auto seat = [&](const Interval& iv, std::vector<std::int64_t>& out) {
        PlacedBlock src = block_of(f, iv.lo);
        if (!(src.interval == iv)) throw BlockError("tuple part is not a whole block");
        auto target = find_embedding_target(f, *src.type, min_pos, horizon);
        if (!target) throw BlockError("no embedding target within the horizon");
        for (int x : target->witness) out.push_back(target->block.interval.lo + x);
        min_pos = target->block.interval.hi + 1;
    };
    seat(a_bar, a2);
    for (const auto& iv : b_blocks) seat(iv, b2);
    return {a2, b2};
}

}  // namespace blockfn
