#pragma once

// Independent reference implementations used only by tests. They avoid the
// library's search and embedding code and work straight from the definitions.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "blockfn/coding_seq.hpp"

namespace oracle {

// Every strictly increasing k-subset of [0, n) in lexicographic order.
inline void for_each_subset(int k, int n, const std::function<bool(const std::vector<int>&)>& visit) {
    std::vector<int> c(k);
    for (int i = 0; i < k; ++i) c[i] = i;
    if (k > n) return;
    while (true) {
        if (!visit(c)) return;
        int i = k - 1;
        while (i >= 0 && c[i] == n - k + i) --i;
        if (i < 0) return;
        ++c[i];
        for (int j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
    }
}

inline std::optional<std::vector<int>> embeds(const blockfn::BlockType& from, const blockfn::BlockType& into) {
    std::optional<std::vector<int>> out;
    for_each_subset(from.size(), into.size(), [&](const std::vector<int>& w) {
        for (int x = 0; x < from.size(); ++x) {
            if (into.map[w[x]] != w[from.map[x]]) return true;
        }
        out = w;
        return false;
    });
    return out;
}

// Plain f table over the first `n` elements; -1 past the last whole block.
struct Plain {
    std::vector<std::int64_t> f;
    std::vector<std::pair<std::int64_t, std::int64_t>> blocks;  // whole blocks inside [0, n)
};

inline Plain plain(const blockfn::BlockFunction& fn, std::int64_t n) {
    Plain p;
    std::int64_t lo = 0;
    for (std::size_t i = 0;; ++i) {
        const auto t = fn.type_at(i);
        if (lo + t->size() > n) break;
        for (int x = 0; x < t->size(); ++x) p.f.push_back(lo + t->map[x]);
        p.blocks.push_back({lo, lo + t->size() - 1});
        lo += t->size();
    }
    return p;
}

inline bool preserves(const Plain& p, std::int64_t lo, const std::vector<std::int64_t>& img) {
    for (std::size_t k = 0; k < img.size(); ++k) {
        const std::int64_t x = lo + static_cast<std::int64_t>(k);
        const std::int64_t fx = p.f[x];
        if (fx < lo || fx >= lo + static_cast<std::int64_t>(img.size())) return false;
        if (p.f[img[k]] != img[fx - lo]) return false;
    }
    return true;
}

// All coding sequences of length <= max_len with intervals made of whole
// blocks inside [0, n), enumerated straight from the definition.
inline std::vector<blockfn::CodingSequence> enumerate(const blockfn::BlockFunction& fn, std::int64_t n,
                                                      std::size_t max_len, bool strong) {
    const Plain p = plain(fn, n);
    std::vector<std::pair<std::int64_t, std::int64_t>> intervals;
    for (std::size_t a = 0; a < p.blocks.size(); ++a) {
        for (std::size_t b = a; b < p.blocks.size(); ++b) intervals.push_back({p.blocks[a].first, p.blocks[b].second});
    }
    std::vector<blockfn::CodingSequence> out;
    std::vector<std::pair<std::int64_t, std::int64_t>> ivs;
    std::vector<std::vector<std::int64_t>> maps;

    auto emit = [&]() {
        blockfn::CodingSequence s;
        s.strength = strong ? blockfn::Strength::Strong : blockfn::Strength::Weak;
        for (auto [a, b] : ivs) s.intervals.push_back({a, b});
        for (std::size_t i = 0; i < maps.size(); ++i) s.maps.push_back({s.intervals[i], maps[i]});
        out.push_back(std::move(s));
    };

    std::function<void()> grow = [&]() {
        emit();
        if (ivs.size() >= max_len) return;
        const auto [plo, phi] = ivs.back();
        const int k = static_cast<int>(phi - plo + 1);
        for (auto [a, b] : intervals) {
            if (strong && a <= phi) continue;
            const int m = static_cast<int>(b - a + 1);
            for_each_subset(k, m, [&](const std::vector<int>& c) {
                std::vector<std::int64_t> img(k);
                for (int x = 0; x < k; ++x) {
                    img[x] = a + c[x];
                    if (img[x] < plo + x) return true;
                }
                if (ivs.size() == 1 && preserves(p, plo, img)) return true;
                if (ivs.size() >= 2) {
                    const auto [qlo, qhi] = ivs[ivs.size() - 2];
                    std::vector<std::int64_t> two;
                    for (std::int64_t y : maps.back()) two.push_back(img[y - plo]);
                    if (!preserves(p, qlo, two)) return true;
                    (void)qhi;
                }
                ivs.push_back({a, b});
                maps.push_back(img);
                grow();
                maps.pop_back();
                ivs.pop_back();
                return true;
            });
        }
    };
    for (auto iv : intervals) {
        ivs = {iv};
        maps.clear();
        grow();
    }
    return out;
}

}  // namespace oracle
