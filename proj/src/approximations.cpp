#include "blockfn/approximations.hpp"

#include <algorithm>
#include <random>

namespace blockfn {

OrdinalPresentation OrdinalPresentation::finite(std::uint64_t n) {
    OrdinalPresentation p;
    p.kind = Kind::Finite;
    p.top = OrdinalValue::of(n);
    return p;
}

OrdinalPresentation OrdinalPresentation::omega_sum(std::uint64_t a, std::uint64_t b) {
    OrdinalPresentation p;
    p.kind = a == 0 ? Kind::Finite : Kind::OmegaSum;
    p.top = {a, b};
    return p;
}

Delta02Approx Delta02Approx::zeros(std::size_t x_bound, std::size_t s_bound) {
    Delta02Approx a;
    a.x_bound = x_bound;
    a.s_bound = s_bound;
    a.g.assign(x_bound, std::vector<std::uint8_t>(s_bound + 1, 0));
    return a;
}

std::size_t Delta02Approx::changes(std::size_t x) const {
    std::size_t n = 0;
    for (std::size_t s = 1; s <= s_bound; ++s) n += g[x][s] != g[x][s - 1];
    return n;
}

namespace {

ApproxReport fail(int cond, std::size_t x, std::size_t s, std::string msg) {
    return {false, cond, x, s, std::move(msg)};
}

ApproxReport check(const AlphaCEApprox& a, std::size_t x_bound, std::size_t s_bound, bool strict) {
    x_bound = std::min(x_bound, a.values.x_bound);
    s_bound = std::min(s_bound, a.values.s_bound);
    if (a.r.size() < x_bound) return fail(2, a.r.size(), 0, "counting table too short");
    for (std::size_t x = 0; x < x_bound; ++x) {
        if (strict && a.at(x, 0) != 0) return fail(1, x, 0, "g(x,0) is not 0");
        if (a.r[x].size() <= s_bound) return fail(2, x, 0, "counting table too short");
        if (!(a.r[x][0] == a.presentation.top)) return fail(2, x, 0, "r(x,0) is not the top");
        for (std::size_t s = 0; s < s_bound; ++s) {
            if (!a.presentation.contains(a.r[x][s + 1])) return fail(3, x, s + 1, "r outside the presentation");
            if (a.r[x][s] < a.r[x][s + 1]) return fail(3, x, s + 1, "r increased");
            if (a.at(x, s + 1) != a.at(x, s) && !(a.r[x][s + 1] < a.r[x][s])) {
                return fail(4, x, s + 1, "g changed without r decreasing");
            }
        }
        for (std::size_t s = a.values.settle_stage; s < s_bound; ++s) {
            if (a.at(x, s + 1) != a.at(x, s)) return fail(5, x, s + 1, "g changes after the settle stage");
        }
    }
    return {};
}

// Uniform draw in [0, n).
std::uint64_t draw(std::mt19937_64& rng, std::uint64_t n) { return n == 0 ? 0 : rng() % n; }

std::vector<std::size_t> pick_stages(std::mt19937_64& rng, std::size_t count, std::size_t settle) {
    std::vector<std::size_t> pool;
    for (std::size_t s = 1; s <= settle; ++s) pool.push_back(s);
    count = std::min(count, pool.size());
    for (std::size_t i = 0; i < count; ++i) std::swap(pool[i], pool[i + draw(rng, pool.size() - i)]);
    pool.resize(count);
    std::sort(pool.begin(), pool.end());
    return pool;
}

std::size_t default_settle(std::size_t s_bound) { return std::max<std::size_t>(1, s_bound * 3 / 4); }

void fill_flips(Delta02Approx& a, std::size_t x, const std::vector<std::size_t>& stages) {
    std::uint8_t v = a.g[x][0];
    std::size_t k = 0;
    for (std::size_t s = 1; s <= a.s_bound; ++s) {
        if (k < stages.size() && stages[k] == s) {
            v ^= 1;
            ++k;
        }
        a.g[x][s] = v;
    }
}

}  // namespace

ApproxReport validate_alpha_ce(const AlphaCEApprox& a, std::size_t x_bound, std::size_t s_bound) {
    return check(a, x_bound, s_bound, true);
}

ApproxReport validate_alpha_computable(const AlphaCEApprox& a, std::size_t x_bound, std::size_t s_bound) {
    return check(a, x_bound, s_bound, false);
}

ApproxReport validate_delta02(const Delta02Approx& a) {
    for (std::size_t x = 0; x < a.x_bound; ++x) {
        if (a.changes(x) > a.budget) return fail(4, x, 0, "more changes than the budget");
        for (std::size_t s = a.settle_stage; s < a.s_bound; ++s) {
            if (a.g[x][s + 1] != a.g[x][s]) return fail(5, x, s + 1, "g changes after the settle stage");
        }
    }
    return {};
}

Delta02Approx random_delta02(std::uint64_t seed, std::size_t x_bound, std::size_t s_bound, std::size_t budget) {
    std::mt19937_64 rng(seed);
    Delta02Approx a = Delta02Approx::zeros(x_bound, s_bound);
    a.budget = budget;
    a.settle_stage = default_settle(s_bound);
    for (std::size_t x = 0; x < x_bound; ++x) {
        const std::size_t k = draw(rng, budget + 1);
        fill_flips(a, x, pick_stages(rng, k, a.settle_stage));
    }
    return a;
}

AlphaCEApprox random_alpha_ce(std::uint64_t seed, std::size_t x_bound, std::size_t s_bound,
                              const OrdinalPresentation& p) {
    std::mt19937_64 rng(seed);
    AlphaCEApprox a;
    a.presentation = p;
    a.values = Delta02Approx::zeros(x_bound, s_bound);
    a.values.settle_stage = default_settle(s_bound);
    const std::size_t cap = p.top.omega_coeff > 0 ? 6 : static_cast<std::size_t>(p.top.finite);
    a.values.budget = cap;
    a.r.assign(x_bound, std::vector<OrdinalValue>(s_bound + 1, p.top));
    for (std::size_t x = 0; x < x_bound; ++x) {
        const auto stages = pick_stages(rng, draw(rng, cap + 1), a.values.settle_stage);
        fill_flips(a.values, x, stages);
        OrdinalValue v = p.top;
        std::size_t k = 0;
        for (std::size_t s = 1; s <= s_bound; ++s) {
            if (k < stages.size() && stages[k] == s) {
                const std::uint64_t left = stages.size() - k - 1;
                if (v.omega_coeff == 0) {
                    v.finite = left + draw(rng, v.finite - left);
                } else if (v.finite > 0 && draw(rng, 2) == 0) {
                    v.finite = draw(rng, v.finite);
                } else {
                    v = {v.omega_coeff - 1, left + draw(rng, 3)};
                }
                ++k;
            }
            a.r[x][s] = v;
        }
    }
    return a;
}

int limit(const Delta02Approx& a, std::size_t x, std::size_t s_bound) {
    s_bound = std::min(s_bound, a.s_bound);
    const std::size_t from = std::min(a.settle_stage, s_bound);
    for (std::size_t s = from; s < s_bound; ++s) {
        if (a.g.at(x)[s + 1] != a.g[x][s]) throw BlockError("approximation is not stable before the stage bound");
    }
    return a.g.at(x)[s_bound];
}

int limit(const AlphaCEApprox& a, std::size_t x, std::size_t s_bound) { return limit(a.values, x, s_bound); }

nlohmann::json to_json(const OrdinalValue& v) {
    if (v.omega_coeff == 0) return v.finite;
    return nlohmann::json::array({v.omega_coeff, v.finite});
}

OrdinalValue ordinal_from_json(const nlohmann::json& j) {
    if (j.is_number_unsigned()) return OrdinalValue::of(j.get<std::uint64_t>());
    if (j.is_array() && j.size() == 2) return {j[0].get<std::uint64_t>(), j[1].get<std::uint64_t>()};
    throw BlockError("ordinal must be n or [a, b]");
}

nlohmann::json to_json(const Delta02Approx& a) {
    return {{"x_bound", a.x_bound}, {"s_bound", a.s_bound}, {"budget", a.budget},
            {"settle_stage", a.settle_stage}, {"g", a.g}};
}

nlohmann::json to_json(const AlphaCEApprox& a) {
    nlohmann::json r = nlohmann::json::array();
    for (const auto& row : a.r) {
        nlohmann::json jr = nlohmann::json::array();
        for (const auto& v : row) jr.push_back(to_json(v));
        r.push_back(jr);
    }
    return {{"top", to_json(a.presentation.top)}, {"values", to_json(a.values)}, {"r", r}};
}

Delta02Approx delta02_from_json(const nlohmann::json& j) {
    Delta02Approx a;
    a.x_bound = j.at("x_bound").get<std::size_t>();
    a.s_bound = j.at("s_bound").get<std::size_t>();
    a.budget = j.at("budget").get<std::size_t>();
    a.settle_stage = j.at("settle_stage").get<std::size_t>();
    a.g = j.at("g").get<std::vector<std::vector<std::uint8_t>>>();
    if (a.g.size() != a.x_bound) throw BlockError("g table has the wrong number of rows");
    for (const auto& row : a.g) {
        if (row.size() != a.s_bound + 1) throw BlockError("g table row has the wrong length");
        for (auto v : row) {
            if (v > 1) throw BlockError("g values must be 0 or 1");
        }
    }
    return a;
}

AlphaCEApprox alpha_ce_from_json(const nlohmann::json& j) {
    AlphaCEApprox a;
    const OrdinalValue top = ordinal_from_json(j.at("top"));
    a.presentation = OrdinalPresentation::omega_sum(top.omega_coeff, top.finite);
    a.values = delta02_from_json(j.at("values"));
    for (const auto& row : j.at("r")) {
        std::vector<OrdinalValue> r;
        for (const auto& v : row) r.push_back(ordinal_from_json(v));
        a.r.push_back(std::move(r));
    }
    return a;
}

}  // namespace blockfn
