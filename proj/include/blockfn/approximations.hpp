#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "blockfn/coding_trees.hpp"

namespace blockfn {

// alpha + 1 with the usual order, for alpha = n or alpha = w*a + b.
// Codes are OrdinalValue; the top code is alpha itself.
struct OrdinalPresentation {
    enum class Kind { Finite, OmegaSum };
    Kind kind = Kind::Finite;
    OrdinalValue top;

    static OrdinalPresentation finite(std::uint64_t n);
    static OrdinalPresentation omega_sum(std::uint64_t a, std::uint64_t b);

    bool contains(const OrdinalValue& v) const { return v <= top; }
    bool less(const OrdinalValue& a, const OrdinalValue& b) const { return a < b; }
    std::string str() const { return top.str(); }
};

// Dense tables indexed [x][s], x < x_bound, s <= s_bound.
struct Delta02Approx {
    std::size_t x_bound = 0;
    std::size_t s_bound = 0;
    std::size_t budget = 0;       // mind changes allowed per element
    std::size_t settle_stage = 0; // no change after this stage
    std::vector<std::vector<std::uint8_t>> g;

    static Delta02Approx zeros(std::size_t x_bound, std::size_t s_bound);
    int at(std::size_t x, std::size_t s) const { return g.at(x).at(s); }
    std::size_t changes(std::size_t x) const;
};

struct AlphaCEApprox {
    OrdinalPresentation presentation;
    Delta02Approx values;
    std::vector<std::vector<OrdinalValue>> r;  // counting function

    int at(std::size_t x, std::size_t s) const { return values.at(x, s); }
};

struct ApproxReport {
    bool ok = true;
    int condition = 0;  // 1..5, 0 when ok
    std::size_t x = 0;
    std::size_t s = 0;
    std::string message;
};

// Checks the five conditions for x < x_bound and s <= s_bound (clamped to the tables).
ApproxReport validate_alpha_ce(const AlphaCEApprox& a, std::size_t x_bound, std::size_t s_bound);
// Same without g(x,0) = 0.
ApproxReport validate_alpha_computable(const AlphaCEApprox& a, std::size_t x_bound, std::size_t s_bound);
// Budget and settling checks for a plain limit approximation.
ApproxReport validate_delta02(const Delta02Approx& a);

// Seeded, deterministic. Changes happen only before the settle stage.
Delta02Approx random_delta02(std::uint64_t seed, std::size_t x_bound, std::size_t s_bound, std::size_t budget);
AlphaCEApprox random_alpha_ce(std::uint64_t seed, std::size_t x_bound, std::size_t s_bound,
                              const OrdinalPresentation& p);

// g(x, s_bound) once it has been stable since the settle stage; throws otherwise.
int limit(const Delta02Approx& a, std::size_t x, std::size_t s_bound);
int limit(const AlphaCEApprox& a, std::size_t x, std::size_t s_bound);

nlohmann::json to_json(const OrdinalValue& v);
OrdinalValue ordinal_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Delta02Approx& a);
nlohmann::json to_json(const AlphaCEApprox& a);
Delta02Approx delta02_from_json(const nlohmann::json& j);
AlphaCEApprox alpha_ce_from_json(const nlohmann::json& j);

}  // namespace blockfn
