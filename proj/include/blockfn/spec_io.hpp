#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "blockfn/core_blocks.hpp"

namespace blockfn {

using Json = nlohmann::json;

// Schema problems in spec or config documents.
class SpecError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Generator documents: {"kind": ..., parameters}. Types are written as explicit maps.
Json generator_to_json(const Generator& g);
GenPtr generator_from_json(const Json& j);

Json tree_to_json(const RankedTree& t);
RankedTree tree_from_json(const Json& j);

// {"name", "generator", "flags": {flag: status}}
Json function_to_json(const BlockFunction& f);
BlockFunction function_from_json(const Json& j);

// Loads a spec file, or one of "builtin:canonical", "builtin:alternating",
// "builtin:successor", "builtin:identity", "builtin:tree6".
BlockFunction load_function(const std::string& path_or_builtin);
BlockFunction builtin_function(const std::string& name);
RankedTree builtin_tree6();

// Sorted keys, no whitespace.
std::string canonical_dump(const Json& j);
// FNV-1a 64 of canonical_dump, as 16 hex digits.
std::string config_hash(const Json& j);
// Hash of the type sizes and maps of the first m blocks.
std::string alpha_hash(const BlockFunction& f, std::size_t m);

extern const char* const kToolVersion;

}  // namespace blockfn
