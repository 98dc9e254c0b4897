#include "blockfn/spec_io.hpp"

#include <cstdio>
#include <fstream>

#include "generator_types.hpp"

namespace blockfn {

using namespace detail;

const char* const kToolVersion = "blockfn 0.1.0";

namespace {

Json type_to_json(const BlockType& t) { return Json(t.map); }

TypeRef type_from_json(const Json& j) {
    if (!j.is_array() || j.empty()) throw SpecError("block type must be a nonempty array");
    BlockType t;
    for (const auto& v : j) {
        if (!v.is_number_integer()) throw SpecError("block type entries must be integers");
        t.map.push_back(v.get<int>());
    }
    try {
        check_block_type(t);
    } catch (const BlockError& e) {
        throw SpecError(e.what());
    }
    return make_ref(std::move(t));
}

std::vector<TypeRef> types_from_json(const Json& j) {
    if (!j.is_array()) throw SpecError("expected an array of block types");
    std::vector<TypeRef> out;
    for (const auto& t : j) out.push_back(type_from_json(t));
    return out;
}

const Json& field(const Json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw SpecError(std::string("missing field '") + key + "'");
    return j.at(key);
}

int int_field(const Json& j, const char* key) {
    const Json& v = field(j, key);
    if (!v.is_number_integer()) throw SpecError(std::string("field '") + key + "' must be an integer");
    return v.get<int>();
}

}  // namespace

Json tree_to_json(const RankedTree& t) {
    Json nodes = Json::array();
    for (const auto& [node, r] : t.rank) nodes.push_back(Json{{"node", node}, {"rank", r}});
    return nodes;
}

RankedTree tree_from_json(const Json& j) {
    if (!j.is_array()) throw SpecError("tree must be an array of {node, rank}");
    RankedTree t;
    for (const auto& e : j) {
        const Json& n = field(e, "node");
        if (!n.is_array()) throw SpecError("tree node must be an array");
        IntString s;
        for (const auto& v : n) {
            if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
                throw SpecError("tree node entries must be naturals");
            }
            s.push_back(v.get<std::uint64_t>());
        }
        t.rank[s] = int_field(e, "rank");
    }
    try {
        t.validate_parity();
    } catch (const BlockError& e) {
        throw SpecError(e.what());
    }
    return t;
}

Json generator_to_json(const Generator& g) {
    if (auto* p = dynamic_cast<const PeriodicGen*>(&g)) {
        Json period = Json::array();
        for (const auto& t : p->period()) period.push_back(type_to_json(*t));
        return Json{{"kind", "periodic"}, {"period", period}};
    }
    if (auto* p = dynamic_cast<const LoopsGen*>(&g)) {
        return Json{{"kind", "loops"}, {"first", p->first()}, {"step", p->step()}};
    }
    if (auto* p = dynamic_cast<const LoopsRecurringGen*>(&g)) {
        return Json{{"kind", "loops_recurring"}, {"first", p->first()}, {"step", p->step()}};
    }
    if (auto* p = dynamic_cast<const InterleaveGen*>(&g)) {
        return Json{{"kind", "interleave"}, {"even", generator_to_json(*p->even())}, {"odd", generator_to_json(*p->odd())}};
    }
    if (auto* p = dynamic_cast<const PrefixedGen*>(&g)) {
        Json prefix = Json::array();
        for (const auto& t : p->prefix()) prefix.push_back(type_to_json(*t));
        return Json{{"kind", "prefixed"}, {"prefix", prefix}, {"tail", generator_to_json(*p->tail())}};
    }
    if (auto* p = dynamic_cast<const TreeOddGen*>(&g)) {
        return Json{{"kind", "tree_odd"}, {"tree", tree_to_json(p->tree())}, {"loops", generator_to_json(*p->loops())}};
    }
    throw SpecError("generator kind '" + g.kind() + "' has no serialization");
}

GenPtr generator_from_json(const Json& j) {
    const Json& kind_v = field(j, "kind");
    if (!kind_v.is_string()) throw SpecError("generator kind must be a string");
    const std::string kind = kind_v.get<std::string>();
    try {
        if (kind == "periodic") return periodic_gen(types_from_json(field(j, "period")));
        if (kind == "loops") return loops_gen(int_field(j, "first"), int_field(j, "step"));
        if (kind == "loops_recurring") return loops_recurring_gen(int_field(j, "first"), int_field(j, "step"));
        if (kind == "interleave") {
            return interleave_gen(generator_from_json(field(j, "even")), generator_from_json(field(j, "odd")));
        }
        if (kind == "prefixed") {
            return prefixed_gen(types_from_json(field(j, "prefix")), generator_from_json(field(j, "tail")));
        }
        if (kind == "tree_odd") {
            return tree_odd_gen(tree_from_json(field(j, "tree")), generator_from_json(field(j, "loops")));
        }
    } catch (const BlockError& e) {
        throw SpecError(e.what());
    }
    throw SpecError("unknown generator kind '" + kind + "'");
}

Json function_to_json(const BlockFunction& f) {
    Json flags = Json::object();
    for (const auto& [n, st] : f.flags) {
        if (st.status != FlagStatus::Undeclared) flags[to_string(n)] = to_string(st.status);
    }
    return Json{{"name", f.name}, {"generator", generator_to_json(*f.gen)}, {"flags", flags}};
}

BlockFunction function_from_json(const Json& j) {
    if (!j.is_object()) throw SpecError("spec must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (it.key() != "name" && it.key() != "generator" && it.key() != "flags") {
            throw SpecError("unknown spec field '" + it.key() + "'");
        }
    }
    BlockFunction f;
    if (j.contains("name")) {
        if (!j.at("name").is_string()) throw SpecError("name must be a string");
        f.name = j.at("name").get<std::string>();
    }
    f.gen = generator_from_json(field(j, "generator"));
    if (j.contains("flags")) {
        const Json& fl = j.at("flags");
        if (!fl.is_object()) throw SpecError("flags must be an object");
        for (auto it = fl.begin(); it != fl.end(); ++it) {
            if (!it.value().is_string()) throw SpecError("flag status must be a string");
            try {
                f.flags[flag_name_from_string(it.key())].status = flag_status_from_string(it.value().get<std::string>());
            } catch (const BlockError& e) {
                throw SpecError(e.what());
            }
        }
    }
    return f;
}

RankedTree builtin_tree6() {
    RankedTree t = RankedTree::path(6);
    t.rank[{1}] = 3;
    t.rank[{1, 0}] = 2;
    t.rank[{1, 0, 0}] = 1;
    t.rank[{1, 0, 0, 0}] = 0;
    return t;
}

BlockFunction builtin_function(const std::string& name) {
    if (name == "canonical") return canonical_example();
    if (name == "alternating") return alternating_control();
    if (name == "successor") return successor_control();
    if (name == "identity") return identity_function();
    if (name == "tree6") return tree_example(builtin_tree6());
    throw SpecError("unknown builtin '" + name + "'");
}

BlockFunction load_function(const std::string& path_or_builtin) {
    const std::string prefix = "builtin:";
    if (path_or_builtin.rfind(prefix, 0) == 0) return builtin_function(path_or_builtin.substr(prefix.size()));
    std::ifstream in(path_or_builtin);
    if (!in) throw SpecError("cannot open spec '" + path_or_builtin + "'");
    Json j;
    try {
        in >> j;
    } catch (const Json::parse_error& e) {
        throw SpecError(std::string("spec parse error: ") + e.what());
    }
    return function_from_json(j);
}

std::string canonical_dump(const Json& j) { return j.dump(); }

namespace {
std::string fnv1a_hex(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}
}  // namespace

std::string config_hash(const Json& j) { return fnv1a_hex(canonical_dump(j)); }

std::string alpha_hash(const BlockFunction& f, std::size_t m) {
    Json seq = Json::array();
    for (std::size_t i = 0; i < m; ++i) seq.push_back(f.type_at(i)->map);
    return fnv1a_hex(canonical_dump(seq));
}

}  // namespace blockfn
