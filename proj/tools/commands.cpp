#include "commands.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "blockfn/approximations.hpp"
#include "blockfn/coding_trees.hpp"
#include "blockfn/diagonalizer.hpp"
#include "blockfn/encoder.hpp"
#include "blockfn/spec_io.hpp"

namespace blockfn::cli {

namespace {

using Row = std::vector<std::string>;

void table(std::ostream& out, const Row& head, const std::vector<Row>& rows) {
    std::vector<std::size_t> w(head.size(), 0);
    for (std::size_t i = 0; i < head.size(); ++i) w[i] = head[i].size();
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size() && i < w.size(); ++i) w[i] = std::max(w[i], r[i].size());
    }
    auto line = [&](const Row& r) {
        for (std::size_t i = 0; i < r.size(); ++i) {
            out << (i ? "  " : "");
            if (i + 1 < r.size()) {
                out << std::left << std::setw(static_cast<int>(w[i])) << r[i];
            } else {
                out << r[i];
            }
        }
        out << '\n';
    };
    line(head);
    for (const auto& r : rows) line(r);
}

template <class Seq>
std::string join(const Seq& xs, std::size_t limit = 0) {
    std::ostringstream os;
    std::size_t n = 0;
    for (const auto& x : xs) {
        if (limit && n == limit) {
            os << " ...";
            break;
        }
        os << (n++ ? " " : "") << x;
    }
    return os.str();
}

// Writes header + body lines to --out (when given) and, in records format, to stdout.
class Emitter {
public:
    Emitter(const RunConfig& c, std::ostream& out) : c_(c), out_(out), hash_(hash_of(c)) {
        nlohmann::ordered_json h;
        h["record"] = "header";
        h["tool"] = kToolVersion;
        h["config_hash"] = hash_;
        h["command"] = c.command;
        h["spec"] = c.spec;
        lines_.push_back(h.dump());
        if (c_.format == Format::Text) out_ << kToolVersion << "  config " << hash_ << '\n';
    }

    const std::string& hash() const { return hash_; }
    bool text() const { return c_.format == Format::Text; }
    void record(const nlohmann::ordered_json& j) { lines_.push_back(j.dump()); }
    void record_line(std::string s) { lines_.push_back(std::move(s)); }

    int finish(int code) {
        nlohmann::ordered_json t;
        t["record"] = "exit";
        t["code"] = code;
        lines_.push_back(t.dump());
        if (!text()) {
            for (const auto& l : lines_) out_ << l << '\n';
        }
        if (!c_.out.empty()) {
            std::ofstream f(c_.out);
            if (!f) throw SpecError("cannot write '" + c_.out + "'");
            for (const auto& l : lines_) f << l << '\n';
        }
        return code;
    }

private:
    const RunConfig& c_;
    std::ostream& out_;
    std::string hash_;
    std::vector<std::string> lines_;
};

Strength strength_of(const RunConfig& c) { return c.strong ? Strength::Strong : Strength::Weak; }

void report_violations(Emitter& em, std::ostream& out, const std::string& check,
                       const std::vector<std::string>& bad) {
    for (const auto& b : bad) {
        nlohmann::ordered_json j;
        j["record"] = "violation";
        j["check"] = check;
        j["detail"] = b;
        em.record(j);
        if (em.text()) out << "violation [" << check << "] " << b << '\n';
    }
}

}  // namespace

std::string hash_of(const RunConfig& c) {
    nlohmann::json j{{"command", c.command}, {"spec", c.spec},       {"horizon", c.horizon},
                     {"depth", c.depth},     {"stages", c.stages},   {"seed", c.seed},
                     {"strong", c.strong},   {"mode", c.mode},       {"points", c.points},
                     {"budget", c.budget},   {"alpha", c.alpha},     {"variant", c.variant},
                     {"requirements", c.requirements}, {"sequence", c.sequence}};
    return config_hash(j);
}

int cmd_analyze(const RunConfig& c, std::ostream& out) {
    const BlockFunction f = load_function(c.spec);
    Emitter em(c, out);
    const FlagReport rep = verify_flags(f, c.horizon);
    const auto alpha = alpha_string(f, c.horizon);
    const auto counts = counting_prefix(f, c.horizon);

    nlohmann::ordered_json j;
    j["record"] = "prefix";
    j["blocks"] = c.horizon;
    j["alpha"] = alpha;
    j["counts"] = counts;
    em.record(j);
    std::vector<Row> rows;
    for (const auto& [name, st] : rep.flags) {
        nlohmann::ordered_json r;
        r["record"] = "flag";
        r["flag"] = to_string(name);
        r["status"] = to_string(st.status);
        r["witness"] = st.witness;
        em.record(r);
        rows.push_back({to_string(name), to_string(st.status), st.witness});
    }
    if (em.text()) {
        out << "function " << f.name << ", first " << c.horizon << " blocks\n";
        out << "alpha  " << join(alpha, 40) << '\n';
        out << "counts " << join(counts, 40) << '\n';
        table(out, {"flag", "status", "witness"}, rows);
    }
    if (!rep.contradictions.empty()) {
        report_violations(em, out, "flags", rep.contradictions);
        return em.finish(kPrecondition);
    }
    const Classification cls = classify_spectrum(f, c.horizon);
    nlohmann::ordered_json s;
    s["record"] = "classification";
    s["class"] = to_string(cls.cls);
    s["reason"] = cls.reason;
    em.record(s);
    if (em.text()) out << "class " << to_string(cls.cls) << " (" << cls.reason << ")\n";
    return em.finish(kOk);
}

int cmd_search(const RunConfig& c, std::ostream& out) {
    const BlockFunction f = load_function(c.spec);
    Emitter em(c, out);
    const NFTree tree = normal_form_tree(f, c.depth, c.horizon, strength_of(c));
    const TreeRank ranks = tree_rank(tree);
    std::map<std::size_t, std::size_t> by_len;
    for (std::size_t i = 1; i < tree.nodes.size(); ++i) ++by_len[tree.nodes[i].length];
    std::istringstream dump(dump_fragment(tree, ranks.node_rank));
    for (std::string l; std::getline(dump, l);) em.record_line(l);
    nlohmann::ordered_json s;
    s["record"] = "summary";
    s["strength"] = to_string(tree.strength);
    s["nodes"] = tree.nodes.size();
    s["max_length"] = tree.max_length();
    s["truncated"] = tree.truncated;
    s["frontier"] = tree.unknown_frontier().size();
    em.record(s);
    if (em.text()) {
        std::vector<Row> rows;
        for (const auto& [len, n] : by_len) rows.push_back({std::to_string(len), std::to_string(n)});
        out << to_string(tree.strength) << " normal-form tree, depth " << c.depth << ", " << c.horizon << " blocks\n";
        table(out, {"length", "nodes"}, rows);
        out << "max length " << tree.max_length() << (tree.truncated ? " (truncated)" : "") << ", unresolved frontier "
            << tree.unknown_frontier().size() << '\n';
    }
    return em.finish(tree.truncated ? kPrecondition : kOk);
}

int cmd_rank(const RunConfig& c, std::ostream& out) {
    const BlockFunction f = load_function(c.spec);
    Emitter em(c, out);
    nlohmann::ordered_json s;
    s["record"] = "rank";
    if (c.strong) {
        const MinRankResult r = min_rank(f, c.depth, c.horizon);
        s["minrank"] = to_json(r.root);
        s["nodes"] = r.tree.nodes.size();
        em.record(s);
        if (em.text()) out << "minrank=" << r.root.str() << "  (" << r.tree.nodes.size() << " nodes)\n";
        return em.finish(kOk);
    }
    const NFTree tree = max_tree(f, c.depth, c.horizon);
    const TreeRank r = tree_rank(tree);
    s["maxrank"] = r.root ? to_json(*r.root) : nlohmann::json(nullptr);
    s["nodes"] = tree.nodes.size();
    s["unresolved"] = r.unresolved.size();
    em.record(s);
    if (em.text()) {
        out << "fragment rank=" << (r.root ? r.root->str() : "unknown") << "  (" << tree.nodes.size() << " nodes, "
            << r.unresolved.size() << " unresolved)\n";
    }
    return em.finish(r.root ? kOk : kPrecondition);
}

int cmd_encode(const RunConfig& c, std::ostream& out) {
    const BlockFunction f = load_function(c.spec);
    Emitter em(c, out);
    EncodeOptions opt;
    opt.seed = c.seed;
    opt.config_hash = em.hash();
    RunTranscript t;
    Delta02Approx values;
    if (c.mode == "sequence") {
        if (!f.holds(FlagName::EmbedsLaterCofinite)) throw SpecError("sequence mode needs embeds_later_cofinite");
        values = random_delta02(c.seed, c.points, c.stages, c.budget);
        LazySequence seq = LazySequence::from_search(f, c.horizon, 4, opt.horizon_blocks);
        t = encode_with_sequence(f, seq, values, c.stages, opt);
    } else if (c.mode == "tree") {
        const AlphaCEApprox x = random_alpha_ce(c.seed, c.points, c.stages, OrdinalPresentation::finite(c.alpha));
        values = x.values;
        t = encode_with_tree(f, c.depth, c.horizon, x, c.stages, opt);
    } else {
        throw SpecError("unknown encode mode '" + c.mode + "'");
    }
    for (const auto& l : t.records()) em.record_line(l);

    int code = kOk;
    std::vector<Row> rows;
    for (std::size_t e = 0; e < c.points; ++e) {
        const int want = limit(values, e, c.stages);
        const int got = decode_bit(f, t, final_values(f, t, e), e);
        nlohmann::ordered_json r;
        r["record"] = "decode";
        r["e"] = e;
        r["decoded"] = got;
        r["limit"] = want;
        em.record(r);
        rows.push_back({std::to_string(e), std::to_string(got), std::to_string(want), got == want ? "ok" : "MISMATCH"});
        if (got != want) code = kInvariant;
    }
    const std::pair<const char*, std::vector<std::string>> checks[] = {
        {"padding", check_padding_stability(f, t)},
        {"restraint", check_restraint_discipline(t)},
        {"segments", check_segment_intervals(t)},
        {"displacement", check_finite_displacement(t)},
        {"composition", check_composition(f, t)},
    };
    if (em.text()) {
        out << c.mode << " encoder, " << c.points << " points, " << c.stages << " stages, final length "
            << t.snapshots.back().order.size() << '\n';
        table(out, {"e", "decoded", "limit", ""}, rows);
    }
    for (const auto& [name, bad] : checks) {
        report_violations(em, out, name, bad);
        if (!bad.empty()) code = kInvariant;
    }
    if (em.text()) out << (code == kOk ? "decoded = limit for all e, invariants hold\n" : "FAILED\n");
    return em.finish(code);
}

int cmd_diagonalize(const RunConfig& c, std::ostream& out) {
    const BlockFunction f = load_function(c.spec);
    Emitter em(c, out);
    DiagonalOptions opt;
    opt.stages = c.stages;
    int code = kOk;
    std::vector<Row> rows;
    auto outcome_rows = [&](const std::vector<RequirementOutcome>& os) {
        for (std::size_t k = 0; k < os.size(); ++k) {
            rows.push_back({std::to_string(k), std::to_string(os[k].phases), std::to_string(os[k].last_injury),
                            os[k].satisfied ? "yes" : "no"});
            if (!os[k].satisfied) code = kInvariant;
        }
    };
    if (c.variant == "copies" || c.variant == "alpha") {
        CopiesRun run;
        if (c.variant == "copies") {
            const ReplayReport rep = diagonalize_with_replay(f, c.requirements, opt, c.depth, c.horizon);
            run = rep.live;
            if (!rep.coherent) {
                report_violations(em, out, "replay", rep.conflicts.empty() ? std::vector<std::string>{"replay diverged"}
                                                                           : rep.conflicts);
                code = kInvariant;
            }
        } else {
            const AlphaRun a =
                diagonalize_alpha_ce(f, c.requirements, OrdinalPresentation::finite(c.alpha), opt, c.depth, c.horizon);
            run = a.run;
            const ApproxReport v = validate_alpha_ce(a.c, a.c.values.x_bound, a.c.values.s_bound);
            if (!v.ok) {
                report_violations(em, out, "alpha_ce", {v.message});
                code = kInvariant;
            }
            for (const auto& n : a.notes) {
                nlohmann::ordered_json j;
                j["record"] = "rank_note";
                j["note"] = n;
                em.record(j);
            }
        }
        for (const auto& l : run.records(em.hash())) {
            if (l.find("\"header\"") == std::string::npos) em.record_line(l);
        }
        report_violations(em, out, "stage_lemma", run.lemma_violations);
        if (!run.lemma_violations.empty()) code = kInvariant;
        std::vector<std::string> bad;
        for (std::size_t k = 0; k < run.extracted.size(); ++k) {
            if (run.extracted[k].length() == 0) continue;
            const ValidationReport v = validate(f, run.extracted[k], Strength::Weak);
            if (!v.ok) bad.push_back("requirement " + std::to_string(k) + ": " + v.message);
        }
        report_violations(em, out, "extracted", bad);
        if (!bad.empty()) code = kInvariant;
        outcome_rows(run.outcomes);
    } else if (c.variant == "listing") {
        const ListingReplayReport rep = diagonalize_listing_with_replay(f, c.requirements, c.budget, opt);
        for (const auto& l : rep.live.records(em.hash())) {
            if (l.find("\"header\"") == std::string::npos) em.record_line(l);
        }
        if (!rep.coherent) {
            report_violations(em, out, "replay", rep.conflicts.empty() ? std::vector<std::string>{"replay diverged"}
                                                                       : rep.conflicts);
            code = kInvariant;
        }
        report_violations(em, out, "listing", rep.live.violations);
        if (!rep.live.violations.empty()) code = kInvariant;
        outcome_rows(rep.live.outcomes);
    } else {
        throw SpecError("unknown diagonalization variant '" + c.variant + "'");
    }
    if (em.text()) {
        out << c.variant << " diagonalization, " << c.requirements << " requirements, " << c.stages << " stages\n";
        table(out, {"req", "phases", "last injury", "settled"}, rows);
    }
    return em.finish(code);
}

int cmd_verify(const RunConfig& c, std::ostream& out) {
    const BlockFunction f = load_function(c.spec);
    Emitter em(c, out);
    std::ifstream in(c.sequence);
    if (!in) throw SpecError("cannot open sequence '" + c.sequence + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    CodingSequence seq;
    try {
        seq = from_text(buf.str());
    } catch (const BlockError& e) {
        throw SpecError(e.what());
    }
    const Strength s = c.strength_given ? strength_of(c) : seq.strength;
    const ValidationReport v = validate(f, seq, s);
    nlohmann::ordered_json j;
    j["record"] = "validation";
    j["strength"] = to_string(s);
    j["length"] = seq.length();
    j["ok"] = v.ok;
    j["condition"] = v.condition;
    j["index"] = v.index;
    j["message"] = v.message;
    em.record(j);
    if (em.text()) {
        out << to_string(s) << " sequence of length " << seq.length() << ": "
            << (v.ok ? "valid" : "invalid, condition " + std::to_string(v.condition) + " at " +
                                     std::to_string(v.index) + ": " + v.message)
            << '\n';
    }
    return em.finish(v.ok ? kOk : kPrecondition);
}

}  // namespace blockfn::cli
