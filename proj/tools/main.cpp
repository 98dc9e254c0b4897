#include <iostream>
#include <map>

#include <CLI11.hpp>

#include "blockfn/encoder.hpp"
#include "blockfn/spec_io.hpp"
#include "commands.hpp"

using namespace blockfn;
using namespace blockfn::cli;

namespace {

void common(CLI::App* sub, RunConfig& c) {
    sub->add_option("--spec", c.spec, "spec file or builtin:<name>")->required();
    sub->add_option("--horizon", c.horizon, "horizon in blocks")->check(CLI::PositiveNumber);
    sub->add_option("--depth", c.depth, "tree depth")->check(CLI::PositiveNumber);
    sub->add_option("--stages", c.stages, "construction stages")->check(CLI::PositiveNumber);
    sub->add_option("--seed", c.seed, "generator seed");
    sub->add_option("--out", c.out, "write line records here");
    auto* strong = sub->add_flag("--strong", "strong sequences (default)");
    auto* weak = sub->add_flag("--weak", "weak sequences");
    strong->excludes(weak);
    sub->callback([&c, strong, weak] {
        c.strength_given = strong->count() + weak->count() > 0;
        c.strong = weak->count() == 0;
    });
    sub->add_option("--format", c.format, "text or records")
        ->transform(CLI::CheckedTransformer(std::map<std::string, Format>{{"text", Format::Text},
                                                                          {"records", Format::Records}}))
        ->option_text("text|records");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"block function analyses and constructions"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);
    RunConfig c;

    auto* analyze = app.add_subcommand("analyze", "block decomposition, flags and spectrum class");
    auto* search = app.add_subcommand("search", "normal-form coding sequence search");
    auto* rank = app.add_subcommand("rank", "minrank (--strong) or weak fragment rank (--weak)");
    auto* encode = app.add_subcommand("encode", "encode a random approximation into a copy and decode it");
    auto* diag = app.add_subcommand("diagonalize", "run a diagonalization against replayed adversaries");
    auto* verify = app.add_subcommand("verify", "validate a serialized coding sequence");
    for (auto* sub : {analyze, search, rank, encode, diag, verify}) common(sub, c);

    encode->add_option("--mode", c.mode, "sequence or tree")->check(CLI::IsMember({"sequence", "tree"}));
    encode->add_option("--points", c.points, "number of encoded bits")->check(CLI::PositiveNumber);
    encode->add_option("--budget", c.budget, "mind changes per bit (sequence mode)");
    encode->add_option("--alpha", c.alpha, "finite ordinal for the counting function (tree mode)");
    diag->add_option("--variant", c.variant, "copies, listing or alpha")
        ->check(CLI::IsMember({"copies", "listing", "alpha"}));
    diag->add_option("--requirements", c.requirements, "number of requirements")->check(CLI::PositiveNumber);
    diag->add_option("--budget", c.budget, "listing change budget");
    diag->add_option("--alpha", c.alpha, "finite ordinal for the alpha variant");
    verify->add_option("sequence", c.sequence, "sequence file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kPrecondition;
    }

    const std::map<CLI::App*, int (*)(const RunConfig&, std::ostream&)> commands{
        {analyze, cmd_analyze}, {search, cmd_search},     {rank, cmd_rank},
        {encode, cmd_encode},   {diag, cmd_diagonalize}, {verify, cmd_verify},
    };
    for (const auto& [sub, fn] : commands) {
        if (!sub->parsed()) continue;
        c.command = sub->get_name();
        try {
            return fn(c, std::cout);
        } catch (const SpecError& e) {
            std::cerr << "error: " << e.what() << '\n';
            return kPrecondition;
        } catch (const RankBudgetError& e) {
            std::cerr << "rank budget exceeded at stage " << e.stage << ": " << e.what() << '\n';
            return kPrecondition;
        } catch (const BlockError& e) {
            std::cerr << "error: " << e.what() << '\n';
            return kPrecondition;
        } catch (const std::exception& e) {
            std::cerr << "internal error: " << e.what() << '\n';
            return kInvariant;
        }
    }
    return kPrecondition;
}
