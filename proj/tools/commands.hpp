#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

namespace blockfn::cli {

enum class Format { Text, Records };

enum Exit : int { kOk = 0, kPrecondition = 1, kInvariant = 2 };

struct RunConfig {
    std::string command;
    std::string spec;
    std::size_t horizon = 40;  // blocks
    std::size_t depth = 5;
    std::size_t stages = 40;
    std::uint64_t seed = 0;
    bool strong = true;
    bool strength_given = false;
    Format format = Format::Text;
    std::string out;

    // command-specific
    std::string mode = "sequence";    // encode: sequence | tree
    std::size_t points = 6;           // encode: x bound
    std::size_t budget = 4;           // encode / diagonalize listing
    std::uint64_t alpha = 2;          // encode tree / diagonalize alpha
    std::string variant = "copies";   // diagonalize: copies | listing | alpha
    std::size_t requirements = 3;
    std::string sequence;             // verify: serialized sequence file
};

// Hash over every field that affects the output.
std::string hash_of(const RunConfig& c);

int cmd_analyze(const RunConfig& c, std::ostream& out);
int cmd_search(const RunConfig& c, std::ostream& out);
int cmd_rank(const RunConfig& c, std::ostream& out);
int cmd_encode(const RunConfig& c, std::ostream& out);
int cmd_diagonalize(const RunConfig& c, std::ostream& out);
int cmd_verify(const RunConfig& c, std::ostream& out);

}  // namespace blockfn::cli
