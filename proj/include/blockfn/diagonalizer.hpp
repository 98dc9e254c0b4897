#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "blockfn/approximations.hpp"
#include "blockfn/coding_trees.hpp"
#include "blockfn/omega_copy.hpp"

namespace blockfn {

// ---- functionals ----------------------------------------------------------------

// Oracle values by index; -1 marks an undefined value.
using Oracle = std::vector<std::int64_t>;

// use = -1 means the computation reads no oracle value.
struct Computation {
    std::int64_t output = 0;
    std::int64_t use = -1;
    bool operator==(const Computation&) const = default;
};

class Functional {
public:
    virtual ~Functional() = default;
    virtual std::optional<Computation> run(std::int64_t input, const Oracle& oracle) const = 0;
    virtual std::string id() const = 0;
};

// Finite table (input, oracle prefix) -> (output, use). The prefix of an entry
// has length use + 1.
class TableFunctional : public Functional {
public:
    struct Entry {
        std::int64_t input = 0;
        std::vector<std::int64_t> prefix;
        Computation result;
    };

    explicit TableFunctional(std::string name = "table") : name_(std::move(name)) {}

    // False when an entry with a compatible prefix already gives a different answer.
    bool add(Entry e);
    const std::vector<Entry>& entries() const { return entries_; }
    std::optional<Computation> run(std::int64_t input, const Oracle& oracle) const override;
    std::string id() const override { return name_; }

    // Pairs of entries violating use-consistency.
    std::vector<std::string> incoherent() const;

    nlohmann::json to_json() const;
    static TableFunctional from_json(const nlohmann::json& j);

private:
    std::string name_;
    std::vector<Entry> entries_;
    std::map<std::int64_t, std::vector<std::size_t>> by_input_;
};

// Passes calls through and tabulates every converging one.
class RecordingFunctional : public Functional {
public:
    explicit RecordingFunctional(const Functional& inner) : inner_(inner), table_(inner.id()) {}
    std::optional<Computation> run(std::int64_t input, const Oracle& oracle) const override;
    std::string id() const override { return inner_.id(); }
    const TableFunctional& table() const { return table_; }
    const std::vector<std::string>& conflicts() const { return conflicts_; }

private:
    const Functional& inner_;
    mutable TableFunctional table_;
    mutable std::vector<std::string> conflicts_;
};

// Runs `fn` on every input in [0, hi]; outputs in order and the largest use.
std::optional<Computation> run_prefix(const Functional& fn, std::int64_t hi, const Oracle& oracle,
                                      std::vector<std::int64_t>& outputs);

// ---- requirements and records ----------------------------------------------------------

// Requirement against copy or listing `target` with functionals phi and psi.
// Priority is the lexicographic order of (target, phi, psi).
struct Requirement {
    std::size_t target = 0;
    std::size_t phi = 0;
    std::size_t psi = 0;
    auto operator<=>(const Requirement&) const = default;
};

struct PhaseRecord {
    std::size_t req = 0;       // index into the sorted requirement list
    std::size_t episode = 0;   // bumps on every (re)initialisation
    std::size_t n = 0;         // phase
    std::uint64_t stage = 0;   // stage of the act
    std::int64_t x = -1;       // diagonalization point (copies variant)
    std::int64_t u = 0;
    std::int64_t v = 0;
    std::int64_t m = 0;        // block-closure bound (copies variant)
    std::vector<std::int64_t> restraint;  // restrained C prefix or restrained ids
};

struct RequirementOutcome {
    Requirement req;
    std::size_t episode = 0;
    std::int64_t x = -1;
    std::uint64_t last_injury = 0;
    std::size_t phases = 0;   // phases entered since the last (re)initialisation
    bool initialised = false;
    bool satisfied = false;   // does not require attention at the final stage
    bool target_broken = false;
    std::string note;
};

// What an adversary may observe of the construction at the start of a stage.
struct DiagonalState {
    std::uint64_t stage = 0;
    std::vector<int> c;  // C_s by point
    std::vector<std::int64_t> x_of;        // by requirement, -1 when unassigned
    std::vector<std::size_t> episode_of;   // by requirement
    std::vector<std::size_t> phase_of;     // by requirement
};

// ---- Theorem-style run against copies ---------------------------------------------

// A copy L_e as a stream of finite linear orders of ids.
class CopyStream {
public:
    virtual ~CopyStream() = default;
    virtual std::vector<ElementId> order_at(const DiagonalState& st) = 0;
};

class RecordedStream : public CopyStream {
public:
    explicit RecordedStream(std::vector<std::vector<ElementId>> orders) : orders_(std::move(orders)) {}
    std::vector<ElementId> order_at(const DiagonalState& st) override;

private:
    std::vector<std::vector<ElementId>> orders_;
};

struct CopiesRun {
    Delta02Approx c;
    std::vector<Requirement> requirements;  // sorted
    std::vector<PhaseRecord> phases;
    std::vector<RequirementOutcome> outcomes;
    std::vector<std::vector<std::vector<ElementId>>> orders;  // [copy][stage]
    std::vector<CodingSequence> extracted;  // final episode per requirement, may be empty
    std::vector<std::string> lemma_violations;

    std::vector<std::string> records(const std::string& config_hash) const;
};

struct DiagonalOptions {
    std::size_t stages = 40;
    std::size_t horizon_blocks = 4096;
};

// One act per stage, highest priority first; an act injures every lower requirement.
CopiesRun diagonalize_against_copies(const BlockFunction& f, std::vector<CopyStream*> copies,
                                     std::vector<const Functional*> phis, std::vector<const Functional*> psis,
                                     std::vector<Requirement> reqs, const DiagonalOptions& opt);

// Weak sequence read off the act records of one episode. Throws when the
// records do not describe nested closures.
CodingSequence extract_weak(const BlockFunction& f, const std::vector<PhaseRecord>& episode,
                            const std::vector<std::vector<ElementId>>& orders);

// The three stage equalities and inequality on one episode's records.
std::vector<std::string> check_stage_lemma(const BlockFunction& f, const std::vector<PhaseRecord>& episode,
                                           const Delta02Approx& c,
                                           const std::vector<std::vector<ElementId>>& orders);

// Records grouped by (requirement, episode), in act order.
std::vector<std::vector<PhaseRecord>> episodes(const std::vector<PhaseRecord>& phases);

// ---- live adversaries and replay ----------------------------------------------------

// A copy that carries C(x) of requirement `req` along a strong coding sequence
// from the normal-form tree, one interval per change of C(x). When the sequence
// runs out the copy stops following. Its two functionals read the coding back.
class TrackingAdversary : public CopyStream {
public:
    TrackingAdversary(const BlockFunction& f, std::size_t req, std::size_t depth, std::size_t tree_blocks,
                      std::size_t horizon_blocks);
    ~TrackingAdversary() override;
    std::vector<ElementId> order_at(const DiagonalState& st) override;

    const Functional& phi() const;  // f^L -> C
    const Functional& psi() const;  // C -> f^L
    std::size_t longest_used() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct ReplayReport {
    CopiesRun live;
    CopiesRun replay;
    std::vector<TableFunctional> phis;
    std::vector<TableFunctional> psis;
    std::vector<std::string> conflicts;  // use-consistency breaches while recording
    bool coherent = false;               // replay reproduced the live run
};

// Pass 1 runs live adversaries (one copy and pair per requirement), pass 2
// reruns the construction on the recorded tables and copy streams.
ReplayReport diagonalize_with_replay(const BlockFunction& f, std::size_t requirements, const DiagonalOptions& opt,
                                     std::size_t depth = 5, std::size_t tree_blocks = 40);

// ---- listing variant -------------------------------------------------------------

class ListingStream {
public:
    virtual ~ListingStream() = default;
    // X_{e,s} on [0, width); `order` is the copy built so far.
    virtual std::vector<int> column_at(std::uint64_t stage, const std::vector<ElementId>& order,
                                       const std::vector<std::vector<ElementId>>& reserved) = 0;
};

class RecordedListing : public ListingStream {
public:
    explicit RecordedListing(Delta02Approx x) : x_(std::move(x)) {}
    std::vector<int> column_at(std::uint64_t stage, const std::vector<ElementId>&,
                               const std::vector<std::vector<ElementId>>&) override;

private:
    Delta02Approx x_;
};

struct ListingRun {
    std::vector<Requirement> requirements;
    std::vector<InsertRecord> inserts;
    std::vector<std::vector<ElementId>> orders;       // by stage
    std::vector<std::vector<std::vector<int>>> x;     // [listing][stage][point]
    std::vector<PhaseRecord> phases;                  // restraint holds the reserved ids
    std::vector<RequirementOutcome> outcomes;
    std::vector<std::string> violations;              // reserved-value and lemma checks

    std::vector<std::string> records(const std::string& config_hash) const;
};

ListingRun diagonalize_against_listing(const BlockFunction& f, std::vector<ListingStream*> listing,
                                       std::vector<const Functional*> phis, std::vector<const Functional*> psis,
                                       std::vector<Requirement> reqs, const DiagonalOptions& opt);

// Listing e follows whether the reserved ids of requirement `req` form one
// block, for at most `budget` changes of its parity point.
class ParityListing : public ListingStream {
public:
    ParityListing(const BlockFunction& f, std::size_t req, std::int64_t point, std::size_t width,
                  std::size_t budget);
    ~ParityListing() override;
    std::vector<int> column_at(std::uint64_t stage, const std::vector<ElementId>& order,
                               const std::vector<std::vector<ElementId>>& reserved) override;
    const Functional& phi() const;  // X -> f^A on the reserved ids
    const Functional& psi() const;  // f^A -> X

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct ListingReplayReport {
    ListingRun live;
    ListingRun replay;
    std::vector<std::string> conflicts;
    bool coherent = false;
};

ListingReplayReport diagonalize_listing_with_replay(const BlockFunction& f, std::size_t requirements,
                                                    std::size_t budget, const DiagonalOptions& opt);

// ---- alpha-c.e. variant ---------------------------------------------------------

struct AlphaRun {
    CopiesRun run;
    AlphaCEApprox c;
    std::vector<std::string> notes;  // how each rank was obtained
};

// Ranks come from the weak fragment: the normal-form restriction of each
// extracted sequence when it lies in the fragment, else top minus the length.
// Throws BlockError when a change would need a rank below 0.
AlphaRun alpha_from_run(const BlockFunction& f, const CopiesRun& run, const NFTree& fragment,
                        const TreeRank& ranks, const OrdinalPresentation& p);

AlphaRun diagonalize_alpha_ce(const BlockFunction& f, std::size_t requirements, const OrdinalPresentation& p,
                              const DiagonalOptions& opt, std::size_t depth = 7, std::size_t tree_blocks = 40);

}  // namespace blockfn
