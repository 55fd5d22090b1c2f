#pragma once

// Experiment plumbing: configuration, error injection, synthetic batches,
// Monte Carlo trials and CSV reports.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rla/alpha.hpp"
#include "rla/batch.hpp"
#include "rla/batchcomp.hpp"
#include "rla/census.hpp"
#include "rla/knesset.hpp"

namespace rla {

struct ErrorModel {
    enum class Kind { none, ballot_misread, census_disagree };
    Kind kind = Kind::none;
    double p_misread = 0.0;
    double p_invalid = 0.0;
    double rate = 0.0;

    void validate() const;
};

/// Each true ballot is misread with probability p_misread: it becomes invalid
/// with probability p_invalid, otherwise it counts for a uniformly drawn
/// party. Reported tallies are rebuilt; truth and sizes are unchanged.
std::vector<BatchRecord> inject_ballot_errors(const std::vector<BatchRecord>& truth, const ErrorModel& model,
    const Contest& contest, Rng& rng);

struct SyntheticBatches {
    std::int64_t count = 250;
    std::int64_t min_size = 250;
    std::int64_t max_size = 550;
    /// Width of the noise added to each party's position before ballots are
    /// sorted into batches. Small values give strongly clustered batches.
    double spread = 0.5;
};

/// Splits `truth` into batches with sizes in [min_size, max_size]; reported
/// tallies equal the truth.
std::vector<BatchRecord> generate_batches(const Contest& contest, const Tally& truth, const SyntheticBatches& spec,
    Rng& rng);

enum class AuditKind { alpha, alpha_batch, batchcomp };
AuditKind parse_audit_kind(const std::string& s);
const char* to_string(AuditKind k);

enum class ContestType { plurality, knesset };

/// Contest JSON: `file` (party tally CSV), `type` (knesset | plurality),
/// `seats`, `threshold`, `apparentments` (pairs of party names). An
/// experiment config is also accepted; its `contest` object is used.
struct ContestConfig {
    ContestType type = ContestType::knesset;
    KnessetContest knesset;
    Tally reported;
};

ContestConfig load_contest_config(const std::filesystem::path& path);

struct ExperimentConfig {
    std::vector<AuditKind> audits;
    ContestType contest_type = ContestType::knesset;
    KnessetContest knesset;
    /// Totals from the contest file.
    Tally contest_totals;
    std::optional<std::filesystem::path> batches_file;
    std::optional<std::filesystem::path> declared_sizes_file;
    std::optional<SyntheticBatches> synthetic;
    ErrorModel errors;
    AuditConfig audit;
    double delta = 1e-10;
    bool simplified = false;
    std::vector<PartyPair> weaken;
};

/// Reads the JSON experiment configuration. Relative paths are resolved
/// against the configuration file's directory.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Assertions for the contest given a reported tally: plurality assorters of
/// the reported winner against every other party, or the Knesset set.
std::vector<Assorter> contest_assertions(const ExperimentConfig& cfg, const Tally& reported);

struct TrialReport {
    std::uint64_t trial = 0;
    std::uint64_t seed = 0;
    AuditKind audit = AuditKind::batchcomp;
    AuditOutcome outcome;
    /// Whether the reported allocation equals the true one for this trial.
    bool reported_correct = true;
    std::vector<std::int64_t> margins;
    double wall_seconds = 0.0;
};

struct ExperimentResult {
    std::vector<TrialReport> reports;
    std::int64_t total_ballots = 0;
};

/// Runs every configured audit on `trials` trials. Trial t draws its error
/// injection from Rng::stream(seed, 2t) and its sampling from
/// Rng::stream(seed, 2t+1); all audits of a trial share that sampling
/// stream. Trials run on `threads` worker threads (0 = hardware).
ExperimentResult run_experiment(const ExperimentConfig& cfg, std::uint64_t seed, std::uint64_t trials,
    unsigned threads = 0, const std::optional<std::filesystem::path>& trace_dir = std::nullopt);

struct AssertionSummary {
    AuditKind audit = AuditKind::batchcomp;
    std::string label;
    std::int64_t margin = 0;
    std::int64_t trials = 0;
    std::int64_t approved = 0;
    double mean_ballots = 0.0;
    /// Sample standard deviation; absent with fewer than two trials.
    std::optional<double> sd_ballots;
};

std::vector<AssertionSummary> assertion_stats(const std::vector<TrialReport>& reports);

/// Writes assertions.csv, trials.csv, trial_assertions.csv and summary.csv.
/// No timing data is written so outputs are reproducible byte for byte.
void write_experiment_csv(const ExperimentResult& result, const std::filesystem::path& dir);

// Census experiments.

struct CensusConfig {
    CensusModel model;
    std::vector<District> districts;
    std::optional<std::filesystem::path> households_file;
    HouseholdSizeDistribution sizes;
    double nonresponse = 0.01;
    double disagreement = 0.0;
    int max_regenerations = 200;
    CensusAuditOptions options;
};

CensusConfig load_census_config(const std::filesystem::path& path);

/// `district,population,c_constant`; blank fields are allowed where unused.
std::vector<std::pair<District, std::optional<double>>> read_districts_csv(const std::filesystem::path& path);
/// `residents,probability`
HouseholdSizeDistribution read_household_sizes_csv(const std::filesystem::path& path);
/// `household_id,district,census_count,pes_count,surveyed`
std::vector<Household> read_households_csv(const std::filesystem::path& path, const CensusModel& model);

/// Generated data per trial; PES disagreement is redrawn until the full PES
/// allocation equals the census one.
CensusInstance make_census_instance(const CensusConfig& cfg, Rng& rng);

struct CensusCurvePoint {
    double fraction = 0.0;
    std::uint64_t trial = 0;
    CensusAuditResult result;
};

/// For each trial one instance is generated (stream(root_t, 0) where
/// root_t = Rng::stream(seed, t).next()) and surveyed at every fraction
/// (stream(root_t, 1 + 2i)) and audited (stream(root_t, 2 + 2i)).
std::vector<CensusCurvePoint> run_census_curve(const CensusConfig& cfg, const std::vector<double>& fractions,
    std::uint64_t seed, std::uint64_t trials, unsigned threads = 0);

double median(std::vector<double> v);

void write_census_curve_csv(const CensusConfig& cfg, const std::vector<CensusCurvePoint>& points,
    const std::filesystem::path& dir);
void write_pair_risks_csv(const CensusModel& model, const CensusAuditResult& result, std::ostream& out);

/// Parses a comma-separated list of sample fractions. Each item is a
/// fraction in [0, 1] ("0.0066") or a percentage with a % suffix ("0.66%").
std::vector<double> parse_fraction_grid(const std::string& text);

} // namespace rla
