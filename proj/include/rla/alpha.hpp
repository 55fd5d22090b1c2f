#pragma once

// ALPHA martingale test over single ballots, and the ALPHA-batch baseline.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rla/batch.hpp"
#include "rla/core.hpp"
#include "rla/random.hpp"

namespace rla {

struct AuditConfig {
    double alpha = 0.05;
    double epsilon = 1e-9;
    std::uint64_t seed = 0;

    void validate() const;
};

enum class AssertionStatus {
    active,
    approved,     // T exceeded 1/alpha
    certain,      // mu dropped below 0
    unapprovable, // the reported results already refute it
    exhausted,    // every ballot was examined without approval
};

const char* to_string(AssertionStatus s);

struct AssertionState {
    double T = 1.0;
    double T_max = 1.0;
    double mu = 0.5;
    double eta = 0.0;
    double u = 0.0;
    double cum_sum = 0.0;
    std::int64_t seen = 0;
    bool active = true;
    AssertionStatus status = AssertionStatus::active;
};

/// T multiplier (a/mu)(eta-mu)/(u-mu) + (u-eta)/(u-mu).
double alpha_factor(double a, double mu, double eta, double u);
/// The same multiplier written as (1/u)(a eta/mu + (u-a)(u-eta)/(u-mu)).
double alpha_factor_census(double a, double mu, double eta, double u);

std::vector<AssertionState> alpha_init(std::span<const Assorter> assorters, const Tally& reported,
    std::int64_t n, const AuditConfig& cfg);

/// One observation of `value` standing for `weight` ballots (1 for a single
/// ballot, the batch size in ALPHA-batch). Throws when no ballots remain.
void alpha_step(AssertionState& s, double value, const AuditConfig& cfg, std::int64_t n,
    double reported_mean, std::int64_t weight = 1);

struct AssertionResult {
    std::string label;
    AssertionStatus status = AssertionStatus::active;
    std::int64_t ballots_examined = 0;
    std::int64_t batches_examined = 0;
    double T_max = 1.0;
    /// Set only after a full recount: whether the assertion truly holds.
    std::optional<bool> recount_holds;
};

struct AuditOutcome {
    std::vector<AssertionResult> assertions;
    bool approved = false;
    bool full_recount = false;
    std::int64_t ballots_examined = 0;
    std::int64_t batches_examined = 0;
    std::int64_t total_ballots = 0;
};

/// Called after every draw for every assertion still being tested.
using TraceSink = std::function<void(std::int64_t step, std::size_t assertion, const AssertionState&)>;

AuditOutcome alpha_audit(std::span<const BallotId> ballots, std::span<const Assorter> assorters,
    const Tally& reported, const AuditConfig& cfg, Rng& rng, const TraceSink& trace = {});
AuditOutcome alpha_audit(std::span<const BallotId> ballots, std::span<const Assorter> assorters,
    const Tally& reported, const AuditConfig& cfg);

/// Batches drawn without replacement with probability proportional to size;
/// each draw contributes the true batch mean with weight equal to its size.
AuditOutcome alpha_batch_audit(std::span<const BatchRecord> batches, std::span<const Assorter> assorters,
    const Tally& reported, const AuditConfig& cfg, Rng& rng, const TraceSink& trace = {});
AuditOutcome alpha_batch_audit(std::span<const BatchRecord> batches, std::span<const Assorter> assorters,
    const Tally& reported, const AuditConfig& cfg);

/// Expands a tally into a ballot list in contest order.
std::vector<BallotId> expand_ballots(const Tally& t);

} // namespace rla
