#pragma once

// Batch-level comparison audit over SHANGRLA assorters.

#include <cstdint>
#include <span>
#include <vector>

#include "rla/alpha.hpp"
#include "rla/batch.hpp"
#include "rla/core.hpp"

namespace rla {

/// Pads both tallies with invalid ballots up to `declared_size`.
BatchRecord pad_missing_ballots(const BatchRecord& batch, std::int64_t declared_size, const Contest& contest);

/// A_k(B) = 1/2 + (M + a_true(B) - a_rep(B)) / (2(w - M)).
struct BatchAssorter {
    const Assorter* base = nullptr;
    double M = 0.0;   // reported overall mean minus 1/2
    double w = 0.0;   // largest reported batch mean
    double delta = 0.0;
    double eta0 = 0.0; // value on an accurately reported batch
    double U = 0.0;

    /// Throws unless w > M > 0.
    BatchAssorter(const Assorter& base, std::span<const BatchRecord> batches, double delta);
};

double batch_assorter_value(const BatchAssorter& A, const BatchRecord& batch);

/// T * A / mu.
double batchcomp_simplified_step(double T, double A_value, double mu);

struct BatchcompOptions {
    double delta = 1e-10;
    bool simplified = false;
};

AuditOutcome batchcomp_audit(std::span<const BatchRecord> batches, std::span<const Assorter> assorters,
    const AuditConfig& cfg, Rng& rng, const BatchcompOptions& options = {}, const TraceSink& trace = {});
AuditOutcome batchcomp_audit(std::span<const BatchRecord> batches, std::span<const Assorter> assorters,
    const AuditConfig& cfg, double delta = 1e-10);

} // namespace rla
