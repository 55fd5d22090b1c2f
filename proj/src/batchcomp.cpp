#include "rla/batchcomp.hpp"

#include <algorithm>
#include <limits>

#include "audit_common.hpp"

namespace rla {

BatchRecord pad_missing_ballots(const BatchRecord& batch, std::int64_t declared_size, const Contest& contest)
{
    if (declared_size < batch.reported.total() || declared_size < batch.truth.total())
        throw Error("batch overflow");
    BatchRecord out = batch;
    out.reported.add(contest.invalid(), declared_size - batch.reported.total());
    out.truth.add(contest.invalid(), declared_size - batch.truth.total());
    out.size = declared_size;
    return out;
}

BatchAssorter::BatchAssorter(const Assorter& a, std::span<const BatchRecord> batches, double d)
    : base(&a), delta(d)
{
    if (batches.empty())
        throw Error("batchcomp: no batches");
    if (!(delta > 0.0))
        throw Error("batchcomp: delta must be positive");
    Tally reported(std::vector<std::int64_t>(a.size(), 0));
    w = -std::numeric_limits<double>::infinity();
    for (const auto& b : batches) {
        reported += b.reported;
        w = std::max(w, a.mean_d(b.reported));
    }
    M = to_double(assorter_mean(a, reported)) - 0.5;
    if (!(M > 0.0) || !a.mean_exceeds_half(reported))
        throw Error("batchcomp: assorter '" + a.label() + "' has no positive reported margin");
    if (!(w > M))
        throw Error("batchcomp: assorter '" + a.label() + "' has w <= M");
    eta0 = 0.5 + M / (2.0 * (w - M));
    U = 0.5 + (M + delta) / (2.0 * (w - M));
}

double batch_assorter_value(const BatchAssorter& A, const BatchRecord& batch)
{
    const double t = A.base->mean_d(batch.truth);
    const double r = A.base->mean_d(batch.reported);
    return 0.5 + (A.M + t - r) / (2.0 * (A.w - A.M));
}

double batchcomp_simplified_step(double T, double A_value, double mu)
{
    if (!(mu > 0.0))
        throw Error("batchcomp: simplified step needs mu > 0");
    return T * A_value / mu;
}

AuditOutcome batchcomp_audit(std::span<const BatchRecord> batches, std::span<const Assorter> assorters,
    const AuditConfig& cfg, Rng& rng, const BatchcompOptions& options, const TraceSink& trace)
{
    cfg.validate();
    if (batches.empty())
        throw Error("batchcomp: no batches");

    std::vector<std::int64_t> sizes;
    std::int64_t n = 0;
    for (const auto& b : batches) {
        if (b.size <= 0 || b.reported.total() != b.size || b.truth.total() != b.size)
            throw Error("batchcomp: batch '" + b.id + "' is not padded to its size");
        sizes.push_back(b.size);
        n += b.size;
    }
    Tally reported(std::vector<std::int64_t>(batches.front().reported.size(), 0));
    Tally truth = reported;
    for (const auto& b : batches) {
        reported += b.reported;
        truth += b.truth;
    }

    const std::size_t K = assorters.size();
    std::vector<AssertionState> states(K);
    std::vector<double> eta0(K, 0.0);
    // values[k][i] = A_k(B_i), computed once
    std::vector<std::vector<double>> values(K);
    for (std::size_t k = 0; k < K; ++k) {
        auto& s = states[k];
        if (!assorters[k].mean_exceeds_half(reported)) {
            s.active = false;
            s.status = AssertionStatus::unapprovable;
            continue;
        }
        BatchAssorter A(assorters[k], batches, options.delta);
        eta0[k] = A.eta0;
        s.eta = A.eta0;
        s.u = A.U;
        values[k].reserve(batches.size());
        for (const auto& b : batches)
            values[k].push_back(batch_assorter_value(A, b));
    }

    std::vector<std::int64_t> decided_ballots(K, 0), decided_batches(K, 0);
    WeightedUrn urn(sizes);
    std::int64_t drawn_ballots = 0, drawn_batches = 0;
    auto any_active = [&] {
        return std::any_of(states.begin(), states.end(), [](const AssertionState& s) { return s.active; });
    };
    const double nd = static_cast<double>(n);

    while (!urn.empty() && any_active()) {
        const std::size_t i = urn.draw(rng);
        const auto size = batches[i].size;
        ++drawn_batches;
        drawn_ballots += size;
        for (std::size_t k = 0; k < K; ++k) {
            auto& s = states[k];
            if (!s.active)
                continue;
            const double A = values[k][i];
            if (options.simplified)
                s.T = s.mu > 0.0 ? batchcomp_simplified_step(s.T, A, s.mu) : s.T * alpha_factor(A, s.mu, s.eta, s.u);
            else
                s.T *= alpha_factor(A, s.mu, s.eta, s.u);
            s.T_max = std::max(s.T_max, s.T);
            s.cum_sum += static_cast<double>(size) * A;
            s.seen += size;

            if (s.T > 1.0 / cfg.alpha) {
                s.active = false;
                s.status = AssertionStatus::approved;
            } else if (s.seen < n) {
                s.mu = (nd / 2.0 - s.cum_sum) / static_cast<double>(n - s.seen);
                s.eta = std::max(eta0[k], s.mu + cfg.epsilon);
                s.u = std::max(s.u, s.eta + cfg.epsilon);
                if (s.mu < 0.0) {
                    s.active = false;
                    s.status = AssertionStatus::certain;
                }
            }
            if (trace)
                trace(drawn_batches, k, s);
            if (!s.active) {
                decided_ballots[k] = drawn_ballots;
                decided_batches[k] = drawn_batches;
            }
        }
    }

    std::vector<bool> holds;
    for (const auto& a : assorters)
        holds.push_back(a.mean_exceeds_half(truth));
    return detail::finish_outcome(assorters, states, decided_ballots, decided_batches, holds, drawn_ballots,
        drawn_batches, n, static_cast<std::int64_t>(batches.size()));
}

AuditOutcome batchcomp_audit(std::span<const BatchRecord> batches, std::span<const Assorter> assorters,
    const AuditConfig& cfg, double delta)
{
    Rng rng(cfg.seed);
    BatchcompOptions options;
    options.delta = delta;
    return batchcomp_audit(batches, assorters, cfg, rng, options);
}

} // namespace rla
