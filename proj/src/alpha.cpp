#include "rla/alpha.hpp"

#include <cmath>
#include <limits>

#include "audit_common.hpp"

namespace rla {

void AuditConfig::validate() const
{
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw InputError("alpha must be in (0, 1]");
    if (!(epsilon > 0.0))
        throw InputError("epsilon must be positive");
}

const char* to_string(AssertionStatus s)
{
    switch (s) {
    case AssertionStatus::active:
        return "active";
    case AssertionStatus::approved:
        return "approved";
    case AssertionStatus::certain:
        return "certain";
    case AssertionStatus::unapprovable:
        return "unapprovable";
    case AssertionStatus::exhausted:
        return "exhausted";
    }
    return "?";
}

double alpha_factor(double a, double mu, double eta, double u)
{
    if (mu <= 0.0)
        return a > 0.0 ? std::numeric_limits<double>::infinity() : (u - eta) / (u - mu);
    return (a / mu) * (eta - mu) / (u - mu) + (u - eta) / (u - mu);
}

double alpha_factor_census(double a, double mu, double eta, double u)
{
    if (mu <= 0.0)
        return a > 0.0 ? std::numeric_limits<double>::infinity() : (u - eta) / (u - mu);
    return (a * eta / mu + (u - a) * (u - eta) / (u - mu)) / u;
}

std::vector<AssertionState> alpha_init(std::span<const Assorter> assorters, const Tally& reported,
    std::int64_t n, const AuditConfig& cfg)
{
    cfg.validate();
    if (n <= 0)
        throw Error("alpha: no ballots");
    if (reported.total() != n)
        throw Error("alpha: reported tally does not cover all ballots");

    std::vector<AssertionState> states;
    states.reserve(assorters.size());
    for (const auto& a : assorters) {
        AssertionState s;
        s.u = to_double(a.max_value());
        s.eta = to_double(assorter_mean(a, reported));
        if (!a.mean_exceeds_half(reported)) {
            s.active = false;
            s.status = AssertionStatus::unapprovable;
        } else if (s.eta >= s.u) {
            // Every reported ballot has the maximal value.
            s.u = s.eta + cfg.epsilon;
        }
        states.push_back(s);
    }
    return states;
}

void alpha_step(AssertionState& s, double value, const AuditConfig& cfg, std::int64_t n,
    double reported_mean, std::int64_t weight)
{
    if (!s.active)
        return;
    if (s.seen + weight > n)
        throw Error("alpha: no ballots left to sample");

    s.T *= alpha_factor(value, s.mu, s.eta, s.u);
    s.T_max = std::max(s.T_max, s.T);
    s.cum_sum += static_cast<double>(weight) * value;
    s.seen += weight;

    if (s.T > 1.0 / cfg.alpha) {
        s.active = false;
        s.status = AssertionStatus::approved;
        return;
    }
    if (s.seen == n)
        return;

    const double remaining = static_cast<double>(n - s.seen);
    const double nd = static_cast<double>(n);
    s.mu = (nd / 2.0 - s.cum_sum) / remaining;
    s.eta = std::max(s.mu + cfg.epsilon, (nd * reported_mean - s.cum_sum) / remaining);
    s.u = std::max(s.u, s.eta + cfg.epsilon);
    if (s.mu < 0.0) {
        s.active = false;
        s.status = AssertionStatus::certain;
    }
}

std::vector<BallotId> expand_ballots(const Tally& t)
{
    std::vector<BallotId> out;
    out.reserve(static_cast<std::size_t>(t.total()));
    for (std::size_t i = 0; i < t.size(); ++i)
        out.insert(out.end(), static_cast<std::size_t>(t.counts()[i]), BallotId{i});
    return out;
}

namespace {

std::vector<double> reported_means(std::span<const Assorter> assorters, const Tally& reported)
{
    std::vector<double> out;
    for (const auto& a : assorters)
        out.push_back(to_double(assorter_mean(a, reported)));
    return out;
}

std::vector<bool> truly_holds(std::span<const Assorter> assorters, const Tally& truth)
{
    std::vector<bool> out;
    for (const auto& a : assorters)
        out.push_back(a.mean_exceeds_half(truth));
    return out;
}

bool any_active(const std::vector<AssertionState>& states)
{
    for (const auto& s : states) {
        if (s.active)
            return true;
    }
    return false;
}

} // namespace

AuditOutcome alpha_audit(std::span<const BallotId> ballots, std::span<const Assorter> assorters,
    const Tally& reported, const AuditConfig& cfg, Rng& rng, const TraceSink& trace)
{
    const auto n = static_cast<std::int64_t>(ballots.size());
    auto states = alpha_init(assorters, reported, n, cfg);
    const auto rep_mean = reported_means(assorters, reported);

    std::vector<BallotId> order(ballots.begin(), ballots.end());
    rng.shuffle(order);

    Tally truth(std::vector<std::int64_t>(reported.size(), 0));
    for (auto b : order)
        truth.add(b, 1);

    std::vector<std::int64_t> decided(assorters.size(), 0);
    std::int64_t drawn = 0;
    for (auto b : order) {
        if (!any_active(states))
            break;
        ++drawn;
        for (std::size_t k = 0; k < states.size(); ++k) {
            auto& s = states[k];
            if (!s.active)
                continue;
            alpha_step(s, assorters[k].value_d(b), cfg, n, rep_mean[k]);
            if (trace)
                trace(drawn, k, s);
            if (!s.active)
                decided[k] = s.seen;
        }
    }

    return detail::finish_outcome(
        assorters, states, decided, decided, truly_holds(assorters, truth), drawn, drawn, n, n);
}

AuditOutcome alpha_audit(std::span<const BallotId> ballots, std::span<const Assorter> assorters,
    const Tally& reported, const AuditConfig& cfg)
{
    Rng rng(cfg.seed);
    return alpha_audit(ballots, assorters, reported, cfg, rng);
}

AuditOutcome alpha_batch_audit(std::span<const BatchRecord> batches, std::span<const Assorter> assorters,
    const Tally& reported, const AuditConfig& cfg, Rng& rng, const TraceSink& trace)
{
    if (batches.empty())
        throw Error("alpha-batch: no batches");

    std::vector<std::int64_t> sizes;
    Tally truth(std::vector<std::int64_t>(reported.size(), 0));
    std::int64_t n = 0;
    for (const auto& b : batches) {
        if (b.size <= 0 || b.truth.total() != b.size)
            throw Error("alpha-batch: batch '" + b.id + "' has inconsistent size");
        sizes.push_back(b.size);
        truth += b.truth;
        n += b.size;
    }

    auto states = alpha_init(assorters, reported, n, cfg);
    const auto rep_mean = reported_means(assorters, reported);

    std::vector<std::int64_t> decided_ballots(assorters.size(), 0), decided_batches(assorters.size(), 0);
    WeightedUrn urn(sizes);
    std::int64_t drawn_ballots = 0, drawn_batches = 0;
    while (!urn.empty() && any_active(states)) {
        const auto& batch = batches[urn.draw(rng)];
        ++drawn_batches;
        drawn_ballots += batch.size;
        for (std::size_t k = 0; k < states.size(); ++k) {
            auto& s = states[k];
            if (!s.active)
                continue;
            alpha_step(s, assorters[k].mean_d(batch.truth), cfg, n, rep_mean[k], batch.size);
            if (trace)
                trace(drawn_batches, k, s);
            if (!s.active) {
                decided_ballots[k] = drawn_ballots;
                decided_batches[k] = drawn_batches;
            }
        }
    }

    return detail::finish_outcome(assorters, states, decided_ballots, decided_batches,
        truly_holds(assorters, truth), drawn_ballots, drawn_batches, n,
        static_cast<std::int64_t>(batches.size()));
}

AuditOutcome alpha_batch_audit(std::span<const BatchRecord> batches, std::span<const Assorter> assorters,
    const Tally& reported, const AuditConfig& cfg)
{
    Rng rng(cfg.seed);
    return alpha_batch_audit(batches, assorters, reported, cfg, rng);
}

namespace detail {

AuditOutcome finish_outcome(std::span<const Assorter> assorters, std::span<const AssertionState> states,
    std::span<const std::int64_t> decided_ballots, std::span<const std::int64_t> decided_batches,
    const std::vector<bool>& holds, std::int64_t ballots_drawn, std::int64_t batches_drawn,
    std::int64_t total_ballots, std::int64_t total_batches)
{
    AuditOutcome out;
    out.total_ballots = total_ballots;
    out.approved = true;
    for (std::size_t k = 0; k < states.size(); ++k) {
        AssertionResult r;
        r.label = assorters[k].label();
        r.status = states[k].status;
        if (r.status == AssertionStatus::active)
            r.status = AssertionStatus::exhausted;
        r.T_max = states[k].T_max;
        if (r.status == AssertionStatus::approved || r.status == AssertionStatus::certain) {
            r.ballots_examined = decided_ballots[k];
            r.batches_examined = decided_batches[k];
        } else {
            out.approved = false;
        }
        out.assertions.push_back(std::move(r));
    }
    if (out.approved) {
        out.ballots_examined = ballots_drawn;
        out.batches_examined = batches_drawn;
        return out;
    }
    out.full_recount = true;
    out.ballots_examined = total_ballots;
    out.batches_examined = total_batches;
    for (std::size_t k = 0; k < out.assertions.size(); ++k) {
        auto& r = out.assertions[k];
        if (r.status != AssertionStatus::approved && r.status != AssertionStatus::certain) {
            r.ballots_examined = total_ballots;
            r.batches_examined = total_batches;
        }
        r.recount_holds = holds[k];
    }
    return out;
}

} // namespace detail

} // namespace rla
