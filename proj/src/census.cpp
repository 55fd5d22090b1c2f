#include "rla/census.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rla/highest_averages.hpp"

namespace rla {

Divisor parse_divisor(const std::string& name)
{
    if (name == "dhondt")
        return Divisor::dhondt;
    if (name == "sainte_lague")
        return Divisor::sainte_lague;
    throw InputError("unknown divisor '" + name + "' (expected dhondt or sainte_lague)");
}

const char* to_string(Divisor d)
{
    return d == Divisor::dhondt ? "dhondt" : "sainte_lague";
}

double CensusModel::d(std::int64_t r) const
{
    if (r <= 0)
        throw Error("census: divisor evaluated at r <= 0");
    return divisor == Divisor::dhondt ? static_cast<double>(r) : static_cast<double>(2 * r - 1);
}

std::size_t CensusModel::state_index(const std::string& name) const
{
    auto it = std::find(states.begin(), states.end(), name);
    if (it == states.end())
        throw InputError("unknown state '" + name + "'");
    return static_cast<std::size_t>(it - states.begin());
}

void CensusModel::validate() const
{
    if (states.empty())
        throw InputError("census: no states");
    if (constants.size() != states.size())
        throw InputError("census: one constant per state required");
    if (representatives <= 0)
        throw InputError("census: representatives must be positive");
    if (g_max <= 0)
        throw InputError("census: g_max must be positive");
    for (std::size_t i = 0; i < states.size(); ++i) {
        if (std::find(states.begin(), states.begin() + static_cast<std::ptrdiff_t>(i), states[i])
            != states.begin() + static_cast<std::ptrdiff_t>(i))
            throw InputError("census: duplicate state '" + states[i] + "'");
    }
}

std::vector<std::int64_t> apportion(const CensusModel& model, std::span<const std::int64_t> populations)
{
    if (populations.size() != model.states.size())
        throw Error("census: one population per state required");
    std::vector<long double> row(populations.size());
    for (std::size_t s = 0; s < row.size(); ++s) {
        row[s] = static_cast<long double>(populations[s]) + model.constants[s];
        if (!(row[s] > 0))
            throw Error("census: state '" + model.states[s] + "' has a non-positive row value");
    }
    auto cmp = [&](std::size_t i, std::int64_t ri, std::size_t j, std::int64_t rj) {
        long double a = row[i] * model.d(rj);
        long double b = row[j] * model.d(ri);
        return a < b ? -1 : (a > b ? 1 : 0);
    };
    return highest_averages(row.size(), model.representatives, cmp, "apportionment tie");
}

std::vector<std::int64_t> census_populations(const CensusModel& model, std::span<const Household> households)
{
    std::vector<std::int64_t> pop(model.states.size(), 0);
    for (const auto& h : households)
        pop.at(h.state) += h.census_count;
    return pop;
}

const char* to_string(PairStatus s)
{
    switch (s) {
    case PairStatus::audited:
        return "audited";
    case PairStatus::vacuous:
        return "vacuous";
    case PairStatus::trivial:
        return "trivial";
    case PairStatus::degenerate:
        return "degenerate";
    case PairStatus::refuted:
        return "refuted";
    }
    return "?";
}

CensusPair make_census_pair(const CensusModel& model, std::span<const Household> households,
    std::span<const std::int64_t> census_seats, std::size_t s1, std::size_t s2)
{
    if (s1 == s2 || s1 >= model.states.size() || s2 >= model.states.size())
        throw Error("census: invalid state pair");
    CensusPair p;
    p.s1 = s1;
    p.s2 = s2;
    p.r1 = census_seats[s1];
    p.r2 = census_seats[s2];
    if (p.r1 == 0) {
        p.status = PairStatus::vacuous;
        return p;
    }
    if (households.empty())
        throw Error("census: no households");

    const double H = static_cast<double>(households.size());
    const double d1 = model.d(p.r1);
    const double d2 = model.d(p.r2 + 1);
    const double c1 = model.constants[s1];
    const double c2 = model.constants[s2];
    const double g = model.g_max;
    p.c = 2.0 * (g / d2 + c2 / (H * d2) - c1 / (H * d1));
    if (p.c < 0.0) {
        p.status = PairStatus::trivial;
        return p;
    }
    if (p.c == 0.0) {
        p.status = PairStatus::degenerate;
        return p;
    }

    double G1 = 0, G2 = 0;
    for (const auto& h : households) {
        if (h.state == s1)
            G1 += h.census_count;
        else if (h.state == s2)
            G2 += h.census_count;
    }
    p.m = ((G1 + c1) / d1 - (G2 + c2) / d2) / (p.c * H);
    p.z = std::max({g / (p.c * d2), g / (p.c * d1), 0.0});
    if (!(p.m > 0.0))
        p.status = PairStatus::refuted;
    else if (!(p.z > p.m))
        throw Error("census: z <= m for pair (" + model.states[s1] + ", " + model.states[s2] + ")");
    return p;
}

namespace {

int pes_count_of(const Household& h, NonFramePes non_frame)
{
    if (h.pes_count)
        return *h.pes_count;
    if (!h.in_pes_frame)
        return non_frame == NonFramePes::census_count ? h.census_count : 0;
    throw Error("census: household '" + h.id + "' has no PES count");
}

double assorter_terms(const CensusModel& model, const CensusPair& p, std::size_t state, int count)
{
    const double g1 = state == p.s1 ? count : 0;
    const double g2 = state == p.s2 ? count : 0;
    return g1 / (p.c * model.d(p.r1)) + (model.g_max - g2) / (p.c * model.d(p.r2 + 1));
}

} // namespace

double census_assorter_value(const CensusModel& model, const CensusPair& pair, const Household& h, bool use_pes,
    NonFramePes non_frame)
{
    if (pair.status == PairStatus::vacuous)
        throw Error("census: pair has no seat to defend");
    if (!(pair.c > 0.0))
        throw Error("degenerate pair");
    return assorter_terms(model, pair, h.state, use_pes ? pes_count_of(h, non_frame) : h.census_count);
}

double comparison_assorter_value(const CensusModel& model, const CensusPair& pair, const Household& h,
    NonFramePes non_frame)
{
    const double diff = census_assorter_value(model, pair, h, true, non_frame)
        - census_assorter_value(model, pair, h, false, non_frame);
    return 0.5 + (pair.m + diff) / (2.0 * (pair.z - pair.m));
}

HouseholdSampler::HouseholdSampler(std::span<const Household> households) : remaining_(households.size())
{
    for (std::size_t i = 0; i < households.size(); ++i) {
        const auto& h = households[i];
        if (h.in_pes_frame) {
            ++frame_left_;
            if (h.pes_count)
                surveyed_.push_back(i);
        } else {
            if (h.pes_count)
                throw InputError("census: household '" + h.id + "' was surveyed but is outside the PES frame");
            non_frame_.push_back(i);
        }
    }
}

namespace {

std::size_t take(std::vector<std::size_t>& v, Rng& rng)
{
    if (v.empty())
        throw Error("sampling frame exhausted");
    std::size_t k = rng.below(v.size());
    std::size_t out = v[k];
    v[k] = v.back();
    v.pop_back();
    return out;
}

} // namespace

std::size_t HouseholdSampler::draw(Rng& rng)
{
    if (remaining_ == 0)
        throw Error("sampling frame exhausted");
    std::size_t out;
    if (rng.below(remaining_) < frame_left_) {
        out = take(surveyed_, rng);
        --frame_left_;
    } else {
        out = take(non_frame_, rng);
    }
    --remaining_;
    return out;
}

std::size_t sample_household(std::size_t h1_size, std::size_t frame_in_h1, std::span<const std::size_t> surveyed_in_h1,
    std::span<const std::size_t> non_frame_in_h1, Rng& rng)
{
    if (h1_size == 0 || frame_in_h1 > h1_size)
        throw Error("sample_household: bad set sizes");
    if (rng.below(h1_size) < frame_in_h1) {
        if (surveyed_in_h1.empty())
            throw Error("sampling frame exhausted");
        return surveyed_in_h1[rng.below(surveyed_in_h1.size())];
    }
    if (non_frame_in_h1.empty())
        throw Error("sampling frame exhausted");
    return non_frame_in_h1[rng.below(non_frame_in_h1.size())];
}

CensusAuditResult census_rla(const CensusModel& model, std::span<const Household> households, Rng& rng,
    const CensusAuditOptions& options, const CensusTrace& trace)
{
    model.validate();
    if (!(options.delta > 0.0) || !(options.epsilon > 0.0))
        throw InputError("census: delta and epsilon must be positive");
    for (const auto& h : households) {
        if (h.state >= model.states.size())
            throw InputError("census: household '" + h.id + "' has an unknown state");
        if (h.census_count < 0 || h.census_count > model.g_max
            || (h.pes_count && (*h.pes_count < 0 || *h.pes_count > model.g_max)))
            throw InputError("census: household '" + h.id + "' exceeds g_max residents");
    }

    CensusAuditResult out;
    out.census_seats = apportion(model, census_populations(model, households));

    struct State {
        double T = 1, mu = 0.5, eta0 = 0, eta = 0, U = 0, cum = 0;
        bool active = false;
    };
    std::vector<State> st;
    for (std::size_t s1 = 0; s1 < model.states.size(); ++s1) {
        for (std::size_t s2 = 0; s2 < model.states.size(); ++s2) {
            if (s1 == s2)
                continue;
            PairRisk pr;
            pr.pair = make_census_pair(model, households, out.census_seats, s1, s2);
            State s;
            if (pr.pair.status == PairStatus::audited) {
                const double span = 2.0 * (pr.pair.z - pr.pair.m);
                s.eta0 = s.eta = 0.5 + pr.pair.m / span;
                s.U = 0.5 + (pr.pair.m + options.delta) / span;
                s.active = true;
            } else if (pr.pair.status == PairStatus::vacuous || pr.pair.status == PairStatus::trivial) {
                pr.T_max = std::numeric_limits<double>::infinity();
            }
            out.pairs.push_back(pr);
            st.push_back(s);
        }
    }

    const double H = static_cast<double>(households.size());
    HouseholdSampler sampler(households);
    std::int64_t step = 0;
    while (sampler.surveyed_left() > 0) {
        const auto& h = households[sampler.draw(rng)];
        ++step;
        if (h.pes_count)
            ++out.surveyed_sampled;
        const double left = static_cast<double>(sampler.remaining());
        for (std::size_t k = 0; k < st.size(); ++k) {
            auto& s = st[k];
            if (!s.active)
                continue;
            auto& pr = out.pairs[k];
            const double A = comparison_assorter_value(model, pr.pair, h, options.non_frame);
            s.T *= alpha_factor_census(A, s.mu, s.eta, s.U);
            pr.T_max = std::max(pr.T_max, s.T);
            s.cum += A;
            if (left > 0) {
                s.mu = (H / 2.0 - s.cum) / left;
                s.eta = std::max(s.eta0, s.mu + options.epsilon);
                s.U = std::max(s.U, s.eta + options.epsilon);
                if (s.mu < 0.0) {
                    pr.T_max = std::numeric_limits<double>::infinity();
                    s.active = false;
                }
            }
            if (trace)
                trace(step, k, s.T, s.mu, s.eta, s.U);
        }
    }
    out.households_sampled = step;

    out.state_risk.assign(model.states.size(), 0.0);
    out.risk_limit = 0.0;
    for (auto& pr : out.pairs) {
        pr.risk = std::min(1.0, 1.0 / pr.T_max);
        if (pr.pair.status == PairStatus::refuted || pr.pair.status == PairStatus::degenerate)
            pr.risk = 1.0;
        out.risk_limit = std::max(out.risk_limit, pr.risk);
        out.state_risk[pr.pair.s1] = std::max(out.state_risk[pr.pair.s1], pr.risk);
        out.state_risk[pr.pair.s2] = std::max(out.state_risk[pr.pair.s2], pr.risk);
    }
    return out;
}

double HouseholdSizeDistribution::mean() const
{
    double total = 0, weighted = 0;
    for (std::size_t k = 0; k < probabilities.size(); ++k) {
        total += probabilities[k];
        weighted += static_cast<double>(k) * probabilities[k];
    }
    if (!(total > 0))
        throw InputError("household distribution: probabilities sum to zero");
    return weighted / total;
}

int HouseholdSizeDistribution::draw(Rng& rng) const
{
    const double total = std::accumulate(probabilities.begin(), probabilities.end(), 0.0);
    double u = rng.uniform() * total;
    int last = 0;
    for (std::size_t k = 0; k < probabilities.size(); ++k) {
        if (probabilities[k] <= 0)
            continue;
        last = static_cast<int>(k);
        if (u < probabilities[k])
            return last;
        u -= probabilities[k];
    }
    return last;
}

CensusInstance generate_cyprus_data(std::span<const District> districts, const HouseholdSizeDistribution& dist,
    double nonresponse, std::int64_t representatives, Divisor divisor, int g_max, Rng& rng)
{
    if (!(nonresponse >= 0.0 && nonresponse < 1.0))
        throw InputError("nonresponse must be in [0, 1)");
    if (dist.probabilities.size() > static_cast<std::size_t>(g_max) + 1)
        throw InputError("household distribution extends past g_max");
    for (double p : dist.probabilities) {
        if (p < 0)
            throw InputError("household distribution: negative probability");
    }
    const double mean = dist.mean();

    CensusInstance inst;
    inst.model.representatives = representatives;
    inst.model.divisor = divisor;
    inst.model.g_max = g_max;
    for (std::size_t s = 0; s < districts.size(); ++s) {
        const auto& d = districts[s];
        inst.model.states.push_back(d.name);
        const auto count = static_cast<std::int64_t>(std::llround(static_cast<double>(d.population) / mean));
        std::int64_t generated = 0;
        for (std::int64_t i = 0; i < count; ++i) {
            Household h;
            h.id = d.name + "-" + std::to_string(i + 1);
            h.state = s;
            h.census_count = rng.bernoulli(nonresponse) ? 0 : dist.draw(rng);
            generated += h.census_count;
            inst.households.push_back(std::move(h));
        }
        inst.model.constants.push_back(static_cast<double>(d.population - generated));
    }
    inst.model.validate();
    inst.full_pes.reserve(inst.households.size());
    for (const auto& h : inst.households)
        inst.full_pes.push_back(h.census_count);
    return inst;
}

void inject_census_disagreement(CensusInstance& inst, const HouseholdSizeDistribution& dist, double rate, Rng& rng)
{
    if (!(rate >= 0.0 && rate <= 1.0))
        throw InputError("disagreement rate must be in [0, 1]");
    const std::size_t n = inst.households.size();
    const auto k = static_cast<std::size_t>(std::llround(rate * static_cast<double>(n)));
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (std::size_t i = 0; i < k; ++i) {
        std::swap(idx[i], idx[i + rng.below(n - i)]);
        inst.full_pes[idx[i]] = dist.draw(rng);
    }
}

std::vector<std::int64_t> full_pes_apportionment(const CensusInstance& inst)
{
    std::vector<std::int64_t> pop(inst.model.states.size(), 0);
    for (std::size_t i = 0; i < inst.households.size(); ++i)
        pop[inst.households[i].state] += inst.full_pes[i];
    return apportion(inst.model, pop);
}

std::vector<Household> survey(const CensusInstance& inst, double fraction, Rng& rng)
{
    if (!(fraction >= 0.0 && fraction <= 1.0))
        throw InputError("sample fraction must be in [0, 1]");
    std::vector<Household> out = inst.households;
    std::vector<std::size_t> frame;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i].pes_count.reset();
        if (out[i].in_pes_frame)
            frame.push_back(i);
    }
    const auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(frame.size())));
    for (std::size_t i = 0; i < k; ++i) {
        std::swap(frame[i], frame[i + rng.below(frame.size() - i)]);
        out[frame[i]].pes_count = inst.full_pes[frame[i]];
    }
    return out;
}

} // namespace rla
