#include "rla/knesset.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>

#include "rla/highest_averages.hpp"

namespace rla {

void KnessetContest::validate() const
{
    if (seats <= 0)
        throw InputError("knesset: seats must be positive");
    if (threshold < 0 || threshold >= 1)
        throw InputError("knesset: threshold must be in [0, 1)");
    std::vector<int> signed_count(contest.size(), 0);
    for (const auto& [a, b] : apparentments) {
        if (a == b)
            throw InputError("knesset: apparentment of a party with itself");
        if (contest.is_invalid(a) || contest.is_invalid(b) || a.index >= contest.size() || b.index >= contest.size())
            throw InputError("knesset: apparentment names an unknown party");
        if (++signed_count[a.index] > 1 || ++signed_count[b.index] > 1)
            throw InputError("knesset: party '" + contest.name(signed_count[a.index] > 1 ? a : b)
                + "' signed more than one apparentment");
    }
}

bool passes_threshold(const KnessetContest& k, const Tally& tally, BallotId party)
{
    const std::int64_t valid = tally.total() - tally.count(k.contest.invalid());
    const __int128 lhs = static_cast<__int128>(tally.count(party)) * k.threshold.denominator();
    const __int128 rhs = static_cast<__int128>(valid) * k.threshold.numerator();
    return lhs >= rhs;
}

namespace {

struct Unit {
    std::vector<BallotId> members;
    std::int64_t seats = 0;
};

// Above-threshold parties grouped into allocation units, in party order.
std::vector<Unit> make_units(const KnessetContest& k, const std::vector<bool>& above)
{
    const auto& c = k.contest;
    std::vector<std::size_t> partner(c.party_count(), SIZE_MAX);
    for (const auto& [a, b] : k.apparentments) {
        if (above[a.index] && above[b.index]) {
            partner[a.index] = b.index;
            partner[b.index] = a.index;
        }
    }
    std::vector<Unit> units;
    for (std::size_t p = 0; p < c.party_count(); ++p) {
        if (!above[p])
            continue;
        if (partner[p] == SIZE_MAX)
            units.push_back({{BallotId{p}}});
        else if (partner[p] > p)
            units.push_back({{BallotId{p}, BallotId{partner[p]}}});
    }
    return units;
}

std::string unit_name(const Contest& c, const Unit& u)
{
    std::string out;
    for (const auto& m : u.members)
        out += (out.empty() ? "" : "+") + c.name(m);
    return out;
}

} // namespace

SeatAllocation allocate_seats(const KnessetContest& k, const Tally& tally)
{
    const auto& c = k.contest;
    if (tally.size() != c.size())
        throw Error("knesset: tally does not match contest");

    SeatAllocation out;
    out.seats.assign(c.party_count(), 0);
    out.above.assign(c.party_count(), false);
    for (std::size_t p = 0; p < c.party_count(); ++p)
        out.above[p] = passes_threshold(k, tally, BallotId{p});

    auto units = make_units(k, out.above);
    if (units.empty())
        throw Error("knesset: no party passed the threshold");
    std::vector<std::int64_t> votes;
    for (const auto& u : units) {
        std::int64_t v = 0;
        for (auto m : u.members)
            v += tally.count(m);
        votes.push_back(v);
    }
    auto won = dhondt(votes, k.seats, "allocation tie");
    for (std::size_t i = 0; i < units.size(); ++i) {
        const auto& u = units[i];
        if (u.members.size() == 1) {
            out.seats[u.members[0].index] = won[i];
            continue;
        }
        auto split = dhondt({tally.count(u.members[0]), tally.count(u.members[1])}, won[i], "allocation tie");
        out.seats[u.members[0].index] = split[0];
        out.seats[u.members[1].index] = split[1];
    }
    return out;
}

namespace {

// 1/2 + (s1+1)/(2 s2) for members of `to`, 0 for members of `from`, 1/2 else.
// The weakened form uses (s1+2)/(2(s2-1)).
std::optional<Assorter> move_assorter(const Contest& c, const std::vector<BallotId>& from, std::int64_t s1,
    const std::vector<BallotId>& to, std::int64_t s2, bool weaken, std::string label)
{
    if (s2 == 0)
        return std::nullopt;
    Rational coef;
    if (weaken) {
        if (s2 == 1)
            throw Error("cannot weaken");
        coef = Rational(s1 + 2, 2 * (s2 - 1));
        label += ":weak";
    } else {
        coef = Rational(s1 + 1, 2 * s2);
    }
    std::vector<Rational> values(c.size(), Rational(1, 2));
    for (auto p : to)
        values[p.index] = Rational(1, 2) + coef;
    for (auto p : from)
        values[p.index] = 0;
    return Assorter(std::move(label), std::move(values));
}

bool listed(const std::vector<PartyPair>& pairs, const std::vector<BallotId>& from, const std::vector<BallotId>& to)
{
    for (const auto& [a, b] : pairs) {
        bool a_in = std::find(from.begin(), from.end(), a) != from.end();
        bool b_in = std::find(to.begin(), to.end(), b) != to.end();
        if (a_in && b_in)
            return true;
    }
    return false;
}

} // namespace

std::vector<Assorter> generate_assertions(const KnessetContest& k, const Tally& reported,
    const SeatAllocation& seats, const std::vector<PartyPair>& weaken)
{
    const auto& c = k.contest;
    if (reported.size() != c.size() || seats.seats.size() != c.party_count())
        throw Error("knesset: reported data does not match contest");
    if (k.threshold <= 0)
        throw Error("knesset: threshold assertions need t > 0");

    std::vector<Assorter> out;
    const Rational half(1, 2);
    const Rational above_value = Rational(1) / (2 * k.threshold);
    const Rational below_value = Rational(1) / (2 * (1 - k.threshold));
    for (std::size_t p = 0; p < c.party_count(); ++p) {
        std::vector<Rational> values(c.size());
        if (seats.above[p]) {
            std::fill(values.begin(), values.end(), Rational(0));
            values[p] = above_value;
            values[c.invalid().index] = half;
            out.emplace_back("above:" + c.name(BallotId{p}), std::move(values), above_value);
        } else {
            std::fill(values.begin(), values.end(), below_value);
            values[p] = 0;
            values[c.invalid().index] = half;
            out.emplace_back("below:" + c.name(BallotId{p}), std::move(values), below_value);
        }
    }

    auto units = make_units(k, seats.above);
    for (auto& u : units) {
        for (auto m : u.members)
            u.seats += seats.seats[m.index];
    }
    for (const auto& u1 : units) {
        for (const auto& u2 : units) {
            if (&u1 == &u2)
                continue;
            auto a = move_assorter(c, u1.members, u1.seats, u2.members, u2.seats, listed(weaken, u1.members, u2.members),
                "move:" + unit_name(c, u1) + ">" + unit_name(c, u2));
            if (a)
                out.push_back(std::move(*a));
        }
    }
    for (const auto& u : units) {
        if (u.members.size() != 2)
            continue;
        for (int dir = 0; dir < 2; ++dir) {
            BallotId p1 = u.members[dir], p2 = u.members[1 - dir];
            auto a = move_assorter(c, {p1}, seats.seats[p1.index], {p2}, seats.seats[p2.index],
                listed(weaken, {p1}, {p2}), "move:" + c.name(p1) + ">" + c.name(p2));
            if (a)
                out.push_back(std::move(*a));
        }
    }
    return out;
}

std::int64_t assertion_margin(const Assorter& a, const Tally& truth)
{
    if (!a.mean_exceeds_half(truth))
        return 0;
    Rational excess = a.total(truth) - Rational(truth.total(), 2);
    const Rational low = a.min_value();

    std::vector<std::size_t> order(a.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
        [&](std::size_t x, std::size_t y) { return a.values()[x] > a.values()[y]; });

    std::int64_t moved = 0;
    for (auto c : order) {
        const Rational gain = a.values()[c] - low;
        if (gain <= 0)
            break;
        const Rational q = excess / gain;
        const std::int64_t need = (q.numerator() + q.denominator() - 1) / q.denominator();
        const std::int64_t k = std::min(truth.counts()[c], std::max<std::int64_t>(need, 0));
        moved += k;
        excess -= gain * k;
        if (excess <= 0)
            return moved;
    }
    throw Error("assertion '" + a.label() + "' cannot be falsified by relabeling ballots");
}

} // namespace rla
