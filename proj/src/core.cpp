#include "rla/core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>

#include "rla/csv.hpp"

namespace rla {

double to_double(const Rational& r)
{
    return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

Rational parse_rational(std::string_view text)
{
    auto fail = [&]() -> Rational { throw InputError("not a rational number: '" + std::string(text) + "'"); };
    if (text.empty())
        return fail();
    if (auto slash = text.find('/'); slash != std::string_view::npos) {
        std::int64_t num = 0, den = 0;
        auto a = text.substr(0, slash), b = text.substr(slash + 1);
        auto r1 = std::from_chars(a.data(), a.data() + a.size(), num);
        auto r2 = std::from_chars(b.data(), b.data() + b.size(), den);
        if (r1.ec != std::errc() || r1.ptr != a.data() + a.size() || r2.ec != std::errc()
            || r2.ptr != b.data() + b.size() || den == 0)
            return fail();
        return Rational(num, den);
    }

    std::size_t pos = 0;
    bool negative = false;
    if (text[pos] == '-' || text[pos] == '+') {
        negative = text[pos] == '-';
        ++pos;
    }
    std::int64_t num = 0, den = 1;
    bool digits = false, dot = false;
    for (; pos < text.size(); ++pos) {
        char c = text[pos];
        if (c >= '0' && c <= '9') {
            num = num * 10 + (c - '0');
            if (dot)
                den *= 10;
            digits = true;
            if (den > 1'000'000'000'000LL || num > 1'000'000'000'000'000LL)
                return fail();
        } else if (c == '.' && !dot) {
            dot = true;
        } else {
            break;
        }
    }
    if (!digits)
        return fail();
    Rational value(negative ? -num : num, den);
    if (pos < text.size()) {
        if (text[pos] != 'e' && text[pos] != 'E')
            return fail();
        auto e = text.substr(pos + 1);
        int exponent = 0;
        auto r = std::from_chars(e.data(), e.data() + e.size(), exponent);
        if (r.ec != std::errc() || r.ptr != e.data() + e.size() || std::abs(exponent) > 15)
            return fail();
        std::int64_t p = 1;
        for (int i = 0; i < std::abs(exponent); ++i)
            p *= 10;
        value = exponent >= 0 ? value * p : value / p;
    }
    return value;
}

Contest::Contest(std::vector<std::string> parties)
{
    types_.reserve(parties.size() + 1);
    for (auto& name : parties) {
        if (name.empty())
            throw Error("contest: empty party name");
        if (name == invalid_name)
            throw Error("contest: '__invalid__' is reserved");
        if (find(name))
            throw Error("contest: duplicate party '" + name + "'");
        types_.push_back({BallotId{types_.size()}, BallotKind::party, std::move(name)});
    }
    types_.push_back({BallotId{types_.size()}, BallotKind::invalid, std::string(invalid_name)});
}

const BallotType& Contest::type(BallotId id) const
{
    if (id.index >= types_.size())
        throw Error("contest: ballot id out of range");
    return types_[id.index];
}

std::optional<BallotId> Contest::find(std::string_view name) const
{
    for (const auto& t : types_) {
        if (t.name == name)
            return t.id;
    }
    return std::nullopt;
}

BallotId Contest::at(std::string_view name) const
{
    if (auto id = find(name))
        return *id;
    throw InputError("unknown ballot type '" + std::string(name) + "'");
}

Tally::Tally(std::vector<std::int64_t> counts) : counts_(std::move(counts))
{
    for (auto c : counts_) {
        if (c < 0)
            throw Error("tally: negative count");
        total_ += c;
    }
}

void Tally::add(BallotId id, std::int64_t n)
{
    auto& c = counts_.at(id.index);
    if (c + n < 0)
        throw Error("tally: negative count");
    c += n;
    total_ += n;
}

void Tally::set(BallotId id, std::int64_t n)
{
    add(id, n - count(id));
}

Tally& Tally::operator+=(const Tally& other)
{
    if (other.size() != size())
        throw Error("tally: size mismatch");
    for (std::size_t i = 0; i < counts_.size(); ++i)
        counts_[i] += other.counts_[i];
    total_ += other.total_;
    return *this;
}

Assorter::Assorter(std::string label, std::vector<Rational> values)
    : Assorter(std::move(label), values,
          values.empty() ? Rational(0) : *std::max_element(values.begin(), values.end()))
{
}

Assorter::Assorter(std::string label, std::vector<Rational> values, Rational upper)
    : label_(std::move(label)), values_(std::move(values)), upper_(upper)
{
    if (values_.empty())
        throw Error("assorter '" + label_ + "': no values");
    for (const auto& v : values_) {
        if (v < 0)
            throw Error("assorter '" + label_ + "': negative value");
        if (v > upper_)
            throw Error("assorter '" + label_ + "': value above declared upper bound");
    }
    if (upper_ <= 0)
        throw Error("assorter '" + label_ + "': upper bound must be positive");

    values_d_.reserve(values_.size());
    for (const auto& v : values_) {
        values_d_.push_back(to_double(v));
        scale_ = std::lcm(scale_, v.denominator());
    }
    upper_d_ = to_double(upper_);
    scaled_.reserve(values_.size());
    for (const auto& v : values_)
        scaled_.push_back(v.numerator() * (scale_ / v.denominator()));
}

Rational Assorter::max_value() const
{
    return *std::max_element(values_.begin(), values_.end());
}

Rational Assorter::min_value() const
{
    return *std::min_element(values_.begin(), values_.end());
}

Rational Assorter::total(const Tally& t) const
{
    if (t.size() != values_.size())
        throw Error("assorter '" + label_ + "': tally does not match contest");
    __int128 sum = 0;
    for (std::size_t i = 0; i < scaled_.size(); ++i)
        sum += static_cast<__int128>(scaled_[i]) * t.counts()[i];
    return Rational(static_cast<std::int64_t>(sum), scale_);
}

double Assorter::mean_d(const Tally& t) const
{
    if (t.total() == 0)
        throw Error("empty contest");
    double sum = 0;
    for (std::size_t i = 0; i < values_d_.size(); ++i)
        sum += values_d_[i] * static_cast<double>(t.counts()[i]);
    return sum / static_cast<double>(t.total());
}

bool Assorter::mean_exceeds_half(const Tally& t) const
{
    if (t.size() != values_.size())
        throw Error("assorter '" + label_ + "': tally does not match contest");
    if (t.total() == 0)
        throw Error("empty contest");
    __int128 sum = 0;
    for (std::size_t i = 0; i < scaled_.size(); ++i)
        sum += static_cast<__int128>(scaled_[i]) * t.counts()[i];
    return 2 * sum > static_cast<__int128>(t.total()) * scale_;
}

bool LinearInequality::holds(const Tally& t) const
{
    Rational lhs = 0;
    for (std::size_t i = 0; i < coefficients.size(); ++i)
        lhs += coefficients[i] * t.counts()[i];
    return lhs > rhs;
}

Rational assorter_mean(const Assorter& a, const Tally& t)
{
    if (t.total() == 0)
        throw Error("empty contest");
    return a.total(t) / t.total();
}

Assorter inequality_to_assorter(const LinearInequality& q, std::string label)
{
    if (q.coefficients.empty())
        throw Error("inequality: no coefficients");
    if (std::all_of(q.coefficients.begin(), q.coefficients.end(), [](const Rational& b) { return b == Rational(0); }))
        throw Error("inequality: all coefficients are zero");
    if (q.ballots <= 0)
        throw Error("inequality: ballot count must be positive");

    Rational z = *std::min_element(q.coefficients.begin(), q.coefficients.end());
    Rational gap = z - q.rhs / q.ballots;
    if (gap >= 0)
        throw Error("trivial inequality");

    std::vector<Rational> values;
    values.reserve(q.coefficients.size());
    for (const auto& beta : q.coefficients)
        values.push_back(-(beta - z) / (2 * gap));
    return Assorter(std::move(label), std::move(values));
}

Assorter plurality_assorter(const Contest& contest, BallotId winner, BallotId loser)
{
    if (winner == loser)
        throw Error("plurality assorter: winner and loser must differ");
    if (contest.is_invalid(winner) || contest.is_invalid(loser))
        throw Error("plurality assorter: invalid ballots cannot win or lose");
    std::vector<Rational> values(contest.size(), Rational(1, 2));
    values.at(winner.index) = 1;
    values.at(loser.index) = 0;
    return Assorter(contest.name(winner) + " beats " + contest.name(loser), std::move(values), Rational(1));
}

ContestData read_contest_csv(std::istream& in)
{
    auto rows = csv::read_with_header(in, {"party", "reported_votes"}, "contest csv");
    std::vector<std::string> parties;
    std::vector<std::int64_t> votes;
    std::optional<std::int64_t> invalid;
    for (const auto& row : rows) {
        auto n = csv::parse_int(row[1], "contest csv: votes for '" + row[0] + "'");
        if (n < 0)
            throw InputError("contest csv: negative votes for '" + row[0] + "'");
        if (row[0] == Contest::invalid_name) {
            if (invalid)
                throw InputError("contest csv: duplicate __invalid__ row");
            invalid = n;
            continue;
        }
        parties.push_back(row[0]);
        votes.push_back(n);
    }
    if (!invalid)
        throw InputError("contest csv: missing __invalid__ row");
    if (parties.empty())
        throw InputError("contest csv: no parties");
    votes.push_back(*invalid);
    try {
        ContestData data{Contest(std::move(parties)), Tally(std::move(votes))};
        return data;
    } catch (const InputError&) {
        throw;
    } catch (const Error& e) {
        throw InputError(std::string("contest csv: ") + e.what());
    }
}

ContestData read_contest_csv(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw InputError("cannot open " + path);
    return read_contest_csv(in);
}

} // namespace rla
