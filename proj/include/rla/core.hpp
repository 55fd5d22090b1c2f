#pragma once

// Ballot types, tallies and SHANGRLA assorters.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <boost/rational.hpp>

namespace rla {

using Rational = boost::rational<std::int64_t>;

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input files or configuration.
class InputError : public Error {
public:
    using Error::Error;
};

double to_double(const Rational& r);

/// Parses "0.0325", "13/400", "-2" or "1e-3" into an exact rational.
Rational parse_rational(std::string_view text);

/// Index of a ballot type inside its contest.
struct BallotId {
    std::size_t index = 0;

    friend auto operator<=>(const BallotId&, const BallotId&) = default;
};

enum class BallotKind { party, invalid };

struct BallotType {
    BallotId id;
    BallotKind kind = BallotKind::party;
    std::string name;
};

/// Closed set of ballot types: the parties in listing order followed by
/// a single `invalid` type.
class Contest {
public:
    static constexpr std::string_view invalid_name = "__invalid__";

    Contest() = default;
    explicit Contest(std::vector<std::string> parties);

    std::size_t size() const { return types_.size(); }
    std::size_t party_count() const { return types_.size() - 1; }
    BallotId invalid() const { return BallotId{types_.size() - 1}; }
    bool is_invalid(BallotId id) const { return id == invalid(); }

    const BallotType& type(BallotId id) const;
    const std::string& name(BallotId id) const { return type(id).name; }
    std::span<const BallotType> types() const { return types_; }

    std::optional<BallotId> find(std::string_view name) const;
    /// Like find() but throws on unknown names.
    BallotId at(std::string_view name) const;

private:
    std::vector<BallotType> types_;
};

/// Non-negative counts per ballot type of one contest.
class Tally {
public:
    Tally() = default;
    explicit Tally(const Contest& contest) : counts_(contest.size(), 0) {}
    explicit Tally(std::vector<std::int64_t> counts);

    std::size_t size() const { return counts_.size(); }
    std::int64_t count(BallotId id) const { return counts_.at(id.index); }
    std::int64_t total() const { return total_; }
    std::span<const std::int64_t> counts() const { return counts_; }

    void add(BallotId id, std::int64_t n);
    void set(BallotId id, std::int64_t n);

    Tally& operator+=(const Tally& other);
    friend Tally operator+(Tally a, const Tally& b) { return a += b; }
    friend bool operator==(const Tally&, const Tally&) = default;

private:
    std::vector<std::int64_t> counts_;
    std::int64_t total_ = 0;
};

/// Non-negative score per ballot type with a declared upper bound. Values are
/// exact; a binary64 copy is kept for the sequential tests.
class Assorter {
public:
    Assorter() = default;
    /// Upper bound defaults to the largest value.
    Assorter(std::string label, std::vector<Rational> values);
    Assorter(std::string label, std::vector<Rational> values, Rational upper);

    const std::string& label() const { return label_; }
    std::size_t size() const { return values_.size(); }
    const Rational& value(BallotId id) const { return values_.at(id.index); }
    double value_d(BallotId id) const { return values_d_[id.index]; }
    std::span<const Rational> values() const { return values_; }
    std::span<const double> values_d() const { return values_d_; }
    const Rational& upper() const { return upper_; }
    double upper_d() const { return upper_d_; }
    Rational max_value() const;
    Rational min_value() const;

    /// Exact sum of values over all ballots in the tally.
    Rational total(const Tally& t) const;
    /// Floating-point mean over a tally; used on batches during audits.
    double mean_d(const Tally& t) const;
    /// Exact test of mean(t) > 1/2. A mean of exactly 1/2 is false.
    bool mean_exceeds_half(const Tally& t) const;

private:
    std::string label_;
    std::vector<Rational> values_;
    std::vector<double> values_d_;
    Rational upper_;
    double upper_d_ = 0.0;
    // values_ scaled to a common denominator, for overflow-safe exact tests
    std::vector<std::int64_t> scaled_;
    std::int64_t scale_ = 1;
};

/// Σ_c coefficients[c]·v(c) > rhs over contests of `ballots` ballots.
struct LinearInequality {
    std::vector<Rational> coefficients;
    Rational rhs;
    std::int64_t ballots = 0;

    bool holds(const Tally& t) const;
};

/// Exact mean of the assorter over a tally. Throws on an empty tally.
Rational assorter_mean(const Assorter& a, const Tally& t);

/// Converts a nontrivial linear inequality into an equivalent assorter.
Assorter inequality_to_assorter(const LinearInequality& q, std::string label = {});

/// 1 for the winner, 0 for the loser, 1/2 for everything else.
Assorter plurality_assorter(const Contest& contest, BallotId winner, BallotId loser);

struct ContestData {
    Contest contest;
    Tally reported;
};

/// Reads a `party,reported_votes` CSV with one `__invalid__` row.
ContestData read_contest_csv(std::istream& in);
ContestData read_contest_csv(const std::string& path);

} // namespace rla
