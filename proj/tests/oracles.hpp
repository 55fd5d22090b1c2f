#pragma once

// Slow, independent reference implementations used by the tests.

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "rla/census.hpp"
#include "rla/core.hpp"
#include "rla/knesset.hpp"

namespace oracle {

using rla::Rational;

/// Enumerates every way of giving `seats` seats to the rows and keeps the one
/// whose colored cells (the first s_i cells of row i, cell j worth
/// value_i / divisor(j)) have the largest sum. nullopt if the best sum is not
/// unique, which is exactly an allocation tie.
std::optional<std::vector<std::int64_t>> coloring(const std::vector<Rational>& values, std::int64_t seats,
    const std::function<std::int64_t(std::int64_t)>& divisor);

/// Threshold, apparentment and D'Hondt rules via coloring(). nullopt on a tie
/// or when nobody passes.
std::optional<rla::SeatAllocation> knesset(const rla::KnessetContest& k, const rla::Tally& t);

/// Census apportionment with integer constants via coloring().
std::optional<std::vector<std::int64_t>> census(const std::vector<std::int64_t>& pops,
    const std::vector<std::int64_t>& constants, std::int64_t seats, rla::Divisor d);

/// Fewest single-ballot relabels of `truth` after which the assorter mean is
/// at most 1/2, by breadth-first search over tallies of the same size.
/// nullopt if unreachable.
std::optional<std::int64_t> relabel_margin(const rla::Assorter& a, const rla::Tally& truth);

/// Every tally over `categories` categories with exactly `n` ballots.
void for_each_tally(std::size_t categories, std::int64_t n, const std::function<void(const rla::Tally&)>& f);

/// Every tally with at most `n` ballots.
void for_each_tally_upto(std::size_t categories, std::int64_t n, const std::function<void(const rla::Tally&)>& f);

} // namespace oracle
