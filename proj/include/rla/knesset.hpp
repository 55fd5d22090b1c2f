#pragma once

// Knesset seat allocation (D'Hondt, electoral threshold, apparentments) and
// the assertions that verify it.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rla/core.hpp"

namespace rla {

struct PartyPair {
    BallotId first;
    BallotId second;
};

struct KnessetContest {
    Contest contest;
    std::int64_t seats = 120;
    Rational threshold{13, 400};
    std::vector<PartyPair> apparentments;

    /// Checks 0 < t < 1, seats > 0 and that each party signs at most one
    /// apparentment with a different party.
    void validate() const;
};

struct SeatAllocation {
    /// Indexed by party; the invalid type is not included.
    std::vector<std::int64_t> seats;
    /// Whether each party passed the threshold on its own votes.
    std::vector<bool> above;

    friend bool operator==(const SeatAllocation&, const SeatAllocation&) = default;
};

/// v(p) >= t * valid, exactly.
bool passes_threshold(const KnessetContest& k, const Tally& tally, BallotId party);

/// Throws "allocation tie" when the last seat (or the split inside an
/// alliance) is decided by equal quotients.
SeatAllocation allocate_seats(const KnessetContest& k, const Tally& tally);

/// Above/below-threshold assertions for every party, then move-seat
/// assertions between every ordered pair of above-threshold units (allied
/// parties merged) and inside each alliance. Pairs in `weaken` get the
/// one-seat-slack coefficients.
std::vector<Assorter> generate_assertions(const KnessetContest& k, const Tally& reported,
    const SeatAllocation& reported_seats, const std::vector<PartyPair>& weaken = {});

/// Smallest number of single-ballot relabels that brings the assorter mean
/// over `truth` to at most 1/2. Returns 0 if it already is.
std::int64_t assertion_margin(const Assorter& a, const Tally& truth);

} // namespace rla
