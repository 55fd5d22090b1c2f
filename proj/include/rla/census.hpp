#pragma once

// Census risk-limiting audit: highest-averages apportionment over states,
// household comparison assorters and the risk-limit emitting audit.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rla/alpha.hpp"
#include "rla/random.hpp"

namespace rla {

enum class Divisor { dhondt, sainte_lague };

Divisor parse_divisor(const std::string& name);
const char* to_string(Divisor d);

/// What a household outside the PES frame contributes as its PES count.
enum class NonFramePes { census_count, zero };

struct CensusModel {
    std::vector<std::string> states;
    std::int64_t representatives = 0;
    Divisor divisor = Divisor::dhondt;
    /// c_s, added to each state's population before dividing.
    std::vector<double> constants;
    int g_max = 15;

    double d(std::int64_t r) const;
    std::size_t state_index(const std::string& name) const;
    void validate() const;
};

struct Household {
    std::string id;
    std::size_t state = 0;
    int census_count = 0;
    /// Present only for surveyed households.
    std::optional<int> pes_count;
    bool in_pes_frame = true;
};

/// Cell value (pop_s + c_s) / d(r). Throws "apportionment tie".
std::vector<std::int64_t> apportion(const CensusModel& model, std::span<const std::int64_t> populations);

/// Census population per state.
std::vector<std::int64_t> census_populations(const CensusModel& model, std::span<const Household> households);

enum class PairStatus {
    audited,
    vacuous,    // r1 = 0: s1 cannot lose a seat it does not have
    trivial,    // c < 0: the inequality holds for any PES
    degenerate, // c = 0
    refuted,    // m <= 0: the census contradicts itself
};

const char* to_string(PairStatus s);

/// Constants of the assertion that s1's last census seat beats s2's next one.
struct CensusPair {
    std::size_t s1 = 0;
    std::size_t s2 = 0;
    std::int64_t r1 = 0;
    std::int64_t r2 = 0;
    double c = 0.0;
    double m = 0.0;
    double z = 0.0;
    PairStatus status = PairStatus::audited;
};

CensusPair make_census_pair(const CensusModel& model, std::span<const Household> households,
    std::span<const std::int64_t> census_seats, std::size_t s1, std::size_t s2);

/// g_s1(h)/(c d(r1)) + (g_max - g_s2(h))/(c d(r2+1)) over PES or census counts.
/// A PES count is required when `use_pes` is set.
double census_assorter_value(const CensusModel& model, const CensusPair& pair, const Household& h, bool use_pes,
    NonFramePes non_frame = NonFramePes::census_count);

/// 1/2 + (m + a_PES(h) - a_cen(h)) / (2(z - m)).
double comparison_assorter_value(const CensusModel& model, const CensusPair& pair, const Household& h,
    NonFramePes non_frame = NonFramePes::census_count);

/// Draws from the not-yet-audited households so that, to an auditor who
/// does not know which households were surveyed, every remaining household
/// is equally likely.
class HouseholdSampler {
public:
    explicit HouseholdSampler(std::span<const Household> households);

    /// Remaining surveyed households; the audit stops when this reaches 0.
    std::size_t surveyed_left() const { return surveyed_.size(); }
    std::size_t remaining() const { return remaining_; }
    std::size_t draw(Rng& rng);

private:
    std::vector<std::size_t> surveyed_;  // surveyed and unsampled
    std::vector<std::size_t> non_frame_; // outside the frame and unsampled
    std::size_t frame_left_ = 0;          // frame households not yet sampled
    std::size_t remaining_ = 0;
};

/// One draw of the subroutine over explicit index sets: with probability
/// |frame ∩ H1| / |H1| a uniform surveyed household, else a uniform household
/// outside the frame. Both sets must already be restricted to H1.
std::size_t sample_household(std::size_t h1_size, std::size_t frame_in_h1, std::span<const std::size_t> surveyed_in_h1,
    std::span<const std::size_t> non_frame_in_h1, Rng& rng);

struct CensusAuditOptions {
    double delta = 1e-10;
    double epsilon = 1e-9;
    NonFramePes non_frame = NonFramePes::census_count;
};

struct PairRisk {
    CensusPair pair;
    double T_max = 1.0;
    double risk = 1.0;
};

struct CensusAuditResult {
    double risk_limit = 1.0;
    std::vector<PairRisk> pairs;
    /// Largest risk over the pairs that involve each state.
    std::vector<double> state_risk;
    std::vector<std::int64_t> census_seats;
    std::int64_t households_sampled = 0;
    std::int64_t surveyed_sampled = 0;
};

/// Per-step hook: (step, pair index, T, mu, eta, U).
using CensusTrace = std::function<void(std::int64_t, std::size_t, double, double, double, double)>;

CensusAuditResult census_rla(const CensusModel& model, std::span<const Household> households, Rng& rng,
    const CensusAuditOptions& options = {}, const CensusTrace& trace = {});

struct District {
    std::string name;
    std::int64_t population = 0;
};

/// Probabilities of 0..g_max residents per household.
struct HouseholdSizeDistribution {
    std::vector<double> probabilities;

    double mean() const;
    int draw(Rng& rng) const;
};

struct CensusInstance {
    CensusModel model;
    std::vector<Household> households;
    /// PES count of every household had it been surveyed.
    std::vector<int> full_pes;
};

/// Households per district = round(population / mean size); counts drawn from
/// `dist`; a `nonresponse` share recorded as 0; c_s = population - generated
/// population. PES counts start equal to the census.
CensusInstance generate_cyprus_data(std::span<const District> districts, const HouseholdSizeDistribution& dist,
    double nonresponse, std::int64_t representatives, Divisor divisor, int g_max, Rng& rng);

/// Redraws the full-PES count of round(rate * |H|) uniformly chosen households.
void inject_census_disagreement(CensusInstance& inst, const HouseholdSizeDistribution& dist, double rate, Rng& rng);

/// Allocation under the full PES (census counts for households without one).
std::vector<std::int64_t> full_pes_apportionment(const CensusInstance& inst);

/// Marks round(fraction * |frame|) frame households as surveyed, uniformly.
std::vector<Household> survey(const CensusInstance& inst, double fraction, Rng& rng);

} // namespace rla
