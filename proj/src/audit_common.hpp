#pragma once

#include <span>
#include <vector>

#include "rla/alpha.hpp"

namespace rla::detail {

/// Fills the per-assertion and overall results once sampling has stopped.
/// `holds[k]` is whether assertion k truly holds; it is only reported when
/// the audit ended in a full recount.
AuditOutcome finish_outcome(std::span<const Assorter> assorters, std::span<const AssertionState> states,
    std::span<const std::int64_t> decided_ballots, std::span<const std::int64_t> decided_batches,
    const std::vector<bool>& holds, std::int64_t ballots_drawn, std::int64_t batches_drawn,
    std::int64_t total_ballots, std::int64_t total_batches);

} // namespace rla::detail
