#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "rla/core.hpp"

namespace rla {

/// One batch of ballots: its reported tally and the tally of its paper ballots.
struct BatchRecord {
    std::string id;
    Tally reported;
    Tally truth;
    std::int64_t size = 0;
};

/// Reads `batch_id,party,reported_votes,true_votes`. Rows for one batch may
/// be spread over the file; parties missing from a batch count as 0. Sizes
/// are derived by summation; when the two totals differ the batch is padded
/// with invalid ballots up to the larger one.
std::vector<BatchRecord> read_batches_csv(std::istream& in, const Contest& contest);
std::vector<BatchRecord> read_batches_csv(const std::string& path, const Contest& contest);

/// Reads `batch_id,declared_size`.
std::map<std::string, std::int64_t> read_declared_sizes(const std::string& path);

/// Sum of reported tallies over all batches.
Tally total_reported(const std::vector<BatchRecord>& batches, const Contest& contest);
Tally total_truth(const std::vector<BatchRecord>& batches, const Contest& contest);

} // namespace rla
