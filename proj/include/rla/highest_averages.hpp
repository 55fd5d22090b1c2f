#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rla/core.hpp"

namespace rla {

/// Colors the `seats` largest cells of a table with `rows` rows whose cell
/// values decrease along each row. `cmp(i, ri, j, rj)` compares cell [i, ri]
/// with cell [j, rj] (columns are 1-based) and returns <0, 0 or >0.
/// Throws Error(tie_message) when the last colored cell equals the best
/// uncolored cell of another row.
template <class Compare>
std::vector<std::int64_t> highest_averages(std::size_t rows, std::int64_t seats, Compare cmp,
    const std::string& tie_message)
{
    std::vector<std::int64_t> won(rows, 0);
    if (seats < 0)
        throw Error("negative seat count");
    if (seats == 0)
        return won;
    if (rows == 0)
        throw Error("no rows to allocate seats to");

    auto best_next = [&] {
        std::size_t best = 0;
        for (std::size_t i = 1; i < rows; ++i) {
            if (cmp(i, won[i] + 1, best, won[best] + 1) > 0)
                best = i;
        }
        return best;
    };

    std::size_t last = 0;
    for (std::int64_t k = 0; k < seats; ++k) {
        last = best_next();
        ++won[last];
    }
    // Only another row can tie; a row's own cells are taken in order.
    for (std::size_t i = 0; i < rows; ++i) {
        if (i != last && cmp(last, won[last], i, won[i] + 1) == 0)
            throw Error(tie_message);
    }
    return won;
}

/// D'Hondt over integer vote counts with exact comparisons.
std::vector<std::int64_t> dhondt(const std::vector<std::int64_t>& votes, std::int64_t seats,
    const std::string& tie_message = "allocation tie");

} // namespace rla
