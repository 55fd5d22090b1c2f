#include "rla/highest_averages.hpp"

namespace rla {

std::vector<std::int64_t> dhondt(const std::vector<std::int64_t>& votes, std::int64_t seats,
    const std::string& tie_message)
{
    auto cmp = [&](std::size_t i, std::int64_t ri, std::size_t j, std::int64_t rj) {
        __int128 a = static_cast<__int128>(votes[i]) * rj;
        __int128 b = static_cast<__int128>(votes[j]) * ri;
        return a < b ? -1 : (a > b ? 1 : 0);
    };
    return highest_averages(votes.size(), seats, cmp, tie_message);
}

} // namespace rla
