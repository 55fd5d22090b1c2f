#include "rla/batch.hpp"

#include <fstream>
#include <unordered_map>

#include "rla/csv.hpp"

namespace rla {

std::vector<BatchRecord> read_batches_csv(std::istream& in, const Contest& contest)
{
    auto rows = csv::read_with_header(in, {"batch_id", "party", "reported_votes", "true_votes"}, "batch csv");
    std::vector<BatchRecord> batches;
    std::unordered_map<std::string, std::size_t> index;
    for (const auto& row : rows) {
        const auto& id = row[0];
        if (id.empty())
            throw InputError("batch csv: empty batch_id");
        auto party = contest.find(row[1]);
        if (!party)
            throw InputError("batch csv: unknown party '" + row[1] + "' in batch '" + id + "'");
        auto rep = csv::parse_int(row[2], "batch csv: reported_votes");
        auto tru = csv::parse_int(row[3], "batch csv: true_votes");
        if (rep < 0 || tru < 0)
            throw InputError("batch csv: negative votes in batch '" + id + "'");

        auto [it, inserted] = index.emplace(id, batches.size());
        if (inserted)
            batches.push_back({id, Tally(contest), Tally(contest), 0});
        auto& b = batches[it->second];
        if (b.reported.count(*party) != 0 || b.truth.count(*party) != 0)
            throw InputError("batch csv: duplicate row for '" + row[1] + "' in batch '" + id + "'");
        b.reported.add(*party, rep);
        b.truth.add(*party, tru);
    }
    if (batches.empty())
        throw InputError("batch csv: no batches");
    for (auto& b : batches) {
        b.size = std::max(b.reported.total(), b.truth.total());
        if (b.size == 0)
            throw InputError("batch csv: batch '" + b.id + "' is empty");
        b.reported.add(contest.invalid(), b.size - b.reported.total());
        b.truth.add(contest.invalid(), b.size - b.truth.total());
    }
    return batches;
}

std::vector<BatchRecord> read_batches_csv(const std::string& path, const Contest& contest)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw InputError("cannot open " + path);
    return read_batches_csv(in, contest);
}

std::map<std::string, std::int64_t> read_declared_sizes(const std::string& path)
{
    std::map<std::string, std::int64_t> out;
    for (const auto& row : csv::read_with_header(path, {"batch_id", "declared_size"})) {
        auto n = csv::parse_int(row[1], "declared sizes");
        if (n <= 0)
            throw InputError("declared sizes: size must be positive for '" + row[0] + "'");
        if (!out.emplace(row[0], n).second)
            throw InputError("declared sizes: duplicate batch '" + row[0] + "'");
    }
    return out;
}

Tally total_reported(const std::vector<BatchRecord>& batches, const Contest& contest)
{
    Tally t(contest);
    for (const auto& b : batches)
        t += b.reported;
    return t;
}

Tally total_truth(const std::vector<BatchRecord>& batches, const Contest& contest)
{
    Tally t(contest);
    for (const auto& b : batches)
        t += b.truth;
    return t;
}

} // namespace rla
