#include "rla/csv.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <system_error>

#include "rla/core.hpp"

namespace rla::csv {

std::vector<Row> read(std::istream& in)
{
    std::vector<Row> rows;
    Row row;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    char ch = 0;

    auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_row = [&] {
        if (field_started || !row.empty())
            end_field();
        bool blank = row.empty() || (row.size() == 1 && row[0].empty());
        if (!blank)
            rows.push_back(std::move(row));
        row.clear();
    };

    while (in.get(ch)) {
        if (in_quotes) {
            if (ch == '"') {
                if (in.peek() == '"') {
                    in.get(ch);
                    field.push_back('"');
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(ch);
            }
            continue;
        }
        switch (ch) {
        case '"':
            in_quotes = true;
            field_started = true;
            break;
        case ',':
            end_field();
            field_started = true;
            break;
        case '\r':
            break;
        case '\n':
            end_row();
            break;
        default:
            field.push_back(ch);
            field_started = true;
        }
    }
    if (in_quotes)
        throw InputError("csv: unterminated quoted field");
    end_row();
    return rows;
}

std::vector<Row> read_with_header(std::istream& in, const Row& header, const std::string& source)
{
    auto rows = read(in);
    if (rows.empty())
        throw InputError(source + ": empty file");
    Row got = rows.front();
    // Tolerate a UTF-8 byte order mark.
    if (!got.empty() && got[0].starts_with("\xEF\xBB\xBF"))
        got[0].erase(0, 3);
    if (got != header) {
        std::string want;
        for (const auto& h : header)
            want += (want.empty() ? "" : ",") + h;
        throw InputError(source + ": expected header '" + want + "'");
    }
    rows.erase(rows.begin());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != header.size())
            throw InputError(source + ": row " + std::to_string(i + 2) + " has "
                + std::to_string(rows[i].size()) + " fields");
    }
    return rows;
}

std::vector<Row> read_with_header(const std::string& path, const Row& header)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw InputError("cannot open " + path);
    return read_with_header(in, header, path);
}

std::int64_t parse_int(std::string_view field, const std::string& context)
{
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size() || field.empty())
        throw InputError(context + ": not an integer: '" + std::string(field) + "'");
    return v;
}

double parse_double(std::string_view field, const std::string& context)
{
    double v = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size() || field.empty())
        throw InputError(context + ": not a number: '" + std::string(field) + "'");
    return v;
}

std::string escape(std::string_view field)
{
    if (field.find_first_of(",\"\n\r") == std::string_view::npos)
        return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"')
            out += "\"\"";
        else
            out += c;
    }
    out += '"';
    return out;
}

std::string format_double(double x)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, ptr);
}

} // namespace rla::csv
