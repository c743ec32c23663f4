#include "fairbias/csv.hpp"

#include "fairbias/common.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

namespace fairbias::csv {

namespace {

bool is_space(char c)
{
    return c == ' ' || c == '\t';
}

std::string trim(std::string_view s)
{
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && is_space(s[b])) {
        ++b;
    }
    while (e > b && is_space(s[e - 1])) {
        --e;
    }
    return std::string(s.substr(b, e - b));
}

} // namespace

std::vector<Row> parse(std::string_view text)
{
    std::vector<Row> rows;
    Row row;
    std::string field;
    bool quoted_field = false;
    bool in_quotes = false;
    bool row_has_content = false;
    std::size_t line = 1;

    auto end_field = [&] {
        row.push_back(quoted_field ? field : trim(field));
        field.clear();
        quoted_field = false;
    };
    auto end_row = [&] {
        if (row_has_content || !row.empty()) {
            end_field();
            rows.push_back(std::move(row));
        }
        row.clear();
        row_has_content = false;
    };

    if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") {
        text.remove_prefix(3);
    }

    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') {
                    ++line;
                }
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
        case '"':
            if (!trim(field).empty() || quoted_field) {
                throw DataError(DataErrorCode::malformed_csv, "unexpected quote on line " + std::to_string(line));
            }
            field.clear();
            quoted_field = true;
            in_quotes = true;
            row_has_content = true;
            break;
        case ',':
            end_field();
            row_has_content = true;
            break;
        case '\r':
            if (i + 1 < text.size() && text[i + 1] == '\n') {
                ++i;
            }
            [[fallthrough]];
        case '\n':
            end_row();
            ++line;
            break;
        default:
            if (quoted_field && !is_space(c)) {
                throw DataError(DataErrorCode::malformed_csv, "text after closing quote on line " + std::to_string(line));
            }
            if (!quoted_field) {
                field.push_back(c);
            }
            if (!is_space(c)) {
                row_has_content = true;
            }
        }
    }
    if (in_quotes) {
        throw DataError(DataErrorCode::malformed_csv, "unterminated quoted field");
    }
    end_row();
    return rows;
}

std::vector<Row> read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError(DataErrorCode::malformed_csv, "cannot open '" + path + "'");
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse(buffer.str());
}

std::string escape(std::string_view field)
{
    bool needs = field.find_first_of(",\"\r\n") != std::string_view::npos
        || (!field.empty() && (is_space(field.front()) || is_space(field.back())));
    if (!needs) {
        return std::string(field);
    }
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') {
            out += "\"\"";
        } else {
            out.push_back(c);
        }
    }
    out.push_back('"');
    return out;
}

void write_row(std::ostream& out, const Row& row)
{
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i > 0) {
            out << ',';
        }
        out << escape(row[i]);
    }
    out << '\n';
}

} // namespace fairbias::csv
