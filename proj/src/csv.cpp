#include "dataecon/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>

#include "dataecon/errors.hpp"

namespace dataecon::csv {

std::string format_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

double parse_number(std::string_view field) {
    if (field == "nan") return std::nan("");
    if (field == "inf") return HUGE_VAL;
    if (field == "-inf") return -HUGE_VAL;
    double v = 0.0;
    const auto* end = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(field.data(), end, v);
    if (ec != std::errc() || ptr != end) {
        throw UsageError("malformed number in CSV: '" + std::string(field) + "'");
    }
    return v;
}

std::string escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') out += '"';
        out += ch;
    }
    out += '"';
    return out;
}

void write_row(std::ostream& os, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) os << ',';
        os << escape(fields[i]);
    }
    os << '\n';
}

std::optional<std::vector<std::string>> read_row(std::istream& is) {
    if (is.peek() == std::char_traits<char>::eof()) return std::nullopt;
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    char ch = 0;
    while (is.get(ch)) {
        if (quoted) {
            if (ch == '"') {
                if (is.peek() == '"') {
                    is.get(ch);
                    cur += '"';
                } else {
                    quoted = false;
                }
            } else {
                cur += ch;
            }
            continue;
        }
        if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else if (ch == '\n') {
            break;
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    if (quoted) throw UsageError("unterminated quoted CSV field");
    fields.push_back(std::move(cur));
    return fields;
}

}  // namespace dataecon::csv
