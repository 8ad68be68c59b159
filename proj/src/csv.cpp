#include "figa/csv.hpp"

#include <charconv>
#include <cmath>

#include "figa/error.hpp"

namespace figa::csv {

bool Reader::next(std::vector<std::string>& fields) {
    fields.clear();
    int c = in_.get();
    if (c == std::char_traits<char>::eof()) return false;
    record_line_ = line_;

    std::string field;
    bool quoted = false;
    bool was_quoted = false;
    for (;; c = in_.get()) {
        if (c == std::char_traits<char>::eof()) {
            if (quoted) throw ParseError("unterminated quoted field", record_line_);
            fields.push_back(std::move(field));
            return true;
        }
        char ch = static_cast<char>(c);
        if (quoted) {
            if (ch == '"') {
                if (in_.peek() == '"') {
                    field.push_back('"');
                    in_.get();
                } else {
                    quoted = false;
                }
            } else {
                if (ch == '\n') ++line_;
                field.push_back(ch);
            }
            continue;
        }
        switch (ch) {
        case '"':
            if (!field.empty() || was_quoted)
                throw ParseError("stray quote inside unquoted field", record_line_);
            quoted = was_quoted = true;
            break;
        case ',':
            fields.push_back(std::move(field));
            field.clear();
            was_quoted = false;
            break;
        case '\r':
            if (in_.peek() == '\n') in_.get();
            [[fallthrough]];
        case '\n':
            ++line_;
            fields.push_back(std::move(field));
            return true;
        default:
            if (was_quoted) throw ParseError("text after closing quote", record_line_);
            field.push_back(ch);
        }
    }
}

std::vector<std::vector<std::string>> read_all(std::istream& in) {
    Reader reader(in);
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> fields;
    while (reader.next(fields)) rows.push_back(fields);
    return rows;
}

std::string escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out << ',';
        out << escape(fields[i]);
    }
    out << '\n';
}

std::string format_double(double v) {
    if (v == 0.0) return "0";
    if (std::isnan(v)) return "nan";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace figa::csv
