#pragma once

#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace figa::csv {

// RFC-4180 reader: quoted fields, doubled quotes, embedded newlines, CRLF.
class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    // Reads one record. Returns false at end of input.
    bool next(std::vector<std::string>& fields);

    // 1-based physical line on which the last record started.
    std::size_t line() const noexcept { return record_line_; }

private:
    std::istream& in_;
    std::size_t line_ = 1;
    std::size_t record_line_ = 0;
};

std::vector<std::vector<std::string>> read_all(std::istream& in);

// Quotes only when needed.
std::string escape(std::string_view field);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

// Shortest decimal form that round-trips through strtod.
std::string format_double(double v);

}  // namespace figa::csv
