#include "scar/csv.hpp"

#include <charconv>
#include <cmath>

namespace scar {

std::string format_double(double value) {
    if (std::isnan(value))
        return "nan";
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return ec == std::errc{} ? std::string(buf, ptr) : std::string("nan");
}

void CsvWriter::write(std::string_view s) {
    if (s.find_first_of(",\"\n") == std::string_view::npos) {
        out_ << s;
        return;
    }
    out_ << '"';
    for (char c : s) {
        if (c == '"')
            out_ << '"';
        out_ << c;
    }
    out_ << '"';
}

}  // namespace scar
