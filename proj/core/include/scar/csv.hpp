#pragma once

#include <concepts>
#include <cstddef>
#include <ostream>
#include <string>
#include <string_view>

namespace scar {

/// Shortest round-trip decimal form ('.' separator, no locale).
std::string format_double(double value);

/// Comma-separated rows with LF endings. Text fields are written verbatim
/// and quoted only when they contain a comma or quote.
class CsvWriter {
public:
    explicit CsvWriter(std::ostream& out) : out_(out) {}

    template <class... Fields>
    void row(const Fields&... fields) {
        bool first = true;
        ((write_separator(first), write(fields)), ...);
        out_ << '\n';
    }

private:
    void write_separator(bool& first) {
        if (!first)
            out_ << ',';
        first = false;
    }
    void write(double v) { out_ << format_double(v); }
    void write(std::string_view s);
    void write(const char* s) { write(std::string_view(s)); }
    void write(const std::string& s) { write(std::string_view(s)); }
    template <std::integral T>
    void write(T v) { out_ << v; }

    std::ostream& out_;
};

}  // namespace scar
