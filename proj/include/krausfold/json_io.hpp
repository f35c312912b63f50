#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

#include "krausfold/channel.hpp"

namespace kf {

/// Malformed Kraus-set document. line/column are 1-based; 0 when unknown.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string &what, std::size_t line = 0, std::size_t column = 0)
        : std::runtime_error(what), line_(line), column_(column) {}
    std::size_t line() const { return line_; }
    std::size_t column() const { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/// Reads `{"dim": d, "operators": [ [[ [re,im], ... ], ...], ... ]}`.
/// Rejects non-finite numbers, ragged shapes and dims other than 2 or 3.
KrausSet parse_kraus_json(std::string_view text);
KrausSet load_kraus_file(const std::filesystem::path &path);

/// Canonical serialization (17 significant digits, one operator per line).
std::string to_kraus_json(const KrausSet &s);
void save_kraus_file(const KrausSet &s, const std::filesystem::path &path);

/// Shortest round-trip text of a double ("%.17g").
std::string format_double(double x);

}  // namespace kf
