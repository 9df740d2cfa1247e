#pragma once

// Reader and writer for the TOML subset used by scenario files: tables,
// arrays of tables, bare keys, strings, numbers, booleans and single-line
// arrays. Documents map onto nlohmann::json objects.

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

namespace dzvoc::cli {

/// what() is "line N: message", or "source:N: message" when a source is named.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& message, const std::string& source = {});
    std::size_t line() const { return line_; }
    const std::string& message() const { return message_; }

private:
    std::size_t line_;
    std::string message_;
};

nlohmann::json parse_toml(std::string_view text);

/// Scalars first, then nested tables, then arrays of tables. Floating-point
/// values are written in shortest round-trip form.
std::string to_toml(const nlohmann::json& doc);

}  // namespace dzvoc::cli
