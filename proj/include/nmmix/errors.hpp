#pragma once

#include <stdexcept>
#include <string>

namespace nmmix {

// Malformed expression text. Offsets are byte positions into the input.
struct ParseError : std::runtime_error {
    ParseError(std::size_t offset, std::string expected, std::string found);

    std::size_t offset;
    std::string expected;
    std::string found;
};

// Invalid evolution data: range violations, tiling gaps, f(0) != 1, ...
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

// A configured enumeration or search budget was exceeded.
struct CapExceeded : std::runtime_error {
    explicit CapExceeded(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace nmmix
