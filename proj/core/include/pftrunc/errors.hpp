#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pftrunc {

class DimensionMismatch : public std::invalid_argument {
public:
    DimensionMismatch(std::size_t expected, std::size_t got, const std::string& what)
        : std::invalid_argument(what + ": dimension mismatch (expected " + std::to_string(expected) +
                                ", got " + std::to_string(got) + ")"),
          expected_(expected), got_(got) {}

    std::size_t expected() const noexcept { return expected_; }
    std::size_t got() const noexcept { return got_; }

private:
    std::size_t expected_;
    std::size_t got_;
};

// Thrown when a gradient violates the bounded-gradient assumption of the betting learners.
class GradientBoundError : public std::invalid_argument {
public:
    GradientBoundError(double norm, double bound)
        : std::invalid_argument("gradient norm " + std::to_string(norm) + " exceeds bound " +
                                std::to_string(bound)),
          norm_(norm) {}

    double norm() const noexcept { return norm_; }

private:
    double norm_;
};

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& msg)
        : std::runtime_error("line " + std::to_string(line) + ": " + msg), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace pftrunc
