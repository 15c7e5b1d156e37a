#pragma once

#include <stdexcept>
#include <string>

namespace ellcop {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Cholesky pivot fell below the positive-definiteness tolerance.
struct NotPositiveDefinite : Error {
    int pivot_index;
    explicit NotPositiveDefinite(int pivot)
        : Error("matrix is not positive-definite (pivot " + std::to_string(pivot) + ")"),
          pivot_index(pivot) {}
};

struct NonPositiveDiagonal : Error {
    int index;
    explicit NonPositiveDiagonal(int i)
        : Error("diagonal entry " + std::to_string(i) + " is not strictly positive"), index(i) {}
};

struct DomainError : Error {
    explicit DomainError(const std::string& msg) : Error(msg) {}
};

struct DimensionError : Error {
    explicit DimensionError(const std::string& msg) : Error(msg) {}
};

struct ConvergenceFailure : Error {
    explicit ConvergenceFailure(const std::string& msg) : Error(msg) {}
};

struct DegenerateSample : Error {
    explicit DegenerateSample(const std::string& msg) : Error(msg) {}
};

struct DegenerateSpectrum : Error {
    explicit DegenerateSpectrum(const std::string& msg) : Error(msg) {}
};

struct BracketError : Error {
    explicit BracketError(const std::string& msg) : Error(msg) {}
};

// CSV ingestion failures carry 1-based coordinates of the offending cell.
struct ParseError : Error {
    int row, column;
    ParseError(int r, int c, const std::string& msg)
        : Error("row " + std::to_string(r) + ", column " + std::to_string(c) + ": " + msg),
          row(r), column(c) {}
};

struct EmptyInput : Error {
    explicit EmptyInput(const std::string& msg) : Error(msg) {}
};

}  // namespace ellcop
