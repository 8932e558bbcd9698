#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qxct {

/// Base class for every domain error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text, reported with a 1-based row/column location.
class ParseError : public Error {
public:
    ParseError(const std::string& source, std::size_t row, std::size_t column, const std::string& message)
        : Error(source + ":" + std::to_string(row) + ":" + std::to_string(column) + ": " + message),
          row_(row), column_(column) {}

    std::size_t row() const noexcept { return row_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t row_;
    std::size_t column_;
};

} // namespace qxct
