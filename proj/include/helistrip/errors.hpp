#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace helistrip {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Invalid arguments or inputs outside an operation's domain.
class DomainError : public Error {
  public:
    using Error::Error;
};

/// An iterative method failed to reach its tolerance.
class NumericalError : public Error {
  public:
    NumericalError(const std::string& what, std::size_t index)
        : Error(what + " (index " + std::to_string(index) + ")"), index_(index) {}

    std::size_t index() const noexcept { return index_; }

  private:
    std::size_t index_;
};

} // namespace helistrip
