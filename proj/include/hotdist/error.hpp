#ifndef HOTDIST_ERROR_HPP
#define HOTDIST_ERROR_HPP

#include <stdexcept>
#include <string>

namespace hotdist {

/// Input, validation, and I/O failures. The CLI maps these to exit code 2.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Non-finite loss during descent (step too large). CLI exit code 4.
class DivergenceError : public Error {
  public:
    explicit DivergenceError(const std::string& what) : Error(what) {}
};

}  // namespace hotdist

#endif
