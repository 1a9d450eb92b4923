#ifndef SPCA_SLR_ERRORS_HPP
#define SPCA_SLR_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace spca_slr {

/// Invalid argument: bad sizes, out-of-range indices, unknown names.
class ParameterError : public std::invalid_argument {
public:
    explicit ParameterError(const std::string& what) : std::invalid_argument(what) {}
};

/// A matrix that was required to be invertible is not.
class SingularityError : public std::runtime_error {
public:
    explicit SingularityError(const std::string& what) : std::runtime_error(what) {}
};

/// A combinatorial routine was asked for more work than its guard allows.
class CapacityError : public std::runtime_error {
public:
    explicit CapacityError(const std::string& what) : std::runtime_error(what) {}
};

/// Input data that makes the requested transform undefined (e.g. a zero-variance column).
class DegenerateInputError : public std::runtime_error {
public:
    explicit DegenerateInputError(const std::string& what) : std::runtime_error(what) {}
};

/// An iterative numerical routine failed.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline void require(bool condition, const std::string& message) {
    if (!condition) {
        throw ParameterError(message);
    }
}

}  // namespace detail

}  // namespace spca_slr

#endif
