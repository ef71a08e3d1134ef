#ifndef INVM_ERRORS_HPP
#define INVM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace invm {

// Argument outside the mathematical domain of an operation.
struct domain_error : std::domain_error {
    using std::domain_error::domain_error;
};

// A value became non-finite where the contract requires finiteness.
struct overflow_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Approximations collapsed onto each other (or another denominator stayed
// below the separation floor after the documented perturbation).
struct degenerate_input_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Fractional derivative vanished at an iterate.
struct degenerate_derivative_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Not enough admissible data for an estimate.
struct insufficient_data_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed external input (CSV, coefficient list, ...).
struct parse_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Filesystem failure carrying the offending path.
struct io_error : std::runtime_error {
    explicit io_error(const std::string& what, std::string path)
        : std::runtime_error(what + ": " + path), path(std::move(path)) {}
    std::string path;
};

} // namespace invm

#endif
