#pragma once

#include <stdexcept>
#include <string>

namespace wedge {

// Failure categories. The CLI maps these onto exit codes.
enum class ErrorKind {
    domain,          // bad input to a pure function
    validation,      // bad configuration
    no_shock,        // normal Mach below one
    detached,        // wedge angle beyond detachment
    cavitation,      // Bernoulli radicand not positive
    regime,          // sonic or supersonic node where subsonic flow is required
    degenerate,      // vanishing determinant / pressure jump
    tangent_point,   // |b1| too small
    ellipticity,
    fold_over,       // shock transform no longer invertible
    solver,          // linear solver failure
    nonconvergence,  // fixed-point divergence or iteration budget exhausted
    io
};

const char* to_string(ErrorKind k);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
    throw Error(kind, what);
}

} // namespace wedge
