#ifndef OAM_ERRORS_HPP
#define OAM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace oam {

// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A caller violated a documented precondition (bad dimension, value out of
// range, non-Hermitian input, ...).
struct DomainError : Error {
    using Error::Error;
};

// Malformed external input: config schema, CSV layout, JSON payloads.
struct ValidationError : Error {
    using Error::Error;
};

}  // namespace oam

#endif
