#pragma once

#include <stdexcept>
#include <string>

namespace roomsense {

// Bad arguments or configuration. CLI exit code 1.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Unusable input data: audio, manifests, model files. CLI exit code 2.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A broken internal invariant (NaN in an iterate, corrupted state). CLI exit code 3.
class InternalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace roomsense
