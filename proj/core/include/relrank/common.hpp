#pragma once

#include <stdexcept>
#include <string>

namespace relrank {

#ifdef RELRANK_SINGLE_PRECISION
using Real = float;
#else
using Real = double;
#endif

// Error taxonomy. The CLI maps IoError/FormatError/ConfigError to exit
// code 2 and NumericError to exit code 3.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : Error {
    using Error::Error;
};

struct FormatError : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

struct DimensionError : Error {
    using Error::Error;
};

struct DomainError : Error {
    using Error::Error;
};

struct NumericError : Error {
    using Error::Error;
};

// Thrown when train/dev supervision or features touch the studied period.
struct LeakageError : Error {
    using Error::Error;
};

using EntityId = long long;

} // namespace relrank
