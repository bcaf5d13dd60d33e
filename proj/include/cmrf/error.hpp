#pragma once

#include <stdexcept>
#include <string>

namespace cmrf {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Complex construction and generation.
class ClosureViolation : public Error { using Error::Error; };
class DuplicateSimplex : public Error { using Error::Error; };
class DegenerateSimplex : public Error { using Error::Error; };
class GenerationFailed : public Error { using Error::Error; };

// Model construction.
class DimensionMismatch : public Error { using Error::Error; };

class NotPositiveDefinite : public Error {
public:
    NotPositiveDefinite(const std::string& what, double suggested_k)
        : Error(what), suggested_k_(suggested_k) {}

    /// Smallest k (with the default margin) that would make the precision PD.
    double suggested_k() const noexcept { return suggested_k_; }

private:
    double suggested_k_;
};

// Independence queries.
class OverlappingSets : public Error { using Error::Error; };
class NotColorSeparated : public Error { using Error::Error; };
class NotSeparated : public Error { using Error::Error; };

// Diffusion.
class MissingNeighborData : public Error { using Error::Error; };
using MissingNeighborResidual = MissingNeighborData;

// Documents and configuration.
class ConfigError : public Error { using Error::Error; };

} // namespace cmrf
