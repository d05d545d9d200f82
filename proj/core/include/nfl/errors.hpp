#pragma once

#include <stdexcept>
#include <string>

namespace nfl {

// Base class for every error thrown by this library.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Geometry queries outside their domain of validity.
struct OutsideCollar : Error { using Error::Error; };
struct NotOnBoundary : Error { using Error::Error; };

// Path simulation left the regime where the projection step is valid.
struct StepOutOfCollar : Error { using Error::Error; };

// Exponential-moment / weight computations outside the small-time regime.
struct RegimeExceeded : Error { using Error::Error; };

// PDE solver diagnostics.
struct GridTooCoarse : Error { using Error::Error; };
struct NonConvergent : Error { using Error::Error; };
struct DisconnectedMask : Error { using Error::Error; };

// Discrete optimal transport.
struct TooManyAtoms : Error { using Error::Error; };
struct DisconnectedSupport : Error { using Error::Error; };
struct DegenerateInput : Error { using Error::Error; };

// Configuration and fitting.
struct ConfigInvalid : Error { using Error::Error; };
struct SingularFit : Error { using Error::Error; };

}  // namespace nfl
