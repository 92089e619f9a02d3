#pragma once

#include <stdexcept>
#include <string>

namespace mpolar {

// Error taxonomy for the library. Each type names the contract that was
// broken; messages carry the offending values and, where useful, a location.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad parameter, grid, or configuration value.
struct ValidationError : Error { using Error::Error; };
// Malformed text input (config file, CSV).
struct ParseError : Error { using Error::Error; };
// Critical velocity ratio undefined: far field is subsonic.
struct NoSecondRoot : Error { using Error::Error; };
// Asked to construct a profile in a regime where none exists.
struct NonExistentRegime : Error { using Error::Error; };
// Discrete stationary profile violated monotonicity or bracketing.
struct StepTooCoarse : Error { using Error::Error; };
// Profile has not reached the far field within tolerance at x = L.
struct DomainTooShort : Error { using Error::Error; };
// Density lost positivity.
struct PositivityLost : Error { using Error::Error; };
// NaN or infinity appeared in a field.
struct NonFiniteField : Error { using Error::Error; };
// Initial perturbation conflicts with the boundary data.
struct CompatibilityViolated : Error { using Error::Error; };
// No admissible envelope constant below the configured cap.
struct EnvelopeViolated : Error { using Error::Error; };
// A pointwise stationary-profile bound failed beyond discretization slack.
struct BoundViolated : Error { using Error::Error; };
// Decay-fit window holds too few samples.
struct WindowTooSmall : Error { using Error::Error; };
// Norm series contains a value <= 0 where a log fit is required.
struct NonpositiveNorm : Error { using Error::Error; };
// Time-series operation needs more snapshots than provided.
struct InsufficientSnapshots : Error { using Error::Error; };

} // namespace mpolar
