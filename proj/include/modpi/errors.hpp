#pragma once
#include <stdexcept>
#include <string>

namespace modpi {

// Every failure raised by the library derives from Error so callers can
// catch broadly; the CLI maps the numeric-domain family to exit code 3.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error { using Error::Error; };
struct InvalidParams : Error { using Error::Error; };
struct NotSiegel : Error { using Error::Error; };
struct TruncationInsufficient : Error { using Error::Error; };
struct BadAux : Error { using Error::Error; };
struct TailTooLarge : Error { using Error::Error; };
struct GaugeMismatch : Error { using Error::Error; };
struct LatticeMismatch : Error { using Error::Error; };
struct BudgetExceeded : Error { using Error::Error; };
struct SingularM : Error { using Error::Error; };
struct UnsupportedDim : Error { using Error::Error; };

// Singular-time family.
struct DomainError : Error { using Error::Error; };
struct CausticError : DomainError { using DomainError::DomainError; };
struct ResonantTime : DomainError { using DomainError::DomainError; };

}  // namespace modpi
