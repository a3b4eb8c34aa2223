#pragma once

#include <stdexcept>
#include <string>

namespace critpeak {

/// Base class for all numerical failures raised by this library.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// quadrature
struct NonConvergence : NumericalError {
    using NumericalError::NumericalError;
};
struct DivergentTail : NumericalError {
    using NumericalError::NumericalError;
};
struct DivergentIntegral : NumericalError {
    using NumericalError::NumericalError;
};

// linear algebra / Newton
struct SingularJacobian : NumericalError {
    using NumericalError::NumericalError;
};

// kernel / geometry
struct CoincidentPoints : NumericalError {
    using NumericalError::NumericalError;
};
struct OutsideDomain : NumericalError {
    using NumericalError::NumericalError;
};
struct ModeDomainMismatch : NumericalError {
    using NumericalError::NumericalError;
};
struct BallOutsideDomain : NumericalError {
    using NumericalError::NumericalError;
};

// asymptotic evaluators
struct SeparationViolated : NumericalError {
    using NumericalError::NumericalError;
};

// reduced system
struct BoxConstantsInvalid : NumericalError {
    using NumericalError::NumericalError;
};
struct RegimeMismatch : NumericalError {
    using NumericalError::NumericalError;
};

// radial solver
struct InitialSolveFailed : NumericalError {
    using NumericalError::NumericalError;
};
struct SolveFailed : NumericalError {
    using NumericalError::NumericalError;
};
struct PeakUnresolved : NumericalError {
    using NumericalError::NumericalError;
};
struct ResolutionLost : NumericalError {
    ResolutionLost(const std::string& what, double eps_at_loss)
        : NumericalError(what), eps(eps_at_loss) {}
    double eps;  // the epsilon at which the grid stopped resolving the peak
};

// validation of user-supplied configuration
struct InvalidArgument : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

}  // namespace critpeak
