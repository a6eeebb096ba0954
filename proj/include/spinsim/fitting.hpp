// Least-squares fits used by the calibration sequences.
#pragma once

#include <span>
#include <stdexcept>

namespace spinsim {

class FitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ExponentialFit {
    double amplitude = 0.0;
    double time_constant = 0.0;
    double rms_residual = 0.0;
};

/// y = A exp(-t / T). Throws FitError when the data do not decay.
ExponentialFit fit_exponential_decay(std::span<const double> t, std::span<const double> y);

struct InversionRecoveryFit {
    double m_eq = 0.0;
    double t1 = 0.0;
    double rms_residual = 0.0;
};

/// m = M_eq (1 - 2 exp(-t / T1)).
InversionRecoveryFit fit_inversion_recovery(std::span<const double> t, std::span<const double> m);

}  // namespace spinsim
