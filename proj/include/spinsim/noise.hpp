// RF inhomogeneity ensembles and the calibration sequences (nutation,
// inversion recovery, CPMG) that measure the error model back.
#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "spinsim/experiment.hpp"
#include "spinsim/fitting.hpp"
#include "spinsim/relaxation.hpp"
#include "spinsim/tomography.hpp"

namespace spinsim {

/// pi/2 over a 12.5 us pulse, in rad/s.
inline constexpr double kNominalPulsePower = (kPi / 2.0) / 12.5e-6;

struct RfMember {
    double scale = 1.0;
    double weight = 1.0;
};

struct RfInhomogeneityModel {
    std::vector<RfMember> members;  // ascending scale
    double envelope_time_constant_s = 0.0;
    /// Systematic flip-angle factor shared by every member (pulse-length
    /// miscalibration). 1 means perfectly calibrated.
    double flip_calibration = 1.0;

    /// Throws std::invalid_argument for an empty distribution, non-positive
    /// scales, negative weights or weights not summing to 1 (1e-12).
    void validate() const;
};

/// n scale factors evenly spread over 1 +- span*gamma with Lorentzian weights
/// 1 / (1 + ((s - 1)/gamma)^2), normalized.
RfInhomogeneityModel lorentzian_model(double gamma, std::size_t n = 21, double span = 3.0,
                                      double flip_calibration = 1.0);

/// Weighted sum of run_experiment over the members (ascending scale order),
/// with relaxation always applied.
DensityMatrix ensemble_run(const ExperimentConfig& config, const RfInhomogeneityModel& model);

/// Per-member pre-readout states with each member's readout pulses, summed
/// per readout pair.
Preparation ensemble_preparation(const ExperimentConfig& config, const RfInhomogeneityModel& model);

/// |sum_i w_i exp(i s_i c Omega t)| at each pulse width t.
std::vector<double> nutation_envelope(const RfInhomogeneityModel& model, double pulse_power,
                                      std::span<const double> widths_s);

/// Exponential time constant of the nutation envelope over widths
/// [0, max_width]. Throws FitError when the envelope does not decay.
double fit_envelope_time_constant(const RfInhomogeneityModel& model, double pulse_power,
                                  double max_width_s, std::size_t n_points = 200);

/// Bisects the Lorentzian width until the fitted envelope (over
/// [0, 2 target]) matches `target_s`; throws FitError if it cannot land
/// within 10%.
RfInhomogeneityModel calibrate_inhomogeneity(double target_s, double pulse_power = kNominalPulsePower,
                                             double flip_calibration = 1.0, std::size_t n = 21,
                                             double span = 3.0);

struct InversionRecoveryResult {
    double t1_s = 0.0;
    double m_eq = 0.0;
    std::vector<double> delays_s;
    std::vector<double> signal;  // <I_z> of the spin
};

/// pi pulse from equilibrium, relax for each delay, read <I_z>, fit
/// M_eq (1 - 2 exp(-t/T1)). Needs at least 4 delays.
InversionRecoveryResult inversion_recovery(const SpinSystem& system, std::string_view spin,
                                           std::span<const double> delays_s,
                                           std::span<const double> polarization = {});

struct CpmgResult {
    double t2_s = 0.0;
    std::vector<double> times_s;
    std::vector<double> magnitude;  // |<I_x> + i <I_y>|
};

/// 90_x - (d - 180_y - d)^n with d = echo_spacing / 2, echo magnitude fitted
/// to A exp(-t/T2).
CpmgResult cpmg(const SpinSystem& system, std::string_view spin, double echo_spacing_s,
                std::span<const int> echo_counts, std::span<const double> polarization = {});

}  // namespace spinsim
