// Detected signal V(t) = Tr(rho(t) (-i sigma_x - sigma_y)) on one spin, its
// spectrum, and line integration at the two J-split positions.
#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "spinsim/experiment.hpp"
#include "spinsim/pulse_seq.hpp"
#include "spinsim/relaxation.hpp"
#include "spinsim/spin_core.hpp"

namespace spinsim {

struct Fid {
    std::vector<Complex> samples;
    double dwell_s = 0.0;
    std::string detected_spin;
    double carrier_offset_hz = 0.0;  // detected spin's residual offset
};

struct Spectrum {
    std::vector<Complex> amplitudes;
    std::vector<double> frequency_hz;  // relative to the carrier
    double center_hz = 0.0;            // where the J doublet is centered

    double bin_width_hz() const;
};

struct AcquisitionOptions {
    std::size_t n_samples = 4096;
    double dwell_s = 5e-4;
    /// Decay during acquisition; none means a perfectly undamped FID.
    std::optional<RelaxationParams> relaxation;
    double line_broadening_hz = 0.0;  // exponential apodization in spectrum()

    void validate() const;
};

/// Signal of an arbitrary matrix (linear in `rho`, no state validation).
Fid acquire_signal(const Matrix& rho, const SpinSystem& system, std::string_view spin,
                   const AcquisitionOptions& options = {});

/// Acquire from a state whose readout pulses were already applied.
Fid acquire_fid(const DensityMatrix& rho, const SpinSystem& system, std::string_view spin,
                const AcquisitionOptions& options = {});

/// X readout on the detected spin, then acquire.
Fid synth_fid(const DensityMatrix& rho0, const SpinSystem& system, std::string_view spin,
              const AcquisitionOptions& options = {});

/// Custom readout pulses (an empty span means no pulse), then acquire.
Fid synth_fid(const DensityMatrix& rho0, const SpinSystem& system, std::string_view spin,
              std::span<const Rotation> readout, const AcquisitionOptions& options = {});

/// Adds complex Gaussian noise whose per-bin spectral RMS is `spectral_sigma`.
void add_receiver_noise(Fid& fid, double spectral_sigma, std::mt19937_64& rng);

/// Peak spectral height of a fully polarized detected spin (|0> then X
/// readout) under `options`. Receiver SNR is defined against this line.
double reference_peak_height(const SpinSystem& system, std::string_view spin,
                             const AcquisitionOptions& options = {});

/// DFT with zero-filling to a power of two, scaled by 1/N and centered, so
/// the amplitudes sum to the first FID sample.
Spectrum spectrum(const Fid& fid, double line_broadening_hz = 0.0);

struct LineIntegrals {
    Complex low;   // center - J/2
    Complex high;  // center + J/2
};

/// Sums +-window_bins around each line. Throws std::invalid_argument when the
/// windows overlap or leave the spectral range.
LineIntegrals line_integrals(const Spectrum& spec, double j_hz, std::size_t window_bins = 5);

/// Uses the low line (work qubit |0>): for input bit 0 a positive real part
/// means constant. Throws InconclusiveError when
/// |Re low| < max(noise_floor, 0.05 (|low| + |high|)).
Verdict classify_spectrum(Complex low, Complex high, double noise_floor = 1e-12, int input_bit = 0);

}  // namespace spinsim
