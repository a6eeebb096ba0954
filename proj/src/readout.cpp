#include "spinsim/readout.hpp"

#include <bit>
#include <cmath>

#include <fftw3.h>

namespace spinsim {

double Spectrum::bin_width_hz() const {
    return frequency_hz.size() >= 2 ? frequency_hz[1] - frequency_hz[0] : 0.0;
}

void AcquisitionOptions::validate() const {
    if (n_samples == 0) {
        throw std::invalid_argument("acquisition needs at least one sample");
    }
    if (!(dwell_s > 0.0)) {
        throw std::invalid_argument("dwell must be > 0");
    }
    if (!(line_broadening_hz >= 0.0)) {
        throw std::invalid_argument("line broadening must be >= 0");
    }
    if (relaxation) {
        relaxation->validate();
    }
}

namespace {

Matrix detection_operator(const SpinSystem& system, std::size_t k) {
    Eigen::Matrix2cd op;
    // -i sigma_x - sigma_y
    op << 0.0, 0.0, Complex(0.0, -2.0), 0.0;
    return embed(op, k, system.size());
}

}  // namespace

Fid acquire_signal(const Matrix& rho, const SpinSystem& system, std::string_view spin,
                   const AcquisitionOptions& options) {
    options.validate();
    const std::size_t k = system.index_of(spin);
    const auto dim = static_cast<Eigen::Index>(system.dim());
    if (rho.rows() != dim || rho.cols() != dim) {
        throw std::invalid_argument("acquire: state dimension does not match the spin system");
    }
    const Matrix o = detection_operator(system, k);
    Fid fid;
    fid.samples.assign(options.n_samples, Complex(0.0, 0.0));
    fid.dwell_s = options.dwell_s;
    fid.detected_spin = std::string(spin);
    fid.carrier_offset_hz = system.spin(k).offset_hz;

    const Eigen::VectorXd energy = hamiltonian(system).matrix().diagonal().real();
    if (!options.relaxation) {
        for (Eigen::Index j = 0; j < dim; ++j) {
            for (Eigen::Index l = 0; l < dim; ++l) {
                const Complex c = rho(j, l) * o(l, j);
                if (c == Complex(0.0, 0.0)) {
                    continue;
                }
                const double w = energy(j) - energy(l);
                for (std::size_t n = 0; n < options.n_samples; ++n) {
                    fid.samples[n] += c * std::polar(1.0, -w * options.dwell_s * static_cast<double>(n));
                }
            }
        }
        return fid;
    }

    // One dwell of free evolution followed by relaxation, as a superoperator.
    Eigen::VectorXcd phase(dim);
    for (Eigen::Index j = 0; j < dim; ++j) {
        phase(j) = std::polar(1.0, -energy(j) * options.dwell_s);
    }
    const RelaxationParams& params = *options.relaxation;
    const double dwell = options.dwell_s;
    const Matrix step = superoperator(
        [&](const Matrix& m) {
            const Matrix evolved = phase.asDiagonal() * m * phase.conjugate().asDiagonal();
            return relax_matrix(evolved, dwell, params);
        },
        system.dim());
    // Tr(rho O) = sum_jl rho_jl O_lj = vec(O^T) . vec(rho)
    const Eigen::VectorXcd probe = o.transpose().reshaped();
    Eigen::VectorXcd state = rho.reshaped();
    for (std::size_t n = 0; n < options.n_samples; ++n) {
        fid.samples[n] = (probe.transpose() * state).value();
        state = step * state;
    }
    return fid;
}

Fid acquire_fid(const DensityMatrix& rho, const SpinSystem& system, std::string_view spin,
                const AcquisitionOptions& options) {
    return acquire_signal(rho.matrix(), system, spin, options);
}

Fid synth_fid(const DensityMatrix& rho0, const SpinSystem& system, std::string_view spin,
              const AcquisitionOptions& options) {
    const Rotation x{std::string(spin), PulseAxis::x, kPi / 2.0};
    return synth_fid(rho0, system, spin, std::span<const Rotation>(&x, 1), options);
}

Fid synth_fid(const DensityMatrix& rho0, const SpinSystem& system, std::string_view spin,
              std::span<const Rotation> readout, const AcquisitionOptions& options) {
    DensityMatrix rho = rho0;
    for (const auto& r : readout) {
        rho = evolve(rho, rf_rotation(system, r.spin, phase_of(r.axis), r.flip));
    }
    return acquire_fid(rho, system, spin, options);
}

void add_receiver_noise(Fid& fid, double spectral_sigma, std::mt19937_64& rng) {
    if (!(spectral_sigma >= 0.0)) {
        throw std::invalid_argument("receiver noise sigma must be >= 0");
    }
    const double n = static_cast<double>(fid.samples.size());
    std::normal_distribution<double> gauss(0.0, spectral_sigma * std::sqrt(n / 2.0));
    for (auto& s : fid.samples) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        s += Complex(re, im);
    }
}

double reference_peak_height(const SpinSystem& system, std::string_view spin,
                             const AcquisitionOptions& options) {
    const DensityMatrix ground = DensityMatrix::basis_state(system.dim(), 0);
    const Spectrum s = spectrum(synth_fid(ground, system, spin, options), options.line_broadening_hz);
    double peak = 0.0;
    for (const auto& a : s.amplitudes) {
        peak = std::max(peak, std::abs(a));
    }
    return peak;
}

Spectrum spectrum(const Fid& fid, double line_broadening_hz) {
    if (fid.samples.empty() || !(fid.dwell_s > 0.0)) {
        throw std::invalid_argument("spectrum: empty FID or non-positive dwell");
    }
    const std::size_t n = std::bit_ceil(fid.samples.size());
    std::vector<Complex> in(n, Complex(0.0, 0.0));
    for (std::size_t i = 0; i < fid.samples.size(); ++i) {
        const double t = static_cast<double>(i) * fid.dwell_s;
        in[i] = fid.samples[i] * std::exp(-kPi * line_broadening_hz * t);
    }
    std::vector<Complex> out(n);
    fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), reinterpret_cast<fftw_complex*>(in.data()),
                                      reinterpret_cast<fftw_complex*>(out.data()), FFTW_FORWARD,
                                      FFTW_ESTIMATE);
    fftw_execute(plan);
    fftw_destroy_plan(plan);

    Spectrum s;
    s.amplitudes.resize(n);
    s.frequency_hz.resize(n);
    s.center_hz = fid.carrier_offset_hz;
    const double scale = 1.0 / static_cast<double>(n);
    const std::size_t half = n / 2;
    for (std::size_t k = 0; k < n; ++k) {
        s.amplitudes[k] = out[(k + half) % n] * scale;
        s.frequency_hz[k] = (static_cast<double>(k) - static_cast<double>(half)) /
                            (static_cast<double>(n) * fid.dwell_s);
    }
    return s;
}

LineIntegrals line_integrals(const Spectrum& spec, double j_hz, std::size_t window_bins) {
    const std::size_t n = spec.amplitudes.size();
    const double bw = spec.bin_width_hz();
    if (n < 2 || !(bw > 0.0)) {
        throw std::invalid_argument("line_integrals: spectrum too short");
    }
    const auto bin_of = [&](double f) {
        return static_cast<long>(std::lround((f - spec.frequency_hz[0]) / bw));
    };
    const long low = bin_of(spec.center_hz - std::abs(j_hz) / 2.0);
    const long high = bin_of(spec.center_hz + std::abs(j_hz) / 2.0);
    const long w = static_cast<long>(window_bins);
    if (high - low <= 2 * w) {
        throw std::invalid_argument("line_integrals: integration windows overlap (J below resolution)");
    }
    if (low - w < 0 || high + w >= static_cast<long>(n)) {
        throw std::invalid_argument("line_integrals: line outside the spectral width");
    }
    const auto sum = [&](long c) {
        Complex acc(0.0, 0.0);
        for (long k = c - w; k <= c + w; ++k) {
            acc += spec.amplitudes[static_cast<std::size_t>(k)];
        }
        return acc;
    };
    return {sum(low), sum(high)};
}

Verdict classify_spectrum(Complex low, Complex high, double noise_floor, int input_bit) {
    if (input_bit != 0 && input_bit != 1) {
        throw std::invalid_argument("input bit must be 0 or 1");
    }
    const double threshold = std::max(noise_floor, 0.05 * (std::abs(low) + std::abs(high)));
    if (!(std::abs(low.real()) >= threshold) || std::abs(low.real()) == 0.0) {
        throw InconclusiveError("spectral line below threshold");
    }
    const double oriented = input_bit == 0 ? low.real() : -low.real();
    return oriented > 0.0 ? Verdict::constant : Verdict::balanced;
}

}  // namespace spinsim
