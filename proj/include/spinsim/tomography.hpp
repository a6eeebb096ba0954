// Nine-experiment state tomography of a two-spin deviation density matrix by
// linear inversion of spectral line integrals.
#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "spinsim/readout.hpp"

namespace spinsim {

enum class ReadoutPulse { none, x, y };

std::string_view readout_pulse_name(ReadoutPulse p);

struct ReadoutPair {
    ReadoutPulse a = ReadoutPulse::none;
    ReadoutPulse b = ReadoutPulse::none;

    std::string label() const;  // e.g. "X/none"
};

/// {none, X, Y} on spin A times {none, X, Y} on spin B, A-major.
const std::array<ReadoutPair, 9>& canonical_readout_pairs();

/// Applies the pair's readout pulses (each flip multiplied by flip_scale).
DensityMatrix apply_readout(const DensityMatrix& rho, const SpinSystem& system, const ReadoutPair& pair,
                            double flip_scale = 1.0);

/// Produces the state right before acquisition for one readout pair, so that
/// ensembles can apply their own imperfect readout pulses.
using Preparation = std::function<DensityMatrix(const ReadoutPair&)>;

/// Ideal readout pulses on a fixed pre-readout state.
Preparation ideal_readout(DensityMatrix rho, SpinSystem system);

struct ReceiverNoise {
    std::vector<double> snr;  // per spin; SNR of a fully polarized line
    double signal_scale = 1.0;
    std::uint64_t seed = 0;
};

struct TomographySettings {
    AcquisitionOptions acquisition;
    std::size_t window_bins = 5;
    std::optional<ReceiverNoise> noise;
};

/// Line integrals of one experiment, indexed [detected spin] -> {low, high}.
struct TomographyExperiment {
    ReadoutPair pair;
    std::array<LineIntegrals, 2> lines;
};

using TomographyData = std::vector<TomographyExperiment>;

TomographyData acquire_tomography(const Preparation& prep, const SpinSystem& system,
                                  const TomographySettings& settings = {});

/// The 15 traceless basis matrices (Pauli products / 2, identity omitted).
const std::vector<Matrix>& tomography_basis();

/// 72 x 15 real map from basis coefficients to the stacked real/imag line
/// integrals of the nine experiments, under noiseless ideal readout.
Eigen::MatrixXd response_matrix(const SpinSystem& system, const TomographySettings& settings = {});

/// Stacks data in the same order as response_matrix rows.
Eigen::VectorXd measurement_vector(const TomographyData& data);

/// Least-squares inversion; the result is Hermitian and traceless. Throws
/// std::runtime_error when the response matrix is rank deficient.
Matrix reconstruct(const TomographyData& data, const Eigen::MatrixXd& response);

struct TomographyResult {
    Matrix deviation;  // normalized experimental deviation
    Matrix theory;     // normalized theoretical deviation
    double epsilon = 0.0;
    std::size_t target_index = 0;  // basis state with the pure population
    double pure_population = 0.0;
    double max_other_element = 0.0;
    TomographyData data;

    /// deviation + I/4, the displayed populations.
    Matrix normalized_experiment() const;
    Matrix normalized_theory() const;
};

/// ||a - b||_F / ||b||_F.
double relative_error(const Matrix& a, const Matrix& b);

/// Normalizes the reconstruction against `theory` (a pre-readout state):
/// theory is scaled so deviation + I/4 has population 1 on its largest
/// entry, the experiment to the same Frobenius norm.
TomographyResult evaluate_tomography(const Matrix& reconstructed, const DensityMatrix& theory,
                                     TomographyData data = {});

TomographyResult tomography(const Preparation& prep, const SpinSystem& system,
                            const DensityMatrix& theory, const TomographySettings& settings = {});

}  // namespace spinsim
