// Input-state preparation, the Deutsch-Jozsa pulse pipeline and its
// classification. Spin 0 ("A") is the input qubit, spin 1 ("B") the work qubit.
#pragma once

#include <array>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "spinsim/pulse_seq.hpp"
#include "spinsim/relaxation.hpp"
#include "spinsim/spin_core.hpp"

namespace spinsim {

enum class Oracle { f1, f2, f3, f4 };

Oracle oracle_from_name(std::string_view name);
std::string_view oracle_name(Oracle oracle);
bool is_constant(Oracle oracle);
inline constexpr std::array<Oracle, 4> kAllOracles = {Oracle::f1, Oracle::f2, Oracle::f3,
                                                      Oracle::f4};

enum class InputMode { pure, thermal, temporal_average };

InputMode input_mode_from_name(std::string_view name);
std::string_view input_mode_name(InputMode mode);

enum class Verdict { constant, balanced };

std::string_view verdict_name(Verdict v);

/// Raised when the readout polarization is too small to call a verdict.
class InconclusiveError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// hbar*omega/kT for a proton at `proton_larmor_hz`, other spins at a quarter
/// of that (13C gyromagnetic ratio).
std::vector<double> default_polarization(const SpinSystem& system, double temperature_k,
                                         double proton_larmor_hz = 500e6);

struct ExperimentConfig {
    SpinSystem system = SpinSystem::chloroform();
    Oracle oracle = Oracle::f1;
    InputMode input_mode = InputMode::pure;
    std::size_t pure_index = 0;  // basis state for InputMode::pure
    bool noise_enabled = false;  // interleave relaxation
    double temperature_k = 298.15;
    std::vector<double> polarization;  // empty -> default_polarization()
    double pulse_width_s = 12.5e-6;
    std::optional<double> tau_s;

    std::vector<double> resolved_polarization() const;
    RelaxationParams relaxation() const;

    /// Throws std::invalid_argument on a two-spin requirement violation,
    /// polarization outside (0, 0.01) or a bad pulse width.
    void validate() const;
};

/// n_i = (1 - E_i/kT)/2^N with E_i the Zeeman energy, renormalized to trace 1.
/// Polarizations must lie in [0, 0.01).
DensityMatrix thermal_state(const SpinSystem& system, std::span<const double> polarization);

/// Population permutation fixing |00>: the population at index i moves to
/// index to[i].
using PopulationCycle = std::array<std::size_t, 4>;
inline constexpr PopulationCycle kIdentityCycle = {0, 1, 2, 3};
/// 01 -> 10 -> 11 -> 01.
inline constexpr PopulationCycle kForwardCycle = {0, 2, 3, 1};
/// 01 -> 11 -> 10 -> 01.
inline constexpr PopulationCycle kBackwardCycle = {0, 3, 1, 2};

/// Throws std::invalid_argument for non-diagonal input (|off-diagonal| > 1e-10)
/// or a cycle that moves |00>.
DensityMatrix permute_populations(const DensityMatrix& rho, const PopulationCycle& cycle);

/// Sum of three runs decomposed as alpha * I + delta * (rank-one projector).
struct TemporalAverage {
    double alpha = 0.0;
    double delta = 0.0;
    Matrix effective;  // the summed matrix

    /// (effective - alpha I) / delta: the pure-state-equivalent output.
    Matrix normalized() const;
};

TemporalAverage temporal_average(std::span<const DensityMatrix, 3> rhos);

/// E1, the oracle, then E3, as one program.
PulseProgram dj_program(Oracle oracle);

struct RunOptions {
    double flip_scale = 1.0;
    bool force_relaxation = false;
};

/// Evolve an input through `program`, interleaving relax() after every event
/// when `relaxation` is set (pulses last `pulse_width_s`).
DensityMatrix run_program(const DensityMatrix& input, const PulseProgram& program,
                          const SpinSystem& system, const std::optional<RelaxationParams>& relaxation,
                          double pulse_width_s, double flip_scale = 1.0);

/// The inputs a config asks for: one state, or three permuted thermal states.
std::vector<DensityMatrix> prepare_inputs(const ExperimentConfig& config);

/// State right before readout. Temporal averaging returns the mean of the
/// three runs (a valid density matrix).
DensityMatrix run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

/// Runs the three permuted thermal inputs and decomposes their sum.
TemporalAverage run_temporal_average(const ExperimentConfig& config, const RunOptions& options = {});

/// Signed polarization of spin A in the work-qubit-|0> subensemble,
/// 2 Tr(rho_dev (I_zA x |0><0|_B)). +1/2 for |00>, -1/2 for |10>.
double work_zero_polarization(const DensityMatrix& final_state);

/// constant when spin A ends in |0> (for input bit 0), balanced for |1>.
/// Throws InconclusiveError when |signal| < 0.05 ||rho_dev||_F.
Verdict classify(const DensityMatrix& final_state, int input_bit = 0);

/// N Z^-N, the relative pure-state signal of N spins.
double pure_fraction_scaling(int n_qubits, double z);

}  // namespace spinsim
