#include "spinsim/experiment.hpp"

#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>

namespace spinsim {

namespace {

constexpr double kPlanck = 6.62607015e-34;
constexpr double kBoltzmann = 1.380649e-23;

}  // namespace

Oracle oracle_from_name(std::string_view name) {
    for (Oracle o : kAllOracles) {
        if (name == oracle_name(o)) {
            return o;
        }
    }
    throw std::invalid_argument("unknown oracle '" + std::string(name) + "' (expected f1..f4)");
}

std::string_view oracle_name(Oracle oracle) {
    switch (oracle) {
        case Oracle::f1:
            return "f1";
        case Oracle::f2:
            return "f2";
        case Oracle::f3:
            return "f3";
        case Oracle::f4:
            return "f4";
    }
    return "?";
}

bool is_constant(Oracle oracle) {
    return oracle == Oracle::f1 || oracle == Oracle::f2;
}

InputMode input_mode_from_name(std::string_view name) {
    if (name == "pure") {
        return InputMode::pure;
    }
    if (name == "thermal") {
        return InputMode::thermal;
    }
    if (name == "temporal_average") {
        return InputMode::temporal_average;
    }
    throw std::invalid_argument("unknown input mode '" + std::string(name) +
                                "' (expected pure, thermal or temporal_average)");
}

std::string_view input_mode_name(InputMode mode) {
    switch (mode) {
        case InputMode::pure:
            return "pure";
        case InputMode::thermal:
            return "thermal";
        case InputMode::temporal_average:
            return "temporal_average";
    }
    return "?";
}

std::string_view verdict_name(Verdict v) {
    return v == Verdict::constant ? "constant" : "balanced";
}

std::vector<double> default_polarization(const SpinSystem& system, double temperature_k,
                                         double proton_larmor_hz) {
    if (!(temperature_k > 0.0)) {
        throw std::invalid_argument("temperature must be > 0 K");
    }
    const double proton = kPlanck * proton_larmor_hz / (kBoltzmann * temperature_k);
    std::vector<double> x(system.size(), proton / 4.0);
    x[0] = proton;
    return x;
}

std::vector<double> ExperimentConfig::resolved_polarization() const {
    return polarization.empty() ? default_polarization(system, temperature_k) : polarization;
}

RelaxationParams ExperimentConfig::relaxation() const {
    return RelaxationParams::from_system(system, resolved_polarization());
}

void ExperimentConfig::validate() const {
    if (system.size() != 2) {
        throw std::invalid_argument("the Deutsch-Jozsa experiment needs exactly two spins");
    }
    if (pure_index >= system.dim()) {
        throw std::invalid_argument("pure_index out of range");
    }
    if (!(pulse_width_s >= 0.0) || !std::isfinite(pulse_width_s)) {
        throw std::invalid_argument("pulse width must be finite and >= 0");
    }
    if (tau_s && !(*tau_s > 0.0)) {
        throw std::invalid_argument("tau must be > 0");
    }
    const auto x = resolved_polarization();
    if (x.size() != system.size()) {
        throw std::invalid_argument("polarization needs one entry per spin");
    }
    for (double v : x) {
        if (!(v > 0.0 && v < 0.01)) {
            throw std::invalid_argument("polarization must lie in (0, 0.01)");
        }
    }
    if (noise_enabled) {
        relaxation().validate();
    }
}

DensityMatrix thermal_state(const SpinSystem& system, std::span<const double> polarization) {
    if (polarization.size() != system.size()) {
        throw std::invalid_argument("thermal_state: one polarization per spin");
    }
    for (double v : polarization) {
        if (!(v >= 0.0 && v < 0.01)) {
            throw std::invalid_argument("thermal_state: polarization must lie in [0, 0.01)");
        }
    }
    const std::size_t n = system.size();
    const std::size_t dim = system.dim();
    Eigen::VectorXd pops(static_cast<Eigen::Index>(dim));
    for (std::size_t idx = 0; idx < dim; ++idx) {
        double e = 1.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double m = ((idx >> (n - 1 - k)) & 1U) ? -0.5 : 0.5;
            e += m * polarization[k];
        }
        pops(static_cast<Eigen::Index>(idx)) = e;
    }
    pops /= pops.sum();
    return {pops.cast<Complex>().asDiagonal().toDenseMatrix(), DensityMatrix::Form::full};
}

DensityMatrix permute_populations(const DensityMatrix& rho, const PopulationCycle& cycle) {
    if (rho.dim() != 4) {
        throw std::invalid_argument("permute_populations: two-spin states only");
    }
    if (cycle[0] != 0) {
        throw std::invalid_argument("permute_populations: the cycle must fix |00>");
    }
    std::array<bool, 4> seen{};
    for (std::size_t to : cycle) {
        if (to >= 4 || seen[to]) {
            throw std::invalid_argument("permute_populations: not a permutation");
        }
        seen[to] = true;
    }
    const Matrix& m = rho.matrix();
    const Matrix off = m - Matrix(m.diagonal().asDiagonal());
    if (off.cwiseAbs().maxCoeff() > 1e-10) {
        throw std::invalid_argument("permute_populations: state has coherences");
    }
    Matrix out = Matrix::Zero(4, 4);
    for (std::size_t i = 0; i < 4; ++i) {
        out(static_cast<Eigen::Index>(cycle[i]), static_cast<Eigen::Index>(cycle[i])) =
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
    }
    return {std::move(out), rho.form()};
}

Matrix TemporalAverage::normalized() const {
    if (delta == 0.0) {
        throw std::domain_error("temporal average has no pure-state component");
    }
    return (effective - alpha * Matrix::Identity(effective.rows(), effective.cols())) / delta;
}

TemporalAverage temporal_average(std::span<const DensityMatrix, 3> rhos) {
    TemporalAverage out;
    out.effective = rhos[0].matrix() + rhos[1].matrix() + rhos[2].matrix();
    const Matrix& s = out.effective;
    const Matrix off = s - Matrix(s.diagonal().asDiagonal());
    Eigen::VectorXd lambda;
    if (off.cwiseAbs().maxCoeff() == 0.0) {
        lambda = s.diagonal().real();
        std::sort(lambda.begin(), lambda.end());
    } else {
        Eigen::SelfAdjointEigenSolver<Matrix> es(s, Eigen::EigenvaluesOnly);
        lambda = es.eigenvalues();
    }
    const Eigen::Index n = lambda.size();
    const Eigen::Index last = n - 1;
    // The singleton sits at whichever end leaves the tighter degenerate cluster.
    const double spread_top = lambda(last - 1) - lambda(0);
    const double spread_bottom = lambda(last) - lambda(1);
    if (spread_top <= spread_bottom) {
        out.alpha = lambda.head(last).mean();
        out.delta = lambda(last) - out.alpha;
    } else {
        out.alpha = lambda.tail(last).mean();
        out.delta = lambda(0) - out.alpha;
    }
    return out;
}

PulseProgram dj_program(Oracle oracle) {
    static const PulseProgram e1 = parse("Y(A) Ybar(B)");
    static const PulseProgram e3 = parse("Ybar(A) Y(B)");
    return concat(concat(e1, oracle_program(oracle_name(oracle))), e3);
}

DensityMatrix run_program(const DensityMatrix& input, const PulseProgram& program,
                          const SpinSystem& system, const std::optional<RelaxationParams>& relaxation,
                          double pulse_width_s, double flip_scale) {
    const double tau = resolve_tau(program, system);
    const OperatorMatrix h = hamiltonian(system);
    if (relaxation) {
        relaxation->validate();
    }
    DensityMatrix rho = input;
    for (const auto& group : program.groups) {
        for (const auto& ev : group) {
            double t = 0.0;
            if (const auto* r = std::get_if<Rotation>(&ev)) {
                rho = evolve(rho, rf_rotation(system, r->spin, phase_of(r->axis), r->flip * flip_scale));
                t = pulse_width_s;
            } else {
                t = std::get<Delay>(ev).seconds(tau);
                rho = evolve(rho, free_propagator(h, t));
            }
            // The channel is phase covariant, so it commutes with the
            // z-diagonal free evolution and can be applied after it.
            if (relaxation && t > 0.0) {
                rho = relax(rho, t, *relaxation);
            }
        }
    }
    return rho;
}

std::vector<DensityMatrix> prepare_inputs(const ExperimentConfig& config) {
    config.validate();
    switch (config.input_mode) {
        case InputMode::pure:
            return {DensityMatrix::basis_state(config.system.dim(), config.pure_index)};
        case InputMode::thermal:
            return {thermal_state(config.system, config.resolved_polarization())};
        case InputMode::temporal_average: {
            const DensityMatrix t = thermal_state(config.system, config.resolved_polarization());
            return {t, permute_populations(t, kForwardCycle), permute_populations(t, kBackwardCycle)};
        }
    }
    return {};
}

namespace {

std::vector<DensityMatrix> run_all(const ExperimentConfig& config, const RunOptions& options) {
    PulseProgram program = dj_program(config.oracle);
    program.tau_s = config.tau_s;
    std::optional<RelaxationParams> relaxation;
    if (config.noise_enabled || options.force_relaxation) {
        relaxation = config.relaxation();
    }
    std::vector<DensityMatrix> outputs;
    for (const auto& input : prepare_inputs(config)) {
        outputs.push_back(run_program(input, program, config.system, relaxation,
                                      config.pulse_width_s, options.flip_scale));
    }
    return outputs;
}

}  // namespace

DensityMatrix run_experiment(const ExperimentConfig& config, const RunOptions& options) {
    const auto outputs = run_all(config, options);
    if (outputs.size() == 1) {
        return outputs.front();
    }
    Matrix mean = Matrix::Zero(outputs.front().matrix().rows(), outputs.front().matrix().cols());
    for (const auto& rho : outputs) {
        mean += rho.matrix();
    }
    mean /= static_cast<double>(outputs.size());
    return {std::move(mean), DensityMatrix::Form::full};
}

TemporalAverage run_temporal_average(const ExperimentConfig& config, const RunOptions& options) {
    ExperimentConfig c = config;
    c.input_mode = InputMode::temporal_average;
    const auto outputs = run_all(c, options);
    return temporal_average(std::span<const DensityMatrix, 3>(outputs.data(), 3));
}

double work_zero_polarization(const DensityMatrix& final_state) {
    if (final_state.dim() != 4) {
        throw std::invalid_argument("classification needs a two-spin state");
    }
    const Eigen::VectorXd pops = final_state.deviation().populations();
    // I_zA x |0><0|_B = diag(1/2, 0, -1/2, 0)
    return 0.5 * (pops(0) - pops(2));
}

Verdict classify(const DensityMatrix& final_state, int input_bit) {
    if (input_bit != 0 && input_bit != 1) {
        throw std::invalid_argument("input bit must be 0 or 1");
    }
    const double signal = work_zero_polarization(final_state);
    const double scale = final_state.deviation().matrix().norm();
    if (!(std::abs(signal) >= 0.05 * scale) || scale == 0.0) {
        throw InconclusiveError("readout polarization below threshold");
    }
    const double oriented = input_bit == 0 ? signal : -signal;
    return oriented > 0.0 ? Verdict::constant : Verdict::balanced;
}

double pure_fraction_scaling(int n_qubits, double z) {
    if (n_qubits < 1) {
        throw std::invalid_argument("need at least one qubit");
    }
    if (!(z >= 1.0)) {
        throw std::invalid_argument("partition base must be >= 1");
    }
    return n_qubits * std::pow(z, -n_qubits);
}

}  // namespace spinsim
