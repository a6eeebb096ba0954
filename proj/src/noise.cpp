#include "spinsim/noise.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace spinsim {

void RfInhomogeneityModel::validate() const {
    if (members.empty()) {
        throw std::invalid_argument("RF model: empty scale distribution");
    }
    double total = 0.0;
    for (const auto& m : members) {
        if (!(m.scale > 0.0) || !std::isfinite(m.scale)) {
            throw std::invalid_argument("RF model: scale factors must be > 0");
        }
        if (!(m.weight >= 0.0)) {
            throw std::invalid_argument("RF model: weights must be >= 0");
        }
        total += m.weight;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        throw std::invalid_argument("RF model: weights sum to " + std::to_string(total) + ", not 1");
    }
    if (!(flip_calibration > 0.0)) {
        throw std::invalid_argument("RF model: flip calibration must be > 0");
    }
}

RfInhomogeneityModel lorentzian_model(double gamma, std::size_t n, double span, double flip_calibration) {
    if (!(gamma > 0.0) || n == 0 || !(span > 0.0) || !(gamma * span < 1.0)) {
        throw std::invalid_argument("lorentzian_model: need gamma > 0, n >= 1, 0 < gamma*span < 1");
    }
    RfInhomogeneityModel model;
    model.flip_calibration = flip_calibration;
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double u = n == 1 ? 0.0 : -1.0 + 2.0 * static_cast<double>(i) / static_cast<double>(n - 1);
        const double s = 1.0 + gamma * span * u;
        const double x = (s - 1.0) / gamma;
        const double w = 1.0 / (1.0 + x * x);
        model.members.push_back({s, w});
        total += w;
    }
    for (auto& m : model.members) {
        m.weight /= total;
    }
    return model;
}

namespace {

std::vector<RfMember> ascending(const RfInhomogeneityModel& model) {
    model.validate();
    std::vector<RfMember> members = model.members;
    std::stable_sort(members.begin(), members.end(),
                     [](const RfMember& a, const RfMember& b) { return a.scale < b.scale; });
    return members;
}

}  // namespace

DensityMatrix ensemble_run(const ExperimentConfig& config, const RfInhomogeneityModel& model) {
    const auto members = ascending(model);
    Matrix sum = Matrix::Zero(static_cast<Eigen::Index>(config.system.dim()),
                              static_cast<Eigen::Index>(config.system.dim()));
    for (const auto& m : members) {
        const RunOptions options{m.scale * model.flip_calibration, true};
        sum += m.weight * run_experiment(config, options).matrix();
    }
    return {std::move(sum), DensityMatrix::Form::full};
}

Preparation ensemble_preparation(const ExperimentConfig& config, const RfInhomogeneityModel& model) {
    struct Run {
        double flip_scale;
        double weight;
        DensityMatrix state;
    };
    std::vector<Run> runs;
    for (const auto& m : ascending(model)) {
        const double scale = m.scale * model.flip_calibration;
        runs.push_back({scale, m.weight, run_experiment(config, {scale, true})});
    }
    return [runs = std::move(runs), system = config.system](const ReadoutPair& pair) {
        Matrix sum = Matrix::Zero(static_cast<Eigen::Index>(system.dim()),
                                  static_cast<Eigen::Index>(system.dim()));
        for (const auto& r : runs) {
            sum += r.weight * apply_readout(r.state, system, pair, r.flip_scale).matrix();
        }
        return DensityMatrix(std::move(sum), DensityMatrix::Form::full);
    };
}

std::vector<double> nutation_envelope(const RfInhomogeneityModel& model, double pulse_power,
                                      std::span<const double> widths_s) {
    const auto members = ascending(model);
    if (!(pulse_power > 0.0)) {
        throw std::invalid_argument("pulse power must be > 0");
    }
    std::vector<double> out;
    out.reserve(widths_s.size());
    for (double t : widths_s) {
        Complex acc(0.0, 0.0);
        for (const auto& m : members) {
            acc += m.weight * std::polar(1.0, m.scale * model.flip_calibration * pulse_power * t);
        }
        out.push_back(std::abs(acc));
    }
    return out;
}

double fit_envelope_time_constant(const RfInhomogeneityModel& model, double pulse_power,
                                  double max_width_s, std::size_t n_points) {
    if (!(max_width_s > 0.0) || n_points < 3) {
        throw std::invalid_argument("envelope fit needs max width > 0 and at least 3 points");
    }
    std::vector<double> widths(n_points);
    for (std::size_t i = 0; i < n_points; ++i) {
        widths[i] = max_width_s * static_cast<double>(i) / static_cast<double>(n_points - 1);
    }
    const auto env = nutation_envelope(model, pulse_power, widths);
    try {
        return fit_exponential_decay(widths, env).time_constant;
    } catch (const FitError& e) {
        throw FitError(std::string("nutation envelope: ") + e.what() + " (" +
                       std::to_string(model.members.size()) + " ensemble members)");
    }
}

RfInhomogeneityModel calibrate_inhomogeneity(double target_s, double pulse_power, double flip_calibration,
                                             std::size_t n, double span) {
    if (!(target_s > 0.0)) {
        throw std::invalid_argument("calibration target must be > 0");
    }
    const auto tc = [&](double gamma) {
        return fit_envelope_time_constant(lorentzian_model(gamma, n, span, flip_calibration), pulse_power,
                                          2.0 * target_s);
    };
    // Wider distributions dephase faster: tc decreases with gamma.
    double lo = 1e-5;
    double hi = 0.999 / span;
    if (tc(lo) < target_s || tc(hi) > target_s) {
        throw FitError("calibration: target " + std::to_string(target_s) +
                       " s is outside the reachable envelope range");
    }
    for (int iter = 0; iter < 200 && (hi - lo) > 1e-15; ++iter) {
        const double mid = 0.5 * (lo + hi);
        (tc(mid) > target_s ? lo : hi) = mid;
    }
    RfInhomogeneityModel model = lorentzian_model(0.5 * (lo + hi), n, span, flip_calibration);
    model.envelope_time_constant_s = fit_envelope_time_constant(model, pulse_power, 2.0 * target_s);
    if (std::abs(model.envelope_time_constant_s - target_s) > 0.1 * target_s) {
        throw FitError("calibration: fitted envelope " + std::to_string(model.envelope_time_constant_s) +
                       " s misses the target by more than 10%");
    }
    return model;
}

namespace {

RelaxationParams params_for(const SpinSystem& system, std::span<const double> polarization) {
    const std::vector<double> pol = polarization.empty()
                                        ? default_polarization(system, 298.15)
                                        : std::vector<double>(polarization.begin(), polarization.end());
    RelaxationParams p = RelaxationParams::from_system(system, pol);
    p.validate();
    return p;
}

}  // namespace

InversionRecoveryResult inversion_recovery(const SpinSystem& system, std::string_view spin,
                                           std::span<const double> delays_s,
                                           std::span<const double> polarization) {
    if (delays_s.size() < 4) {
        throw std::invalid_argument("inversion recovery needs at least 4 delays");
    }
    const RelaxationParams params = params_for(system, polarization);
    const OperatorMatrix iz = angular_momentum(system, spin, Axis3::z);
    const DensityMatrix eq = equilibrium_state(params);
    const DensityMatrix inverted = evolve(eq, rf_rotation(system, spin, 0.0, kPi));

    InversionRecoveryResult r;
    r.delays_s.assign(delays_s.begin(), delays_s.end());
    for (double t : delays_s) {
        if (!(t >= 0.0)) {
            throw std::invalid_argument("inversion recovery delays must be >= 0");
        }
        r.signal.push_back(expectation(relax(inverted, t, params), iz).real());
    }
    const InversionRecoveryFit fit = fit_inversion_recovery(r.delays_s, r.signal);
    r.t1_s = fit.t1;
    r.m_eq = fit.m_eq;
    return r;
}

CpmgResult cpmg(const SpinSystem& system, std::string_view spin, double echo_spacing_s,
                std::span<const int> echo_counts, std::span<const double> polarization) {
    if (!(echo_spacing_s > 0.0)) {
        throw std::invalid_argument("echo spacing must be > 0");
    }
    if (echo_counts.empty()) {
        throw std::invalid_argument("cpmg needs at least one echo count");
    }
    int max_count = 0;
    for (int n : echo_counts) {
        if (n < 0) {
            throw std::invalid_argument("echo counts must be >= 0");
        }
        max_count = std::max(max_count, n);
    }
    const RelaxationParams params = params_for(system, polarization);
    const OperatorMatrix ix = angular_momentum(system, spin, Axis3::x);
    const OperatorMatrix iy = angular_momentum(system, spin, Axis3::y);
    const OperatorMatrix half_delay = free_propagator(hamiltonian(system), echo_spacing_s / 2.0);
    const OperatorMatrix refocus = rf_rotation(system, spin, kPi / 2.0, kPi);

    std::vector<double> magnitude_at(static_cast<std::size_t>(max_count) + 1);
    DensityMatrix rho = evolve(equilibrium_state(params), rf_rotation(system, spin, 0.0, kPi / 2.0));
    for (int n = 0;; ++n) {
        magnitude_at[static_cast<std::size_t>(n)] =
            std::abs(expectation(rho, ix) + Complex(0.0, 1.0) * expectation(rho, iy));
        if (n == max_count) {
            break;
        }
        rho = relax(evolve(rho, half_delay), echo_spacing_s / 2.0, params);
        rho = evolve(rho, refocus);
        rho = relax(evolve(rho, half_delay), echo_spacing_s / 2.0, params);
    }

    CpmgResult r;
    for (int n : echo_counts) {
        r.times_s.push_back(n * echo_spacing_s);
        r.magnitude.push_back(magnitude_at[static_cast<std::size_t>(n)]);
    }
    r.t2_s = fit_exponential_decay(r.times_s, r.magnitude).time_constant;
    return r;
}

}  // namespace spinsim
