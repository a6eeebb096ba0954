#include "spinsim/tomography.hpp"

#include <cmath>

#include <Eigen/QR>
#include <unsupported/Eigen/KroneckerProduct>

namespace spinsim {

std::string_view readout_pulse_name(ReadoutPulse p) {
    switch (p) {
        case ReadoutPulse::none:
            return "none";
        case ReadoutPulse::x:
            return "X";
        case ReadoutPulse::y:
            return "Y";
    }
    return "?";
}

std::string ReadoutPair::label() const {
    return std::string(readout_pulse_name(a)) + "/" + std::string(readout_pulse_name(b));
}

const std::array<ReadoutPair, 9>& canonical_readout_pairs() {
    static const std::array<ReadoutPair, 9> pairs = [] {
        constexpr std::array<ReadoutPulse, 3> kPulses = {ReadoutPulse::none, ReadoutPulse::x,
                                                        ReadoutPulse::y};
        std::array<ReadoutPair, 9> out{};
        std::size_t i = 0;
        for (ReadoutPulse a : kPulses) {
            for (ReadoutPulse b : kPulses) {
                out[i++] = {a, b};
            }
        }
        return out;
    }();
    return pairs;
}

namespace {

void apply_pulse(Matrix& m, const SpinSystem& system, std::size_t spin, ReadoutPulse p,
                 double flip_scale) {
    if (p == ReadoutPulse::none) {
        return;
    }
    const double phase = p == ReadoutPulse::x ? 0.0 : kPi / 2.0;
    const Matrix u = rf_rotation(system, spin, phase, flip_scale * kPi / 2.0).matrix();
    m = u * m * u.adjoint();
}

Matrix apply_readout_matrix(Matrix m, const SpinSystem& system, const ReadoutPair& pair,
                            double flip_scale) {
    apply_pulse(m, system, 0, pair.a, flip_scale);
    apply_pulse(m, system, 1, pair.b, flip_scale);
    return m;
}

void require_two_spins(const SpinSystem& system) {
    if (system.size() != 2) {
        throw std::invalid_argument("tomography is defined for two spins");
    }
}

TomographyExperiment measure(const Matrix& rho, const ReadoutPair& pair, const SpinSystem& system,
                             const TomographySettings& settings, std::mt19937_64* rng) {
    TomographyExperiment e;
    e.pair = pair;
    for (std::size_t k = 0; k < 2; ++k) {
        const std::string label = system.spin(k).label;
        Fid fid = acquire_signal(rho, system, label, settings.acquisition);
        if (settings.noise && rng != nullptr) {
            const auto& noise = *settings.noise;
            if (noise.snr.size() != 2 || !(noise.snr[k] > 0.0)) {
                throw std::invalid_argument("receiver noise needs a positive SNR per spin");
            }
            const double sigma = reference_peak_height(system, label, settings.acquisition) /
                                 noise.snr[k] * noise.signal_scale;
            add_receiver_noise(fid, sigma, *rng);
        }
        e.lines[k] = line_integrals(spectrum(fid, settings.acquisition.line_broadening_hz),
                                    system.j_hz(0, 1), settings.window_bins);
    }
    return e;
}

}  // namespace

DensityMatrix apply_readout(const DensityMatrix& rho, const SpinSystem& system, const ReadoutPair& pair,
                            double flip_scale) {
    require_two_spins(system);
    Matrix m = apply_readout_matrix(rho.matrix(), system, pair, flip_scale);
    m = (m + m.adjoint()).eval() * 0.5;
    return {std::move(m), rho.form()};
}

Preparation ideal_readout(DensityMatrix rho, SpinSystem system) {
    return [rho = std::move(rho), system = std::move(system)](const ReadoutPair& pair) {
        return apply_readout(rho, system, pair);
    };
}

TomographyData acquire_tomography(const Preparation& prep, const SpinSystem& system,
                                  const TomographySettings& settings) {
    require_two_spins(system);
    std::optional<std::mt19937_64> rng;
    if (settings.noise) {
        rng.emplace(settings.noise->seed);
    }
    TomographyData data;
    for (const auto& pair : canonical_readout_pairs()) {
        data.push_back(measure(prep(pair).matrix(), pair, system, settings, rng ? &*rng : nullptr));
    }
    return data;
}

const std::vector<Matrix>& tomography_basis() {
    static const std::vector<Matrix> basis = [] {
        std::array<Eigen::Matrix2cd, 4> p;
        p[0] << 0.0, 1.0, 1.0, 0.0;
        p[1] << 0.0, Complex(0.0, -1.0), Complex(0.0, 1.0), 0.0;
        p[2] << 1.0, 0.0, 0.0, -1.0;
        p[3] = Eigen::Matrix2cd::Identity();
        std::vector<Matrix> out;
        for (std::size_t a = 0; a < 4; ++a) {
            for (std::size_t b = 0; b < 4; ++b) {
                if (a == 3 && b == 3) {
                    continue;
                }
                out.emplace_back(Matrix(Eigen::kroneckerProduct(p[a], p[b])) * 0.5);
            }
        }
        return out;
    }();
    return basis;
}

Eigen::VectorXd measurement_vector(const TomographyData& data) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(data.size() * 8));
    Eigen::Index i = 0;
    for (const auto& e : data) {
        for (const auto& l : e.lines) {
            v(i++) = l.low.real();
            v(i++) = l.low.imag();
            v(i++) = l.high.real();
            v(i++) = l.high.imag();
        }
    }
    return v;
}

Eigen::MatrixXd response_matrix(const SpinSystem& system, const TomographySettings& settings) {
    require_two_spins(system);
    TomographySettings clean = settings;
    clean.noise.reset();
    const auto& basis = tomography_basis();
    Eigen::MatrixXd r(72, static_cast<Eigen::Index>(basis.size()));
    for (std::size_t c = 0; c < basis.size(); ++c) {
        TomographyData data;
        for (const auto& pair : canonical_readout_pairs()) {
            data.push_back(measure(apply_readout_matrix(basis[c], system, pair, 1.0), pair, system,
                                   clean, nullptr));
        }
        r.col(static_cast<Eigen::Index>(c)) = measurement_vector(data);
    }
    return r;
}

Matrix reconstruct(const TomographyData& data, const Eigen::MatrixXd& response) {
    const Eigen::VectorXd m = measurement_vector(data);
    if (m.size() != response.rows()) {
        throw std::invalid_argument("reconstruct: data do not match the response matrix");
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(response);
    qr.setThreshold(1e-10);
    if (qr.rank() != response.cols()) {
        throw std::runtime_error("reconstruct: readouts do not determine all " +
                                 std::to_string(response.cols()) + " parameters (rank " +
                                 std::to_string(qr.rank()) + ")");
    }
    const Eigen::VectorXd coeff = qr.solve(m);
    const auto& basis = tomography_basis();
    Matrix out = Matrix::Zero(4, 4);
    for (std::size_t c = 0; c < basis.size(); ++c) {
        out += coeff(static_cast<Eigen::Index>(c)) * basis[c];
    }
    return (out + out.adjoint()).eval() * 0.5;
}

Matrix TomographyResult::normalized_experiment() const {
    return deviation + Matrix::Identity(4, 4) * 0.25;
}

Matrix TomographyResult::normalized_theory() const {
    return theory + Matrix::Identity(4, 4) * 0.25;
}

double relative_error(const Matrix& a, const Matrix& b) {
    const double nb = b.norm();
    if (nb == 0.0) {
        throw std::invalid_argument("relative_error: reference has zero norm");
    }
    return (a - b).norm() / nb;
}

TomographyResult evaluate_tomography(const Matrix& reconstructed, const DensityMatrix& theory,
                                     TomographyData data) {
    if (reconstructed.rows() != 4 || theory.dim() != 4) {
        throw std::invalid_argument("tomography: two-spin states only");
    }
    TomographyResult r;
    r.data = std::move(data);
    const Matrix dev = theory.deviation().matrix();
    Eigen::Index k = 0;
    dev.diagonal().real().maxCoeff(&k);
    if (!(dev(k, k).real() > 0.0)) {
        throw std::invalid_argument("tomography: theory state has no deviation");
    }
    r.target_index = static_cast<std::size_t>(k);
    r.theory = dev * (0.75 / dev(k, k).real());
    const double n_exp = reconstructed.norm();
    r.deviation = n_exp > 0.0 ? Matrix(reconstructed * (r.theory.norm() / n_exp)) : reconstructed;

    const Matrix ne = r.normalized_experiment();
    r.epsilon = relative_error(ne, r.normalized_theory());
    r.pure_population = ne(k, k).real();
    r.max_other_element = 0.0;
    for (Eigen::Index i = 0; i < 4; ++i) {
        for (Eigen::Index j = 0; j < 4; ++j) {
            if (i != k || j != k) {
                r.max_other_element = std::max(r.max_other_element, std::abs(ne(i, j)));
            }
        }
    }
    return r;
}

TomographyResult tomography(const Preparation& prep, const SpinSystem& system,
                            const DensityMatrix& theory, const TomographySettings& settings) {
    TomographyData data = acquire_tomography(prep, system, settings);
    const Matrix rec = reconstruct(data, response_matrix(system, settings));
    return evaluate_tomography(rec, theory, std::move(data));
}

}  // namespace spinsim
