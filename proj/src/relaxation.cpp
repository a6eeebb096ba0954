#include "spinsim/relaxation.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace spinsim {

RelaxationParams RelaxationParams::from_system(const SpinSystem& system,
                                               std::span<const double> polarization) {
    RelaxationParams p;
    for (const auto& s : system.spins()) {
        p.t1_s.push_back(s.t1_s);
        p.t2_s.push_back(s.t2_s);
    }
    p.equilibrium_polarization.assign(polarization.begin(), polarization.end());
    if (!p.equilibrium_polarization.empty() && p.equilibrium_polarization.size() != system.size()) {
        throw std::invalid_argument("polarization must have one entry per spin");
    }
    return p;
}

void RelaxationParams::validate() const {
    if (t1_s.empty() || t1_s.size() != t2_s.size()) {
        throw std::invalid_argument("relaxation: t1 and t2 need one entry per spin");
    }
    if (!equilibrium_polarization.empty() && equilibrium_polarization.size() != t1_s.size()) {
        throw std::invalid_argument("relaxation: polarization needs one entry per spin");
    }
    for (std::size_t k = 0; k < t1_s.size(); ++k) {
        if (!(t1_s[k] > 0.0) || !(t2_s[k] > 0.0) || t2_s[k] > 2.0 * t1_s[k]) {
            throw std::invalid_argument("relaxation: spin " + std::to_string(k) +
                                        " violates 0 < t2 <= 2 t1");
        }
    }
}

namespace {

double ground_probability(const RelaxationParams& params, std::size_t k) {
    const double x =
        params.equilibrium_polarization.empty() ? 0.0 : params.equilibrium_polarization[k];
    return 0.5 * (1.0 + 0.5 * x);
}

Matrix apply_kraus(const Matrix& rho, std::span<const Eigen::Matrix2cd> kraus, std::size_t k,
                   std::size_t n) {
    Matrix out = Matrix::Zero(rho.rows(), rho.cols());
    for (const auto& op : kraus) {
        const Matrix e = embed(op, k, n);
        out += e * rho * e.adjoint();
    }
    return out;
}

}  // namespace

Matrix relax_matrix(const Matrix& rho, double duration_s, const RelaxationParams& params) {
    if (!(duration_s >= 0.0)) {
        throw std::invalid_argument("relax: duration must be >= 0");
    }
    const std::size_t n = params.size();
    if (rho.rows() != (Eigen::Index{1} << n)) {
        throw std::invalid_argument("relax: state dimension does not match relaxation params");
    }
    if (duration_s == 0.0) {
        return rho;
    }
    Matrix out = rho;
    for (std::size_t k = 0; k < n; ++k) {
        const double keep = std::exp(-duration_s / params.t1_s[k]);  // 1 - gamma
        const double gamma = -std::expm1(-duration_s / params.t1_s[k]);
        const double p = ground_probability(params, k);
        const double sp = std::sqrt(p);
        const double sq = std::sqrt(1.0 - p);
        std::array<Eigen::Matrix2cd, 4> gad;
        gad[0] << sp, 0.0, 0.0, sp * std::sqrt(keep);
        gad[1] << 0.0, sp * std::sqrt(gamma), 0.0, 0.0;
        gad[2] << sq * std::sqrt(keep), 0.0, 0.0, sq;
        gad[3] << 0.0, 0.0, sq * std::sqrt(gamma), 0.0;
        out = apply_kraus(out, gad, k, n);

        // Amplitude damping already gives exp(-t/(2 t1)) on coherences.
        const double f = std::exp(-duration_s * (1.0 / params.t2_s[k] - 0.5 / params.t1_s[k]));
        std::array<Eigen::Matrix2cd, 2> dephase;
        dephase[0] = Eigen::Matrix2cd::Identity() * std::sqrt(0.5 * (1.0 + f));
        dephase[1] << std::sqrt(0.5 * (1.0 - f)), 0.0, 0.0, -std::sqrt(0.5 * (1.0 - f));
        out = apply_kraus(out, dephase, k, n);
    }
    return out;
}

DensityMatrix relax(const DensityMatrix& rho, double duration_s, const RelaxationParams& params) {
    params.validate();
    Matrix out = relax_matrix(rho.matrix(), duration_s, params);
    out = (out + out.adjoint()).eval() * 0.5;
    return {std::move(out), rho.form()};
}

DensityMatrix equilibrium_state(const RelaxationParams& params) {
    params.validate();
    const std::size_t n = params.size();
    const std::size_t dim = std::size_t{1} << n;
    Matrix m = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    double total = 0.0;
    for (std::size_t idx = 0; idx < dim; ++idx) {
        double prob = 1.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double p0 = ground_probability(params, k);
            prob *= ((idx >> (n - 1 - k)) & 1U) ? 1.0 - p0 : p0;
        }
        m(static_cast<Eigen::Index>(idx), static_cast<Eigen::Index>(idx)) = prob;
        total += prob;
    }
    m /= total;
    return {std::move(m), DensityMatrix::Form::full};
}

Matrix superoperator(const std::function<Matrix(const Matrix&)>& map, std::size_t dim) {
    const auto d = static_cast<Eigen::Index>(dim);
    Matrix s = Matrix::Zero(d * d, d * d);
    for (Eigen::Index col = 0; col < d; ++col) {
        for (Eigen::Index row = 0; row < d; ++row) {
            Matrix unit = Matrix::Zero(d, d);
            unit(row, col) = 1.0;
            const Matrix image = map(unit);
            s.col(col * d + row) = image.reshaped();
        }
    }
    return s;
}

}  // namespace spinsim
