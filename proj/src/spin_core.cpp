#include "spinsim/spin_core.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace spinsim {

namespace {

constexpr double kRoleTol = 1e-12;
constexpr double kPositivityTol = 1e-10;

bool is_hermitian(const Matrix& m, double tol) {
    return (m - m.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

bool is_diagonal(const Matrix& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (i != j && m(i, j) != Complex{}) {
                return false;
            }
        }
    }
    return true;
}

void require_same_dim(std::size_t a, std::size_t b, const char* what) {
    if (a != b) {
        std::ostringstream msg;
        msg << what << ": dimension mismatch (" << a << " vs " << b << ")";
        throw std::invalid_argument(msg.str());
    }
}

Eigen::Matrix2cd single_spin(Axis3 axis) {
    Eigen::Matrix2cd m;
    switch (axis) {
        case Axis3::x:
            m << 0.0, 1.0, 1.0, 0.0;
            break;
        case Axis3::y:
            m << Complex{}, Complex{0.0, -1.0}, Complex{0.0, 1.0}, Complex{};
            break;
        case Axis3::z:
            m << 1.0, 0.0, 0.0, -1.0;
            break;
    }
    return m;
}

}  // namespace

SpinSystem::SpinSystem(std::vector<Spin> spins, Eigen::MatrixXd j_hz)
    : spins_(std::move(spins)), j_hz_(std::move(j_hz)) {
    if (spins_.empty()) {
        throw std::invalid_argument("spin system needs at least one spin");
    }
    if (spins_.size() > 12) {
        throw std::invalid_argument("spin system too large for dense simulation");
    }
    std::set<std::string> seen;
    for (const auto& s : spins_) {
        if (s.label.empty()) {
            throw std::invalid_argument("spin label must not be empty");
        }
        if (!seen.insert(s.label).second) {
            throw std::invalid_argument("duplicate spin label '" + s.label + "'");
        }
        if (!(s.t1_s > 0.0) || !(s.t2_s > 0.0)) {
            throw std::invalid_argument("spin '" + s.label + "': t1 and t2 must be > 0");
        }
        if (s.t2_s > 2.0 * s.t1_s) {
            throw std::invalid_argument("spin '" + s.label + "': t2 must not exceed 2*t1");
        }
        if (!std::isfinite(s.offset_hz)) {
            throw std::invalid_argument("spin '" + s.label + "': offset must be finite");
        }
    }
    const auto n = static_cast<Eigen::Index>(spins_.size());
    if (j_hz_.size() == 0) {
        j_hz_ = Eigen::MatrixXd::Zero(n, n);
    }
    if (j_hz_.rows() != n || j_hz_.cols() != n) {
        throw std::invalid_argument("j coupling matrix must be n_spins x n_spins");
    }
    for (Eigen::Index k = 0; k < n; ++k) {
        if (j_hz_(k, k) != 0.0) {
            throw std::invalid_argument("j coupling diagonal must be zero");
        }
        for (Eigen::Index l = 0; l < n; ++l) {
            if (j_hz_(k, l) != j_hz_(l, k) || !std::isfinite(j_hz_(k, l))) {
                throw std::invalid_argument("j coupling matrix must be symmetric and finite");
            }
        }
    }
}

SpinSystem SpinSystem::two_spin(Spin a, Spin b, double j_hz) {
    Eigen::MatrixXd j(2, 2);
    j << 0.0, j_hz, j_hz, 0.0;
    return SpinSystem({std::move(a), std::move(b)}, j);
}

SpinSystem SpinSystem::chloroform() {
    return two_spin({"A", 0.0, 19.0, 7.0}, {"B", 0.0, 25.0, 0.3}, 215.0);
}

std::size_t SpinSystem::index_of(std::string_view label) const {
    for (std::size_t k = 0; k < spins_.size(); ++k) {
        if (spins_[k].label == label) {
            return k;
        }
    }
    throw std::invalid_argument("unknown spin '" + std::string(label) + "'");
}

bool SpinSystem::has_spin(std::string_view label) const {
    return std::any_of(spins_.begin(), spins_.end(),
                       [&](const Spin& s) { return s.label == label; });
}

std::vector<std::string> SpinSystem::labels() const {
    std::vector<std::string> out;
    out.reserve(spins_.size());
    for (const auto& s : spins_) {
        out.push_back(s.label);
    }
    return out;
}

OperatorMatrix::OperatorMatrix(Matrix entries, Role role) : m_(std::move(entries)), role_(role) {
    if (m_.rows() != m_.cols() || m_.rows() == 0) {
        throw std::invalid_argument("operator matrix must be square and non-empty");
    }
    switch (role_) {
        case Role::hermitian:
            if (!is_hermitian(m_, kRoleTol)) {
                throw std::invalid_argument("operator tagged hermitian is not hermitian");
            }
            break;
        case Role::unitary: {
            const Matrix defect = m_ * m_.adjoint() - Matrix::Identity(m_.rows(), m_.cols());
            if (defect.norm() > kRoleTol) {
                throw std::invalid_argument("operator tagged unitary is not unitary");
            }
            break;
        }
        case Role::general:
            break;
    }
}

OperatorMatrix OperatorMatrix::identity(std::size_t dim) {
    const auto d = static_cast<Eigen::Index>(dim);
    return {Matrix::Identity(d, d), Role::unitary};
}

OperatorMatrix OperatorMatrix::adjoint() const {
    return {m_.adjoint(), role_};
}

OperatorMatrix operator*(const OperatorMatrix& a, const OperatorMatrix& b) {
    require_same_dim(a.dim(), b.dim(), "operator product");
    using Role = OperatorMatrix::Role;
    const bool unitary = a.role() == Role::unitary && b.role() == Role::unitary;
    return {a.matrix() * b.matrix(), unitary ? Role::unitary : Role::general};
}

DensityMatrix::DensityMatrix(Matrix entries, Form form) : m_(std::move(entries)), form_(form) {
    if (m_.rows() != m_.cols() || m_.rows() == 0) {
        throw std::invalid_argument("density matrix must be square and non-empty");
    }
    if (!is_hermitian(m_, kRoleTol)) {
        throw std::invalid_argument("density matrix is not hermitian");
    }
    const Complex tr = m_.trace();
    if (form_ == Form::full) {
        if (std::abs(tr - Complex{1.0}) > kRoleTol) {
            throw std::invalid_argument("full density matrix must have unit trace");
        }
        Eigen::SelfAdjointEigenSolver<Matrix> es(m_, Eigen::EigenvaluesOnly);
        if (es.eigenvalues().minCoeff() < -kPositivityTol) {
            throw std::invalid_argument("full density matrix has a negative eigenvalue");
        }
    } else if (std::abs(tr) > kRoleTol) {
        throw std::invalid_argument("deviation density matrix must be traceless");
    }
}

DensityMatrix DensityMatrix::basis_state(std::size_t dim, std::size_t index) {
    if (index >= dim) {
        throw std::invalid_argument("basis index out of range");
    }
    const auto d = static_cast<Eigen::Index>(dim);
    Matrix m = Matrix::Zero(d, d);
    m(static_cast<Eigen::Index>(index), static_cast<Eigen::Index>(index)) = 1.0;
    return {std::move(m), Form::full};
}

DensityMatrix DensityMatrix::maximally_mixed(std::size_t dim) {
    const auto d = static_cast<Eigen::Index>(dim);
    return {Matrix::Identity(d, d) / static_cast<double>(dim), Form::full};
}

DensityMatrix DensityMatrix::deviation() const {
    const auto d = m_.rows();
    Matrix dev = m_ - Matrix::Identity(d, d) * (m_.trace() / static_cast<double>(d));
    dev.diagonal() -= Matrix::Constant(d, 1, dev.trace() / static_cast<double>(d));
    return {std::move(dev), Form::deviation};
}

Matrix embed(const Eigen::Matrix2cd& op, std::size_t k, std::size_t n_spins) {
    if (k >= n_spins) {
        throw std::invalid_argument("spin index out of range");
    }
    const std::size_t dim = std::size_t{1} << n_spins;
    const std::size_t shift = n_spins - 1 - k;
    const auto d = static_cast<Eigen::Index>(dim);
    Matrix out = Matrix::Zero(d, d);
    for (std::size_t row = 0; row < dim; ++row) {
        const std::size_t rbit = (row >> shift) & 1U;
        for (std::size_t cbit = 0; cbit < 2; ++cbit) {
            const Complex v = op(static_cast<Eigen::Index>(rbit), static_cast<Eigen::Index>(cbit));
            if (v == Complex{}) {
                continue;
            }
            const std::size_t col = (row & ~(std::size_t{1} << shift)) | (cbit << shift);
            out(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) = v;
        }
    }
    return out;
}

OperatorMatrix pauli(const SpinSystem& system, std::string_view spin, Axis3 axis) {
    const std::size_t k = system.index_of(spin);
    return {embed(single_spin(axis), k, system.size()), OperatorMatrix::Role::hermitian};
}

OperatorMatrix angular_momentum(const SpinSystem& system, std::string_view spin, Axis3 axis) {
    const std::size_t k = system.index_of(spin);
    return {embed(single_spin(axis) * 0.5, k, system.size()), OperatorMatrix::Role::hermitian};
}

OperatorMatrix hamiltonian(const SpinSystem& system) {
    const std::size_t n = system.size();
    const std::size_t dim = system.dim();
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dim));
    for (std::size_t idx = 0; idx < dim; ++idx) {
        auto m = [&](std::size_t k) { return ((idx >> (n - 1 - k)) & 1U) ? -0.5 : 0.5; };
        double e = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            e += -kTwoPi * system.spin(k).offset_hz * m(k);
            for (std::size_t l = k + 1; l < n; ++l) {
                e += kTwoPi * system.j_hz(k, l) * m(k) * m(l);
            }
        }
        diag(static_cast<Eigen::Index>(idx)) = e;
    }
    return {diag.cast<Complex>().asDiagonal().toDenseMatrix(), OperatorMatrix::Role::hermitian};
}

OperatorMatrix free_propagator(const OperatorMatrix& h, double duration_s) {
    if (!(duration_s >= 0.0)) {
        throw std::invalid_argument("free_propagator: duration must be >= 0");
    }
    if (h.role() != OperatorMatrix::Role::hermitian) {
        throw std::invalid_argument("free_propagator: hamiltonian must be hermitian");
    }
    const Matrix& m = h.matrix();
    const Eigen::Index d = m.rows();
    if (is_diagonal(m)) {
        Matrix u = Matrix::Zero(d, d);
        for (Eigen::Index i = 0; i < d; ++i) {
            const double phase = -m(i, i).real() * duration_s;
            u(i, i) = Complex{std::cos(phase), std::sin(phase)};
        }
        return {std::move(u), OperatorMatrix::Role::unitary};
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(m);
    Eigen::VectorXcd phases(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        const double phase = -es.eigenvalues()(i) * duration_s;
        phases(i) = Complex{std::cos(phase), std::sin(phase)};
    }
    Matrix u = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
    return {std::move(u), OperatorMatrix::Role::unitary};
}

OperatorMatrix rf_rotation(const SpinSystem& system, std::size_t spin_index, double phase,
                           double flip) {
    const double c = std::cos(flip / 2.0);
    const double s = std::sin(flip / 2.0);
    const Complex minus_i{0.0, -1.0};
    // cos(f/2) I - i sin(f/2) (cos(phi) sx + sin(phi) sy)
    Eigen::Matrix2cd r;
    r << c, minus_i * s * Complex{std::cos(phase), -std::sin(phase)},
        minus_i * s * Complex{std::cos(phase), std::sin(phase)}, c;
    return {embed(r, spin_index, system.size()), OperatorMatrix::Role::unitary};
}

OperatorMatrix rf_rotation(const SpinSystem& system, std::string_view spin, double phase,
                           double flip) {
    return rf_rotation(system, system.index_of(spin), phase, flip);
}

DensityMatrix evolve(const DensityMatrix& rho, const OperatorMatrix& u) {
    require_same_dim(rho.dim(), u.dim(), "evolve");
    Matrix out = u.matrix() * rho.matrix() * u.matrix().adjoint();
    out = (out + out.adjoint()).eval() * 0.5;
    return {std::move(out), rho.form()};
}

Complex expectation(const DensityMatrix& rho, const OperatorMatrix& obs) {
    require_same_dim(rho.dim(), obs.dim(), "expectation");
    return (rho.matrix() * obs.matrix()).trace();
}

double phase_aligned_distance(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw std::invalid_argument("phase_aligned_distance: dimension mismatch");
    }
    const Matrix overlap = b.adjoint() * a;
    Eigen::Index bi = 0;
    Eigen::Index bj = 0;
    overlap.cwiseAbs().maxCoeff(&bi, &bj);
    const Complex peak = overlap(bi, bj);
    const Complex phase = std::abs(peak) > 0.0 ? peak / std::abs(peak) : Complex{1.0};
    return (a - phase * b).norm();
}

}  // namespace spinsim
