// Dense complex linear algebra for small spin-1/2 systems.
//
// Basis convention: spin k of an N-spin system is tensor factor k, with spin 0
// the most significant bit of the computational-basis index. |0> is spin-up
// (I_z = +1/2). All frequencies stored in Hz; operators are in rad/s.
#pragma once

#include <complex>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace spinsim {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

enum class Axis3 { x, y, z };

/// Static description of a spin system in the rotating frame.
class SpinSystem {
public:
    struct Spin {
        std::string label;
        double offset_hz = 0.0;  // residual offset from the carrier
        double t1_s = 1.0;
        double t2_s = 1.0;
    };

    /// Throws std::invalid_argument if any invariant is violated: at least one
    /// spin, unique labels, t1, t2 > 0, t2 <= 2 t1, j_hz square, symmetric and
    /// zero on the diagonal.
    SpinSystem(std::vector<Spin> spins, Eigen::MatrixXd j_hz);

    /// Convenience for the common two-spin case.
    static SpinSystem two_spin(Spin a, Spin b, double j_hz);

    /// 13C-labelled chloroform: A = 1H, B = 13C, J = 215 Hz, on resonance.
    static SpinSystem chloroform();

    std::size_t size() const { return spins_.size(); }
    std::size_t dim() const { return std::size_t{1} << spins_.size(); }
    const std::vector<Spin>& spins() const { return spins_; }
    const Spin& spin(std::size_t k) const { return spins_.at(k); }
    const Eigen::MatrixXd& j_hz() const { return j_hz_; }
    double j_hz(std::size_t k, std::size_t l) const { return j_hz_(k, l); }

    /// Throws std::invalid_argument naming the label if it is not present.
    std::size_t index_of(std::string_view label) const;
    bool has_spin(std::string_view label) const;
    std::vector<std::string> labels() const;

private:
    std::vector<Spin> spins_;
    Eigen::MatrixXd j_hz_;
};

/// A 2^N x 2^N complex operator tagged with the role it plays. The role is
/// checked on construction: hermitian to 1e-12 entrywise, unitary to 1e-12 in
/// Frobenius norm of U U^dagger - I.
class OperatorMatrix {
public:
    enum class Role { hermitian, unitary, general };

    OperatorMatrix(Matrix entries, Role role);

    static OperatorMatrix identity(std::size_t dim);

    const Matrix& matrix() const { return m_; }
    std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
    Role role() const { return role_; }
    Complex operator()(std::size_t i, std::size_t j) const { return m_(i, j); }

    OperatorMatrix adjoint() const;

    /// Product; the result is unitary iff both factors are.
    friend OperatorMatrix operator*(const OperatorMatrix& a, const OperatorMatrix& b);

private:
    Matrix m_;
    Role role_;
};

/// Hermitian state matrix. A `full` state has unit trace and is positive
/// semidefinite (eigenvalues >= -1e-10); a `deviation` is traceless.
class DensityMatrix {
public:
    enum class Form { full, deviation };

    DensityMatrix(Matrix entries, Form form);

    /// |index><index| in the computational basis.
    static DensityMatrix basis_state(std::size_t dim, std::size_t index);
    static DensityMatrix maximally_mixed(std::size_t dim);

    const Matrix& matrix() const { return m_; }
    std::size_t dim() const { return static_cast<std::size_t>(m_.rows()); }
    Form form() const { return form_; }
    Complex operator()(std::size_t i, std::size_t j) const { return m_(i, j); }

    Eigen::VectorXd populations() const { return m_.diagonal().real(); }

    /// rho - Tr(rho) I / dim.
    DensityMatrix deviation() const;

private:
    Matrix m_;
    Form form_;
};

/// Embed a 2x2 single-spin operator on spin `k` of an `n_spins` system.
Matrix embed(const Eigen::Matrix2cd& op, std::size_t k, std::size_t n_spins);

/// Half of the Pauli matrix on `spin`, identity elsewhere.
OperatorMatrix angular_momentum(const SpinSystem& system, std::string_view spin, Axis3 axis);

/// Pauli matrix on `spin` (twice the angular momentum operator).
OperatorMatrix pauli(const SpinSystem& system, std::string_view spin, Axis3 axis);

/// Rotating-frame Hamiltonian in rad/s:
///   H = sum_k -2 pi offset_k I_zk + sum_{k<l} 2 pi J_kl I_zk I_zl.
/// Always diagonal in the computational basis.
OperatorMatrix hamiltonian(const SpinSystem& system);

/// exp(-i h t). Exact for diagonal h; eigendecomposition otherwise.
OperatorMatrix free_propagator(const OperatorMatrix& h, double duration_s);

/// exp(-i flip (cos(phase) I_x + sin(phase) I_y)) on one spin. With this
/// convention phase pi/2, flip pi/2 maps |0> -> (|0> + |1>)/sqrt 2.
OperatorMatrix rf_rotation(const SpinSystem& system, std::string_view spin, double phase,
                           double flip);
OperatorMatrix rf_rotation(const SpinSystem& system, std::size_t spin_index, double phase,
                           double flip);

/// U rho U^dagger. Throws std::invalid_argument on dimension mismatch.
DensityMatrix evolve(const DensityMatrix& rho, const OperatorMatrix& u);

/// Tr(rho obs). Throws std::invalid_argument on dimension mismatch.
Complex expectation(const DensityMatrix& rho, const OperatorMatrix& obs);

/// min over theta of ||a - e^{i theta} b||_F, with theta taken from the phase
/// of the largest-magnitude entry of b^dagger a.
double phase_aligned_distance(const Matrix& a, const Matrix& b);

inline bool equivalent_up_to_phase(const OperatorMatrix& a, const OperatorMatrix& b,
                                   double tol) {
    return phase_aligned_distance(a.matrix(), b.matrix()) < tol;
}

}  // namespace spinsim
