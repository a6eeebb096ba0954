// T1/T2 relaxation as a per-spin completely positive trace-preserving map.
#pragma once

#include <functional>
#include <span>
#include <vector>

#include "spinsim/spin_core.hpp"

namespace spinsim {

struct RelaxationParams {
    std::vector<double> t1_s;
    std::vector<double> t2_s;
    /// Per-spin hbar*omega/kT; the channel relaxes each spin toward
    /// P(|0>) = (1 + x/2)/2. Empty means zero polarization.
    std::vector<double> equilibrium_polarization;

    static RelaxationParams from_system(const SpinSystem& system,
                                        std::span<const double> polarization = {});

    std::size_t size() const { return t1_s.size(); }
    /// Throws std::invalid_argument unless 0 < t2 <= 2 t1 for every spin.
    void validate() const;
};

/// Generalized amplitude damping (rate 1/t1) followed by pure dephasing so
/// that single-spin coherences decay as exp(-t/t2), applied spin by spin.
DensityMatrix relax(const DensityMatrix& rho, double duration_s, const RelaxationParams& params);

/// Same channel on a raw matrix (no state validation).
Matrix relax_matrix(const Matrix& rho, double duration_s, const RelaxationParams& params);

/// Product of single-spin equilibrium states, the fixed point of relax().
DensityMatrix equilibrium_state(const RelaxationParams& params);

/// Matrix of a linear map on d x d matrices acting on column-stacked vec(rho).
Matrix superoperator(const std::function<Matrix(const Matrix&)>& map, std::size_t dim);

}  // namespace spinsim
