#include "spinsim/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Dense>
#include <unsupported/Eigen/NonLinearOptimization>

namespace spinsim {

namespace {

// Two-parameter model on normalized data; Eigen's LM wants this functor shape.
struct Model {
    using Scalar = double;
    using InputType = Eigen::VectorXd;
    using ValueType = Eigen::VectorXd;
    using JacobianType = Eigen::MatrixXd;
    enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

    Eigen::VectorXd t;
    Eigen::VectorXd y;
    bool recovery = false;  // false: a e^{-k t}; true: a (1 - 2 e^{-k t})

    int inputs() const { return 2; }
    int values() const { return static_cast<int>(t.size()); }

    int operator()(const Eigen::VectorXd& p, Eigen::VectorXd& r) const {
        for (Eigen::Index i = 0; i < t.size(); ++i) {
            const double e = std::exp(-p(1) * t(i));
            r(i) = (recovery ? p(0) * (1.0 - 2.0 * e) : p(0) * e) - y(i);
        }
        return 0;
    }

    int df(const Eigen::VectorXd& p, Eigen::MatrixXd& jac) const {
        for (Eigen::Index i = 0; i < t.size(); ++i) {
            const double e = std::exp(-p(1) * t(i));
            if (recovery) {
                jac(i, 0) = 1.0 - 2.0 * e;
                jac(i, 1) = 2.0 * p(0) * t(i) * e;
            } else {
                jac(i, 0) = e;
                jac(i, 1) = -p(0) * t(i) * e;
            }
        }
        return 0;
    }
};

struct Normalized {
    Eigen::VectorXd t;
    Eigen::VectorXd y;
    double t_scale = 1.0;
    double y_scale = 1.0;
};

Normalized normalize(std::span<const double> t, std::span<const double> y) {
    if (t.size() != y.size()) {
        throw FitError("fit: t and y differ in length");
    }
    if (t.size() < 3) {
        throw FitError("fit: need at least 3 points, got " + std::to_string(t.size()));
    }
    Normalized n;
    n.t = Eigen::Map<const Eigen::VectorXd>(t.data(), static_cast<Eigen::Index>(t.size()));
    n.y = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
    if (!n.t.allFinite() || !n.y.allFinite()) {
        throw FitError("fit: non-finite data");
    }
    n.t_scale = n.t.cwiseAbs().maxCoeff();
    n.y_scale = n.y.cwiseAbs().maxCoeff();
    if (n.t_scale == 0.0 || n.y_scale == 0.0) {
        throw FitError("fit: degenerate data (all times or all values zero)");
    }
    n.t /= n.t_scale;
    n.y /= n.y_scale;
    return n;
}

Eigen::VectorXd solve(Model& model, Eigen::VectorXd p) {
    Eigen::LevenbergMarquardt<Model> lm(model);
    lm.parameters.xtol = 1e-14;
    lm.parameters.ftol = 1e-14;
    lm.parameters.maxfev = 2000;
    lm.minimize(p);
    if (!p.allFinite()) {
        throw FitError("fit: optimizer diverged");
    }
    return p;
}

double rms(const Model& model, const Eigen::VectorXd& p) {
    Eigen::VectorXd r(model.values());
    model(p, r);
    return std::sqrt(r.squaredNorm() / static_cast<double>(r.size()));
}

}  // namespace

ExponentialFit fit_exponential_decay(std::span<const double> t, std::span<const double> y) {
    const Normalized n = normalize(t, y);
    // Log-linear start from the positive points.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int count = 0;
    for (Eigen::Index i = 0; i < n.t.size(); ++i) {
        if (n.y(i) > 0.0) {
            const double ly = std::log(n.y(i));
            sx += n.t(i);
            sy += ly;
            sxx += n.t(i) * n.t(i);
            sxy += n.t(i) * ly;
            ++count;
        }
    }
    double k0 = 1.0;
    double a0 = n.y(0);
    const double denom = count * sxx - sx * sx;
    if (count >= 2 && denom > 0.0) {
        k0 = -(count * sxy - sx * sy) / denom;
        a0 = std::exp((sy + k0 * sx) / count);
    }
    Model model{n.t, n.y, false};
    Eigen::VectorXd p(2);
    p << a0, k0;
    p = solve(model, p);
    const double span = n.t.maxCoeff() - n.t.minCoeff();
    if (!(p(1) * span > 1e-9)) {
        throw FitError("fit: data show no exponential decay (rate " + std::to_string(p(1) / n.t_scale) +
                       " 1/s)");
    }
    return {p(0) * n.y_scale, n.t_scale / p(1), rms(model, p) * n.y_scale};
}

InversionRecoveryFit fit_inversion_recovery(std::span<const double> t, std::span<const double> m) {
    const Normalized n = normalize(t, m);
    const Eigen::Index last = n.y.size() - 1;
    Model model{n.t, n.y, true};
    Eigen::VectorXd p(2);
    p << n.y(last), 1.0;
    p = solve(model, p);
    if (!(p(1) > 0.0) || p(0) == 0.0) {
        throw FitError("inversion-recovery fit is degenerate");
    }
    return {p(0) * n.y_scale, n.t_scale / p(1), rms(model, p) * n.y_scale};
}

}  // namespace spinsim
