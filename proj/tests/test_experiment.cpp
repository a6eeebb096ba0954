#include <gtest/gtest.h>

#include <random>

#include "reference.hpp"
#include "spinsim/experiment.hpp"

using namespace spinsim;

namespace {

DensityMatrix diag_state(double a, double b, double c, double d) {
    Eigen::Vector4cd v(a, b, c, d);
    return {v.asDiagonal().toDenseMatrix(), DensityMatrix::Form::full};
}

ExperimentConfig pure_config(Oracle oracle, std::size_t index = 0) {
    ExperimentConfig c;
    c.oracle = oracle;
    c.input_mode = InputMode::pure;
    c.pure_index = index;
    return c;
}

double iza(const DensityMatrix& rho) {
    const SpinSystem sys = SpinSystem::chloroform();
    return expectation(rho.deviation(), angular_momentum(sys, "A", Axis3::z)).real();
}

}  // namespace

TEST(ThermalStateTest, InfiniteTemperatureIsMixed) {
    const std::vector<double> x = {0.0, 0.0};
    const auto rho = thermal_state(SpinSystem::chloroform(), x);
    EXPECT_LT((rho.matrix() - Matrix::Identity(4, 4) / 4.0).norm(), 1e-15);
}

TEST(ThermalStateTest, ClosedForm) {
    const double eps = 1e-5;
    const std::vector<double> x = {4 * eps, eps};
    const auto p = thermal_state(SpinSystem::chloroform(), x).populations();
    // n = (1 + mA xA + mB xB)/4 with the linear terms summing to zero.
    const double expect[4] = {(1 + 2.5 * eps) / 4, (1 + 1.5 * eps) / 4, (1 - 1.5 * eps) / 4,
                              (1 - 2.5 * eps) / 4};
    for (int i = 0; i < 4; ++i) {
        EXPECT_NEAR(p(i), expect[i], 1e-15);
    }
    EXPECT_GT(p(0), p(1));
    EXPECT_GT(p(1), p(2));
    EXPECT_GT(p(2), p(3));
    EXPECT_NEAR(p(0) - p(3), (4 * eps + eps) / 4 * 0.5 * 2, 1e-15);
    EXPECT_NEAR(p.sum(), 1.0, 1e-15);
}

TEST(ThermalStateTest, RangeChecked) {
    const SpinSystem sys = SpinSystem::chloroform();
    EXPECT_THROW(thermal_state(sys, std::vector<double>{0.02, 0.0}), std::invalid_argument);
    EXPECT_THROW(thermal_state(sys, std::vector<double>{-1e-5, 0.0}), std::invalid_argument);
    EXPECT_THROW(thermal_state(sys, std::vector<double>{1e-5}), std::invalid_argument);
}

TEST(ThermalStateTest, DefaultPolarization) {
    const auto x = default_polarization(SpinSystem::chloroform(), 298.15);
    EXPECT_NEAR(x[0], 8.05e-5, 0.01e-5);
    EXPECT_DOUBLE_EQ(x[1], x[0] / 4);
}

TEST(PermuteTest, Examples) {
    const auto rho = diag_state(0.4, 0.3, 0.2, 0.1);
    EXPECT_EQ(permute_populations(rho, kIdentityCycle).matrix(), rho.matrix());
    const auto p = permute_populations(rho, kForwardCycle).populations();
    EXPECT_EQ(p, Eigen::Vector4d(0.4, 0.1, 0.3, 0.2));
    auto r = rho;
    for (int i = 0; i < 3; ++i) {
        r = permute_populations(r, kForwardCycle);
    }
    EXPECT_EQ(r.matrix(), rho.matrix());
    auto back = permute_populations(permute_populations(rho, kForwardCycle), kBackwardCycle);
    EXPECT_EQ(back.matrix(), rho.matrix());
}

TEST(PermuteTest, RejectsCoherenceAndBadCycles) {
    Matrix m = Matrix::Identity(4, 4) / 4.0;
    m(0, 1) = m(1, 0) = 1e-3;
    EXPECT_THROW(permute_populations(DensityMatrix(m, DensityMatrix::Form::full), kForwardCycle),
                 std::invalid_argument);
    const auto rho = diag_state(0.4, 0.3, 0.2, 0.1);
    EXPECT_THROW(permute_populations(rho, PopulationCycle{1, 0, 2, 3}), std::invalid_argument);
    EXPECT_THROW(permute_populations(rho, PopulationCycle{0, 1, 1, 3}), std::invalid_argument);
}

TEST(TemporalAverageTest, PermutationSumProperty) {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.1, 1.0);
    for (int i = 0; i < 200; ++i) {
        Eigen::Vector4d n(u(rng), u(rng), u(rng), u(rng));
        n /= n.sum();
        const auto rho = diag_state(n(0), n(1), n(2), n(3));
        const std::array<DensityMatrix, 3> rs = {rho, permute_populations(rho, kForwardCycle),
                                                 permute_populations(rho, kBackwardCycle)};
        const auto ta = temporal_average(rs);
        const double s = n(1) + n(2) + n(3);
        EXPECT_NEAR(ta.alpha, s, 1e-14);
        EXPECT_NEAR(ta.delta, 3 * n(0) - s, 1e-14);
        const Eigen::Vector4d totals = ta.effective.diagonal().real();
        EXPECT_NEAR(totals(0), 3 * n(0), 1e-14);
        for (int k = 1; k < 4; ++k) {
            EXPECT_NEAR(totals(k), s, 1e-14);
        }
    }
}

TEST(TemporalAverageTest, MixedInput) {
    const auto mixed = DensityMatrix::maximally_mixed(4);
    const std::array<DensityMatrix, 3> rs = {mixed, mixed, mixed};
    const auto ta = temporal_average(rs);
    EXPECT_NEAR(ta.alpha, 0.75, 1e-15);
    EXPECT_NEAR(ta.delta, 0.0, 1e-15);
    EXPECT_THROW(ta.normalized(), std::domain_error);
}

TEST(TemporalAverageTest, ThermalHasSignal) {
    ExperimentConfig c;
    const auto inputs = [&] {
        c.input_mode = InputMode::temporal_average;
        return prepare_inputs(c);
    }();
    ASSERT_EQ(inputs.size(), 3u);
    const auto ta = temporal_average(std::span<const DensityMatrix, 3>(inputs.data(), 3));
    EXPECT_GT(ta.delta, 0.0);
}

TEST(TemporalAverageTest, Linear) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        Eigen::Vector4d n(u(rng), u(rng), u(rng), u(rng));
        n.array() -= n.mean();
        const DensityMatrix d(n.cast<Complex>().asDiagonal().toDenseMatrix(), DensityMatrix::Form::deviation);
        const std::array<DensityMatrix, 3> rs = {d, permute_populations(d, kForwardCycle),
                                                 permute_populations(d, kBackwardCycle)};
        const double c = 0.25 + 3 * std::abs(u(rng));
        const std::array<DensityMatrix, 3> scaled = {
            DensityMatrix(c * rs[0].matrix(), DensityMatrix::Form::deviation),
            DensityMatrix(c * rs[1].matrix(), DensityMatrix::Form::deviation),
            DensityMatrix(c * rs[2].matrix(), DensityMatrix::Form::deviation)};
        const auto a = temporal_average(rs);
        const auto b = temporal_average(scaled);
        EXPECT_NEAR(b.alpha, c * a.alpha, 1e-13);
        EXPECT_NEAR(b.delta, c * a.delta, 1e-13);
    }
}

TEST(TemporalAverageTest, NonDiagonalFinalStates) {
    // Averaging after a unitary: same alpha/delta as before it.
    ExperimentConfig c;
    c.oracle = Oracle::f3;
    const auto ta = run_temporal_average(c);
    const auto inputs = [&] {
        c.input_mode = InputMode::temporal_average;
        return prepare_inputs(c);
    }();
    const auto before = temporal_average(std::span<const DensityMatrix, 3>(inputs.data(), 3));
    EXPECT_NEAR(ta.alpha, before.alpha, 1e-14);
    EXPECT_NEAR(ta.delta, before.delta, 1e-14);
}

TEST(DjProgramTest, Transcription) {
    EXPECT_EQ(render(dj_program(Oracle::f1)),
              "Y(A) Ybar(B) - tau/2 - X(B) X(B) - tau/2 - X(B) X(B) - Ybar(A) Y(B)");
}

TEST(DjProgramTest, PureZeroOutcomes) {
    const SpinSystem sys = SpinSystem::chloroform();
    const auto u1 = compile(dj_program(Oracle::f1), sys);
    const auto u3 = compile(dj_program(Oracle::f3), sys);
    EXPECT_NEAR(std::abs(u1(0, 0)), 1.0, 1e-12);
    EXPECT_NEAR(std::abs(u3(2, 0)), 1.0, 1e-12);
}

TEST(DjProgramTest, MatchesReferenceProduct) {
    const Matrix pre = ref::pi2a(ref::Y) * ref::pi2b(ref::Ybar);
    const Matrix post = ref::pi2a(ref::Ybar) * ref::pi2b(ref::Y);
    const Matrix expect = post * ref::f3(215.0) * pre;
    const Matrix got = compile(dj_program(Oracle::f3), SpinSystem::chloroform()).matrix();
    EXPECT_LT(ref::phase_distance(got, expect), 1e-12);
}

TEST(RunExperimentTest, PurePopulations) {
    const Eigen::Vector4d expect[4] = {{1, 0, 0, 0}, {1, 0, 0, 0}, {0, 0, 1, 0}, {0, 0, 1, 0}};
    for (std::size_t i = 0; i < 4; ++i) {
        const auto rho = run_experiment(pure_config(kAllOracles[i]));
        EXPECT_LT((rho.populations() - expect[i]).norm(), 1e-12) << oracle_name(kAllOracles[i]);
    }
}

TEST(RunExperimentTest, ThermalSignFlip) {
    ExperimentConfig c;
    c.input_mode = InputMode::thermal;
    c.oracle = Oracle::f1;
    const double s1 = work_zero_polarization(run_experiment(c));
    c.oracle = Oracle::f3;
    const double s3 = work_zero_polarization(run_experiment(c));
    EXPECT_GT(s1, 0.0);
    EXPECT_LT(s3, 0.0);
    EXPECT_NEAR(s1, -s3, 1e-15);
}

TEST(ClassifyTest, AllOraclesAllModes) {
    for (Oracle o : kAllOracles) {
        const Verdict want = is_constant(o) ? Verdict::constant : Verdict::balanced;
        for (InputMode mode : {InputMode::pure, InputMode::thermal, InputMode::temporal_average}) {
            ExperimentConfig c;
            c.oracle = o;
            c.input_mode = mode;
            EXPECT_EQ(classify(run_experiment(c)), want) << oracle_name(o) << " " << input_mode_name(mode);
        }
    }
}

TEST(ClassifyTest, MixedIsInconclusive) {
    EXPECT_THROW(classify(DensityMatrix::maximally_mixed(4)), InconclusiveError);
}

TEST(ClassifyTest, InputQubitOneStillWorks) {
    for (Oracle o : kAllOracles) {
        const Verdict want = is_constant(o) ? Verdict::constant : Verdict::balanced;
        EXPECT_EQ(classify(run_experiment(pure_config(o, 2)), 1), want) << oracle_name(o);
    }
}

TEST(ClassifyTest, WorkQubitOneFails) {
    // From |01> the spin-A outcome does not depend on the oracle class.
    const double a1 = iza(run_experiment(pure_config(Oracle::f1, 1)));
    const double a3 = iza(run_experiment(pure_config(Oracle::f3, 1)));
    EXPECT_NEAR(a1, a3, 1e-12);
}

TEST(TemporalAverageTest, NormalizedMatchesPureRun) {
    for (Oracle o : kAllOracles) {
        ExperimentConfig c;
        c.oracle = o;
        const Matrix eff = run_temporal_average(c).normalized();
        const auto pure = run_experiment(pure_config(o));
        EXPECT_LT((eff - pure.matrix()).norm(), 1e-10) << oracle_name(o);
    }
}

TEST(ConfigTest, Validation) {
    ExperimentConfig c;
    EXPECT_NO_THROW(c.validate());
    c.polarization = {0.02, 0.001};
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c.polarization = {0.0, 0.001};
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c.polarization.clear();
    c.pure_index = 4;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    EXPECT_THROW(oracle_from_name("f5"), std::invalid_argument);
    EXPECT_THROW(input_mode_from_name("hot"), std::invalid_argument);
}

TEST(DurationTest, FinitePulsesUnderSevenMs) {
    const SpinSystem sys = SpinSystem::chloroform();
    for (Oracle o : kAllOracles) {
        for (double w : {10e-6, 12.5e-6, 15e-6}) {
            EXPECT_LT(duration(dj_program(o), sys, w), 7e-3);
        }
    }
}

TEST(ScalingTest, Examples) {
    EXPECT_EQ(pure_fraction_scaling(2, 2), 0.5);
    EXPECT_EQ(pure_fraction_scaling(10, 2), 10.0 / 1024.0);
    for (int n = 1; n < 20; ++n) {
        EXPECT_EQ(pure_fraction_scaling(n, 1), n);
    }
    EXPECT_THROW(pure_fraction_scaling(0, 2), std::invalid_argument);
    EXPECT_THROW(pure_fraction_scaling(2, 0.5), std::invalid_argument);
}
