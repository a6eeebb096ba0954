#include <gtest/gtest.h>

#include <random>

#include "reference.hpp"
#include "spinsim/readout.hpp"

using namespace spinsim;

namespace {

const SpinSystem kSys = SpinSystem::chloroform();
constexpr double kJ = 215.0;

std::size_t peak_bin(const Spectrum& s) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < s.amplitudes.size(); ++k) {
        if (std::abs(s.amplitudes[k]) > std::abs(s.amplitudes[best])) {
            best = k;
        }
    }
    return best;
}

LineIntegrals lines_of(const DensityMatrix& rho, std::string_view spin = "A") {
    return line_integrals(spectrum(synth_fid(rho, kSys, spin)), kJ);
}

Fid tone(double f_hz, std::size_t n, double dwell) {
    Fid fid;
    fid.dwell_s = dwell;
    fid.detected_spin = "A";
    for (std::size_t k = 0; k < n; ++k) {
        fid.samples.push_back(std::exp(Complex(0.0, -kTwoPi * f_hz * static_cast<double>(k) * dwell)));
    }
    return fid;
}

}  // namespace

TEST(SynthFidTest, GroundStateLineAtMinusHalfJ) {
    const auto s = spectrum(synth_fid(DensityMatrix::basis_state(4, 0), kSys, "A"));
    EXPECT_NEAR(s.frequency_hz[peak_bin(s)], -kJ / 2, s.bin_width_hz());
    const auto l = line_integrals(s, kJ);
    EXPECT_GT(l.low.real(), 0.0);
    EXPECT_LT(std::abs(l.high), 0.05 * std::abs(l.low));
}

TEST(SynthFidTest, WorkOneLineAtPlusHalfJ) {
    const auto s = spectrum(synth_fid(DensityMatrix::basis_state(4, 1), kSys, "A"));
    EXPECT_NEAR(s.frequency_hz[peak_bin(s)], kJ / 2, s.bin_width_hz());
    const auto l = line_integrals(s, kJ);
    EXPECT_GT(l.high.real(), 0.0);
    EXPECT_LT(std::abs(l.low), 0.05 * std::abs(l.high));
}

TEST(SynthFidTest, SpinAOneIsNegative) {
    const auto l = lines_of(DensityMatrix::basis_state(4, 2));
    EXPECT_LT(l.low.real(), 0.0);
}

TEST(SynthFidTest, FirstSampleMatchesReferenceTrace) {
    // Tr(X_A rho X_A^dag (-i sx - sy) on A) at t = 0
    std::mt19937_64 rng(9);
    for (int i = 0; i < 20; ++i) {
        const Matrix rho = ref::random_density(4, rng);
        const Matrix u = ref::pi2a(ref::X);
        const Matrix obs = ref::on_a(-ref::kI * ref::sx() - ref::sy());
        const Complex want = (u * rho * u.adjoint() * obs).trace();
        const Fid fid = synth_fid(DensityMatrix(rho, DensityMatrix::Form::full), kSys, "A");
        EXPECT_LT(std::abs(fid.samples[0] - want), 1e-12);
    }
}

TEST(SynthFidTest, MixedStateGivesZeroFid) {
    const Fid fid = synth_fid(DensityMatrix::maximally_mixed(4), kSys, "B");
    for (const auto& s : fid.samples) {
        EXPECT_EQ(std::abs(s), 0.0);
    }
}

TEST(SynthFidTest, UnknownSpin) {
    EXPECT_THROW(synth_fid(DensityMatrix::basis_state(4, 0), kSys, "C"), std::invalid_argument);
}

TEST(SynthFidTest, RelaxationDecays) {
    // Partner T1 made long so that only the carbon T2 acts on the line.
    const SpinSystem sys = SpinSystem::two_spin({"A", 0.0, 1e9, 7.0}, {"B", 0.0, 25.0, 0.3}, kJ);
    AcquisitionOptions opt;
    opt.relaxation = RelaxationParams::from_system(sys);
    const Fid fid = synth_fid(DensityMatrix::basis_state(4, 0), sys, "B", opt);
    const double t = 600 * opt.dwell_s;
    EXPECT_NEAR(std::abs(fid.samples[600]) / std::abs(fid.samples[0]), std::exp(-t / 0.3), 1e-9);
}

TEST(SpectrumTest, SingleToneBin) {
    const double dwell = 1e-3;
    const auto s = spectrum(tone(125.0, 1024, dwell));
    EXPECT_NEAR(s.frequency_hz[peak_bin(s)], -125.0, s.bin_width_hz());
    EXPECT_NEAR(s.bin_width_hz(), 1.0 / (dwell * 1024), 1e-12);
}

TEST(SpectrumTest, ZeroFillsToPowerOfTwo) {
    const auto s = spectrum(tone(10.0, 1000, 1e-3));
    EXPECT_EQ(s.amplitudes.size(), 1024u);
    EXPECT_THROW(spectrum(Fid{}), std::invalid_argument);
}

TEST(SpectrumTest, Linearity) {
    const Fid a = synth_fid(DensityMatrix::basis_state(4, 0), kSys, "A");
    const Fid b = tone(40.0, a.samples.size(), a.dwell_s);
    const Complex ca(0.7, -0.2), cb(-1.3, 0.4);
    Fid sum = a;
    for (std::size_t k = 0; k < sum.samples.size(); ++k) {
        sum.samples[k] = ca * a.samples[k] + cb * b.samples[k];
    }
    const auto sa = spectrum(a), sb = spectrum(b), ss = spectrum(sum);
    for (std::size_t k = 0; k < ss.amplitudes.size(); ++k) {
        EXPECT_LT(std::abs(ss.amplitudes[k] - (ca * sa.amplitudes[k] + cb * sb.amplitudes[k])), 1e-10);
    }
}

TEST(SpectrumTest, SumEqualsFirstSample) {
    std::mt19937_64 rng(4);
    for (int i = 0; i < 10; ++i) {
        const DensityMatrix rho(ref::random_density(4, rng), DensityMatrix::Form::full);
        for (const char* spin : {"A", "B"}) {
            const Fid fid = synth_fid(rho, kSys, spin);
            Complex total(0.0, 0.0);
            for (const auto& a : spectrum(fid).amplitudes) {
                total += a;
            }
            EXPECT_LT(std::abs(total - fid.samples[0]), 1e-8);
        }
    }
}

TEST(SpectrumTest, LinesSeparatedByJ) {
    ExperimentConfig c;
    c.input_mode = InputMode::thermal;
    const auto s = spectrum(synth_fid(run_experiment(c), kSys, "A"));
    // Strongest bin in each half.
    std::size_t lo = 0, hi = s.amplitudes.size() / 2;
    for (std::size_t k = 0; k < s.amplitudes.size(); ++k) {
        auto& best = k < s.amplitudes.size() / 2 ? lo : hi;
        if (std::abs(s.amplitudes[k]) > std::abs(s.amplitudes[best])) {
            best = k;
        }
    }
    EXPECT_NEAR(s.frequency_hz[hi] - s.frequency_hz[lo], kJ, s.bin_width_hz());
}

TEST(SpectrumTest, OffsetShiftsCenter) {
    const SpinSystem off = SpinSystem::two_spin({"A", 30.0, 19, 7}, {"B", 0.0, 25, 0.3}, kJ);
    const auto s = spectrum(synth_fid(DensityMatrix::basis_state(4, 0), off, "A"));
    EXPECT_NEAR(s.center_hz, 30.0, 1e-12);
    EXPECT_NEAR(s.frequency_hz[peak_bin(s)], 30.0 - kJ / 2, s.bin_width_hz());
    EXPECT_GT(line_integrals(s, kJ).low.real(), 0.0);
}

TEST(LineIntegralsTest, PipelineExamples) {
    ExperimentConfig c;
    c.oracle = Oracle::f1;
    const auto f1 = lines_of(run_experiment(c));
    EXPECT_GT(f1.low.real(), 0.0);
    EXPECT_LT(std::abs(f1.high), 0.05 * std::abs(f1.low));
    c.oracle = Oracle::f3;
    EXPECT_LT(lines_of(run_experiment(c)).low.real(), 0.0);
    c.oracle = Oracle::f1;
    c.input_mode = InputMode::thermal;
    const auto th = lines_of(run_experiment(c));
    EXPECT_GT(th.low.real(), 0.0);
    EXPECT_GT(th.high.real(), 0.0);
}

TEST(LineIntegralsTest, Errors) {
    const auto s = spectrum(synth_fid(DensityMatrix::basis_state(4, 0), kSys, "A"));
    EXPECT_THROW(line_integrals(s, 3.0), std::invalid_argument);
    EXPECT_THROW(line_integrals(s, 1998.0), std::invalid_argument);
    EXPECT_NO_THROW(line_integrals(s, kJ, 20));
}

TEST(ClassifySpectrumTest, Examples) {
    EXPECT_EQ(classify_spectrum({1, 0}, {0, 0}), Verdict::constant);
    EXPECT_EQ(classify_spectrum({-0.9, 0}, {-0.1, 0}), Verdict::balanced);
    const double threshold = 1e-3;
    EXPECT_THROW(classify_spectrum({0.01 * threshold, 0}, {0, 0}, threshold), InconclusiveError);
    EXPECT_THROW(classify_spectrum({0, 0}, {0, 0}), InconclusiveError);
    EXPECT_EQ(classify_spectrum({1, 0}, {0, 0}, 1e-12, 1), Verdict::balanced);
}

TEST(ClassifySpectrumTest, AgreesWithDensityMatrixClassifier) {
    for (Oracle o : kAllOracles) {
        for (InputMode mode : {InputMode::pure, InputMode::thermal, InputMode::temporal_average}) {
            ExperimentConfig c;
            c.oracle = o;
            c.input_mode = mode;
            const auto rho = run_experiment(c);
            const auto l = lines_of(rho);
            EXPECT_EQ(classify_spectrum(l.low, l.high), classify(rho)) << oracle_name(o);
        }
        const auto rho = run_experiment([&] {
            ExperimentConfig c;
            c.oracle = o;
            c.pure_index = 2;
            return c;
        }());
        const auto l = lines_of(rho);
        EXPECT_EQ(classify_spectrum(l.low, l.high, 1e-12, 1), classify(rho, 1)) << oracle_name(o);
    }
}

TEST(ReceiverNoiseTest, SpectralSigmaAndSeed) {
    Fid fid;
    fid.dwell_s = 1e-3;
    fid.samples.assign(4096, Complex(0.0, 0.0));
    Fid other = fid;
    std::mt19937_64 rng(123), rng2(123);
    add_receiver_noise(fid, 0.01, rng);
    add_receiver_noise(other, 0.01, rng2);
    EXPECT_EQ(fid.samples, other.samples);
    double sum_sq = 0.0;
    const auto s = spectrum(fid);
    for (const auto& a : s.amplitudes) {
        sum_sq += std::norm(a);
    }
    EXPECT_NEAR(std::sqrt(sum_sq / static_cast<double>(s.amplitudes.size())), 0.01, 0.0005);
    EXPECT_THROW(add_receiver_noise(fid, -1.0, rng), std::invalid_argument);
}

TEST(ReceiverNoiseTest, ReferencePeak) {
    const double h = reference_peak_height(kSys, "A");
    const auto s = spectrum(synth_fid(DensityMatrix::basis_state(4, 0), kSys, "A"));
    EXPECT_NEAR(h, std::abs(s.amplitudes[peak_bin(s)]), 1e-15);
    EXPECT_GT(h, 0.0);
}
