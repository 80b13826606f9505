#include "afdm/fft.hpp"
#include "afdm/rng.hpp"
#include "afdm/transforms.hpp"

#include "doctest.h"

#include <cmath>

using namespace afdm;

namespace {

CVec random_cvec(Rng& rng, int n) {
    CVec v(static_cast<size_t>(n));
    for (auto& x : v) x = rng.cgauss(1.0);
    return v;
}

double max_abs_diff(const CVec& a, const CVec& b) {
    REQUIRE(a.size() == b.size());
    double m = 0.0;
    for (size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

CVec apply_matrix(const Eigen::MatrixXcd& m, const CVec& x) {
    Eigen::Map<const Eigen::VectorXcd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
    Eigen::VectorXcd y = m * xv;
    return CVec(y.data(), y.data() + y.size());
}

}  // namespace

TEST_CASE("chirp_phase_vector: zero chirp is identity phase") {
    const CVec v = chirp_phase_vector(0.0, 4);
    for (const auto& x : v) {
        CHECK(x.real() == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(x.imag() == doctest::Approx(0.0).epsilon(1e-15));
    }
}

TEST_CASE("chirp_phase_vector: direct evaluation at c = 1/8") {
    const CVec v = chirp_phase_vector(0.125, 4);
    const CVec expect = {
        {1.0, 0.0},
        std::polar(1.0, -kPi / 4.0),
        std::polar(1.0, -kPi),
        std::polar(1.0, -9.0 * kPi / 4.0),
    };
    CHECK(max_abs_diff(v, expect) < 1e-14);
}

TEST_CASE("chirp_phase_vector: c = 1/(2N) lands on a full turn at n = 16, N = 128") {
    const int n = 128;
    const CVec v = chirp_phase_vector(1.0 / (2.0 * n), n);
    // n = 16: c n^2 = 256/256 = 1 turn exactly.
    CHECK(std::abs(v[16] - cplx{1.0, 0.0}) < 1e-14);
    // Independent oracle: direct complex exponential, no mod reduction.
    for (int i = 0; i < n; ++i) {
        const cplx direct = std::exp(cplx{0.0, -kTwoPi * (1.0 / 256.0) * i * i});
        CHECK(std::abs(v[static_cast<size_t>(i)] - direct) < 1e-10);
    }
}

TEST_CASE("chirp_phase_vector: rejects non-positive length, unit modulus otherwise") {
    CHECK_THROWS_AS(chirp_phase_vector(0.3, 0), std::invalid_argument);
    const CVec v = chirp_phase_vector(0.7313, 33);
    CHECK(v[0] == cplx{1.0, 0.0});
    for (const auto& x : v) CHECK(std::abs(std::abs(x) - 1.0) < 1e-15);
}

TEST_CASE("idaft: impulse at c1=c2=0 gives constant 1/sqrt(N)") {
    const auto cfg = ChirpConfig::ofdm(8);
    CVec x(8, cplx{0.0, 0.0});
    x[0] = 1.0;
    const CVec s = idaft(x, cfg);
    for (const auto& v : s) CHECK(std::abs(v - cplx{1.0 / std::sqrt(8.0), 0.0}) < 1e-14);
}

TEST_CASE("idaft: OFDM degeneracy equals unitary IDFT") {
    Rng rng(11);
    for (int n : {8, 12, 16, 64, 128}) {
        const auto cfg = ChirpConfig::ofdm(n);
        const CVec x = random_cvec(rng, n);
        const CVec a = idaft(x, cfg);
        const CVec b = fft::ifft_unitary(x);
        CHECK(rel_error(a, b) < 1e-12);
        const CVec c = daft(x, cfg);
        const CVec d = fft::fft_unitary(x);
        CHECK(rel_error(c, d) < 1e-12);
    }
}

TEST_CASE("idaft: matches dense conjugate-transpose oracle, N=16, c1=3/32, c2=0.7") {
    Rng rng(12);
    const auto cfg = ChirpConfig::from_ratio(16, 3, 0.7);
    CHECK(cfg.c1 == doctest::Approx(3.0 / 32.0));
    const CVec x = random_cvec(rng, 16);
    const CVec fast = idaft(x, cfg);
    const Eigen::MatrixXcd a = daft_matrix(cfg);
    const CVec dense = apply_matrix(a.adjoint(), x);
    CHECK(rel_error(fast, dense) < 1e-10);
}

TEST_CASE("idaft/daft: length mismatch rejected") {
    const auto cfg = ChirpConfig::from_real(8, 0.1, 0.2);
    CVec x(7);
    CHECK_THROWS_AS(idaft(x, cfg), std::invalid_argument);
    CHECK_THROWS_AS(daft(x, cfg), std::invalid_argument);
}

TEST_CASE("daft: round trip is identity and preserves energy") {
    Rng rng(13);
    int checked = 0;
    for (int n : {8, 12, 16, 64, 128}) {
        for (int rep = 0; rep < 200; ++rep) {
            const auto cfg = ChirpConfig::from_real(n, rng.uniform(-1.0, 1.0),
                                                    rng.uniform(-1.0, 1.0));
            const CVec x = random_cvec(rng, n);
            const CVec s = idaft(x, cfg);
            CHECK(std::abs(std::sqrt(energy(s)) - std::sqrt(energy(x))) <
                  1e-12 * std::sqrt(energy(x)));
            const CVec back = daft(s, cfg);
            CHECK(rel_error(back, x) < 1e-10);
            ++checked;
        }
    }
    CHECK(checked == 1000);
}

TEST_CASE("daft: OCDM degeneracy matches the dense oracle") {
    Rng rng(14);
    for (int n : {12, 64}) {
        const auto cfg = ChirpConfig::ocdm(n);
        const Eigen::MatrixXcd a = daft_matrix(cfg);
        const CVec x = random_cvec(rng, n);
        CHECK(rel_error(daft(x, cfg), apply_matrix(a, x)) < 1e-10);
        CHECK(rel_error(idaft(x, cfg), apply_matrix(a.adjoint(), x)) < 1e-10);
    }
}

TEST_CASE("daft_matrix: reduces to the unitary DFT matrix at c1=c2=0, N=4") {
    const auto cfg = ChirpConfig::ofdm(4);
    const Eigen::MatrixXcd a = daft_matrix(cfg);
    for (int m = 0; m < 4; ++m) {
        for (int n = 0; n < 4; ++n) {
            const cplx w = 0.5 * std::polar(1.0, -kTwoPi * ((m * n) % 4) / 4.0);
            CHECK(std::abs(a(m, n) - w) < 1e-15);
        }
    }
}

TEST_CASE("daft_matrix: unitary for N=64, c1=5/128, c2=1.3") {
    const auto cfg = ChirpConfig::from_ratio(64, 5, 1.3);
    const Eigen::MatrixXcd a = daft_matrix(cfg);
    const Eigen::MatrixXcd gram = a.adjoint() * a;
    const Eigen::MatrixXcd eye = Eigen::MatrixXcd::Identity(64, 64);
    CHECK((gram - eye).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("daft_matrix: forward matrix applied to idaft output recovers the input") {
    Rng rng(15);
    for (int n : {8, 12, 16, 64, 128, 256}) {
        const auto cfg = ChirpConfig::from_real(n, rng.uniform(-0.5, 0.5),
                                                rng.uniform(-2.0, 2.0));
        const CVec x = random_cvec(rng, n);
        const CVec s = idaft(x, cfg);
        const CVec back = apply_matrix(daft_matrix(cfg), s);
        CHECK(rel_error(back, x) < 1e-10);
    }
}

TEST_CASE("add_cpp: zero chirp gives a plain cyclic prefix") {
    Rng rng(16);
    const auto cfg = ChirpConfig::ofdm(16, 1.0, 5);
    const CVec s = random_cvec(rng, 16);
    const CVec framed = add_cpp(s, cfg);
    REQUIRE(framed.size() == 21);
    for (int k = 0; k < 5; ++k) CHECK(framed[static_cast<size_t>(k)] == s[static_cast<size_t>(11 + k)]);
}

TEST_CASE("add_cpp: equals cyclic prefix exactly when 2N c1 is integer and N even") {
    Rng rng(17);
    for (long k : {1L, 3L, 7L, 9L}) {
        const auto cfg = ChirpConfig::from_ratio(32, k, 0.4, 1.0, 6);
        const CVec s = random_cvec(rng, 32);
        const CVec framed = add_cpp(s, cfg);
        for (int i = 0; i < 6; ++i) {
            // Exact: the prefix phase collapses to 1 in integer arithmetic.
            CHECK(framed[static_cast<size_t>(i)] == s[static_cast<size_t>(26 + i)]);
        }
    }
}

TEST_CASE("add_cpp: arbitrary real c1 matches the direct phase formula") {
    Rng rng(18);
    const auto cfg = ChirpConfig::from_real(16, 0.013, 0.0, 1.0, 4);
    const CVec s = random_cvec(rng, 16);
    const CVec framed = add_cpp(s, cfg);
    for (int k = 0; k < 4; ++k) {
        const int idx = k - 4;  // -L..-1
        const cplx phase =
            std::exp(cplx{0.0, -kTwoPi * 0.013 * (16.0 * 16.0 + 2.0 * 16.0 * idx)});
        const cplx expect = s[static_cast<size_t>(16 + idx)] * phase;
        CHECK(std::abs(framed[static_cast<size_t>(k)] - expect) < 1e-12);
    }
}

TEST_CASE("add_cpp: prefix as long as the symbol is rejected") {
    CHECK_THROWS_AS(ChirpConfig::from_real(8, 0.1, 0.0, 1.0, 8), std::invalid_argument);
}

TEST_CASE("remove_cpp: inverse of add_cpp, multi-symbol indexing") {
    Rng rng(19);
    const auto cfg = ChirpConfig::from_ratio(12, 2, 0.1, 1.0, 3);
    const CVec s0 = random_cvec(rng, 12);
    const CVec s1 = random_cvec(rng, 12);
    TimeFrame frame;
    frame.has_cpp = true;
    frame.n_symbols = 2;
    const CVec f0 = add_cpp(s0, cfg);
    const CVec f1 = add_cpp(s1, cfg);
    frame.samples = f0;
    frame.samples.insert(frame.samples.end(), f1.begin(), f1.end());
    CHECK(max_abs_diff(remove_cpp(frame, cfg, 0), s0) == 0.0);
    CHECK(max_abs_diff(remove_cpp(frame, cfg, 1), s1) == 0.0);
    CHECK_THROWS_AS(remove_cpp(frame, cfg, 2), std::invalid_argument);
    TimeFrame bare;
    bare.samples = s0;
    CHECK_THROWS_AS(remove_cpp(bare, cfg, 0), std::invalid_argument);
}

TEST_CASE("remove_cpp: channel output matches the chirp-circular convolution model") {
    // Brute-force oracle: delay the prefixed frame with zero history, strip the
    // prefix, and compare against the chirp-periodic shift law.
    Rng rng(20);
    for (long k : {0L, 3L}) {
        for (int delay = 0; delay <= 4; ++delay) {
            const auto cfg = ChirpConfig::from_ratio(16, k, 0.25, 1.0, 4);
            const CVec s = random_cvec(rng, 16);
            const CVec framed = add_cpp(s, cfg);
            CVec delayed(framed.size(), cplx{0.0, 0.0});
            for (size_t i = static_cast<size_t>(delay); i < framed.size(); ++i)
                delayed[i] = framed[i - static_cast<size_t>(delay)];
            TimeFrame frame;
            frame.samples = delayed;
            frame.has_cpp = true;
            const CVec payload = remove_cpp(frame, cfg, 0);
            for (int m = 0; m < 16; ++m) {
                const int src = m - delay;
                cplx expect;
                if (src >= 0) {
                    expect = s[static_cast<size_t>(src)];
                } else {
                    const double cycles =
                        rational_cycles(k, 16L * 16L + 2L * 16L * src, 32);
                    expect = s[static_cast<size_t>(16 + src)] *
                             std::polar(1.0, -kTwoPi * cycles);
                }
                CHECK(std::abs(payload[static_cast<size_t>(m)] - expect) < 1e-12);
            }
        }
    }
}

TEST_CASE("transforms: dense oracle equivalence across sizes up to 256") {
    Rng rng(21);
    for (int n : {8, 12, 16, 64, 128, 256}) {
        const auto cfg = ChirpConfig::from_real(n, rng.uniform(-1.0, 1.0),
                                                rng.uniform(-1.0, 1.0));
        const Eigen::MatrixXcd a = daft_matrix(cfg);
        const CVec x = random_cvec(rng, n);
        CHECK(rel_error(daft(x, cfg), apply_matrix(a, x)) < 1e-10);
        CHECK(rel_error(idaft(x, cfg), apply_matrix(a.adjoint(), x)) < 1e-10);
    }
}

TEST_CASE("config: invariant violations rejected") {
    CHECK_THROWS_AS(ChirpConfig::from_real(1, 0.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(ChirpConfig::from_real(8, 0.0, 0.0, 1.0, -1), std::invalid_argument);
    const auto cfg = ChirpConfig::from_ratio(2, 1, 0.0);  // smallest legal N
    CVec x = {cplx{1.0, 0.0}, cplx{0.0, 1.0}};
    CHECK(rel_error(daft(idaft(x, cfg), cfg), x) < 1e-12);
}
