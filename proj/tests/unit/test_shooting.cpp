#include "doctest.h"

#include "ptlab/basis_matrix.hpp"
#include "ptlab/shooting.hpp"
#include "ptlab/sweep.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

using namespace ptlab;

namespace {

// Lowest levels of the Hermitian p^2 + x^4 from position/momentum ladder
// matrices in a large oscillator basis; products are formed in a bigger space
// and cropped so the edge of the truncation does not leak in.
std::vector<double> quartic_levels(int count) {
    const int N = 260;
    const int big = N + 8;
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(big, big);
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(big, big);   // P = i * this
    for (int n = 0; n + 1 < big; ++n) {
        const double s = std::sqrt((n + 1) / 2.0);
        X(n, n + 1) = X(n + 1, n) = s;
        P(n + 1, n) = s;
        P(n, n + 1) = -s;
    }
    const Eigen::MatrixXd X2 = X * X;
    const Eigen::MatrixXd H = (-(P * P) + X2 * X2).topLeftCorner(N, N);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    std::vector<double> out;
    for (int i = 0; i < count; ++i) out.push_back(es.eigenvalues()(i));
    return out;
}

const Deformation harmonic = Deformation::analytic(1, 0.0);

}  // namespace

TEST_CASE("wedge geometry") {
    auto w = wedges(1, 0.0);
    CHECK(w.theta_right == doctest::Approx(0.0));
    CHECK(w.opening == doctest::Approx(pi / 2.0));
    CHECK(wedges(1, -1.0).theta_right == doctest::Approx(pi / 6.0));
    CHECK(wedges(2, 0.0).opening == doctest::Approx(pi / 3.0));
    for (double eps : {-1.5, -0.3, 0.7, 3.0}) {
        for (int K : {1, 2, 3}) {
            if (2 * K + eps + 2 <= 0) continue;
            const auto g = wedges(K, eps);
            CHECK(g.theta_left == doctest::Approx(-pi - g.theta_right));
            CHECK(g.opening > 0.0);
        }
    }
    CHECK_THROWS_AS(wedges(1, -4.0), DomainError);
}

TEST_CASE("decaying asymptotic seed") {
    const auto s = asymptotic_seed(3.0, 1, 0.0);
    CHECK(std::abs(s.psi) == doctest::Approx(std::exp(-4.5)).epsilon(1e-12));
    CHECK(std::abs(s.dpsi + 3.0 * s.psi) < 1e-14);

    const double th = wedges(1, 1.0).theta_right;
    CHECK(th == doctest::Approx(-pi / 10.0));
    double prev = std::abs(asymptotic_seed(std::polar(2.0, th), 1, 1.0).psi);
    for (double R = 2.5; R < 8.0; R += 0.5) {
        const double cur = std::abs(asymptotic_seed(std::polar(R, th), 1, 1.0).psi);
        CHECK(cur < prev);
        prev = cur;
    }
    // derivative matches a central difference along the ray
    const cplx x = std::polar(3.0, th);
    const cplx h = std::polar(1e-6, th);
    const cplx fd = (asymptotic_seed(x + h, 1, 1.0).psi - asymptotic_seed(x - h, 1, 1.0).psi) / (2.0 * h);
    CHECK(std::abs(fd - asymptotic_seed(x, 1, 1.0).dpsi) < 1e-6 * std::abs(fd));

    CHECK_THROWS_AS(asymptotic_seed(3.0, 1, 0.0, false), DomainError);
}

TEST_CASE("mismatch vanishes on the harmonic spectrum only") {
    CHECK(std::abs(mismatch(harmonic, 1.0)) < 1e-6);
    CHECK(std::abs(mismatch(harmonic, 2.0)) > 1e-2);
    CHECK(std::abs(mismatch(harmonic, 3.0)) < 1e-6);
    for (int n = 0; n <= 10; ++n) CHECK(std::abs(mismatch(harmonic, 2.0 * n + 1.0)) < 1e-5);
}

TEST_CASE("quartic ground state from shooting matches the ladder-matrix oracle") {
    const auto oracle = quartic_levels(6);
    CHECK(oracle[0] == doctest::Approx(1.0604).epsilon(1e-4));
    const Deformation q = Deformation::analytic(2, 0.0);
    CHECK(std::abs(mismatch(q, oracle[0])) < 1e-5);
    for (int n = 0; n < 6; ++n) CHECK(find_eigenvalue(q, oracle[n] + 0.01).real() == doctest::Approx(oracle[n]).epsilon(1e-8));
}

TEST_CASE("secant refinement") {
    CHECK(std::abs(find_eigenvalue(harmonic, 0.9) - 1.0) < 1e-8);
    const cplx e = find_eigenvalue(Deformation::analytic(1, -0.9), 1.7);
    CHECK(e.real() == doctest::Approx(1.6837).epsilon(1e-3 / 1.6837));
    CHECK(std::abs(e.imag()) < 1e-8);

    ShootingControls few;
    few.max_iter = 1;
    CHECK_THROWS_AS(find_eigenvalue(Deformation::analytic(1, 1.0), 3.0, few), NoConvergence);
}

TEST_CASE("ix^3 ground state sits at the mismatch minimum and agrees with the matrix") {
    const Deformation c = Deformation::analytic(1, 1.0);
    const cplx E = find_eigenvalue(c, 1.1562);
    CHECK(std::abs(E - 1.1562) < 1e-4);
    const double w0 = std::abs(mismatch(c, E.real()));
    CHECK(w0 < std::abs(mismatch(c, E.real() - 0.05)));
    CHECK(w0 < std::abs(mismatch(c, E.real() + 0.05)));
}

TEST_CASE("shooting and the basis matrix agree on the three lowest levels") {
    for (double eps : {-0.5, 1.0}) {
        // the truncation also has large spurious eigenvalues; take the smallest in modulus
        auto mat = truncated_spectrum(40, eps).eigenvalues;
        std::sort(mat.begin(), mat.end(), [](cplx a, cplx b) { return std::abs(a) < std::abs(b); });
        const Deformation d = Deformation::analytic(1, eps);
        for (int n = 0; n < 3; ++n) {
            const cplx E = find_eigenvalue(d, mat[n]);
            CHECK(std::abs(E - mat[n]) < 1e-3);
        }
    }
}

TEST_CASE("real-line problem") {
    SweepControls sc;
    const auto h = real_line_solve(2.0, 0.0, 5, sc);
    REQUIRE(h.size() == 5);
    for (int n = 0; n < 5; ++n) CHECK(h[n].energy.real() == doctest::Approx(2.0 * n + 1.0).epsilon(1e-8));

    // approach to the square well of half-width 1 as P grows
    auto ratio = [&](double P) {
        const auto r = real_line_solve(P, 0.0, 3, sc);
        double worst = 0.0;
        for (int n = 0; n < 3; ++n) worst = std::max(worst, std::abs(r[n].energy.real() / ((n + 1) * (n + 1) * pi * pi / 4.0) - 1.0));
        return worst;
    };
    const double r10 = ratio(10.0), r20 = ratio(20.0), r40 = ratio(40.0), r100 = ratio(100.0);
    CHECK(r20 < r10);
    CHECK(r40 < r20);
    CHECK(r100 < r40);

    const auto b = real_line_solve(3.0, -0.5, 6, sc);
    REQUIRE(b.size() == 6);
    for (const auto& r : b) CHECK(r.is_real);

    CHECK_THROWS_AS(real_line_solve(2.0, 2.0, 3, sc), DomainError);
}

TEST_CASE("Richardson halving check on eigenvalues") {
    CHECK(halving_defect(harmonic, 1.0) < 1e-8);
    CHECK(halving_defect(Deformation::analytic(1, 1.0), find_eigenvalue(Deformation::analytic(1, 1.0), 1.15)) < 1e-8);
    CHECK(halving_defect(Deformation::analytic(2, 0.0), 1.0603620904841813) < 1e-8);
}

TEST_CASE("property: Hermitian limit reproduced by the real-axis rays") {
    const auto oracle = quartic_levels(4);
    const auto scan = real_spectrum_by_scan(Deformation::analytic(2, 0.0), 4);
    for (int n = 0; n < 4; ++n) CHECK(std::abs(scan[n] - oracle[n]) < 1e-6);
}

TEST_CASE("property: scaling a seed scales the raw mismatch and leaves roots fixed") {
    const cplx k(2.5, -1.3);
    for (const Deformation& d : {harmonic, Deformation::analytic(1, 1.0), Deformation::analytic(1, -0.5)}) {
        ShootingControls plain, scaled;
        scaled.left_scale = k;
        const cplx E(1.7, 0.2);
        const auto a = mismatch_full(d, E, plain);
        const auto b = mismatch_full(d, E, scaled);
        const cplx ratio = (b.raw / a.raw) * std::exp(b.log_scale - a.log_scale);
        CHECK(std::abs(ratio - k) < 1e-10 * std::abs(k));

        ShootingControls right;
        right.right_scale = 1.0 / k;
        const cplx r0 = find_eigenvalue(d, 1.1, plain);
        CHECK(std::abs(find_eigenvalue(d, 1.1, scaled) - r0) < 1e-10);
        CHECK(std::abs(find_eigenvalue(d, 1.1, right) - r0) < 1e-10);
    }
}

TEST_CASE("property: conjugate of an eigenvalue is an eigenvalue") {
    // complex pair of p^2 + x^2 (ix)^-0.5 seen by the matrix method
    const auto mat = truncated_spectrum(40, -0.5).eigenvalues;
    cplx seed;
    for (const cplx e : mat)
        if (e.imag() > 1e-3) {
            seed = e;
            break;
        }
    REQUIRE(seed.imag() > 0.0);
    const Deformation d = Deformation::analytic(1, -0.5);
    const cplx up = find_eigenvalue(d, seed);
    const cplx down = find_eigenvalue(d, std::conj(seed));
    CHECK(up.imag() > 1e-3);
    CHECK(std::abs(down - std::conj(up)) < 1e-6 * std::abs(up));
}

TEST_CASE("anchor guesses order the Hermitian levels") {
    CHECK(anchor_guess(harmonic, 0) == doctest::Approx(1.0));
    CHECK(anchor_guess(harmonic, 4) == doctest::Approx(9.0));
    const Deformation q = Deformation::analytic(2, 0.0);
    for (int n = 1; n < 10; ++n) CHECK(anchor_guess(q, n) > anchor_guess(q, n - 1));
}
