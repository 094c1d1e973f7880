#include "doctest.h"

#include "ptlab/classical.hpp"

#include <algorithm>
#include <cmath>

using namespace ptlab;

namespace {

bool contains_point(const std::vector<TurningPoint>& tps, cplx z, double tol = 1e-10) {
    return std::any_of(tps.begin(), tps.end(), [&](const TurningPoint& t) { return std::abs(t.x - z) < tol; });
}

cplx primary_left(const Deformation& def, double E) {
    for (const auto& t : turning_points(def, E))
        if (t.primary) return t.x;
    FAIL("no primary turning point");
    return {};
}

double state_drift(const Deformation& def, const ClassicalState& s, double E) {
    const cplx V = potential(def, s.x, s.theta);
    const double scale = std::max({std::abs(E), std::abs(V), std::norm(s.p)});
    return std::abs(s.p * s.p + V - E) / scale;
}

}  // namespace

TEST_CASE("turning points of the harmonic, cubic and quartic cases") {
    auto h = turning_points(Deformation::analytic(1, 0.0), 1.0);
    REQUIRE(h.size() == 2);
    CHECK(contains_point(h, 1.0));
    CHECK(contains_point(h, -1.0));

    auto c = turning_points(Deformation::analytic(1, 1.0), 1.0);
    REQUIRE(c.size() == 3);
    CHECK(contains_point(c, std::polar(1.0, -5.0 * pi / 6.0)));
    CHECK(contains_point(c, std::polar(1.0, -pi / 6.0)));
    CHECK(contains_point(c, I));
    int primaries = 0;
    for (const auto& t : c) {
        if (!t.primary) continue;
        ++primaries;
        CHECK(t.x.imag() < 0.0);
    }
    CHECK(primaries == 2);

    auto q = turning_points(Deformation::analytic(1, 2.0), 1.0);
    REQUIRE(q.size() == 4);
    for (double a : {-0.75, -0.25, 0.25, 0.75}) CHECK(contains_point(q, std::polar(1.0, a * pi)));
    for (std::size_t i = 1; i < q.size(); ++i) CHECK(q[i - 1].arg < q[i].arg);
    for (const auto& t : q) {
        CHECK(t.arg > -1.5 * pi);
        CHECK(t.arg <= 0.5 * pi + 1e-12);
    }
    CHECK_THROWS_AS(turning_points(Deformation::nonanalytic(2.0, 0.0), 1.0), UnsupportedMode);
}

TEST_CASE("Hamilton right-hand sides") {
    const Deformation h = Deformation::analytic(1, 0.0);
    auto r = newton_rhs({1.0, 0.0, principal_theta(1.0), 0.0}, h);
    CHECK(std::abs(r.dx) < 1e-15);
    CHECK(std::abs(r.dp - cplx(-2.0)) < 1e-14);
    r = newton_rhs({0.5, 0.3, principal_theta(0.5), 0.0}, h);
    CHECK(std::abs(r.dx - cplx(0.6)) < 1e-14);
    CHECK(std::abs(r.dp - cplx(-1.0)) < 1e-14);

    // Force against a central difference of the sheet-continued potential.
    for (const double eps : {1.0, 0.5, -0.3}) {
        const Deformation d = Deformation::analytic(1, eps);
        const cplx x = I;
        const double th = pi;   // arg(i * i) taken as +pi
        const double step = 1e-6;
        auto V = [&](cplx z) { return potential(d, z, lift_arg(I * z, th)); };
        const cplx fd = -(V(x + step) - V(x - step)) / (2.0 * step);
        const auto rr = newton_rhs({x, 0.0, th, 0.0}, d);
        CHECK(std::abs(rr.dp - fd) < 1e-7 * std::max(1.0, std::abs(fd)));
        // dtheta/dt = Im(dx/dt / x)
        const auto moving = newton_rhs({x, cplx(0.3, 0.1), th, 0.0}, d);
        CHECK(moving.dtheta == doctest::Approx(std::imag(moving.dx / x)));
    }
    const Deformation sing = Deformation::analytic(1, -0.5);
    CHECK_THROWS_AS(newton_rhs({1e-12, 0.0, 0.0, 0.0}, sing), NumericalError);
}

TEST_CASE("harmonic ellipse closes with period 2 pi") {
    const Deformation h = Deformation::analytic(1, 0.0);
    const Trajectory tr = integrate(h, 1.0, cplx(0.0, 0.5), 1);
    CHECK(tr.termination == Termination::closed);
    REQUIRE(tr.period.has_value());
    CHECK(*tr.period == doctest::Approx(2.0 * pi).epsilon(1e-8));
    CHECK(tr.winding == 0);
    for (std::size_t i = 1; i < tr.states.size(); ++i) CHECK(tr.states[i].t > tr.states[i - 1].t);
}

TEST_CASE("eps = 1 arc between the turning points has the closed-form period") {
    const Deformation d = Deformation::analytic(1, 1.0);
    const Trajectory tr = integrate(d, 1.0, std::polar(1.0, -5.0 * pi / 6.0), 1);
    REQUIRE(tr.period.has_value());
    const double T = 2.0 * std::sqrt(3.0 * pi) * std::tgamma(4.0 / 3.0) / std::tgamma(5.0 / 6.0);
    CHECK(T == doctest::Approx(4.858).epsilon(1e-3));
    CHECK(*tr.period == doctest::Approx(T).epsilon(1e-6));
    // the arc reaches the other turning point
    double closest = 1e9;
    for (const auto& s : tr.states) closest = std::min(closest, std::abs(s.x - std::polar(1.0, -pi / 6.0)));
    CHECK(closest < 1e-2);
}

TEST_CASE("broken-phase spiral escapes after about 2 1/4 turns") {
    const Deformation d = Deformation::analytic(1, -0.2);
    const Trajectory tr = integrate(d, 1.0, primary_left(d, 1.0), 1);
    CHECK(tr.termination == Termination::escaped);
    CHECK(std::abs(tr.rotation_turns()) == doctest::Approx(2.25).epsilon(0.02));
}

TEST_CASE("period formula") {
    CHECK(period_formula(0.0, 1.0) == doctest::Approx(2.0 * pi).epsilon(1e-14));
    CHECK(period_formula(1.0, 1.0) ==
          doctest::Approx(2.0 * std::sqrt(3.0 * pi) * std::tgamma(4.0 / 3.0) / std::tgamma(5.0 / 6.0)).epsilon(1e-13));
    CHECK(period_formula(2.0, 1.0) ==
          doctest::Approx(2.0 * std::sqrt(2.0 * pi) * std::tgamma(1.25) / std::tgamma(0.75)).epsilon(1e-13));
    CHECK_THROWS_AS(period_formula(-2.0, 1.0), DomainError);
}

TEST_CASE("spiral asymptote angle") {
    CHECK(spiral_angle(-0.2) == doctest::Approx(4.5 * pi));
    CHECK(spiral_angle(-0.1) == doctest::Approx(9.5 * pi));
    CHECK(std::isinf(spiral_angle(-1e-300)));
    CHECK_THROWS_AS(spiral_angle(0.0), DomainError);
    CHECK_THROWS_AS(spiral_angle(0.3), DomainError);
}

TEST_CASE("closed-form special paths") {
    CHECK(std::abs(exact_solution(HarmonicCase{1.0, 1})(pi / 2.0)) < 1e-15);
    CHECK(std::abs(exact_solution(CardioidCase{})(0.0) - cplx(0.0, -3.0)) < 1e-14);
    CHECK(std::abs(exact_solution(ParabolaCase{0.0})(2.0) - cplx(0.0, 2.0)) < 1e-14);

    // each path satisfies (dx/dt)^2 = E - V(x) in the rescaled time
    const double h = 1e-5;
    auto residual = [&](const std::function<cplx(double)>& x, double t, auto&& rhs) {
        const cplx v = (x(t + h) - x(t - h)) / (2.0 * h);
        return std::abs(v * v - rhs(x(t)));
    };
    for (double t : {-1.3, 0.2, 2.5}) {
        const auto ell = exact_solution(HarmonicCase{cplx(0.3, 0.4), 1});
        CHECK(residual(ell, t, [](cplx x) { return 1.0 - x * x; }) < 1e-8);
        const auto card = exact_solution(CardioidCase{});
        CHECK(residual(card, t, [](cplx x) { return -I * x * x * x; }) < 1e-7);
        const auto par = exact_solution(ParabolaCase{0.75});
        CHECK(residual(par, t, [](cplx x) { return 1.0 + I * x; }) < 1e-8);
    }
}

TEST_CASE("property: energy is conserved on every accepted step") {
    const std::vector<std::pair<int, double>> cases = {{1, 0.0}, {1, 0.5}, {1, 1.0}, {1, 2.0}, {2, 0.7}};
    for (const auto& [K, eps] : cases) {
        const Deformation d = Deformation::analytic(K, eps);
        const Trajectory tr = integrate(d, 1.0, primary_left(d, 1.0), 1);
        double worst = 0.0;
        for (const auto& s : tr.states) worst = std::max(worst, state_drift(d, s, 1.0));
        CHECK(worst <= 1e-8);
        CHECK(tr.max_energy_drift <= 1e-8);
    }
}

TEST_CASE("property: closed unbroken-phase orbits are PT mirror images of themselves") {
    for (const double eps : {0.0, 0.5, 1.0, 2.0}) {
        const Deformation d = Deformation::analytic(1, eps);
        for (const cplx x0 : {primary_left(d, 1.0), cplx(0.0, -1.5)}) {
            const Trajectory tr = integrate(d, 1.0, x0, 1);
            REQUIRE(tr.closed);
            CHECK(pt_mirror_defect(tr) <= 1e-4);
        }
    }
}

TEST_CASE("property: nested orbits share one period") {
    const Deformation h = Deformation::analytic(1, 0.0);
    const double Ta = *integrate(h, 1.0, cplx(0.0, 0.3), 1).period;
    const double Tb = *integrate(h, 1.0, cplx(0.0, 0.9), 1).period;
    CHECK(Ta == doctest::Approx(Tb).epsilon(1e-4));

    const Deformation c = Deformation::analytic(1, 1.0);
    const Trajectory a = integrate(c, 1.0, cplx(0.0, -0.8), 1);
    const Trajectory b = integrate(c, 1.0, cplx(0.0, -2.0), 1);
    REQUIRE(a.closed);
    REQUIRE(b.closed);
    CHECK(a.winding == 0);
    CHECK(b.winding == 0);
    CHECK(*a.period == doctest::Approx(*b.period).epsilon(1e-4));
}

TEST_CASE("property: detected arc periods match the period formula") {
    for (const double eps : {0.0, 0.5, 1.0, 2.0}) {
        const Deformation d = Deformation::analytic(1, eps);
        const Trajectory tr = integrate(d, 1.0, primary_left(d, 1.0), 1);
        REQUIRE(tr.period.has_value());
        CHECK(*tr.period == doctest::Approx(period_formula(eps, 1.0)).epsilon(1e-3));
    }
}

TEST_CASE("property: integration tracks the exact harmonic ellipse") {
    const cplx x0(0.0, 0.5);
    const Trajectory tr = integrate(Deformation::analytic(1, 0.0), 1.0, x0, 1);
    // p0 = +sqrt(1 - x0^2) > 0, so x(t) = cos(arccos x0 - t)
    const auto exact = exact_solution(HarmonicCase{x0, -1});
    double worst = 0.0;
    for (const auto& s : tr.states) worst = std::max(worst, std::abs(s.x - exact(s.t)));
    CHECK(worst < 1e-6);
}

TEST_CASE("property: theta stays continuous along a path") {
    const Deformation d = Deformation::analytic(1, -0.15);
    const Trajectory tr = integrate(d, 1.0, primary_left(d, 1.0), 1);
    for (std::size_t i = 1; i < tr.states.size(); ++i) CHECK(std::abs(tr.states[i].theta - tr.states[i - 1].theta) < 0.6);
    for (const auto& s : tr.states) CHECK(std::abs(std::polar(std::abs(s.x), s.theta) - I * s.x) < 1e-9 * std::max(1.0, std::abs(s.x)));
}

TEST_CASE("x^4 (ix)^-0.7: the orbit launched near the turning points is faster") {
    const Deformation d = Deformation::analytic(2, -0.7);
    const cplx tp = primary_left(d, 1.0);
    const Trajectory arc = integrate(d, 1.0, tp, 1);
    const Trajectory near = integrate(d, 1.0, 1.2 * tp, 1);
    REQUIRE(arc.period.has_value());
    REQUIRE(near.period.has_value());
    CHECK(*near.period < *arc.period);
    MESSAGE("turning-point orbit T = " << *arc.period << ", nearby orbit T = " << *near.period);
}
