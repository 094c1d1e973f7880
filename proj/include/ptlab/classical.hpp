#pragma once

// Complex classical mechanics for H = p^2 + x^{2K}(ix)^eps.
//
// Sheets of the multivalued factor (ix)^eps are tracked with one continuous
// real variable theta = arg(ix) carried along each path, so (ix)^a is always
// |x|^a e^{i a theta}. Winding numbers fall out of theta at closure.
//
// Time convention: trajectories are parameterized by the rescaled time in
// which dx/dt = +-sqrt(E - V(x)), so that the harmonic ellipses have period
// 2 pi. In that time the state variable p equals dx/dt, which is half the
// Hamilton-equation velocity 2p returned by newton_rhs.

#include "ptlab/deformation.hpp"

#include <functional>
#include <optional>
#include <variant>
#include <vector>

namespace ptlab {

struct ClassicalState {
    cplx x;
    cplx p;
    double theta = 0.0;  // continuous arg(ix)
    double t = 0.0;
};

enum class Termination { closed, time_limit, escaped, step_failure };

const char* to_string(Termination t);

struct Trajectory {
    int K = 1;
    double epsilon = 0.0;
    double energy = 0.0;
    std::vector<ClassicalState> states;
    bool closed = false;
    std::optional<double> period;
    int winding = 0;
    Termination termination = Termination::time_limit;
    // Largest |H - E| seen, relative to max(|E|, |V|, |p|^2).
    double max_energy_drift = 0.0;
    // For escaping paths: extrapolated theta at |x| -> infinity.
    std::optional<double> asymptote_theta;

    // Net rotation from the start to the asymptote (or to the last state), in turns.
    double rotation_turns() const;
};

struct TurningPoint {
    cplx x;
    double arg = 0.0;   // in (-3pi/2, pi/2]
    int branch = 0;     // m in (2K+eps) arg + eps pi/2 = 2 pi m
    bool primary = false;
};

// Roots of E = x^{2K}(ix)^eps on the principal sheet, ordered by argument.
// The PT-symmetric pair that continues off the real axis from eps = 0 is
// flagged primary (branches 0 and -K).
std::vector<TurningPoint> turning_points(const Deformation& def, double E);

struct HamiltonRhs {
    cplx dx;       // dH/dp = 2p
    cplx dp;       // -dV/dx
    double dtheta; // Im(dx / x)
};

// Throws NumericalError when |x| < x_min_guard and eps makes the origin singular.
HamiltonRhs newton_rhs(const ClassicalState& s, const Deformation& def, double x_min_guard = 1e-10);

struct IntegrationControls {
    double dt_init = 1e-3;
    double rtol = 1e-12;
    double atol = 1e-14;
    double tol_energy = 1e-8;
    double t_max = 0.0;          // <= 0: 50 * period_formula for K = 1, else 200
    double R_escape = 1e3;
    double t_detect_min = 0.0;   // <= 0: 10 * dt_init
    double tol_x = 0.0;          // <= 0: 1e-6 * max(1, |x0|)
    double tol_p = 0.0;          // <= 0: same as tol_x
    double tol_theta = 1e-6;
    double x_min_guard = 1e-10;
    double h_min = 1e-14;
    long max_steps = 5'000'000;
    bool detect_closure = true;
};

// Integrates from x0 with p0 = branch * sqrt(E - V(x0)). theta0 defaults to the
// principal arg(i x0); pass another value to start on a different sheet.
Trajectory integrate(const Deformation& def, double E, cplx x0, int branch,
                     const IntegrationControls& controls = {},
                     std::optional<double> theta0 = std::nullopt);

// Period of the oscillation between the primary turning points, K = 1.
double period_formula(double epsilon, double E);

// Asymptotic angle of the broken-phase spirals, K = 1.
double spiral_angle(double epsilon);

struct HarmonicCase {
    cplx x0;
    int sign = 1;
};
struct CardioidCase {};
struct ParabolaCase {
    double b = 0.0;
};
using ExactCase = std::variant<HarmonicCase, CardioidCase, ParabolaCase>;

// Closed-form paths: harmonic ellipses (eps = 0), the limiting cardioid (eps = 1)
// and the eps = -1 parabolas.
std::function<cplx(double)> exact_solution(const ExactCase& c);

// Hausdorff distance between the orbit and its reflection x -> -conj(x),
// divided by the orbit diameter. Segments between states are used as a polyline.
double pt_mirror_defect(const Trajectory& tr);

}  // namespace ptlab
