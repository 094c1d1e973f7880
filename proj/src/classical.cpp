#include "ptlab/classical.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace ptlab {

const char* to_string(Termination t) {
    switch (t) {
        case Termination::closed: return "closed";
        case Termination::time_limit: return "time_limit";
        case Termination::escaped: return "escaped";
        case Termination::step_failure: return "step_failure";
    }
    return "unknown";
}

double Trajectory::rotation_turns() const {
    if (states.empty()) return 0.0;
    const double end = asymptote_theta ? *asymptote_theta : states.back().theta;
    return (end - states.front().theta) / (2.0 * pi);
}

std::vector<TurningPoint> turning_points(const Deformation& def, double E) {
    if (!def.is_analytic()) throw UnsupportedMode("turning points are defined for the analytic family only");
    if (!(E > 0.0)) throw DomainError("turning points require E > 0");
    const int K = def.K();
    const double eps = def.epsilon();
    const double deg = 2.0 * K + eps;
    if (!(deg > 0.0)) throw DomainError("no turning points for eps <= -2K");

    const double r = std::pow(E, 1.0 / deg);
    // arg x = (2 pi m - eps pi / 2) / deg, restricted to (-3pi/2, pi/2]
    const double lo = -1.5 * pi, hi = 0.5 * pi;
    const int m_lo = static_cast<int>(std::floor((lo * deg + eps * pi / 2) / (2 * pi))) - 1;
    const int m_hi = static_cast<int>(std::ceil((hi * deg + eps * pi / 2) / (2 * pi))) + 1;

    std::vector<TurningPoint> out;
    for (int m = m_lo; m <= m_hi; ++m) {
        const double phi = (2.0 * pi * m - eps * pi / 2.0) / deg;
        if (phi <= lo + 1e-14 || phi > hi + 1e-14) continue;
        TurningPoint tp;
        tp.arg = phi;
        tp.x = std::polar(r, phi);
        tp.branch = m;
        tp.primary = (m == 0 || m == -K);
        out.push_back(tp);
    }
    std::sort(out.begin(), out.end(), [](const TurningPoint& a, const TurningPoint& b) { return a.arg < b.arg; });
    return out;
}

namespace {

bool is_integer(double v) { return std::abs(v - std::round(v)) < 1e-14; }

bool origin_singular(const Deformation& def) {
    const double eps = def.epsilon();
    return !(is_integer(eps) && eps >= 0.0);
}

// dV/dx, exact at the origin for entire potentials.
cplx potential_gradient(const Deformation& def, cplx x, double theta) {
    const int K = def.K();
    const double eps = def.epsilon();
    cplx x_pow = 1.0;
    for (int k = 0; k < 2 * K - 1; ++k) x_pow *= x;
    cplx ix_eps;
    if (is_integer(eps) && eps >= 0.0) {
        ix_eps = 1.0;
        const cplx ix = I * x;
        for (int k = 0; k < static_cast<int>(std::round(eps)); ++k) ix_eps *= ix;
    } else {
        ix_eps = ix_power(x, theta, eps);
    }
    return (2.0 * K + eps) * x_pow * ix_eps;
}

double energy_defect(const Deformation& def, const ClassicalState& s, double E) {
    const cplx V = potential(def, s.x, s.theta);
    const cplx p2 = s.p * s.p;
    const double scale = std::max({std::abs(E), std::abs(V), std::abs(p2), 1e-300});
    return std::abs(p2 + V - E) / scale;
}

struct Derivs {
    cplx dx, dp;
};

// Rescaled-time derivatives: dx/dt = p, dp/dt = -V'(x)/2.
Derivs rescaled_rhs(const Deformation& def, cplx x, cplx p, double theta_ref, double guard) {
    if (origin_singular(def) && std::abs(x) < guard)
        throw NumericalError("trajectory passes too close to the branch point at the origin");
    const double theta = (std::abs(x) > 0.0) ? lift_arg(I * x, theta_ref) : theta_ref;
    return {p, -0.5 * potential_gradient(def, x, theta)};
}

// Dormand-Prince 5(4) tableau.
constexpr std::array<double, 7> c_dp{0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
constexpr double a_dp[7][6] = {
    {0, 0, 0, 0, 0, 0},
    {1.0 / 5, 0, 0, 0, 0, 0},
    {3.0 / 40, 9.0 / 40, 0, 0, 0, 0},
    {44.0 / 45, -56.0 / 15, 32.0 / 9, 0, 0, 0},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729, 0, 0},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656, 0},
    {35.0 / 384, 0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
constexpr std::array<double, 7> e_dp{71.0 / 57600, 0, -71.0 / 16695, 71.0 / 1920, -17253.0 / 339200, 22.0 / 525, -1.0 / 40};

struct StepResult {
    cplx x, p;
    double theta;
    double err_norm;
    double max_turn;  // largest |theta_stage - theta_start|
};

StepResult dp_step(const Deformation& def, const ClassicalState& s, double h, const IntegrationControls& c) {
    std::array<Derivs, 7> k{};
    double max_turn = 0.0;
    for (int i = 0; i < 7; ++i) {
        cplx xi = s.x, pi_ = s.p;
        for (int j = 0; j < i; ++j) {
            xi += h * a_dp[i][j] * k[j].dx;
            pi_ += h * a_dp[i][j] * k[j].dp;
        }
        if (std::abs(xi) > 0.0) max_turn = std::max(max_turn, std::abs(lift_arg(I * xi, s.theta) - s.theta));
        k[i] = rescaled_rhs(def, xi, pi_, s.theta, c.x_min_guard);
    }
    StepResult r{};
    r.x = s.x;
    r.p = s.p;
    cplx ex = 0.0, ep = 0.0;
    for (int i = 0; i < 7; ++i) {
        r.x += h * a_dp[6][std::min(i, 5)] * (i < 6 ? k[i].dx : cplx{});
        r.p += h * a_dp[6][std::min(i, 5)] * (i < 6 ? k[i].dp : cplx{});
        ex += h * e_dp[i] * k[i].dx;
        ep += h * e_dp[i] * k[i].dp;
    }
    r.theta = std::abs(r.x) > 0.0 ? lift_arg(I * r.x, s.theta) : s.theta;
    const double sx = c.atol + c.rtol * std::max(std::abs(s.x), std::abs(r.x));
    const double sp = c.atol + c.rtol * std::max(std::abs(s.p), std::abs(r.p));
    r.err_norm = std::max(std::abs(ex) / sx, std::abs(ep) / sp);
    r.max_turn = max_turn;
    return r;
}

ClassicalState advance(const Deformation& def, const ClassicalState& s, double h, const IntegrationControls& c) {
    const StepResult r = dp_step(def, s, h, c);
    return {r.x, r.p, r.theta, s.t + h};
}

double closure_indicator(const ClassicalState& s, cplx x0) {
    return std::real(std::conj(s.x - x0) * s.p);
}

}  // namespace

HamiltonRhs newton_rhs(const ClassicalState& s, const Deformation& def, double x_min_guard) {
    if (!def.is_analytic()) throw UnsupportedMode("classical dynamics is defined for the analytic family only");
    if (origin_singular(def) && std::abs(s.x) < x_min_guard)
        throw NumericalError("state is too close to the branch point at the origin");
    HamiltonRhs r;
    r.dx = 2.0 * s.p;
    r.dp = -potential_gradient(def, s.x, s.theta);
    r.dtheta = std::abs(s.x) > 0.0 ? std::imag(r.dx / s.x) : 0.0;
    return r;
}

Trajectory integrate(const Deformation& def, double E, cplx x0, int branch, const IntegrationControls& controls,
                     std::optional<double> theta0) {
    if (!def.is_analytic()) throw UnsupportedMode("classical dynamics is defined for the analytic family only");
    const int K = def.K();
    const double eps = def.epsilon();
    if (!(2.0 * K + eps > 0.0)) throw DomainError("classical mode requires eps > -2K");
    if (branch != 1 && branch != -1) throw DomainError("branch must be +1 or -1");
    if (origin_singular(def) && std::abs(x0) < controls.x_min_guard)
        throw DomainError("initial point sits on the branch point at the origin");

    IntegrationControls c = controls;
    if (c.t_max <= 0.0) c.t_max = (K == 1 && eps > -2.0) ? 50.0 * period_formula(eps, std::max(E, 1e-12)) : 200.0;
    if (c.t_detect_min <= 0.0) c.t_detect_min = 10.0 * c.dt_init;
    if (c.tol_x <= 0.0) c.tol_x = 1e-6 * std::max(1.0, std::abs(x0));
    if (c.tol_p <= 0.0) c.tol_p = c.tol_x;

    Trajectory tr;
    tr.K = K;
    tr.epsilon = eps;
    tr.energy = E;

    ClassicalState s;
    s.x = x0;
    s.theta = theta0 ? *theta0 : principal_theta(x0);
    s.t = 0.0;
    const cplx rest = E - potential(def, x0, s.theta);
    s.p = std::abs(rest) < 1e-12 * std::max(1.0, std::abs(E)) ? cplx{} : static_cast<double>(branch) * std::sqrt(rest);
    tr.states.push_back(s);
    const ClassicalState start = s;

    double h = c.dt_init;
    long steps = 0;
    while (true) {
        if (s.t >= c.t_max) {
            tr.termination = Termination::time_limit;
            break;
        }
        if (++steps > c.max_steps) {
            tr.termination = Termination::time_limit;
            break;
        }
        h = std::min(h, c.t_max - s.t);
        if (h < c.h_min) {
            tr.termination = Termination::step_failure;
            break;
        }
        StepResult r;
        try {
            r = dp_step(def, s, h, c);
        } catch (const NumericalError&) {
            h *= 0.25;
            continue;
        }
        // A large turn of arg(ix) inside one step means the step skipped past the
        // branch point; only matters when the potential is multivalued.
        const bool turn_too_large = r.max_turn > 0.5 && !is_integer(eps);
        if (!std::isfinite(r.err_norm) || r.err_norm > 1.0 || turn_too_large) {
            const double fac = std::isfinite(r.err_norm) && r.err_norm > 0.0
                                   ? std::clamp(0.9 * std::pow(r.err_norm, -0.2), 0.1, 0.5)
                                   : 0.25;
            h *= fac;
            continue;
        }
        ClassicalState next{r.x, r.p, r.theta, s.t + h};
        const double drift = energy_defect(def, next, E);
        if (drift > c.tol_energy) {
            h *= 0.5;
            continue;
        }

        if (c.detect_closure && next.t > c.t_detect_min && closure_indicator(s, start.x) < 0.0 &&
            closure_indicator(next, start.x) >= 0.0) {
            // Locate the closest approach to x0 inside this step.
            double lo = 0.0, hi = h;
            for (int it = 0; it < 80 && hi - lo > 1e-15 * std::max(1.0, s.t); ++it) {
                const double mid = 0.5 * (lo + hi);
                if (closure_indicator(advance(def, s, mid, c), start.x) < 0.0)
                    lo = mid;
                else
                    hi = mid;
            }
            const ClassicalState best = advance(def, s, 0.5 * (lo + hi), c);
            const double turns = (best.theta - start.theta) / (2.0 * pi);
            const double m = std::round(turns);
            if (std::abs(best.x - start.x) < c.tol_x && std::abs(best.p - start.p) < c.tol_p &&
                std::abs(best.theta - start.theta - 2.0 * pi * m) < c.tol_theta) {
                tr.max_energy_drift = std::max(tr.max_energy_drift, energy_defect(def, best, E));
                tr.states.push_back(best);
                tr.closed = true;
                tr.period = best.t;
                // With integer eps the potential is single-valued and there is one sheet.
                tr.winding = is_integer(eps) ? 0 : static_cast<int>(m);
                tr.termination = Termination::closed;
                break;
            }
        }

        tr.max_energy_drift = std::max(tr.max_energy_drift, drift);
        tr.states.push_back(next);
        s = next;

        if (std::abs(s.x) > c.R_escape) {
            tr.termination = Termination::escaped;
            // w = (ix)^gamma grows linearly in time once E is negligible; its
            // limiting direction is that of dw/dt.
            const double gamma = 1.0 - K - eps / 2.0;
            if (std::abs(gamma) > 1e-12) {
                const double arg_w = gamma * s.theta;
                const double arg_dw = std::arg(gamma * I * s.p) + (gamma - 1.0) * s.theta;
                double d = std::remainder(arg_dw - arg_w, 2.0 * pi);
                tr.asymptote_theta = s.theta + d / gamma;
            }
            break;
        }

        const double fac = r.err_norm > 0.0 ? std::clamp(0.9 * std::pow(r.err_norm, -0.2), 0.2, 5.0) : 5.0;
        h *= fac;
    }
    return tr;
}

double period_formula(double epsilon, double E) {
    if (!(epsilon > -2.0)) throw DomainError("period formula requires eps > -2");
    if (!(E > 0.0)) throw DomainError("period formula requires E > 0");
    const double e = epsilon;
    return 4.0 * std::sqrt(pi) * std::pow(E, -e / (4.0 + 2.0 * e)) * std::tgamma((3.0 + e) / (2.0 + e)) /
           std::tgamma((4.0 + e) / (4.0 + 2.0 * e)) * std::cos(e * pi / (4.0 + 2.0 * e));
}

double spiral_angle(double epsilon) {
    if (epsilon >= 0.0) throw DomainError("no spiral phase for eps >= 0");
    if (!(epsilon > -1.0)) throw DomainError("spiral angle requires -1 < eps < 0");
    if (epsilon > -1e-12) return std::numeric_limits<double>::infinity();
    return -(2.0 + epsilon) * pi / (2.0 * epsilon);
}

std::function<cplx(double)> exact_solution(const ExactCase& c) {
    struct Visitor {
        std::function<cplx(double)> operator()(const HarmonicCase& h) const {
            const cplx a = std::acos(h.x0);
            const double sgn = h.sign >= 0 ? 1.0 : -1.0;
            return [a, sgn](double t) { return std::cos(a + sgn * t); };
        }
        std::function<cplx(double)> operator()(const CardioidCase&) const {
            return [](double t) {
                const cplx d = t + 2.0 * I / std::sqrt(3.0);
                return 4.0 * I / (d * d);
            };
        }
        std::function<cplx(double)> operator()(const ParabolaCase& p) const {
            const double b = p.b;
            return [b](double t) { return cplx{b * t, 1.0 - b * b + 0.25 * t * t}; };
        }
    };
    return std::visit(Visitor{}, c);
}

namespace {

double point_segment_distance(cplx q, cplx a, cplx b) {
    const cplx ab = b - a;
    const double len2 = std::norm(ab);
    if (len2 == 0.0) return std::abs(q - a);
    const double t = std::clamp(std::real(std::conj(ab) * (q - a)) / len2, 0.0, 1.0);
    return std::abs(q - (a + t * ab));
}

double directed_hausdorff(const std::vector<cplx>& from, const std::vector<cplx>& to) {
    double worst = 0.0;
    for (const cplx q : from) {
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i + 1 < to.size(); ++i) best = std::min(best, point_segment_distance(q, to[i], to[i + 1]));
        if (to.size() == 1) best = std::abs(q - to[0]);
        worst = std::max(worst, best);
    }
    return worst;
}

}  // namespace

double pt_mirror_defect(const Trajectory& tr) {
    std::vector<cplx> pts, mirrored;
    pts.reserve(tr.states.size());
    for (const auto& s : tr.states) {
        pts.push_back(s.x);
        mirrored.push_back(-std::conj(s.x));
    }
    double diam = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); j += std::max<std::size_t>(1, pts.size() / 400))
            diam = std::max(diam, std::abs(pts[i] - pts[j]));
    if (diam == 0.0) return 0.0;
    return std::max(directed_hausdorff(mirrored, pts), directed_hausdorff(pts, mirrored)) / diam;
}

}  // namespace ptlab
