#include "ptlab/wkb.hpp"

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>

namespace ptlab {

namespace {

void require_nonnegative_eps(double epsilon) {
    if (epsilon < 0.0)
        throw DomainError("WKB phase-integral path crosses the cut for eps < 0");
}

double leading_base(int n, double e, bool with_sin) {
    if (n < 0) throw DomainError("level index must be nonnegative");
    double num = std::tgamma((8.0 + 3.0 * e) / (4.0 + 2.0 * e)) * std::sqrt(pi) * (n + 0.5);
    double den = std::tgamma((3.0 + e) / (2.0 + e));
    if (with_sin) den *= std::sin(pi / (2.0 + e));
    return std::pow(num / den, (4.0 + 2.0 * e) / (4.0 + e));
}

// Closed-contour correction to the K = 1 phase integral, from the finite part of
// the endpoint-divergent ray integral.
double nlo_phase_term(double E, double e) {
    const double g = std::tgamma((3.0 + 2.0 * e) / (2.0 + e)) / std::tgamma((4.0 + 3.0 * e) / (4.0 + 2.0 * e));
    return -std::pow(E, -(4.0 + e) / (4.0 + 2.0 * e)) * e * std::sqrt(pi) / 24.0 * std::sin(pi / (2.0 + e)) * g;
}

// Argument of x_+; x_- sits at -pi - phi.
double right_turning_angle(int K, double e) {
    return -e * pi / (2.0 * (2.0 * K + e));
}

}  // namespace

const char* to_string(WkbOrder o) {
    return o == WkbOrder::leading ? "leading" : "nlo";
}

const char* to_string(WkbFamily f) {
    switch (f) {
        case WkbFamily::analytic_K1: return "analytic_K1";
        case WkbFamily::analytic_general_K: return "analytic_general_K";
        case WkbFamily::abs_potential: return "abs_potential";
    }
    return "unknown";
}

std::pair<cplx, cplx> wkb_turning_pair(double E, double epsilon) {
    if (!(E > 0.0)) throw DomainError("WKB turning points need E > 0");
    if (!(epsilon > -2.0)) throw DomainError("WKB turning points need eps > -2");
    const double r = std::pow(E, 1.0 / (2.0 + epsilon));
    return {std::polar(r, pi * (4.0 + 3.0 * epsilon) / (4.0 + 2.0 * epsilon)),
            std::polar(r, -pi * epsilon / (4.0 + 2.0 * epsilon))};
}

double wkb_leading(int n, double epsilon) {
    require_nonnegative_eps(epsilon);
    return leading_base(n, epsilon, true);
}

double wkb_nlo(int n, double epsilon) {
    require_nonnegative_eps(epsilon);
    if (n < 1) throw DomainError("NLO WKB is asymptotic in n; needs n >= 1");
    const double e = epsilon;
    const double nh = n + 0.5;
    const double corr = (2.0 + e) * (1.0 + e) * std::sin(2.0 * pi / (2.0 + e)) / (6.0 * pi * nh * nh * (4.0 + e) * (4.0 + e));
    return leading_base(n, e, true) * (1.0 + corr);
}

double abs_wkb(int n, double epsilon, WkbOrder order) {
    if (!(epsilon > -2.0)) throw DomainError("|x|^{2+eps} WKB needs eps > -2");
    const double e = epsilon;
    const double lo = leading_base(n, e, false);
    if (order == WkbOrder::leading) return lo;
    const double nh = n + 0.5;
    const double corr = (2.0 + e) * (1.0 + e) / std::tan(pi / (2.0 + e)) / (3.0 * pi * nh * nh * (4.0 + e) * (4.0 + e));
    return lo * (1.0 + corr);
}

cplx reduced_phase_integrand(const Deformation& def, double s) {
    if (!def.is_analytic()) throw UnsupportedMode("WKB phase integral needs the analytic family");
    require_nonnegative_eps(def.epsilon());
    const double phi = right_turning_angle(def.K(), def.epsilon());
    const cplx xp = std::polar(1.0, phi);
    const cplx xm = std::polar(1.0, -pi - phi);
    auto root = [&](cplx dir) {
        const cplx x = s * dir;
        return std::sqrt(1.0 - (s == 0.0 ? cplx(0.0) : potential(def, x, principal_theta(x))));
    };
    // the left ray runs inward from x_-
    const cplx total = xp * root(xp) - xm * root(xm);
    return total;
}

double phase_integral(const Deformation& def, double E, WkbOrder order) {
    if (!def.is_analytic()) throw UnsupportedMode("WKB phase integral needs the analytic family");
    require_nonnegative_eps(def.epsilon());
    if (!(E > 0.0)) throw DomainError("phase integral needs E > 0");
    if (order == WkbOrder::nlo && def.K() != 1) throw UnsupportedMode("NLO phase integral is implemented for K = 1 only");

    const double d = def.degree();
    // s = 1 - u^2 removes the square-root endpoint at s = 1; the s^d kink at
    // s = 0 for noninteger d is left to the double-exponential rule
    auto re = [&](double u) { return 2.0 * u * reduced_phase_integrand(def, 1.0 - u * u).real(); };
    auto im = [&](double u) { return 2.0 * u * reduced_phase_integrand(def, 1.0 - u * u).imag(); };
    thread_local boost::math::quadrature::tanh_sinh<double> rule;
    double err = 0.0;
    const double J = rule.integrate(re, 0.0, 1.0, 1e-13, &err);
    const double Jim = rule.integrate(im, 0.0, 1.0, 1e-13);
    if (!(err <= 1e-10 * std::abs(J))) throw NumericalError("phase integral quadrature did not converge");
    if (std::abs(Jim) > 1e-8 * std::abs(J)) throw NumericalError("phase integral is not real along the rays");

    double value = std::pow(E, 0.5 + 1.0 / d) * J;
    if (order == WkbOrder::nlo) value += nlo_phase_term(E, def.epsilon());
    return value;
}

WkbEstimate wkb_quantize(const Deformation& def, int n, WkbOrder order) {
    if (n < 0) throw DomainError("level index must be nonnegative");
    if (order == WkbOrder::nlo && n < 1) throw DomainError("NLO WKB is asymptotic in n; needs n >= 1");
    const double target = (n + 0.5) * pi;
    const double d = def.degree();
    const double q = 0.5 + 1.0 / d;   // leading phase grows like E^q

    // Start from the leading-order scaling law.
    double E = std::pow(target / phase_integral(def, 1.0), 1.0 / q);
    for (int it = 0; it < 50; ++it) {
        const double f = phase_integral(def, E, order) - target;
        const double h = 1e-6 * E;
        const double df = (phase_integral(def, E + h, order) - phase_integral(def, E - h, order)) / (2.0 * h);
        const double step = f / df;
        E -= step;
        if (!(E > 0.0)) throw NumericalError("WKB Newton iteration left E > 0");
        if (std::abs(step) < 1e-13 * E) {
            WkbEstimate w;
            w.n = n;
            w.epsilon = def.epsilon();
            w.E = E;
            w.order = order;
            w.family = def.K() == 1 ? WkbFamily::analytic_K1 : WkbFamily::analytic_general_K;
            return w;
        }
    }
    throw NumericalError("WKB Newton iteration did not converge");
}

std::vector<WkbEstimate> wkb_levels(int K, double epsilon, int n_levels, WkbOrder order) {
    require_nonnegative_eps(epsilon);
    std::vector<WkbEstimate> out;
    const Deformation def = Deformation::analytic(K, epsilon);
    for (int n = order == WkbOrder::nlo ? 1 : 0; n < n_levels; ++n) {
        if (K == 1) {
            WkbEstimate w;
            w.n = n;
            w.epsilon = epsilon;
            w.order = order;
            w.E = order == WkbOrder::leading ? wkb_leading(n, epsilon) : wkb_nlo(n, epsilon);
            out.push_back(w);
        } else {
            out.push_back(wkb_quantize(def, n, order));
        }
    }
    return out;
}

}  // namespace ptlab
