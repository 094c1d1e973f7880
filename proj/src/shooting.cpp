#include "ptlab/shooting.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ptlab {

const char* to_string(Method m) {
    switch (m) {
        case Method::shooting: return "shooting";
        case Method::matrix: return "matrix";
        case Method::wkb_lo: return "wkb_lo";
        case Method::wkb_nlo: return "wkb_nlo";
    }
    return "unknown";
}

bool classify_real(cplx E, double tol_real) {
    return std::abs(E.imag()) <= tol_real * std::max(1.0, std::abs(E));
}

WedgeGeometry wedges(int K, double epsilon) {
    if (K < 1) throw DomainError("wedges require K >= 1");
    const double d = 2.0 * K + epsilon + 2.0;
    if (!(d > 0.0)) throw DomainError("degenerate wedges: 2K + eps + 2 <= 0");
    WedgeGeometry w;
    w.theta_right = -epsilon * pi / (2.0 * d);
    w.theta_left = -pi - w.theta_right;
    w.opening = 2.0 * pi / d;
    return w;
}

SeedValue asymptotic_seed(cplx x, int K, double epsilon, bool decaying) {
    if (std::abs(x) == 0.0) throw DomainError("seed point must be away from the origin");
    const double a = K + 1.0 + epsilon / 2.0;
    if (!(a > 0.0)) throw DomainError("no decaying solution for K + 1 + eps/2 <= 0");
    double phi = std::arg(x);
    if (phi > pi / 2) phi -= 2.0 * pi;
    const double r = std::abs(x);
    // i^{eps/2} x^{a} and i^{eps/2} x^{a-1}
    const cplx ia = std::polar(1.0, pi * epsilon / 4.0);
    const cplx xa = std::polar(std::pow(r, a), a * phi);
    const cplx xa1 = std::polar(std::pow(r, a - 1.0), (a - 1.0) * phi);
    const double sign = decaying ? -1.0 : 1.0;
    // Decay along the ray requires Re(sign * i^{eps/2} x^a) to fall with |x|.
    if (sign * std::real(ia * xa) >= 0.0)
        throw DomainError("selected seed grows along the ray; point lies outside the Stokes wedge");
    SeedValue s;
    s.psi = std::exp(sign * ia * xa / a);
    s.dpsi = sign * ia * xa1 * s.psi;
    return s;
}

RayGeometry ray_geometry(const Deformation& def, Side side) {
    RayGeometry g;
    const double eps = def.epsilon();
    if (def.is_analytic()) {
        const WedgeGeometry w = wedges(def.K(), eps);
        g.alpha = side == Side::right ? w.theta_right : w.theta_left;
        g.potential_phase = 2.0 * def.K() * g.alpha + eps * (g.alpha + pi / 2.0);
    } else {
        if (!(std::abs(eps) < 2.0)) throw DomainError("real-line boundary condition is undefined for |eps| >= 2");
        g.alpha = side == Side::right ? 0.0 : -pi;
        g.potential_phase = eps * (g.alpha + pi / 2.0);
    }
    g.degree = def.degree();
    if (!(g.degree > 0.0)) throw DomainError("potential is singular at the origin (degree <= 0)");
    g.c = std::polar(1.0, 2.0 * g.alpha + g.potential_phase);
    g.sqrt_c = std::polar(1.0, g.alpha + g.potential_phase / 2.0);
    if (g.sqrt_c.real() < 0.0) g.sqrt_c = -g.sqrt_c;  // decaying root
    if (!(g.sqrt_c.real() > 1e-12)) throw DomainError("ray does not lie inside a Stokes wedge");
    return g;
}

double start_radius(const Deformation& def, double energy_scale, const ShootingControls& c) {
    if (c.R_start > 0.0) return c.R_start;
    const RayGeometry g = ray_geometry(def, Side::right);
    const double a = g.degree / 2.0 + 1.0;
    const double r_tp = std::pow(std::max(energy_scale, 1e-3), 1.0 / g.degree);
    return std::pow(a * c.target_exponent / g.sqrt_c.real() + std::pow(r_tp, a), 1.0 / a);
}

double match_depth(const Deformation& def, double energy_scale, const ShootingControls& c) {
    if (c.match_depth >= 0.0) return c.match_depth;
    const double eps = def.epsilon();
    if (!def.is_analytic() || !(eps > 0.0)) return 0.0;
    const double d = def.degree();
    const double tp_arg = -eps * pi / (2.0 * d);
    return -std::pow(std::max(energy_scale, 1e-3), 1.0 / d) * std::sin(tp_arg);
}

ShootingControls frozen_path(const Deformation& def, double energy_scale, const ShootingControls& c) {
    ShootingControls out = c;
    out.R_start = start_radius(def, energy_scale, c);
    out.match_depth = match_depth(def, energy_scale, c);
    return out;
}

namespace {

// Straight path from the seed point R e^{i alpha} to the match point -i depth,
// parameterized by arc length u. Stores e^{2i beta} V(x(u)) on the half-step
// nodes so that psi_uu = (f - e^{2i beta} E) psi.
struct PathTable {
    bool analytic = true;
    int K = 0;
    double P = 0.0, eps = 0.0, alpha = 0.0, R = 0.0, depth = 0.0;
    int N = 0;
    cplx start, dir;
    double length = 0.0;
    std::vector<cplx> f;
};

cplx path_potential(const Deformation& def, cplx x) {
    if (x == 0.0) return 0.0;
    double phi = std::arg(x);
    if (phi > pi / 2.0) phi -= 2.0 * pi;   // arg x in (-3pi/2, pi/2]
    const double theta = phi + pi / 2.0;
    if (def.is_analytic()) return potential(def, x, theta);
    return std::pow(std::abs(x), def.P()) * ix_power(x, theta, def.epsilon());
}

const PathTable& path_table(const Deformation& def, double alpha, double R, double depth, int N) {
    thread_local std::vector<PathTable> cache;
    thread_local std::size_t next = 0;
    const bool analytic = def.is_analytic();
    const int K = analytic ? def.K() : 0;
    const double P = analytic ? 0.0 : def.P();
    for (const auto& t : cache)
        if (t.analytic == analytic && t.K == K && t.P == P && t.eps == def.epsilon() && t.alpha == alpha &&
            t.R == R && t.depth == depth && t.N == N)
            return t;
    PathTable t;
    t.analytic = analytic;
    t.K = K;
    t.P = P;
    t.eps = def.epsilon();
    t.alpha = alpha;
    t.R = R;
    t.depth = depth;
    t.N = N;
    t.start = std::polar(R, alpha);
    const cplx end(0.0, -depth);
    t.length = std::abs(end - t.start);
    t.dir = (end - t.start) / t.length;
    const cplx rot = t.dir * t.dir;
    t.f.resize(2 * static_cast<std::size_t>(N) + 1);
    for (int k = 0; k <= 2 * N; ++k) {
        const cplx x = k == 2 * N ? end : t.start + t.dir * (0.5 * t.length * k / N);
        t.f[k] = rot * path_potential(def, x);
    }
    if (cache.size() < 4) {
        cache.push_back(std::move(t));
        return cache.back();
    }
    const std::size_t slot = next++ % cache.size();
    cache[slot] = std::move(t);
    return cache[slot];
}

RayEndpoint shoot(const Deformation& def, const RayGeometry& g, cplx E, const ShootingControls& c, cplx scale) {
    const int N = c.steps;
    if (N < 10) throw DomainError("too few integration steps");
    const double R = start_radius(def, std::abs(E), c);
    const double depth = match_depth(def, std::abs(E), c);
    if (!(depth < R)) throw DomainError("match point lies beyond the seed radius");
    const PathTable& t = path_table(def, g.alpha, R, depth, N);
    const double h = t.length / N;
    const cplx shift = t.dir * t.dir * E;

    // decaying seed: d psi / dr = -sqrt(c) R^{d/2} psi along the outward ray
    cplx psi = scale;
    cplx dpsi = t.dir * std::polar(1.0, -g.alpha) * (-g.sqrt_c * std::pow(R, g.degree / 2.0)) * scale;
    double log_scale = 0.0;
    const std::vector<cplx>& f = t.f;
    for (int i = 0; i < N; ++i) {
        const cplx f0 = f[2 * i] - shift;
        const cplx fm = f[2 * i + 1] - shift;
        const cplx f1 = f[2 * i + 2] - shift;
        const cplx k1p = dpsi, k1d = f0 * psi;
        const cplx p2 = psi + 0.5 * h * k1p, d2 = dpsi + 0.5 * h * k1d;
        const cplx k2p = d2, k2d = fm * p2;
        const cplx p3 = psi + 0.5 * h * k2p, d3 = dpsi + 0.5 * h * k2d;
        const cplx k3p = d3, k3d = fm * p3;
        const cplx p4 = psi + h * k3p, d4 = dpsi + h * k3d;
        const cplx k4p = d4, k4d = f1 * p4;
        psi += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        dpsi += h / 6.0 * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
        const double m = std::max(std::abs(psi), std::abs(dpsi));
        if (m > c.overflow_guard) {
            psi /= m;
            dpsi /= m;
            log_scale += std::log(m);
        } else if (!std::isfinite(m)) {
            throw NumericalError("ray integration overflowed despite renormalization");
        }
    }
    RayEndpoint out;
    out.psi = psi;
    out.dpsi = dpsi / t.dir;
    out.log_scale = log_scale;
    return out;
}

}  // namespace

RayEndpoint integrate_ray(const Deformation& def, cplx E, Side side, const ShootingControls& c) {
    const RayGeometry g = ray_geometry(def, side);
    return shoot(def, g, E, c, side == Side::left ? c.left_scale : c.right_scale);
}

MismatchValue mismatch_full(const Deformation& def, cplx E, const ShootingControls& c) {
    const RayGeometry gr = ray_geometry(def, Side::right);
    const RayGeometry gl = ray_geometry(def, Side::left);
    const RayEndpoint r = shoot(def, gr, E, c, c.right_scale);
    const RayEndpoint l = shoot(def, gl, E, c, c.left_scale);
    const cplx a = l.psi * r.dpsi;
    const cplx b = r.psi * l.dpsi;
    MismatchValue m;
    m.raw = a - b;
    m.log_scale = l.log_scale + r.log_scale;
    const double nl = std::hypot(std::abs(l.psi), std::abs(l.dpsi));
    const double nr = std::hypot(std::abs(r.psi), std::abs(r.dpsi));
    const double norm = nl * nr;
    if (!(norm > 0.0) || !std::isfinite(norm)) throw NumericalError("degenerate ray solutions at the origin");
    m.normalized = m.raw / norm;
    return m;
}

cplx mismatch(const Deformation& def, cplx E, const ShootingControls& c) {
    return mismatch_full(def, E, c).normalized;
}

double halving_defect(const Deformation& def, cplx E, const ShootingControls& c) {
    ShootingControls fine = frozen_path(def, std::abs(E), c);
    ShootingControls coarse = fine;
    fine.steps = 2 * c.steps;
    return std::abs(mismatch(def, E, coarse) - mismatch(def, E, fine));
}

cplx find_eigenvalue(const Deformation& def, cplx E_guess, const ShootingControls& c, const std::vector<cplx>& deflate) {
    const ShootingControls cc = frozen_path(def, std::abs(E_guess), c);

    auto deflation = [&](cplx E) {
        cplx d = 1.0;
        for (const cplx r : deflate) d *= (E - r);
        return d;
    };

    cplx E0 = E_guess;
    cplx E1 = E_guess + 1e-3 * std::max(1.0, std::abs(E_guess));
    MismatchValue m0 = mismatch_full(def, E0, cc);
    MismatchValue m1 = mismatch_full(def, E1, cc);

    cplx best = E0;
    double best_w = std::abs(m0.normalized / deflation(E0));
    auto consider = [&](cplx E, const MismatchValue& m) {
        const double w = std::abs(m.normalized / deflation(E));
        if (w < best_w) {
            best_w = w;
            best = E;
        }
    };
    consider(E1, m1);

    for (int it = 0; it < cc.max_iter; ++it) {
        // |W| alone is not trusted: for some wedge pairs the two ray solutions are
        // nearly parallel at every E and W is tiny across the whole axis.
        if (deflate.empty() && std::abs(m1.normalized) < cc.w_tol &&
            std::abs(E1 - E0) < 1e-6 * std::max(1.0, std::abs(E1)))
            return E1;
        if (m1.raw == 0.0) return E1;
        // q = W(E0)/W(E1) after deflation, formed in log space
        const cplx q = (m0.raw / m1.raw) * std::exp(m0.log_scale - m1.log_scale) * (deflation(E1) / deflation(E0));
        cplx denom = 1.0 - q;
        if (!std::isfinite(std::abs(q)) || std::abs(denom) < 1e-300) {
            denom = 1.0;  // restart with a plain step
        }
        const cplx E2 = E1 - (E1 - E0) / denom;
        if (!std::isfinite(E2.real()) || !std::isfinite(E2.imag())) break;
        MismatchValue m2 = mismatch_full(def, E2, cc);
        consider(E2, m2);
        const bool small_step = std::abs(E2 - E1) < cc.e_tol * std::max(1.0, std::abs(E2));
        E0 = E1;
        m0 = m1;
        E1 = E2;
        m1 = m2;
        if (small_step) return E2;
    }
    throw NoConvergence("eigenvalue iteration did not converge", best);
}

std::vector<cplx> scan_real_axis(const Deformation& def, double E_lo, double E_hi, int n_grid, const ShootingControls& c) {
    if (!(E_hi > E_lo) || n_grid < 3) throw DomainError("scan needs E_hi > E_lo and at least 3 grid points");
    const ShootingControls cc = frozen_path(def, std::max(std::abs(E_lo), std::abs(E_hi)), c);
    std::vector<double> Es(n_grid), w(n_grid);
    for (int i = 0; i < n_grid; ++i) {
        Es[i] = E_lo + (E_hi - E_lo) * i / (n_grid - 1);
        w[i] = std::abs(mismatch(def, Es[i], cc));
    }
    std::vector<cplx> roots;
    for (int i = 1; i + 1 < n_grid; ++i) {
        if (!(w[i] <= w[i - 1] && w[i] < w[i + 1])) continue;
        try {
            const cplx E = find_eigenvalue(def, Es[i], c);
            const bool dup = std::any_of(roots.begin(), roots.end(), [&](cplx r) {
                return std::abs(r - E) < 1e-7 * std::max(1.0, std::abs(E));
            });
            if (!dup) roots.push_back(E);
        } catch (const NoConvergence&) {
        }
    }
    std::sort(roots.begin(), roots.end(), [](cplx a, cplx b) { return a.real() < b.real(); });
    return roots;
}

double anchor_guess(const Deformation& def, int n) {
    if (n < 0) throw DomainError("level index must be nonnegative");
    // Hermitian |x|^q well: 2 E^{1/2 + 1/q} J_q = (n + 1/2) pi
    const double q = def.is_analytic() ? 2.0 * def.K() : def.P();
    const double J = std::tgamma(1.0 / q) * std::tgamma(1.5) / (q * std::tgamma(1.0 / q + 1.5));
    return std::pow((n + 0.5) * pi / (2.0 * J), 2.0 * q / (q + 2.0));
}

}  // namespace ptlab
