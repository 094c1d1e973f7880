#include "ptlab/spectral_flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace ptlab {

namespace {

struct PairSample {
    double eps = 0.0;
    cplx centre;
    double D = 0.0;   // squared gap; negative for a conjugate pair
};

struct PairSolve {
    bool ok = false;
    PairSample s;
};

double lerp_at(double x0, double y0, double x1, double y1, double x) {
    if (x1 == x0) return y1;
    return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
}

cplx lerp_at(double x0, cplx y0, double x1, cplx y1, double x) {
    if (x1 == x0) return y1;
    return y0 + (y1 - y0) * ((x - x0) / (x1 - x0));
}

PairSolve solve_pair(int K, double eps, cplx centre, double D, double spacing, const ShootingControls& sc) {
    const Deformation def = Deformation::analytic(K, eps);
    const cplx half = D >= 0.0 ? cplx{0.5 * std::sqrt(D), 0.0} : cplx{0.0, 0.5 * std::sqrt(-D)};
    PairSolve out;
    try {
        const cplx a = find_eigenvalue(def, centre - half, sc);
        cplx seed_b = centre + half;
        if (!classify_real(a)) seed_b = std::conj(a);
        const cplx b = find_eigenvalue(def, seed_b, sc, {a});
        const bool both_real = classify_real(a) && classify_real(b);
        const bool conj = std::abs(a - std::conj(b)) < 1e-6 * std::max(1.0, std::abs(a));
        if (!both_real && !conj) return out;
        out.s.eps = eps;
        out.s.centre = 0.5 * (a + b);
        out.s.D = std::real((b - a) * (b - a));
        if (both_real) out.s.centre = out.s.centre.real();
        out.ok = std::abs(out.s.centre - centre) < 0.25 * spacing;
    } catch (const NumericalError&) {
    }
    return out;
}

}  // namespace

PinchPoint locate_pinch(int K, std::pair<int, int> pair, std::pair<double, double> bracket, const PinchControls& c) {
    const auto [lo, hi] = pair;
    if (lo < 0 || hi <= lo) throw DomainError("level pair must satisfy 0 <= n_low < n_high");
    const double anchor = c.anchor_epsilon;
    double near = bracket.first, far = bracket.second;
    if (std::abs(far - anchor) < std::abs(near - anchor)) std::swap(near, far);
    if (near == far) throw DomainError("empty bracket");
    if ((near - anchor) * (far - anchor) < 0.0) throw DomainError("bracket must not straddle the anchor");
    const double dir = far > near ? 1.0 : -1.0;
    const double width = std::abs(far - near);
    double h0 = width / 40.0;

    SweepControls sc = c.sweep;
    sc.anchor_epsilon = anchor;
    SweepResult sw;
    auto level = [&](std::size_t row, int n) -> const EigenvalueRecord* {
        for (const auto& r : sw.rows[row])
            if (r.level == n) return &r;
        return nullptr;
    };
    auto pair_real = [&](std::size_t row) {
        const EigenvalueRecord* a = level(row, lo);
        const EigenvalueRecord* b = level(row, hi);
        return a && b && a->is_real && b->is_real;
    };
    // The first probe may overshoot a coalescence that sits close to `near`.
    for (int tries = 0;; ++tries) {
        sw = sweep(Deformation::analytic(K, anchor), {near, near + dir * h0}, hi + 2, sc);
        if (!pair_real(0) || pair_real(1) || tries == 30) break;
        h0 /= 4.0;
    }
    std::vector<PairSample> hist;
    double spacing = std::numeric_limits<double>::infinity();
    for (std::size_t row = 0; row < 2; ++row) {
        const EigenvalueRecord* a = level(row, lo);
        const EigenvalueRecord* b = level(row, hi);
        if (!a || !b || !a->is_real || !b->is_real)
            throw DomainError("level pair is not real at the bracket end nearest the anchor");
        hist.push_back({sw.epsilons[row], 0.5 * (a->energy + b->energy).real(),
                        std::real((b->energy - a->energy) * (b->energy - a->energy))});
        if (row == 0) {
            for (const int n : {lo - 1, hi + 1})
                if (const EigenvalueRecord* o = level(row, n))
                    spacing = std::min(spacing, std::abs(o->energy - 0.5 * (a->energy + b->energy)));
        }
    }
    if (!std::isfinite(spacing)) spacing = std::max(1.0, hist.back().centre.real());
    if (hist.back().D <= 0.0) throw DomainError("level pair already coalesced at the bracket end");

    // Walk away from the anchor until the squared gap turns negative.
    PairSample pos = hist.back(), neg;
    bool found = false;
    double h = h0;
    while (!found) {
        const PairSample& p0 = hist[hist.size() - 2];
        const PairSample& p1 = hist.back();
        if ((far - p1.eps) * dir <= 1e-15) break;
        double e_new = p1.eps + dir * h;
        if ((e_new - far) * dir > 0.0) e_new = far;
        const double D_pred = lerp_at(p0.eps, p0.D, p1.eps, p1.D, e_new);
        const cplx c_pred = lerp_at(p0.eps, p0.centre, p1.eps, p1.centre, e_new);
        const PairSolve r = solve_pair(K, e_new, c_pred, D_pred, spacing, c.sweep.shooting);
        if (!r.ok) {
            h /= 2.0;
            if (h < 1e-9) throw NumericalError("lost the level pair while approaching coalescence");
            continue;
        }
        if (r.s.D < 0.0) {
            pos = p1;
            neg = r.s;
            found = true;
            break;
        }
        hist.push_back(r.s);
        h = std::min(h * 1.5, h0);
    }
    if (!found) throw DomainError("level pair does not coalesce inside the bracket");

    // Illinois regula falsi on D(eps).
    int side = 0;
    PairSample a = pos, b = neg;
    double wa = 1.0, wb = 1.0;
    for (int it = 0; it < c.max_iter && std::abs(b.eps - a.eps) > c.eps_tol; ++it) {
        const double Da = wa * a.D, Db = wb * b.D;
        double e = a.eps + (b.eps - a.eps) * Da / (Da - Db);
        if (!(std::min(a.eps, b.eps) < e && e < std::max(a.eps, b.eps))) e = 0.5 * (a.eps + b.eps);
        const double D_pred = lerp_at(a.eps, a.D, b.eps, b.D, e);
        const cplx c_pred = lerp_at(a.eps, a.centre, b.eps, b.centre, e);
        PairSolve r = solve_pair(K, e, c_pred, D_pred, spacing, c.sweep.shooting);
        if (!r.ok) {
            e = 0.5 * (a.eps + b.eps);
            r = solve_pair(K, e, lerp_at(a.eps, a.centre, b.eps, b.centre, e),
                           lerp_at(a.eps, a.D, b.eps, b.D, e), spacing, c.sweep.shooting);
            if (!r.ok) break;  // too close to the double root to separate the pair
        }
        if (r.s.D == 0.0) {
            a = b = r.s;
            break;
        }
        if (r.s.D > 0.0) {
            a = r.s;
            wa = 1.0;
            if (side == 1) wb *= 0.5;
            side = 1;
        } else {
            b = r.s;
            wb = 1.0;
            if (side == -1) wa *= 0.5;
            side = -1;
        }
    }
    PinchPoint p;
    p.n_low = lo;
    p.n_high = hi;
    p.epsilon_star = (a.D == b.D) ? a.eps : a.eps + (b.eps - a.eps) * a.D / (a.D - b.D);
    p.E_star = lerp_at(a.eps, a.centre, b.eps, b.centre, p.epsilon_star).real();
    return p;
}

double ground_asymptote(int K, double delta) {
    if (!(delta > 0.0) || delta > 0.1) throw DomainError("ground-state asymptote needs 0 < delta <= 0.1");
    if (K == 1) return std::pow(-0.75 * std::log(delta), 2.0 / 3.0);
    if (K == 2) return -(2.0 / pi) * std::log(delta);
    throw DomainError("ground-state asymptote is available for K = 1 and K = 2");
}

std::vector<AsymptoteRow> ground_state_rows(int K, const std::vector<double>& deltas, const ShootingControls& c) {
    if (deltas.empty()) return {};
    for (const double d : deltas) ground_asymptote(K, d);  // validates K and delta

    std::vector<std::size_t> order(deltas.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return deltas[a] > deltas[b]; });

    // The ground state stays real all the way to eps = -K; follow it alone.
    SweepControls sc;
    sc.shooting = c;
    sc.extra_levels = 0;
    const double d0 = deltas[order.front()];
    const SweepResult sw = sweep(Deformation::analytic(K, 0.0), {-K + d0}, 1, sc);
    if (sw.rows[0].empty()) throw NumericalError("lost the ground state while continuing toward eps = -K");
    cplx E = sw.rows[0][0].energy;
    double d_cur = d0;

    std::vector<AsymptoteRow> rows(deltas.size());
    for (const std::size_t idx : order) {
        const double target = deltas[idx];
        // half-decade steps in log(delta), predicting with the current offset
        while (d_cur > target * (1.0 + 1e-12)) {
            const double d_next = std::max(target, d_cur / std::sqrt(10.0));
            const double offset = E.real() - ground_asymptote(K, d_cur);
            const double guess = ground_asymptote(K, d_next) + offset;
            E = find_eigenvalue(Deformation::analytic(K, -K + d_next), guess, c);
            if (!classify_real(E)) throw NumericalError("ground state left the real axis during continuation");
            d_cur = d_next;
        }
        AsymptoteRow r;
        r.delta = target;
        r.E_exact = E.real();
        r.E_formula = ground_asymptote(K, target);
        r.ratio = r.E_exact / r.E_formula;
        rows[idx] = r;
    }
    return rows;
}

std::vector<AsymptoteRow> table1(const std::vector<double>& deltas, const ShootingControls& c) {
    for (const double d : deltas) {
        if (d > 0.1) throw DomainError("table rows need delta <= 0.1");
        if (d < 1e-7 * (1.0 - 1e-9))
            throw DomainError("delta below 1e-7 exhausts double precision in the matching condition");
    }
    return ground_state_rows(1, deltas, c);
}

std::vector<double> table1_default_deltas() { return {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7}; }

int count_eigenvalues_in_box(const Deformation& def, double E_lo, double E_hi, double H, const ShootingControls& c) {
    if (!(E_hi > E_lo) || !(H > 0.0)) throw DomainError("empty box");
    const ShootingControls cc = frozen_path(def, std::abs(cplx{std::max(std::abs(E_lo), std::abs(E_hi)), H}), c);
    auto phase = [&](cplx E) { return std::arg(mismatch_full(def, E, cc).raw); };

    // Adaptive bisection keeps each sampled phase jump well below pi.
    auto segment = [&](auto&& self, cplx z0, double a0, cplx z1, double a1, int depth) -> double {
        const double d = std::remainder(a1 - a0, 2.0 * pi);
        if (std::abs(d) < 0.5 || depth > 14) return d;
        const cplx zm = 0.5 * (z0 + z1);
        const double am = phase(zm);
        return self(self, z0, a0, zm, am, depth + 1) + self(self, zm, am, z1, a1, depth + 1);
    };
    const cplx corners[5] = {{E_lo, -H}, {E_hi, -H}, {E_hi, H}, {E_lo, H}, {E_lo, -H}};
    double total = 0.0;
    for (int e = 0; e < 4; ++e) {
        const int pieces = 32;
        cplx z0 = corners[e];
        double a0 = phase(z0);
        for (int k = 1; k <= pieces; ++k) {
            const cplx z1 = corners[e] + (corners[e + 1] - corners[e]) * (static_cast<double>(k) / pieces);
            const double a1 = phase(z1);
            total += segment(segment, z0, a0, z1, a1, 0);
            z0 = z1;
            a0 = a1;
        }
    }
    return static_cast<int>(std::lround(total / (2.0 * pi)));
}

RealityCheck check_reality(const Deformation& def, int n_levels, const ShootingControls& c) {
    if (n_levels < 1) throw DomainError("n_levels must be positive");
    RealityCheck out;
    out.epsilon = def.epsilon();
    double E_cut = 1.3 * anchor_guess(def, n_levels) + 2.0;
    std::vector<cplx> real;
    for (int attempt = 0; attempt < 4; ++attempt) {
        real.clear();
        for (const cplx r : scan_real_axis(def, 1e-2, E_cut, 60 * (n_levels + 2), c))
            if (classify_real(r)) real.push_back(r.real());
        if (static_cast<int>(real.size()) > n_levels) break;
        E_cut *= 1.6;
    }
    const int found = static_cast<int>(real.size());
    double box_hi = E_cut;
    if (found > n_levels) box_hi = 0.5 * (real[n_levels - 1].real() + real[n_levels].real());
    const int below = static_cast<int>(std::count_if(real.begin(), real.end(), [&](cplx r) { return r.real() < box_hi; }));
    out.levels.assign(real.begin(), real.begin() + std::min(found, n_levels));
    out.zeros_in_box = count_eigenvalues_in_box(def, -0.5, box_hi, box_hi, c);
    out.all_real = found >= n_levels && out.zeros_in_box == below;
    return out;
}

std::vector<RealityCheck> special_real_points(int K, int n_levels, const ShootingControls& c) {
    if (K < 2) throw DomainError("negative-integer special points need K >= 2");
    std::vector<RealityCheck> out;
    for (int m = 1; m <= K - 1; ++m) out.push_back(check_reality(Deformation::analytic(K, -m), n_levels, c));
    return out;
}

double cross_identity_defect(int n_levels, const ShootingControls& c) {
    const auto a = real_spectrum_by_scan(Deformation::analytic(2, -1.0), n_levels, c);
    const auto b = real_spectrum_by_scan(Deformation::analytic(1, 1.0), n_levels, c);
    double worst = 0.0;
    for (int n = 0; n < n_levels; ++n) worst = std::max(worst, std::abs(a[n] - b[n]));
    return worst;
}

LogFit fit_loglog_offset(const std::vector<AsymptoteRow>& rows) {
    if (rows.size() < 2) throw DomainError("fit needs at least two rows");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(rows.size());
    std::vector<double> xs, ys;
    for (const auto& r : rows) {
        const double x = std::log(std::log(1.0 / r.delta));
        const double y = r.E_exact - r.E_formula;
        xs.push_back(x);
        ys.push_back(y);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    LogFit f;
    const double det = n * sxx - sx * sx;
    f.c2 = det != 0.0 ? (n * sxy - sx * sy) / det : 0.0;
    f.c1 = (sy - f.c2 * sx) / n;
    for (std::size_t i = 0; i < xs.size(); ++i)
        f.max_residual = std::max(f.max_residual, std::abs(ys[i] - f.c1 - f.c2 * xs[i]));
    return f;
}

}  // namespace ptlab
