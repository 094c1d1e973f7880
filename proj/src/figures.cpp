#include "ptlab/figures.hpp"

#include "ptlab/basis_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

namespace ptlab {

namespace {

std::vector<double> linear_grid(double lo, double hi, int steps) {
    std::vector<double> g;
    if (steps < 1) steps = 1;
    for (int i = 0; i <= steps; ++i) g.push_back(lo + (hi - lo) * i / steps);
    return g;
}

struct Launch {
    cplx x0;
    int branch = 1;
};

// Launches from the primary turning pair's left member plus the given points.
std::vector<Trajectory> orbit_family(int K, double eps, const std::vector<Launch>& extra, bool from_turning_point = true) {
    const Deformation def = Deformation::analytic(K, eps);
    std::vector<Launch> launches;
    if (from_turning_point) {
        for (const auto& tp : turning_points(def, 1.0))
            if (tp.primary) {
                launches.push_back({tp.x, 1});
                break;
            }
    }
    launches.insert(launches.end(), extra.begin(), extra.end());
    std::vector<Trajectory> out;
    for (const auto& l : launches) out.push_back(integrate(def, 1.0, l.x0, l.branch));
    return out;
}

Dataset orbits_dataset(const std::vector<Trajectory>& trs, const std::string& description) {
    Dataset d = trajectory_set_dataset(trs);
    d.main.add_meta("dataset", description);
    return d;
}

Dataset fig1(const FigureOptions&) {
    std::vector<Launch> l;
    l.push_back({cplx(-1.0, 0.0), 1});   // the real segment between the turning points
    for (double y : {0.2, 0.4, 0.6, 0.8, 1.0}) l.push_back({cplx(0.0, y), 1});
    Dataset d = orbits_dataset(orbit_family(1, 0.0, l, false), "harmonic oscillator orbits at E = 1: nested ellipses with foci at +-1");
    d.main.add_meta("K", "1");
    d.main.add_meta("epsilon", 0.0);
    d.main.add_meta("E", 1.0);
    return d;
}

Dataset fig2(const FigureOptions&) {
    std::vector<Launch> l;
    for (double y : {0.8, 1.2, 2.0, 3.0}) l.push_back({cplx(0.0, -y), 1});
    l.push_back({cplx(0.0, 2.0), 1});
    l.push_back({cplx(0.0, 2.0), -1});
    Dataset d = orbits_dataset(orbit_family(1, 1.0, l), "p^2 + ix^3 at E = 1: turning-point arc, enclosing closed orbits, paths from the imaginary axis above i");
    d.main.add_meta("K", "1");
    d.main.add_meta("epsilon", 1.0);
    d.main.add_meta("E", 1.0);
    return d;
}

Dataset fig4(const FigureOptions&) {
    const Deformation def = Deformation::analytic(1, 2.0);
    std::vector<Launch> l;
    // one launch per turning-point pair, below and above the real axis
    const auto tps = turning_points(def, 1.0);
    for (const auto& tp : tps)
        if (tp.x.real() < 0.0) l.push_back({tp.x, 1});
    for (double y : {0.9, 1.3}) {
        l.push_back({cplx(0.0, -y), 1});
        l.push_back({cplx(0.0, y), 1});
    }
    l.push_back({cplx(0.5, 0.0), 1});   // unbounded motion along the real axis
    Dataset d = orbits_dataset(orbit_family(1, 2.0, l, false), "p^2 - x^4 at E = 1: oscillation between turning-point pairs, closed orbits, real-axis escape");
    d.main.add_meta("K", "1");
    d.main.add_meta("epsilon", 2.0);
    d.main.add_meta("E", 1.0);
    return d;
}

Dataset fig6(const FigureOptions&) {
    std::vector<Launch> l;
    for (double y : {0.7, 1.0, 1.5}) l.push_back({cplx(0.0, -y), 1});
    l.push_back({cplx(0.0, 2.0), 1});
    Dataset d = orbits_dataset(orbit_family(1, 5.0, l), "p^2 + ix^7 at E = 1: oscillatory and periodic orbits, escape along the imaginary axis above i");
    d.main.add_meta("K", "1");
    d.main.add_meta("epsilon", 5.0);
    d.main.add_meta("E", 1.0);
    return d;
}

Dataset fig10(const FigureOptions&) {
    Dataset d;
    d.main.add_meta("dataset", "p^2 - ix at E = 1: closed-form parabolic paths, turning point at i");
    d.main.add_meta("K", "1");
    d.main.add_meta("epsilon", -1.0);
    d.main.add_meta("E", 1.0);
    d.main.columns = {"orbit", "b", "t", "re_x", "im_x"};
    long long k = 0;
    for (int j = -8; j <= 8; ++j) {
        if (j == 0) continue;
        const double b = 0.25 * j;
        const auto path = exact_solution(ParabolaCase{b});
        for (int i = 0; i <= 160; ++i) {
            const double t = -8.0 + 0.1 * i;
            const cplx x = path(t);
            d.main.rows.push_back({k, b, t, x.real(), x.imag()});
        }
        ++k;
    }
    return d;
}

Dataset spectrum_figure(const Deformation& base, double lo, double hi, int steps, int levels, int threads,
                        const std::string& description) {
    SweepControls sc;
    sc.threads = threads;
    const SweepResult r = sweep(base, linear_grid(lo, hi, steps), levels, sc);
    Dataset d = sweep_dataset(r);
    d.main.add_meta("dataset", description);
    d.main.add_meta("eps_min", lo);
    d.main.add_meta("eps_max", hi);
    d.main.add_meta("eps_steps", std::to_string(steps));
    return d;
}

int pick(int value, int fallback) { return value > 0 ? value : fallback; }

Dataset fig11(const FigureOptions& o) {
    return spectrum_figure(Deformation::analytic(1, 0.0), -0.95, 3.0, pick(o.eps_steps, 158), pick(o.levels, 10), o.threads,
                           "levels of p^2 + x^2 (ix)^eps against eps; the ground state diverges as eps -> -1");
}

Dataset fig13(const FigureOptions& o) {
    return spectrum_figure(Deformation::analytic(2, 0.0), -1.9, 2.0, pick(o.eps_steps, 156), pick(o.levels, 12), o.threads,
                           "levels of p^2 + x^4 (ix)^eps against eps");
}

Dataset fig16(const FigureOptions& o) {
    return spectrum_figure(Deformation::analytic(3, 0.0), -2.9, 2.0, pick(o.eps_steps, 196), pick(o.levels, 12), o.threads,
                           "levels of p^2 + x^6 (ix)^eps against eps");
}

Dataset fig18(const FigureOptions& o) {
    return spectrum_figure(Deformation::nonanalytic(1.0, 0.0), -0.45, 1.5, pick(o.eps_steps, 78), pick(o.levels, 8), o.threads,
                           "levels of p^2 + |x| (ix)^eps on the real line against eps");
}

Dataset fig19(const FigureOptions& o) {
    return spectrum_figure(Deformation::nonanalytic(3.0, 0.0), -1.45, 1.5, pick(o.eps_steps, 118), pick(o.levels, 8), o.threads,
                           "levels of p^2 + |x|^3 (ix)^eps on the real line against eps");
}

Dataset fig17(const FigureOptions& o) {
    const int levels = pick(o.levels, 8);
    Dataset d;
    d.main.add_meta("dataset", "levels of the Hermitian p^2 + |x|^P against P");
    d.main.add_meta("levels", std::to_string(levels));
    d.main.columns = {"P", "level", "re_E", "im_E", "is_real", "method"};
    const int steps = pick(o.eps_steps, 32);
    for (int i = 1; i <= steps; ++i) {
        const double P = 8.0 * i / steps;
        SweepControls sc;
        sc.threads = o.threads;
        for (const auto& rec : real_line_solve(P, 0.0, levels, sc))
            d.main.rows.push_back({P, static_cast<long long>(rec.level), rec.energy.real(), rec.energy.imag(),
                                   static_cast<long long>(rec.is_real ? 1 : 0), std::string(to_string(rec.method))});
    }
    return d;
}

Dataset fig115(const FigureOptions& o) {
    const double eps = -0.5;
    std::vector<std::pair<int, std::vector<cplx>>> spectra;
    for (int k = 0; k <= o.trunc; ++k) spectra.emplace_back(k, truncated_spectrum(k, eps).eigenvalues);
    Dataset d = matrix_dataset(eps, spectra);
    d.main.add_meta("dataset", "eigenvalues of harmonic-basis truncations of p^2 + x^2 (ix)^eps");
    d.main.add_meta("max_trunc", std::to_string(o.trunc));
    return d;
}

const std::map<std::string, std::function<Dataset(const FigureOptions&)>>& registry() {
    static const std::map<std::string, std::function<Dataset(const FigureOptions&)>> r = {
        {"fig1", fig1},   {"fig2", fig2},   {"fig4", fig4},   {"fig6", fig6},   {"fig10", fig10},
        {"fig11", fig11}, {"fig13", fig13}, {"fig16", fig16}, {"fig17", fig17}, {"fig18", fig18},
        {"fig19", fig19}, {"fig115", fig115},
    };
    return r;
}

}  // namespace

const std::vector<std::string>& figure_ids() {
    static const std::vector<std::string> ids = {"fig1",  "fig2",  "fig4",  "fig6",  "fig10", "fig11",
                                                 "fig13", "fig16", "fig17", "fig18", "fig19", "fig115"};
    return ids;
}

Dataset emit_figure(const std::string& id, const FigureOptions& opt) {
    const auto& r = registry();
    auto it = r.find(id);
    if (it == r.end()) throw DomainError("unknown figure id '" + id + "'");
    Dataset d = it->second(opt);
    d.main.meta.insert(d.main.meta.begin(), {"figure", id});
    return d;
}

}  // namespace ptlab
