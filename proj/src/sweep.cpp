#include "ptlab/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <set>
#include <sstream>
#include <thread>

namespace ptlab {

int worker_threads(int requested) {
    int n = requested;
    if (n <= 0) {
        if (const char* env = std::getenv("PTSPEC_THREADS")) n = std::atoi(env);
    }
    if (n <= 0) n = static_cast<int>(std::thread::hardware_concurrency());
    return std::max(1, n);
}

int SweepResult::real_count(std::size_t row) const {
    return static_cast<int>(std::count_if(rows.at(row).begin(), rows.at(row).end(),
                                          [](const EigenvalueRecord& r) { return r.is_real; }));
}

namespace {

template <class F>
void parallel_for(int n, int threads, F&& f) {
    threads = std::min(threads, n);
    if (threads <= 1) {
        for (int i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (int i = next++; i < n; i = next++) f(i);
        });
    for (auto& th : pool) th.join();
}

struct Level {
    cplx E;
    double eps = 0.0;
    cplx E_prev;
    double eps_prev = 0.0;
    bool has_prev = false;
    int partner = -1;
    bool lost = false;
};

cplx extrapolate(const Level& l, double eps_new) {
    if (!l.has_prev || l.eps == l.eps_prev) return l.E;
    return l.E + (l.E - l.E_prev) * ((eps_new - l.eps) / (l.eps - l.eps_prev));
}

// Squared separation of two levels, real on both sides of a coalescence.
double sep2(cplx a, cplx b) { return std::real((b - a) * (b - a)); }

enum class UnitKind { single, pair, pinch, reemerge };

struct Unit {
    UnitKind kind = UnitKind::single;
    int a = -1, b = -1;
    cplx seed_a, seed_b;
    cplx out_a, out_b;
    bool failed = false;
};

struct Attempt {
    bool ok = true;
    std::set<int> failed;
    std::vector<Unit> units;
};

class Tracker {
public:
    Tracker(const Deformation& base, const SweepControls& c, SweepResult& out)
        : base_(base), c_(c), out_(out), threads_(worker_threads(c.threads)) {}

    void seed(const std::vector<cplx>& anchor, double eps) {
        levels_.clear();
        for (const cplx E : anchor) {
            Level l;
            l.E = E;
            l.eps = eps;
            levels_.push_back(l);
        }
        eps_ = eps;
    }

    // March to each target in order, calling record() at each.
    template <class Rec>
    void march(const std::vector<double>& targets, Rec&& record) {
        double step = c_.max_step / 4.0;
        for (const double target : targets) {
            while (eps_ != target) {
                const double dir = target > eps_ ? 1.0 : -1.0;
                double h = std::min(step, std::abs(target - eps_));
                double eps_new = eps_ + dir * h;
                if (std::abs(target - eps_new) < 1e-12) eps_new = target;

                Attempt at = attempt(eps_new, -1);
                if (at.ok) {
                    commit(at, eps_new);
                    step = std::min(c_.max_step, step * 1.5);
                    continue;
                }
                // Buffer levels whose partner lies above the tracked set are dropped
                // rather than forcing tiny steps on every level.
                const bool buffer_only = std::all_of(at.failed.begin(), at.failed.end(), [&](int i) {
                    return i >= out_.n_levels && approaching_neighbour(i, eps_new) < 0;
                });
                if (h > c_.min_step * 1.0000001 && !buffer_only) {
                    step = std::max(c_.min_step, h / 2.0);
                    continue;
                }
                // At the smallest step: a real level that cannot be continued is
                // assumed to be coalescing with the neighbour it is approaching.
                bool rescued = false;
                for (const int i : at.failed) {
                    if (buffer_only) break;
                    const int j = approaching_neighbour(i, eps_new);
                    if (j < 0) continue;
                    Attempt forced = attempt(eps_new, std::min(i, j));
                    if (forced.ok) {
                        commit(forced, eps_new);
                        rescued = true;
                        break;
                    }
                }
                if (rescued) continue;
                for (const int i : at.failed) {
                    if (levels_[i].lost) continue;
                    levels_[i].lost = true;
                    const int p = levels_[i].partner;
                    if (p >= 0) levels_[p].partner = -1;
                    levels_[i].partner = -1;
                    if (i < out_.n_levels) {
                        std::ostringstream os;
                        os << "lost track of level " << i << " near eps = " << eps_new;
                        out_.warnings.push_back(os.str());
                    }
                }
            }
            record(target);
        }
    }

    const std::vector<Level>& levels() const { return levels_; }

private:
    bool is_real_level(int i) const {
        return levels_[i].partner < 0 && classify_real(levels_[i].E, c_.tol_real);
    }

    int next_live(int i) const {
        for (int j = i + 1; j < static_cast<int>(levels_.size()); ++j)
            if (!levels_[j].lost) return j;
        return -1;
    }

    int prev_live(int i) const {
        for (int j = i - 1; j >= 0; --j)
            if (!levels_[j].lost) return j;
        return -1;
    }

    // Adjacent real level whose separation from i is shrinking, or -1.
    int approaching_neighbour(int i, double eps_new) const {
        if (levels_[i].lost || !is_real_level(i)) return -1;
        int best = -1;
        double best_d = 0.0;
        for (const int j : {prev_live(i), next_live(i)}) {
            if (j < 0 || !is_real_level(j)) continue;
            const int a = std::min(i, j), b = std::max(i, j);
            const double d_now = sep2(levels_[a].E, levels_[b].E);
            const double d_new = predicted_sep2(a, b, eps_new);
            if (!(d_new < d_now)) continue;
            if (best < 0 || d_new < best_d) {
                best = j;
                best_d = d_new;
            }
        }
        return best;
    }

    double predicted_sep2(int a, int b, double eps_new) const {
        const Level& la = levels_[a];
        const Level& lb = levels_[b];
        const double d_now = sep2(la.E, lb.E);
        if (!la.has_prev || !lb.has_prev || la.eps == la.eps_prev) return d_now;
        const double d_prev = sep2(la.E_prev, lb.E_prev);
        return d_now + (d_now - d_prev) * (eps_new - la.eps) / (la.eps - la.eps_prev);
    }

    cplx predicted_centre(int a, int b, double eps_new) const {
        return 0.5 * (extrapolate(levels_[a], eps_new) + extrapolate(levels_[b], eps_new));
    }

    Attempt attempt(double eps_new, int forced_low) {
        Attempt at;
        const int n = static_cast<int>(levels_.size());
        std::vector<bool> used(n, false);
        for (int i = 0; i < n; ++i) {
            if (levels_[i].lost || used[i]) continue;
            Unit u;
            u.a = i;
            const int p = levels_[i].partner;
            if (p > i) {
                u.b = p;
                const double D = predicted_sep2(i, p, eps_new);
                const cplx c = predicted_centre(i, p, eps_new);
                if (D > 0.0) {
                    u.kind = UnitKind::reemerge;
                    u.seed_a = c - 0.5 * std::sqrt(D);
                    u.seed_b = c + 0.5 * std::sqrt(D);
                } else {
                    u.kind = UnitKind::pair;
                    u.seed_a = extrapolate(levels_[i], eps_new);
                    u.seed_b = std::conj(u.seed_a);
                }
                used[p] = true;
            } else {
                const int j = next_live(i);
                bool pinch = false;
                if (j >= 0 && is_real_level(i) && is_real_level(j)) {
                    if (forced_low == i) {
                        const cplx c = 0.5 * (levels_[i].E + levels_[j].E);
                        const double gap = std::max(std::abs(levels_[j].E - levels_[i].E), 1e-3);
                        u.seed_a = c + I * gap;
                        u.seed_b = c - I * gap;
                        pinch = true;
                    } else if (levels_[i].has_prev && levels_[j].has_prev) {
                        const double D = predicted_sep2(i, j, eps_new);
                        if (D < 0.0) {
                            const cplx c = predicted_centre(i, j, eps_new);
                            u.seed_a = c + 0.5 * I * std::sqrt(-D);
                            u.seed_b = c - 0.5 * I * std::sqrt(-D);
                            pinch = true;
                        }
                    }
                }
                if (pinch) {
                    u.kind = UnitKind::pinch;
                    u.b = j;
                    used[j] = true;
                } else {
                    u.kind = UnitKind::single;
                    u.seed_a = extrapolate(levels_[i], eps_new);
                }
            }
            used[i] = true;
            at.units.push_back(u);
        }

        const Deformation def = base_.with_epsilon(eps_new);
        parallel_for(static_cast<int>(at.units.size()), threads_, [&](int k) {
            Unit& u = at.units[k];
            try {
                u.out_a = find_eigenvalue(def, u.seed_a, c_.shooting);
                if (u.b >= 0) {
                    cplx sb = u.seed_b;
                    if (std::abs(u.out_a.imag()) > c_.tol_real * std::max(1.0, std::abs(u.out_a)) &&
                        u.kind != UnitKind::reemerge)
                        sb = std::conj(u.out_a);
                    u.out_b = find_eigenvalue(def, sb, c_.shooting, {u.out_a});
                }
            } catch (const NumericalError&) {
                u.failed = true;
            }
        });

        for (Unit& u : at.units) validate(u, at);
        check_duplicates(at);
        at.ok = at.failed.empty();
        return at;
    }

    double spacing(int i) const {
        double s = std::numeric_limits<double>::infinity();
        for (int j = 0; j < static_cast<int>(levels_.size()); ++j) {
            if (j == i || levels_[j].lost || j == levels_[i].partner) continue;
            s = std::min(s, std::abs(levels_[j].E - levels_[i].E));
        }
        return std::isfinite(s) ? s : std::max(1.0, std::abs(levels_[i].E));
    }

    bool real_value(cplx E) const { return classify_real(E, c_.tol_real); }

    bool conjugates(cplx a, cplx b) const {
        return std::abs(a - std::conj(b)) < 1e-6 * std::max(1.0, std::abs(a)) && !real_value(a);
    }

    void validate(Unit& u, Attempt& at) const {
        auto fail = [&] {
            at.failed.insert(u.a);
            if (u.b >= 0) at.failed.insert(u.b);
        };
        if (u.failed) return fail();
        auto jumped = [&](int i, cplx out, cplx seed) { return std::abs(out - seed) > 0.35 * spacing(i); };
        if (u.b >= 0 && std::abs(u.out_a.imag()) > 0 && u.out_a.imag() < 0 && u.kind != UnitKind::reemerge)
            std::swap(u.out_a, u.out_b);
        switch (u.kind) {
            case UnitKind::single:
                if (real_value(levels_[u.a].E) && !real_value(u.out_a)) return fail();
                if (jumped(u.a, u.out_a, u.seed_a)) return fail();
                return;
            case UnitKind::pair:
                if (conjugates(u.out_a, u.out_b)) {
                    if (jumped(u.a, u.out_a, u.seed_a)) return fail();
                    return;
                }
                if (real_value(u.out_a) && real_value(u.out_b)) {
                    if (u.out_a.real() > u.out_b.real()) std::swap(u.out_a, u.out_b);
                    u.kind = UnitKind::reemerge;
                    return;
                }
                return fail();
            case UnitKind::reemerge:
                if (real_value(u.out_a) && real_value(u.out_b)) {
                    if (u.out_a.real() > u.out_b.real()) std::swap(u.out_a, u.out_b);
                    return;
                }
                if (conjugates(u.out_a, u.out_b)) {
                    if (u.out_a.imag() < 0) std::swap(u.out_a, u.out_b);
                    u.kind = UnitKind::pair;
                    return;
                }
                return fail();
            case UnitKind::pinch:
                if (conjugates(u.out_a, u.out_b)) {
                    if (u.out_a.imag() < 0) std::swap(u.out_a, u.out_b);
                    return;
                }
                if (real_value(u.out_a) && real_value(u.out_b)) {
                    if (u.out_a.real() > u.out_b.real()) std::swap(u.out_a, u.out_b);
                    if (jumped(u.a, u.out_a, levels_[u.a].E) || jumped(u.b, u.out_b, levels_[u.b].E)) return fail();
                    u.kind = UnitKind::single;  // no coalescence after all
                    u.seed_a = u.out_a;
                    return;
                }
                return fail();
        }
    }

    void check_duplicates(Attempt& at) const {
        std::vector<std::pair<int, cplx>> all;
        for (const Unit& u : at.units) {
            if (u.failed) continue;
            all.emplace_back(u.a, u.out_a);
            if (u.b >= 0) all.emplace_back(u.b, u.out_b);
        }
        for (std::size_t i = 0; i < all.size(); ++i)
            for (std::size_t j = i + 1; j < all.size(); ++j)
                if (std::abs(all[i].second - all[j].second) <
                    c_.merge_tol * std::max(1.0, std::abs(all[i].second))) {
                    at.failed.insert(all[i].first);
                    at.failed.insert(all[j].first);
                }
    }

    void set(int i, cplx E, double eps_new) {
        Level& l = levels_[i];
        l.E_prev = l.E;
        l.eps_prev = l.eps;
        l.has_prev = true;
        l.E = E;
        l.eps = eps_new;
    }

    void annotate(int a, int b, double eps_new, cplx Ea_new, cplx Eb_new, bool reemergence) {
        const double d0 = sep2(levels_[a].E, levels_[b].E);
        const double d1 = sep2(Ea_new, Eb_new);
        const double t = (d0 == d1) ? 0.5 : d0 / (d0 - d1);
        PinchAnnotation p;
        p.n_low = a;
        p.n_high = b;
        p.epsilon_star = eps_ + (eps_new - eps_) * t;
        const cplx c0 = 0.5 * (levels_[a].E + levels_[b].E);
        const cplx c1 = 0.5 * (Ea_new + Eb_new);
        p.E_star = (c0 + (c1 - c0) * t).real();
        p.reemergence = reemergence;
        if (b < out_.n_levels || a < out_.n_levels) out_.pinches.push_back(p);
    }

    void commit(const Attempt& at, double eps_new) {
        for (const Unit& u : at.units) {
            switch (u.kind) {
                case UnitKind::single:
                    if (u.b >= 0) {  // pinch candidate that stayed real
                        set(u.a, u.out_a, eps_new);
                        set(u.b, u.out_b, eps_new);
                    } else {
                        set(u.a, u.out_a, eps_new);
                    }
                    break;
                case UnitKind::pair:
                    set(u.a, u.out_a, eps_new);
                    set(u.b, u.out_b, eps_new);
                    break;
                case UnitKind::pinch:
                    annotate(u.a, u.b, eps_new, u.out_a, u.out_b, false);
                    levels_[u.a].partner = u.b;
                    levels_[u.b].partner = u.a;
                    set(u.a, u.out_a, eps_new);
                    set(u.b, u.out_b, eps_new);
                    break;
                case UnitKind::reemerge:
                    annotate(u.a, u.b, eps_new, u.out_a, u.out_b, true);
                    levels_[u.a].partner = -1;
                    levels_[u.b].partner = -1;
                    set(u.a, u.out_a, eps_new);
                    set(u.b, u.out_b, eps_new);
                    break;
            }
        }
        eps_ = eps_new;
    }

    Deformation base_;
    const SweepControls& c_;
    SweepResult& out_;
    int threads_;
    std::vector<Level> levels_;
    double eps_ = 0.0;
};

std::vector<cplx> anchor_spectrum(const Deformation& def, int n_track, const SweepControls& c) {
    if (!c.anchor_levels.empty()) {
        if (static_cast<int>(c.anchor_levels.size()) < n_track)
            throw DomainError("anchor spectrum has fewer levels than tracked");
        return {c.anchor_levels.begin(), c.anchor_levels.begin() + n_track};
    }
    if (def.epsilon() == 0.0) {
        std::vector<cplx> out(n_track);
        std::vector<bool> bad(n_track, false);
        parallel_for(n_track, worker_threads(c.threads), [&](int n) {
            try {
                out[n] = find_eigenvalue(def, anchor_guess(def, n), c.shooting);
            } catch (const NumericalError&) {
                bad[n] = true;
            }
        });
        bool ok = std::none_of(bad.begin(), bad.end(), [](bool b) { return b; });
        for (int n = 0; ok && n < n_track; ++n) {
            if (!classify_real(out[n], c.tol_real)) ok = false;
            if (n > 0 && !(out[n].real() > out[n - 1].real() + c.merge_tol)) ok = false;
        }
        if (ok) return out;
    }
    return real_spectrum_by_scan(def, n_track, c.shooting);
}

}  // namespace

std::vector<cplx> real_spectrum_by_scan(const Deformation& def, int n_levels, const ShootingControls& c) {
    if (n_levels < 1) throw DomainError("n_levels must be positive");
    double E_hi = 1.3 * anchor_guess(def, n_levels) + 2.0;
    for (int attempt = 0; attempt < 5; ++attempt) {
        const std::vector<cplx> roots = scan_real_axis(def, 1e-2, E_hi, 60 * (n_levels + 1), c);
        std::vector<cplx> real;
        for (const cplx r : roots)
            if (classify_real(r)) real.push_back(r.real());
        if (static_cast<int>(real.size()) >= n_levels) return {real.begin(), real.begin() + n_levels};
        E_hi *= 1.6;
    }
    throw NumericalError("real-axis scan found too few eigenvalues");
}

SweepResult sweep(const Deformation& base, const std::vector<double>& grid, int n_levels, const SweepControls& controls) {
    if (n_levels < 1) throw DomainError("n_levels must be at least 1");
    if (grid.empty()) throw DomainError("empty eps grid");
    const bool up = grid.size() < 2 || grid.back() >= grid.front();
    for (std::size_t i = 1; i < grid.size(); ++i)
        if ((grid[i] - grid[i - 1]) * (up ? 1.0 : -1.0) < 0.0) throw DomainError("eps grid must be monotone");
    if (!(controls.min_step > 0.0) || controls.max_step < controls.min_step)
        throw DomainError("invalid continuation step bounds");

    SweepResult res;
    res.base = base;
    res.n_levels = n_levels;
    res.epsilons = grid;
    res.rows.resize(grid.size());

    const int n_track = n_levels + std::max(0, controls.extra_levels);
    const double anchor = controls.anchor_epsilon;
    const std::vector<cplx> start = anchor_spectrum(base.with_epsilon(anchor), n_track, controls);

    std::vector<std::size_t> below, above;  // grid indices on each side, walking away from the anchor
    for (std::size_t i = 0; i < grid.size(); ++i) (grid[i] < anchor ? below : above).push_back(i);
    std::sort(below.begin(), below.end(), [&](std::size_t a, std::size_t b) { return grid[a] > grid[b]; });
    std::sort(above.begin(), above.end(), [&](std::size_t a, std::size_t b) { return grid[a] < grid[b]; });

    for (const auto* side : {&below, &above}) {
        if (side->empty()) continue;
        Tracker tr(base, controls, res);
        tr.seed(start, anchor);
        std::vector<double> targets;
        for (const std::size_t i : *side) targets.push_back(grid[i]);
        std::size_t k = 0;
        tr.march(targets, [&](double eps) {
            const std::size_t row = (*side)[k++];
            auto& out = res.rows[row];
            const auto& lv = tr.levels();
            for (int n = 0; n < n_levels; ++n) {
                if (lv[n].lost) continue;
                EigenvalueRecord r;
                r.epsilon = eps;
                r.level = n;
                r.energy = lv[n].E;
                r.is_real = classify_real(lv[n].E, controls.tol_real);
                r.method = Method::shooting;
                out.push_back(r);
            }
        });
    }
    std::sort(res.pinches.begin(), res.pinches.end(), [](const PinchAnnotation& a, const PinchAnnotation& b) {
        return a.n_low != b.n_low ? a.n_low < b.n_low : a.epsilon_star < b.epsilon_star;
    });
    return res;
}

std::vector<EigenvalueRecord> real_line_solve(double P, double epsilon, int n_levels, const SweepControls& controls) {
    if (!(std::abs(epsilon) < 2.0)) throw DomainError("real-line boundary condition is undefined for |eps| >= 2");
    const Deformation base = Deformation::nonanalytic(P, 0.0);
    const int m = std::max(2, static_cast<int>(std::ceil(std::abs(epsilon) / 0.05)) + 1);
    std::vector<double> grid;
    if (epsilon == 0.0) {
        grid.push_back(0.0);
    } else {
        for (int i = 0; i < m; ++i) grid.push_back(epsilon * i / (m - 1));
    }
    SweepControls c = controls;
    c.anchor_epsilon = 0.0;
    const SweepResult r = sweep(base, grid, n_levels, c);
    return r.rows.back();
}

}  // namespace ptlab
