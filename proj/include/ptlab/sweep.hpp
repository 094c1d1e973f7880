#pragma once

// Continuation of the lowest levels across a grid of eps values, following
// real levels through their coalescence into complex-conjugate pairs.

#include "ptlab/shooting.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace ptlab {

struct PinchAnnotation {
    int n_low = 0;
    int n_high = 0;
    double epsilon_star = 0.0;
    double E_star = 0.0;
    bool reemergence = false;  // pair turns real again as eps moves away from the anchor
};

struct SweepControls {
    ShootingControls shooting;
    double max_step = 0.05;
    double min_step = 1e-5;
    double merge_tol = 1e-4;
    double tol_real = tol_real_default;
    int extra_levels = 2;                 // tracked beyond n_levels to catch partners
    double anchor_epsilon = 0.0;          // continuation starts here
    std::vector<cplx> anchor_levels;      // optional: known spectrum at the anchor
    int threads = 0;                      // <= 0: PTSPEC_THREADS or hardware
};

struct SweepResult {
    Deformation base = Deformation::analytic(1, 0.0);
    int n_levels = 0;
    std::vector<double> epsilons;
    std::vector<std::vector<EigenvalueRecord>> rows;  // one row per grid point, lost levels omitted
    std::vector<PinchAnnotation> pinches;
    std::vector<std::string> warnings;

    // Real records in row i.
    int real_count(std::size_t row) const;
};

// Number of worker threads: PTSPEC_THREADS if set, else hardware concurrency.
int worker_threads(int requested = 0);

SweepResult sweep(const Deformation& base, const std::vector<double>& grid, int n_levels,
                  const SweepControls& controls = {});

// Real spectrum at `def` by scanning the real energy axis (n_levels real roots or throws).
std::vector<cplx> real_spectrum_by_scan(const Deformation& def, int n_levels, const ShootingControls& c = {});

// Levels of |x|^P (ix)^eps on the real line, continued from eps = 0.
std::vector<EigenvalueRecord> real_line_solve(double P, double epsilon, int n_levels,
                                              const SweepControls& controls = {});

}  // namespace ptlab
