#pragma once

// Analyses built on the shooting solver: coalescence points, ground-state
// growth near eps = -K, and the real spectra at negative integer eps.

#include "ptlab/sweep.hpp"

#include <utility>
#include <vector>

namespace ptlab {

struct PinchPoint {
    int n_low = 0;
    int n_high = 0;
    double epsilon_star = 0.0;
    double E_star = 0.0;
};

struct PinchControls {
    SweepControls sweep;
    double anchor_epsilon = 0.0;   // spectrum is taken real here
    double eps_tol = 1e-6;         // bracket width at which refinement stops
    int max_iter = 60;
};

// Coalescence of levels `pair` of x^{2K}(ix)^eps inside `bracket`. The bracket
// end nearer the anchor must have the pair real and distinct; the squared gap,
// which changes sign through the coalescence, is driven to zero by regula falsi.
// Throws DomainError when the pair does not coalesce in the bracket.
PinchPoint locate_pinch(int K, std::pair<int, int> pair, std::pair<double, double> bracket,
                        const PinchControls& c = {});

// Leading small-delta ground-state law at eps = -K + delta (K = 1 or 2).
double ground_asymptote(int K, double delta);

struct AsymptoteRow {
    double delta = 0.0;
    double E_exact = 0.0;
    double E_formula = 0.0;
    double ratio = 0.0;
};

// Ground state of x^{2K}(ix)^eps at eps = -K + delta for each delta (any order),
// followed by continuation in log(delta). Rows come back in the input order.
std::vector<AsymptoteRow> ground_state_rows(int K, const std::vector<double>& deltas,
                                            const ShootingControls& c = {});

// K = 1 rows for deltas in [1e-7, 1e-1].
std::vector<AsymptoteRow> table1(const std::vector<double>& deltas, const ShootingControls& c = {});

std::vector<double> table1_default_deltas();

// Zeros of the matching function inside [E_lo, E_hi] x [-H, H], by the argument principle.
int count_eigenvalues_in_box(const Deformation& def, double E_lo, double E_hi, double H,
                             const ShootingControls& c = {});

struct RealityCheck {
    double epsilon = 0.0;
    std::vector<cplx> levels;   // lowest real levels found on the axis
    int zeros_in_box = 0;       // all eigenvalues below the cut, real or complex
    bool all_real = false;
};

// Finds the lowest n_levels real eigenvalues and checks that nothing complex
// hides below them.
RealityCheck check_reality(const Deformation& def, int n_levels, const ShootingControls& c = {});

// Reality checks at eps = -1, ..., -(K-1) for K >= 2.
std::vector<RealityCheck> special_real_points(int K, int n_levels, const ShootingControls& c = {});

// Largest level-by-level difference between spectrum(K=2, eps=-1) and spectrum(K=1, eps=1).
double cross_identity_defect(int n_levels, const ShootingControls& c = {});

struct LogFit {
    double c1 = 0.0;
    double c2 = 0.0;
    double max_residual = 0.0;
};

// Least-squares fit of (E_exact - E_formula) to c1 + c2 ln(ln(1/delta)).
LogFit fit_loglog_offset(const std::vector<AsymptoteRow>& rows);

}  // namespace ptlab
