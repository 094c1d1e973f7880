#pragma once

// Eigenvalues of -psi'' + V(x) psi = E psi by inward integration along the
// centre lines of the two Stokes wedges and matching at the origin.

#include "ptlab/deformation.hpp"

#include <optional>
#include <string>
#include <vector>

namespace ptlab {

struct WedgeGeometry {
    double theta_right = 0.0;
    double theta_left = 0.0;
    double opening = 0.0;
};

WedgeGeometry wedges(int K, double epsilon);

enum class Side { left, right };

enum class Method { shooting, matrix, wkb_lo, wkb_nlo };
const char* to_string(Method m);

inline constexpr double tol_real_default = 1e-6;

struct EigenvalueRecord {
    double epsilon = 0.0;
    int level = 0;
    cplx energy;
    bool is_real = true;
    Method method = Method::shooting;
};

bool classify_real(cplx E, double tol_real = tol_real_default);

struct SeedValue {
    cplx psi;
    cplx dpsi;
};

// Controlling factor exp(-i^{eps/2} x^{K+1+eps/2}/(K+1+eps/2)) and its
// derivative. Powers of x use arg x in (-3pi/2, pi/2]. Throws DomainError if the
// selected solution does not decay along the ray through x.
SeedValue asymptotic_seed(cplx x, int K, double epsilon, bool decaying = true);

struct ShootingControls {
    int steps = 10000;               // RK4 steps per ray
    double R_start = 0.0;            // <= 0: picked from |E| and target_exponent
    double match_depth = -1.0;       // < 0: picked from |E| (see match_depth)
    double target_exponent = 38.0;   // decay exponent of the seed at R_start
    double overflow_guard = 1e100;
    cplx left_scale{1.0, 0.0};       // multiplies the left seed
    cplx right_scale{1.0, 0.0};      // multiplies the right seed
    int max_iter = 60;
    double e_tol = 1e-10;            // relative step size for convergence
    double w_tol = 1e-12;            // normalized mismatch, checked once steps are below 1e-6 relative
};

// Ray direction and the constant c in psi_rr = (c r^d - e^{2i alpha} E) psi
// along the outer part of the path.
struct RayGeometry {
    double alpha = 0.0;
    double potential_phase = 0.0;
    double degree = 0.0;
    cplx c;
    cplx sqrt_c;
};

RayGeometry ray_geometry(const Deformation& def, Side side);

// Radius at which the seed's decay exponent reaches the target for energy scale |E|.
double start_radius(const Deformation& def, double energy_scale, const ShootingControls& c);

// The two solutions are matched at x = -i * depth rather than at the origin.
// For eps > 0 the depth is that of the turning points at energy_scale: on that
// line both WKB waves have comparable size, while at the origin one of them is
// larger by about exp(2 sqrt(E) depth) and the Wronskian loses that many digits.
// Elsewhere (eps <= 0, real-line problems) the depth is 0.
double match_depth(const Deformation& def, double energy_scale, const ShootingControls& c);

// Copy of c with R_start and match_depth fixed for energy_scale, so that the
// mismatch is one analytic function of E across a root search.
ShootingControls frozen_path(const Deformation& def, double energy_scale, const ShootingControls& c);

struct RayEndpoint {
    cplx psi;        // psi at the match point / exp(log_scale)
    cplx dpsi;       // psi' in x there, same scale
    double log_scale = 0.0;
};

RayEndpoint integrate_ray(const Deformation& def, cplx E, Side side, const ShootingControls& c = {});

struct MismatchValue {
    cplx raw;               // W / exp(log_scale), analytic in E for fixed R_start
    double log_scale = 0.0;
    // W / (|(psi_L, psi'_L)| |(psi_R, psi'_R)|), modulus at most 1. Dividing by
    // max(|psi_L psi'_R|, |psi_R psi'_L|) instead would pin |W| at 2 for even
    // potentials, where psi_L psi'_R = -psi_R psi'_L for every real E.
    cplx normalized;
};

MismatchValue mismatch_full(const Deformation& def, cplx E, const ShootingControls& c = {});

// Normalized Wronskian at the match point; zero exactly at eigenvalues.
cplx mismatch(const Deformation& def, cplx E, const ShootingControls& c = {});

// |W(N steps) - W(2N steps)| in normalized units.
double halving_defect(const Deformation& def, cplx E, const ShootingControls& c = {});

// Complex secant iteration on W. Roots in `deflate` are divided out of W.
// Throws NoConvergence with the best iterate after max_iter steps.
cplx find_eigenvalue(const Deformation& def, cplx E_guess, const ShootingControls& c = {},
                     const std::vector<cplx>& deflate = {});

// Local minima of |W| on a real grid in [E_lo, E_hi], each refined by
// find_eigenvalue. Returns distinct roots sorted by real part.
std::vector<cplx> scan_real_axis(const Deformation& def, double E_lo, double E_hi, int n_grid,
                                 const ShootingControls& c = {});

// Hermitian |x|^P or x^{2K} levels from the leading phase-integral rule,
// used to anchor continuation at eps = 0.
double anchor_guess(const Deformation& def, int n);

}  // namespace ptlab
