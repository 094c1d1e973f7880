#pragma once

// Harmonic-oscillator basis representation of p^2 + x^2 (ix)^eps and the
// two-level model of the first-order (small eps) Hamiltonian.

#include "ptlab/deformation.hpp"

#include <Eigen/Dense>

#include <utility>
#include <vector>

namespace ptlab {

using ComplexMatrix = Eigen::MatrixXcd;

// Normalized Hermite functions psi_0..psi_nmax at x.
std::vector<double> hermite_functions(int nmax, double x);

// 2 * integral_0^inf psi_m psi_n x^a dx, by generalized Gauss-Laguerre in t = x^2.
double half_line_moment(int m, int n, double a);

// <m|p^2|n>
double kinetic_element(int m, int n);

// <m| p^2 + x^2 (ix)^eps |n>. Real for m+n even, imaginary for m+n odd.
cplx matrix_element(int m, int n, double epsilon);

struct TruncatedMatrix {
    int order = 0;   // K_trunc + 1
    double epsilon = 0.0;
    ComplexMatrix entries;
};

TruncatedMatrix build_matrix(int K_trunc, double epsilon);

struct MatrixSpectrum {
    std::vector<cplx> eigenvalues;   // sorted by real part, then imaginary part
    double max_residual = 0.0;       // max ||Mv - lambda v|| / ||M|| over unit eigenvectors
};

// Eigenvalues of the (K_trunc+1)-dimensional truncation. Throws NumericalError
// if the QR iteration stalls or an eigenpair fails the residual check.
MatrixSpectrum truncated_spectrum(int K_trunc, double epsilon);

// Same for an arbitrary square matrix (balanced, then complex Schur).
MatrixSpectrum dense_spectrum(const ComplexMatrix& M, int max_sweeps = 100, double residual_tol = 1e-8);

// <n| x^2 ln|x| |n>
double log_diag_element(int n);
double log_diag_a(int n);

// <2n-1| (i pi/2) x^2 sgn(x) |2n>, n >= 1
cplx sgn_offdiag_element(int n);

// Large-n, small-eps entries of the 2x2 block on levels (2n-1, 2n).
struct TwoLevelModel {
    int n = 1;
    double A = 0.0;
    double B = 0.0;
    double C = 0.0;
};

TwoLevelModel two_level_model(int n, double epsilon);

// Roots of det [[A-E, iB], [iB, C-E]]: first has the + root.
std::pair<cplx, cplx> two_level_energies(int n, double epsilon);

// (A-C)^2 - 4B^2
double two_level_discriminant(int n, double epsilon);

// 3/(8n): magnitude of eps at which the model pair degenerates, log terms dropped.
double pinch_epsilon_model(int n);

// Negative eps where the model discriminant vanishes with the log terms kept.
double two_level_pinch(int n);

}  // namespace ptlab
