#include "ptlab/basis_matrix.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <string>

namespace ptlab {

namespace {

struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

// N-point rule for integral_0^inf e^{-t} t^alpha f(t) dt. Nodes from the Jacobi
// matrix; weights from the Christoffel sum, which keeps the tiny tail weights
// accurate in the relative sense (eigenvector components do not).
GaussRule laguerre_rule(int N, double alpha) {
    Eigen::VectorXd diag(N), sub(std::max(N - 1, 0));
    for (int k = 0; k < N; ++k) diag[k] = 2.0 * k + 1.0 + alpha;
    for (int k = 1; k < N; ++k) sub[k - 1] = std::sqrt(k * (k + alpha));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalError("Laguerre node computation failed");

    GaussRule g;
    g.nodes.assign(es.eigenvalues().data(), es.eigenvalues().data() + N);
    g.weights.resize(N);
    const double p0 = std::exp(-0.5 * std::lgamma(alpha + 1.0));
    for (int i = 0; i < N; ++i) {
        const double t = g.nodes[i];
        double pm = 0.0, p = p0, sum = p0 * p0;
        for (int k = 0; k + 1 < N; ++k) {
            const double bk = k > 0 ? std::sqrt(k * (k + alpha)) : 0.0;
            const double next = ((t - (2.0 * k + 1.0 + alpha)) * p - bk * pm) / std::sqrt((k + 1) * (k + 1 + alpha));
            pm = p;
            p = next;
            sum += p * p;
        }
        g.weights[i] = 1.0 / sum;
    }
    return g;
}

const GaussRule& cached_rule(int N, double alpha) {
    static std::mutex mu;
    static std::map<std::pair<int, double>, GaussRule> cache;
    std::lock_guard lock(mu);
    auto key = std::make_pair(N, alpha);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, laguerre_rule(N, alpha)).first;
    return it->second;
}

// H_n(x)/sqrt(2^n n! sqrt(pi)), n = 0..nmax; the Gaussian factor is left out.
std::vector<double> hermite_polys(int nmax, double x) {
    std::vector<double> h(nmax + 1);
    h[0] = std::pow(pi, -0.25);
    if (nmax >= 1) h[1] = std::sqrt(2.0) * x * h[0];
    for (int k = 1; k < nmax; ++k)
        h[k + 1] = std::sqrt(2.0 / (k + 1)) * x * h[k] - std::sqrt(double(k) / (k + 1)) * h[k - 1];
    return h;
}

// Moments 2 int_0^inf psi_m psi_n x^a dx for all m, n <= nmax sharing parity s of m+n.
// With t = x^2 the integrand is e^{-t} t^{(a-1+s)/2} times a polynomial of degree <= nmax.
void fill_moments(int nmax, double a, Eigen::MatrixXd& out) {
    out.setZero(nmax + 1, nmax + 1);
    const int N = nmax + 2;
    for (int s = 0; s < 2; ++s) {
        const double alpha = 0.5 * (a - 1.0 + s);
        if (!(alpha > -1.0)) throw DomainError("moment diverges at the origin");
        const GaussRule& g = cached_rule(N, alpha);
        for (int i = 0; i < N; ++i) {
            const double x = std::sqrt(g.nodes[i]);
            const std::vector<double> h = hermite_polys(nmax, x);
            const double w = g.weights[i] / (s ? x : 1.0);
            for (int m = 0; m <= nmax; ++m)
                for (int n = m; n <= nmax; ++n)
                    if ((m + n) % 2 == s) out(m, n) += w * h[m] * h[n];
        }
    }
    for (int m = 0; m <= nmax; ++m)
        for (int n = 0; n < m; ++n) out(m, n) = out(n, m);
}

// Potential weight multiplying the half-line moment: cos(pi eps/2) or i sin(pi eps/2).
cplx parity_phase(int m, int n, double epsilon) {
    return (m + n) % 2 == 0 ? cplx(std::cos(pi * epsilon / 2.0), 0.0)
                            : cplx(0.0, std::sin(pi * epsilon / 2.0));
}

// Diagonal similarity D^{-1} M D with power-of-two entries (Parlett-Reinsch).
Eigen::VectorXd balance(ComplexMatrix& M) {
    const Eigen::Index n = M.rows();
    Eigen::VectorXd d = Eigen::VectorXd::Ones(n);
    auto mag = [](cplx z) { return std::abs(z.real()) + std::abs(z.imag()); };
    bool done = false;
    while (!done) {
        done = true;
        for (Eigen::Index i = 0; i < n; ++i) {
            double c = 0.0, r = 0.0;
            for (Eigen::Index j = 0; j < n; ++j) {
                if (j == i) continue;
                c += mag(M(j, i));
                r += mag(M(i, j));
            }
            if (c == 0.0 || r == 0.0) continue;
            double f = 1.0;
            const double s = c + r;
            double cc = c;
            while (cc < r / 2.0) { cc *= 2.0; f *= 2.0; }
            while (cc >= r * 2.0) { cc /= 2.0; f /= 2.0; }
            if ((cc + r / f) < 0.95 * s) {
                done = false;
                d[i] *= f;
                M.row(i) /= f;
                M.col(i) *= f;
            }
        }
    }
    return d;
}

}  // namespace

std::vector<double> hermite_functions(int nmax, double x) {
    std::vector<double> h = hermite_polys(nmax, x);
    const double g = std::exp(-0.5 * x * x);
    for (double& v : h) v *= g;
    return h;
}

double half_line_moment(int m, int n, double a) {
    if (m < 0 || n < 0) throw DomainError("basis indices must be nonnegative");
    const int s = (m + n) % 2;
    const double alpha = 0.5 * (a - 1.0 + s);
    if (!(alpha > -1.0)) throw DomainError("moment diverges at the origin");
    const int N = (m + n) / 2 + 2;
    const GaussRule& g = cached_rule(N, alpha);
    double sum = 0.0;
    const int top = std::max(m, n);
    for (int i = 0; i < N; ++i) {
        const double x = std::sqrt(g.nodes[i]);
        const std::vector<double> h = hermite_polys(top, x);
        sum += g.weights[i] * h[m] * h[n] / (s ? x : 1.0);
    }
    return sum;
}

double kinetic_element(int m, int n) {
    if (m == n) return n + 0.5;
    if (m == n - 2) return -0.5 * std::sqrt(double(n) * (n - 1));
    if (m == n + 2) return -0.5 * std::sqrt(double(n + 1) * (n + 2));
    return 0.0;
}

cplx matrix_element(int m, int n, double epsilon) {
    return kinetic_element(m, n) + parity_phase(m, n, epsilon) * half_line_moment(m, n, 2.0 + epsilon);
}

TruncatedMatrix build_matrix(int K_trunc, double epsilon) {
    if (K_trunc < 0) throw DomainError("truncation order must be nonnegative");
    TruncatedMatrix t;
    t.order = K_trunc + 1;
    t.epsilon = epsilon;
    Eigen::MatrixXd mom;
    fill_moments(K_trunc, 2.0 + epsilon, mom);
    t.entries.resize(t.order, t.order);
    for (int m = 0; m <= K_trunc; ++m)
        for (int n = 0; n <= K_trunc; ++n)
            t.entries(m, n) = kinetic_element(m, n) + parity_phase(m, n, epsilon) * mom(m, n);
    return t;
}

MatrixSpectrum dense_spectrum(const ComplexMatrix& M, int max_sweeps, double residual_tol) {
    const Eigen::Index n = M.rows();
    if (n != M.cols()) throw DomainError("matrix must be square");
    MatrixSpectrum out;
    if (n == 0) return out;

    ComplexMatrix B = M;
    const Eigen::VectorXd d = balance(B);
    Eigen::ComplexEigenSolver<ComplexMatrix> es;
    es.setMaxIterations(max_sweeps * n);
    es.compute(B, true);
    if (es.info() != Eigen::Success) throw NumericalError("QR iteration did not converge");

    const double norm = std::max(M.norm(), std::numeric_limits<double>::min());
    for (Eigen::Index k = 0; k < n; ++k) {
        Eigen::VectorXcd v = d.asDiagonal() * es.eigenvectors().col(k);
        v.normalize();
        const cplx lambda = es.eigenvalues()[k];
        const double res = (M * v - lambda * v).norm() / norm;
        out.max_residual = std::max(out.max_residual, res);
        out.eigenvalues.push_back(lambda);
    }
    if (out.max_residual > residual_tol)
        throw NumericalError("eigenpair residual " + std::to_string(out.max_residual) + " exceeds tolerance");
    std::sort(out.eigenvalues.begin(), out.eigenvalues.end(), [](cplx a, cplx b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
    });
    return out;
}

MatrixSpectrum truncated_spectrum(int K_trunc, double epsilon) {
    return dense_spectrum(build_matrix(K_trunc, epsilon).entries);
}

double log_diag_a(int n) {
    if (n < 0) throw DomainError("level index must be nonnegative");
    double sum = 0.0;
    for (int k = 0; k <= (n + 1) / 2; ++k) sum += 1.0 / (2.0 * k - 1.0);
    return n + 1.0 + n / 2 + (n + 0.5) * sum;
}

double log_diag_element(int n) {
    return log_diag_a(n) - (std::numbers::egamma / 2.0 + std::numbers::ln2) * (n + 0.5);
}

cplx sgn_offdiag_element(int n) {
    if (n < 1) throw DomainError("pair index must be >= 1");
    const double lg = 2.0 * std::lgamma(n + 0.5) - std::lgamma(n + 1.0) - std::lgamma(double(n));
    return cplx(0.0, (8.0 * n + 1.0) / 3.0 * std::exp(0.5 * lg));
}

TwoLevelModel two_level_model(int n, double epsilon) {
    if (n < 1) throw DomainError("pair index must be >= 1");
    const double L = std::log(2.0 * n);
    TwoLevelModel t;
    t.n = n;
    t.A = 4.0 * n - 1.0 + epsilon * (n - 0.5) * L;
    t.B = 8.0 / 3.0 * epsilon * n;
    t.C = 4.0 * n + 1.0 + epsilon * n * L;
    return t;
}

double two_level_discriminant(int n, double epsilon) {
    const TwoLevelModel t = two_level_model(n, epsilon);
    return (t.A - t.C) * (t.A - t.C) - 4.0 * t.B * t.B;
}

std::pair<cplx, cplx> two_level_energies(int n, double epsilon) {
    const TwoLevelModel t = two_level_model(n, epsilon);
    const cplx root = std::sqrt(cplx(two_level_discriminant(n, epsilon), 0.0));
    return {0.5 * (t.A + t.C + root), 0.5 * (t.A + t.C - root)};
}

double pinch_epsilon_model(int n) {
    if (n < 1) throw DomainError("pair index must be >= 1");
    return 3.0 / (8.0 * n);
}

double two_level_pinch(int n) {
    if (n < 1) throw DomainError("pair index must be >= 1");
    // A - C = -2 - (eps/2) ln 2n and |2B| = -(16/3) eps n for eps < 0.
    return -2.0 / (16.0 / 3.0 * n + 0.5 * std::log(2.0 * n));
}

}  // namespace ptlab
