#pragma once

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace ptlab {

using cplx = std::complex<double>;

inline constexpr double pi = std::numbers::pi;
inline constexpr cplx I{0.0, 1.0};

// Invalid parameters for the requested operation. The CLI maps this to exit code 2.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Operation requested for a potential family that does not support it.
class UnsupportedMode : public DomainError {
public:
    using DomainError::DomainError;
};

// A solver failed to produce a result. The CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Root iteration ran out of iterations; carries the best iterate seen.
class NoConvergence : public NumericalError {
public:
    NoConvergence(const std::string& what, cplx best) : NumericalError(what), best_(best) {}
    cplx best() const noexcept { return best_; }

private:
    cplx best_;
};

enum class Family { analytic, nonanalytic };

// Potential family V(x) = x^{2K} (ix)^eps (analytic) or |x|^P (ix)^eps (nonanalytic).
class Deformation {
public:
    static Deformation analytic(int K, double epsilon);
    static Deformation nonanalytic(double P, double epsilon);

    Family family() const noexcept { return family_; }
    bool is_analytic() const noexcept { return family_ == Family::analytic; }
    double epsilon() const noexcept { return epsilon_; }

    // Throws UnsupportedMode for the other family.
    int K() const;
    double P() const;

    // Total radial degree of the potential: 2K + eps or P + eps.
    double degree() const noexcept;

    Deformation with_epsilon(double epsilon) const;

    std::string describe() const;

private:
    Deformation(Family f, double power, double eps) : family_(f), power_(power), epsilon_(eps) {}

    Family family_;
    double power_;
    double epsilon_;
};

// Argument of `z` on the branch closest to `reference`.
double lift_arg(cplx z, double reference);

// (ix)^a evaluated as |x|^a e^{i a theta}, where theta is a continuous arg(ix).
cplx ix_power(cplx x, double theta, double a);

// Analytic potential x^{2K}(ix)^eps with the sheet fixed by theta = arg(ix).
cplx potential(const Deformation& def, cplx x, double theta);

// Principal arg(ix) in (-pi, pi]; the branch cut sits on the positive imaginary x axis.
inline double principal_theta(cplx x) { return std::arg(I * x); }

}  // namespace ptlab
