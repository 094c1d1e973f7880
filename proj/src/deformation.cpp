#include "ptlab/deformation.hpp"

#include <cmath>
#include <sstream>

namespace ptlab {

Deformation Deformation::analytic(int K, double epsilon) {
    if (K < 1) throw DomainError("analytic family requires K >= 1");
    if (!std::isfinite(epsilon)) throw DomainError("epsilon must be finite");
    return Deformation(Family::analytic, static_cast<double>(K), epsilon);
}

Deformation Deformation::nonanalytic(double P, double epsilon) {
    if (!(P > 0.0) || !std::isfinite(P)) throw DomainError("nonanalytic family requires P > 0");
    if (!std::isfinite(epsilon)) throw DomainError("epsilon must be finite");
    return Deformation(Family::nonanalytic, P, epsilon);
}

int Deformation::K() const {
    if (family_ != Family::analytic) throw UnsupportedMode("K requested for the |x|^P family");
    return static_cast<int>(power_);
}

double Deformation::P() const {
    if (family_ != Family::nonanalytic) throw UnsupportedMode("P requested for the x^{2K} family");
    return power_;
}

double Deformation::degree() const noexcept {
    return family_ == Family::analytic ? 2.0 * power_ + epsilon_ : power_ + epsilon_;
}

Deformation Deformation::with_epsilon(double epsilon) const {
    return Deformation(family_, power_, epsilon);
}

std::string Deformation::describe() const {
    std::ostringstream os;
    if (family_ == Family::analytic)
        os << "x^" << 2 * K() << "(ix)^" << epsilon_;
    else
        os << "|x|^" << power_ << "(ix)^" << epsilon_;
    return os.str();
}

double lift_arg(cplx z, double reference) {
    const double a = std::arg(z);
    return a + 2.0 * pi * std::round((reference - a) / (2.0 * pi));
}

cplx ix_power(cplx x, double theta, double a) {
    return std::pow(std::abs(x), a) * std::polar(1.0, a * theta);
}

cplx potential(const Deformation& def, cplx x, double theta) {
    const int K = def.K();
    cplx x2k = 1.0;
    const cplx x2 = x * x;
    for (int k = 0; k < K; ++k) x2k *= x2;
    return x2k * ix_power(x, theta, def.epsilon());
}

}  // namespace ptlab
