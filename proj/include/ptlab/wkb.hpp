#pragma once

// Complex WKB quantization for x^{2K}(ix)^eps (eps >= 0) and the real
// |x|^{2+eps} oscillator.

#include "ptlab/deformation.hpp"

#include <utility>
#include <vector>

namespace ptlab {

enum class WkbOrder { leading, nlo };
enum class WkbFamily { analytic_K1, analytic_general_K, abs_potential };

const char* to_string(WkbOrder o);
const char* to_string(WkbFamily f);

struct WkbEstimate {
    int n = 0;
    double epsilon = 0.0;
    double E = 0.0;
    WkbOrder order = WkbOrder::leading;
    WkbFamily family = WkbFamily::analytic_K1;
};

// Turning points of E = x^2 (ix)^eps that continue off the real axis: (x_-, x_+).
std::pair<cplx, cplx> wkb_turning_pair(double E, double epsilon);

// Closed-form levels for x^2 (ix)^eps; eps < 0 throws DomainError.
double wkb_leading(int n, double epsilon);
double wkb_nlo(int n, double epsilon);   // n >= 1

// Levels of |x|^{2+eps}, eps > -2.
double abs_wkb(int n, double epsilon, WkbOrder order);

// Integral of sqrt(E - V) from x_- to 0 to x_+ along the two rays through the
// turning points, plus the closed-contour correction when order = nlo (K = 1).
// Compare with (n + 1/2) pi.
double phase_integral(const Deformation& def, double E, WkbOrder order = WkbOrder::leading);

// Both rays' contributions to the phase integral at E = 1 and ray parameter
// s in [0, 1], with V evaluated on the rays: (x_+ - x_-)/|x_+| sqrt(1 - V) for
// PT-paired rays. Real and positive on (0, 1) when the path is admissible.
cplx reduced_phase_integrand(const Deformation& def, double s);

// Level n by Newton iteration on phase_integral(E) = (n + 1/2) pi.
WkbEstimate wkb_quantize(const Deformation& def, int n, WkbOrder order = WkbOrder::leading);

// Levels 0..n_levels-1 for x^{2K}(ix)^eps. Closed forms for K = 1, quantized otherwise.
std::vector<WkbEstimate> wkb_levels(int K, double epsilon, int n_levels, WkbOrder order);

}  // namespace ptlab
