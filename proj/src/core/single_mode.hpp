#pragma once

#include "errors.hpp"

namespace phonring {

// Pump-induced damping of the phase-matched mode in the sideband-resolved
// regime, 4*alpha^2/kappa, with alpha the pump-enhanced coupling rate.
inline double optical_damping(double alpha, double kappa) {
    if (!(kappa > 0.0)) throw ParameterError("kappa must be > 0");
    return 4.0 * alpha * alpha / kappa;
}

// Minimal two-mode picture of a degenerate counter-propagating pair coupled by
// a static rate g, with only the forward (CW) partner optically damped. Each
// mode picks up backaction damping 4 g^2 / (partner linewidth) on top of its
// own rate, so the pump broadens CW and narrows CCW relative to pump-off.
struct PairLinewidths {
    double cw = 0.0;
    double ccw = 0.0;
};

inline PairLinewidths pair_linewidths(double gamma_in, double gamma_opt,
                                      double coupling) {
    if (!(gamma_in > 0.0)) throw ParameterError("gamma_in must be > 0");
    if (gamma_opt < 0.0) throw ParameterError("gamma_opt must be >= 0");
    const double g2 = coupling * coupling;
    PairLinewidths out;
    out.cw = gamma_in + gamma_opt + 4.0 * g2 / gamma_in;
    out.ccw = gamma_in + 4.0 * g2 / (gamma_in + gamma_opt);
    return out;
}

}  // namespace phonring
