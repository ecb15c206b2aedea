#include "diagrammatics.hpp"

#include <cmath>
#include <numbers>

namespace phonring {

namespace {

void require_same_size(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
    if (a.size() != b.size()) throw ParameterError("vector size mismatch");
    if (a.size() == 0) throw ParameterError("empty mode vector");
}

Complex contraction(const Eigen::VectorXcd& bare_diag,
                    const Eigen::VectorXcd& amplitudes, int power) {
    require_same_size(bare_diag, amplitudes);
    Complex sum = 0.0;
    for (Eigen::Index k = 0; k < bare_diag.size(); ++k) {
        const Complex d = bare_diag(k);
        if (d == Complex(0.0, 0.0)) throw SingularError("bare susceptibility pole");
        Complex term = std::norm(amplitudes(k)) / d;
        if (power == 2) term /= d;
        sum += term;
    }
    return sum;
}

}  // namespace

Eigen::MatrixXcd resummed_optical_response(const Eigen::VectorXcd& bare_diag,
                                           const Eigen::VectorXcd& amplitudes,
                                           Complex denominator) {
    require_same_size(bare_diag, amplitudes);
    const Eigen::Index n = bare_diag.size();
    for (Eigen::Index k = 0; k < n; ++k)
        if (bare_diag(k) == Complex(0.0, 0.0))
            throw SingularError("bare susceptibility pole");

    const Eigen::VectorXcd dinv = bare_diag.cwiseInverse();
    const double norm2 = pump_norm2(amplitudes);
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(n, n);
    if (norm2 > 0.0) {
        // Geometric series of the rank-1 mixing collapses to a single term.
        const Complex contracted = contraction(bare_diag, amplitudes, 1);
        const Complex residue = denominator - contracted;
        const double scale = std::max({std::abs(denominator), std::abs(contracted), 1.0});
        if (!(std::abs(residue) > 1e-300 * scale))
            throw SingularError("resummation pole: pump term is singular");
        const Eigen::VectorXcd left = dinv.cwiseProduct(amplitudes);
        const Eigen::VectorXcd right = dinv.cwiseProduct(amplitudes.conjugate());
        out = (left * right.transpose()) / residue;
    }
    out.diagonal() += dinv;
    return out;
}

double pump_norm2(const Eigen::VectorXcd& amplitudes) {
    return amplitudes.squaredNorm();
}

double pump_norm2_continuum(double rho, double coupling_speed, double q_center,
                            double gamma) {
    return coupling_speed * coupling_speed * q_center * q_center * rho *
           std::numbers::pi * gamma / 2.0;
}

Complex weighted_susceptibility(const Eigen::VectorXcd& bare_diag,
                                const Eigen::VectorXcd& amplitudes) {
    const double norm2 = pump_norm2(amplitudes);
    if (!(norm2 > 0.0)) throw ParameterError("pump vector has zero norm");
    return contraction(bare_diag, amplitudes, 1) / norm2;
}

Complex weighted_susceptibility_sq(const Eigen::VectorXcd& bare_diag,
                                   const Eigen::VectorXcd& amplitudes) {
    const double norm2 = pump_norm2(amplitudes);
    if (!(norm2 > 0.0)) throw ParameterError("pump vector has zero norm");
    return contraction(bare_diag, amplitudes, 2) / norm2;
}

Complex weighted_susceptibility_lorentzian(double omega, double omega_center,
                                           double gamma) {
    const double dw = omega - omega_center;
    const double den = dw * dw + 0.25 * gamma * gamma;
    return Complex(0.0, 0.25 * gamma) / den;
}

Complex weighted_susceptibility_sq_lorentzian(double omega, double omega_center,
                                              double gamma) {
    const double dw = omega - omega_center;
    const double den = dw * dw + 0.25 * gamma * gamma;
    return Complex(-0.25, 0.0) / den;
}

Complex kappa_effective(double kappa, double norm2, Complex weighted_susc) {
    return kappa - Complex(0.0, 2.0) * norm2 * weighted_susc;
}

double kappa_effective_center(double kappa, double rho, double coupling_speed,
                              double q_center) {
    return kappa + std::numbers::pi * rho * coupling_speed * coupling_speed *
                       q_center * q_center;
}

Complex optical_prefactor(double norm2, Complex optical_den, Complex weighted_susc) {
    if (!(norm2 > 0.0)) throw ParameterError("pump vector has zero norm");
    const Complex inv = optical_den / norm2 - weighted_susc;
    if (inv == Complex(0.0, 0.0)) throw SingularError("optical prefactor pole");
    return 1.0 / inv;
}

Complex sigma_disorder(const Eigen::VectorXcd& bare_diag, double strength) {
    if (bare_diag.size() == 0) throw ParameterError("empty mode vector");
    Complex sum = 0.0;
    for (Eigen::Index k = 0; k < bare_diag.size(); ++k) {
        if (bare_diag(k) == Complex(0.0, 0.0))
            throw SingularError("bare susceptibility pole");
        sum += 1.0 / bare_diag(k);
    }
    return strength * strength * sum;
}

Complex sigma_disorder_continuum(double rho, double strength) {
    return Complex(0.0, 2. * std::numbers::pi * rho * strength * strength);
}

Complex sigma_pump(Complex prefactor, double strength, Complex weighted_susc_sq) {
    return prefactor * (strength * strength) * weighted_susc_sq;
}

double diffusion_ratio(double x, double rho_gamma) {
    if (!(x >= 0.0)) throw ParameterError("rescaled power must be >= 0");
    if (!(rho_gamma > 0.0)) throw ParameterError("rho*gamma must be > 0");
    return 1.0 - 0.5 * x / (1.0 + x * std::numbers::pi * rho_gamma);
}

double diffusion_ratio_limit(double rho_gamma) {
    if (!(rho_gamma > 0.0)) throw ParameterError("rho*gamma must be > 0");
    return 1.0 - 1.0 / (2.0 * std::numbers::pi * rho_gamma);
}

}  // namespace phonring
