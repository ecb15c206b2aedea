#include "solver.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "fitting.hpp"

namespace phonring {

namespace {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

std::vector<int> resolve_tracked(const ModeGrid& grid, const SolveOptions& opts) {
    std::vector<int> tracked = opts.tracked_modes;
    if (tracked.empty()) {
        tracked.resize(grid.size());
        for (int i = 0; i < grid.size(); ++i) tracked[i] = i;
    }
    for (int i : tracked)
        if (i < 0 || i >= grid.size()) throw ParameterError("tracked mode out of range");
    return tracked;
}

MatrixXcd scattering_for(const DisorderSource& src, const ModeGrid& grid,
                         std::uint64_t r) {
    switch (src.kind) {
        case DisorderSource::Kind::None:
            return MatrixXcd::Zero(grid.size(), grid.size());
        case DisorderSource::Kind::Sampled:
            return sample_scattering(grid, src.config, r).matrix;
        case DisorderSource::Kind::Fixed:
            if (src.fixed.rows() != grid.size())
                throw ParameterError("fixed scattering matrix does not match grid");
            return src.fixed;
    }
    throw ParameterError("unknown disorder source");
}

// Direct route: factorize the full matrix at each frequency. Returns false when
// any factorization is too ill-conditioned to trust.
bool realization_direct(const ModeGrid& grid, const PhononDamping& damping,
                        const OptoParams* opto, PhaseMatchModel pm,
                        const MatrixXcd& scattering, std::span<const double> omega,
                        std::span<const int> tracked, const SolveOptions& opts,
                        MatrixXcd& diag_out, std::vector<MatrixXcd>* full_out) {
    const int n = grid.size();
    const bool want_all = opts.store_full || static_cast<int>(tracked.size()) == n;
    for (std::size_t w = 0; w < omega.size(); ++w) {
        MatrixXcd a = -scattering;
        a.diagonal() += bare_inverse_susceptibility(grid, damping, omega[w]);
        if (opto) a -= optical_mix_matrix(grid, *opto, omega[w], pm);

        Eigen::PartialPivLU<MatrixXcd> lu(a);
        if (!(lu.rcond() > opts.singular_threshold)) return false;

        if (want_all) {
            const MatrixXcd inv = lu.inverse();
            for (std::size_t j = 0; j < tracked.size(); ++j)
                diag_out(static_cast<Eigen::Index>(w), static_cast<Eigen::Index>(j)) =
                    inv(tracked[j], tracked[j]);
            if (full_out) (*full_out)[w] = inv;
        } else {
            VectorXcd e = VectorXcd::Zero(n);
            for (std::size_t j = 0; j < tracked.size(); ++j) {
                e(tracked[j]) = 1.0;
                const VectorXcd col = lu.solve(e);
                e(tracked[j]) = 0.0;
                diag_out(static_cast<Eigen::Index>(w), static_cast<Eigen::Index>(j)) =
                    col(tracked[j]);
            }
        }
    }
    return true;
}

// Spectral route: the scattering and dispersion part is Hermitian and
// frequency-independent, so one eigendecomposition serves every frequency; the
// optical term is a rank-1 update applied in the eigenbasis.
struct SpectralBasis {
    VectorXd levels;
    MatrixXcd vectors;
    // Per tracked mode: |V_jk|^2 and V_jk * u_k over the eigenindex k.
    std::vector<VectorXd> weight;
    std::vector<VectorXcd> mixed;
    VectorXd u_abs2;
    bool has_pump = false;
};

SpectralBasis build_spectral_basis(const ModeGrid& grid, const MatrixXcd& scattering,
                                   const VectorXcd* phi,
                                   std::span<const int> tracked) {
    MatrixXcd h0 = -scattering;
    for (int i = 0; i < grid.size(); ++i) h0(i, i) += grid.frequencies[i];

    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(h0);
    if (es.info() != Eigen::Success)
        throw SingularError("eigendecomposition of the scattering matrix failed");

    SpectralBasis basis;
    basis.levels = es.eigenvalues();
    basis.vectors = es.eigenvectors();
    basis.weight.reserve(tracked.size());
    basis.mixed.reserve(tracked.size());

    VectorXcd u;
    if (phi) {
        u = basis.vectors.adjoint() * (*phi);
        basis.u_abs2 = u.cwiseAbs2();
        basis.has_pump = true;
    }
    for (int j : tracked) {
        basis.weight.push_back(basis.vectors.row(j).cwiseAbs2().transpose());
        if (phi)
            basis.mixed.push_back(
                basis.vectors.row(j).transpose().cwiseProduct(u));
        else
            basis.mixed.emplace_back();
    }
    return basis;
}

// Diagonal response of one realization at one frequency for every tracked
// mode. coupling2 scales the rank-1 pump term; returns false on a singular
// rank-1 denominator.
using RowRef = Eigen::Ref<Eigen::RowVectorXcd, 0, Eigen::InnerStride<>>;

bool spectral_diagonal(const SpectralBasis& basis, double omega_value, double gamma,
                       const OptoParams* opto, double coupling2,
                       double singular_threshold, RowRef out) {
    const Complex z(omega_value, 0.5 * gamma);
    const VectorXcd d =
        (basis.levels.cast<Complex>().array() - z).inverse().matrix();

    Complex denom = 0.0;
    bool pump = basis.has_pump && opto && coupling2 != 0.0;
    if (pump) {
        const Complex beta = basis.u_abs2.cast<Complex>().cwiseProduct(d).sum();
        const Complex den = optical_denominator(*opto, omega_value);
        denom = den - coupling2 * beta;
        const double scale =
            std::max({std::abs(den), std::abs(coupling2 * beta), 1.0});
        if (!(std::abs(denom) > singular_threshold * scale)) return false;
    }
    for (std::size_t j = 0; j < basis.weight.size(); ++j) {
        Complex value = basis.weight[j].cast<Complex>().cwiseProduct(d).sum();
        if (pump) {
            const Complex t = basis.mixed[j].cwiseProduct(d).sum();
            const Complex s = basis.mixed[j].conjugate().cwiseProduct(d).sum();
            value += coupling2 * t * s / denom;
        }
        out(static_cast<Eigen::Index>(j)) = value;
    }
    return true;
}

bool realization_spectral(const ModeGrid& grid, const PhononDamping& damping,
                          const OptoParams* opto, PhaseMatchModel pm,
                          const MatrixXcd& scattering, std::span<const double> omega,
                          std::span<const int> tracked, const SolveOptions& opts,
                          MatrixXcd& diag_out) {
    VectorXcd phi;
    if (opto) phi = coupling_amplitudes(grid, *opto, pm);
    const SpectralBasis basis =
        build_spectral_basis(grid, scattering, opto ? &phi : nullptr, tracked);
    for (std::size_t w = 0; w < omega.size(); ++w) {
        if (!spectral_diagonal(basis, omega[w], damping.gamma, opto, 1.0,
                               opts.singular_threshold,
                               diag_out.row(static_cast<Eigen::Index>(w))))
            return false;
    }
    return true;
}

void check_exclusions(int n_included, int n_excluded, double max_fraction) {
    if (n_included == 0) throw SingularError("every realization was excluded");
    const double fraction =
        static_cast<double>(n_excluded) / static_cast<double>(n_included + n_excluded);
    if (fraction > max_fraction)
        throw StatisticsError("too many realizations excluded as near-singular");
}

}  // namespace

std::vector<double> linspace(double start, double stop, int n_points) {
    if (n_points < 1) throw ParameterError("need at least one grid point");
    std::vector<double> out(static_cast<std::size_t>(n_points));
    if (n_points == 1) {
        out[0] = start;
        return out;
    }
    const double step = (stop - start) / static_cast<double>(n_points - 1);
    for (int i = 0; i < n_points; ++i) out[static_cast<std::size_t>(i)] = start + step * i;
    out.back() = stop;
    return out;
}

DisorderSource DisorderSource::fixed_matrix(Eigen::MatrixXcd m) {
    if (m.rows() != m.cols()) throw ParameterError("scattering matrix must be square");
    const double scale = std::max(1.0, m.norm());
    if ((m - m.adjoint()).norm() > 1e-12 * scale)
        throw ParameterError("scattering matrix must be Hermitian");
    DisorderSource s;
    s.kind = Kind::Fixed;
    s.fixed = std::move(m);
    return s;
}

ResponseTable solve_response(const ModeGrid& grid, const PhononDamping& damping,
                             const OptoParams* opto, PhaseMatchModel pm,
                             const DisorderSource& disorder,
                             std::span<const double> omega,
                             const SolveOptions& opts) {
    damping.validate();
    if (opto) opto->validate();
    if (omega.empty()) throw ParameterError("frequency grid is empty");
    if (opts.n_realizations < 1) throw ParameterError("need at least one realization");

    const std::vector<int> tracked = resolve_tracked(grid, opts);
    SolveMethod method = opts.method;
    if (method == SolveMethod::Auto)
        method = grid.size() <= 64 ? SolveMethod::Direct : SolveMethod::Spectral;
    if (opts.store_full && method != SolveMethod::Direct)
        throw ParameterError("full response matrices require the direct method");

    // Without sampling every realization is identical; compute one.
    const int n_real =
        disorder.kind == DisorderSource::Kind::Sampled ? opts.n_realizations : 1;
    const auto n_omega = static_cast<Eigen::Index>(omega.size());
    const auto n_tracked = static_cast<Eigen::Index>(tracked.size());

    ResponseTable table;
    table.omega.assign(omega.begin(), omega.end());
    table.modes = tracked;
    table.diagonal = MatrixXcd::Zero(n_omega, n_tracked);
    table.n_realizations = n_real;
    if (disorder.kind == DisorderSource::Kind::Sampled) table.seed = disorder.config.seed;
    if (opts.store_full)
        table.full.assign(omega.size(), MatrixXcd::Zero(grid.size(), grid.size()));

    MatrixXcd diag_r(n_omega, n_tracked);
    std::vector<MatrixXcd> full_r;
    if (opts.store_full) full_r.resize(omega.size());

    for (int r = 0; r < n_real; ++r) {
        const MatrixXcd e = scattering_for(disorder, grid, static_cast<std::uint64_t>(r));
        bool ok;
        if (method == SolveMethod::Direct)
            ok = realization_direct(grid, damping, opto, pm, e, omega, tracked, opts,
                                    diag_r, opts.store_full ? &full_r : nullptr);
        else
            ok = realization_spectral(grid, damping, opto, pm, e, omega, tracked, opts,
                                      diag_r);
        if (!ok) {
            ++table.n_excluded;
            continue;
        }
        table.diagonal += diag_r;
        if (opts.store_full)
            for (std::size_t w = 0; w < omega.size(); ++w) table.full[w] += full_r[w];
        ++table.n_included;
    }

    check_exclusions(table.n_included, table.n_excluded, opts.max_excluded_fraction);
    const double inv = 1.0 / static_cast<double>(table.n_included);
    table.diagonal *= inv;
    for (auto& m : table.full) m *= inv;
    return table;
}

PowerSweepResult solve_power_sweep(const ModeGrid& grid, const PhononDamping& damping,
                                   const OptoParams& base, PhaseMatchModel pm,
                                   std::span<const double> coupling_speeds,
                                   const DisorderConfig& disorder,
                                   std::span<const double> omega,
                                   std::span<const int> tracked, int n_realizations,
                                   int n_blocks, const SolveOptions& opts) {
    damping.validate();
    base.validate();
    disorder.validate();
    if (omega.empty()) throw ParameterError("frequency grid is empty");
    if (coupling_speeds.empty()) throw ParameterError("no coupling speeds given");
    if (tracked.empty()) throw ParameterError("no tracked modes given");
    for (int j : tracked)
        if (j < 0 || j >= grid.size()) throw ParameterError("tracked mode out of range");
    if (n_blocks < 1) throw ParameterError("need at least one block");
    if (n_realizations < n_blocks || n_realizations % n_blocks != 0)
        throw ParameterError("realizations must divide evenly into blocks");
    for (double c : coupling_speeds)
        if (!(c >= 0.0)) throw ParameterError("coupling speeds must be >= 0");

    // The rank-1 pump term scales as the squared coupling speed, so the
    // realization basis is built once at unit speed and rescaled per power.
    OptoParams unit = base;
    unit.coupling_speed = 1.0;
    const Eigen::VectorXcd phi = coupling_amplitudes(grid, unit, pm);

    const auto n_omega = static_cast<Eigen::Index>(omega.size());
    const auto n_tracked = static_cast<Eigen::Index>(tracked.size());
    const std::size_t n_power = coupling_speeds.size();
    const int per_block = n_realizations / n_blocks;

    PowerSweepResult result;
    result.omega.assign(omega.begin(), omega.end());
    result.modes.assign(tracked.begin(), tracked.end());
    result.coupling_speeds.assign(coupling_speeds.begin(), coupling_speeds.end());
    result.mean.assign(n_power, MatrixXcd::Zero(n_omega, n_tracked));
    result.block_mean.assign(
        n_power, std::vector<MatrixXcd>(static_cast<std::size_t>(n_blocks),
                                        MatrixXcd::Zero(n_omega, n_tracked)));
    result.block_count.assign(static_cast<std::size_t>(n_blocks), 0);
    result.n_realizations = n_realizations;

    std::vector<MatrixXcd> buffer(n_power, MatrixXcd(n_omega, n_tracked));

    for (int r = 0; r < n_realizations; ++r) {
        const MatrixXcd e =
            sample_scattering(grid, disorder, static_cast<std::uint64_t>(r)).matrix;
        const SpectralBasis basis = build_spectral_basis(grid, e, &phi, tracked);

        bool ok = true;
        for (std::size_t p = 0; ok && p < n_power; ++p) {
            const double c2 = coupling_speeds[p] * coupling_speeds[p];
            for (std::size_t w = 0; w < omega.size(); ++w) {
                if (!spectral_diagonal(basis, omega[w], damping.gamma, &base, c2,
                                       opts.singular_threshold,
                                       buffer[p].row(static_cast<Eigen::Index>(w)))) {
                    ok = false;
                    break;
                }
            }
        }
        if (!ok) {
            ++result.n_excluded;
            continue;
        }
        const auto block = static_cast<std::size_t>(r / per_block);
        for (std::size_t p = 0; p < n_power; ++p) {
            result.mean[p] += buffer[p];
            result.block_mean[p][block] += buffer[p];
        }
        ++result.block_count[block];
        ++result.n_included;
    }

    check_exclusions(result.n_included, result.n_excluded, opts.max_excluded_fraction);
    for (int count : result.block_count)
        if (count == 0) throw StatisticsError("an error-estimate block lost every realization");

    const double inv = 1.0 / static_cast<double>(result.n_included);
    for (std::size_t p = 0; p < n_power; ++p) {
        result.mean[p] *= inv;
        for (int b = 0; b < n_blocks; ++b)
            result.block_mean[p][static_cast<std::size_t>(b)] /=
                static_cast<double>(result.block_count[static_cast<std::size_t>(b)]);
    }
    return result;
}

LinewidthEstimate extract_linewidth(std::span<const double> omega,
                                    std::span<const Complex> chi_diag, double mode_q,
                                    int n_excluded) {
    if (omega.size() != chi_diag.size())
        throw ParameterError("frequency/response length mismatch");
    std::vector<double> abs2(chi_diag.size());
    for (std::size_t i = 0; i < chi_diag.size(); ++i) abs2[i] = std::norm(chi_diag[i]);
    const LorentzianFit fit = fit_lorentzian(omega, abs2);
    LinewidthEstimate est;
    est.mode_q = mode_q;
    est.omega_hat = fit.center;
    est.gamma_hat = fit.fwhm;
    est.residual = fit.residual;
    est.n_excluded = n_excluded;
    return est;
}

double normalized_diffusion(double gamma_on, double gamma_off, double gamma_intrinsic,
                            DiffusionConvention convention) {
    if (convention == DiffusionConvention::Raw) {
        if (!(gamma_off > 0.0)) throw RangeError("reference linewidth must be > 0");
        return gamma_on / gamma_off;
    }
    const double reference = gamma_off - gamma_intrinsic;
    if (!(reference > 0.0))
        throw StatisticsError("no disorder broadening to normalize by");
    return (gamma_on - gamma_intrinsic) / reference;
}

}  // namespace phonring
