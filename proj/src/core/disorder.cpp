#include "disorder.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

#include "rng.hpp"

namespace phonring {

namespace {

// Momentum transfers are tracked exactly as integer pairs (a, b) with
// q_i - q_k = a*q_offset + b*dq, a in {0, +-2}. When 2*q_offset is itself a
// multiple of dq, cross-branch transfers coincide in value with intra-branch
// ones and must share Fourier components; they are folded onto the pure-dq
// lattice in that case.
struct TransferKey {
    long long a = 0;
    long long b = 0;
    auto operator<=>(const TransferKey&) const = default;
};

TransferKey negated(TransferKey k) { return {-k.a, -k.b}; }

bool is_canonical(TransferKey k) { return k.a > 0 || (k.a == 0 && k.b > 0); }

class TransferIndex {
  public:
    explicit TransferIndex(const ModeGrid& grid) : n_pairs_(grid.n_pairs) {
        const double r = 2.0 * grid.q_offset / grid.mode_spacing;
        const double rounded = std::round(r);
        commensurate_ = std::abs(r - rounded) <= 1e-9 * std::max(1.0, std::abs(r));
        fold_ = commensurate_ ? static_cast<long long>(rounded) : 0;
    }

    TransferKey key(int i, int k) const {
        const auto [si, ji] = branch(i);
        const auto [sk, jk] = branch(k);
        TransferKey out{si - sk, si * ji - sk * jk};
        if (commensurate_ && out.a != 0) {
            out.b += (out.a / 2) * fold_;
            out.a = 0;
        }
        return out;
    }

  private:
    std::pair<long long, long long> branch(int i) const {
        if (i >= n_pairs_) return {1, i - n_pairs_};
        return {-1, n_pairs_ - 1 - i};
    }

    int n_pairs_;
    bool commensurate_ = false;
    long long fold_ = 0;
};

double entry_scale(const ModeGrid& grid, const DisorderConfig& cfg, int i, int k) {
    if (cfg.normalization == DisorderConfig::Normalization::Rms) return 1.0;
    return std::sqrt(grid.frequencies[i] * grid.frequencies[k]) /
           (2.0 * cfg.reference_density);
}

}  // namespace

DisorderRealization sample_scattering(const ModeGrid& grid, const DisorderConfig& cfg,
                                      std::uint64_t realization_index) {
    cfg.validate();
    const int n = grid.size();
    DisorderRealization out;
    out.seed = cfg.seed;
    out.index = realization_index;
    out.matrix = Eigen::MatrixXcd::Zero(n, n);
    if (cfg.strength == 0.0) return out;

    const TransferIndex transfers(grid);

    // Collect every canonical transfer occurring on the grid, in sorted order
    // so the draw sequence is independent of traversal details.
    std::vector<TransferKey> keys;
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            if (i == k) continue;
            TransferKey key = transfers.key(i, k);
            if (!is_canonical(key)) key = negated(key);
            keys.push_back(key);
        }
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());

    auto rng = substream_rng(cfg.seed, realization_index);
    std::normal_distribution<double> normal(0.0, cfg.strength / std::sqrt(2.0));
    std::map<TransferKey, Complex> components;
    for (const TransferKey& key : keys) {
        const double re = normal(rng);
        const double im = normal(rng);
        components.emplace(key, Complex(re, im));
    }

    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            if (i == k) continue;
            const TransferKey key = transfers.key(i, k);
            const Complex rho = is_canonical(key) ? components.at(key)
                                                  : std::conj(components.at(negated(key)));
            out.matrix(i, k) = entry_scale(grid, cfg, i, k) * rho;
        }
    return out;
}

CovarianceReport covariance_check(const ModeGrid& grid,
                                  std::span<const DisorderRealization> samples,
                                  double strength, int n_quadruples,
                                  std::uint64_t selection_seed) {
    if (samples.size() < 100)
        throw StatisticsError("covariance check needs at least 100 realizations");
    if (n_quadruples < 2) throw ParameterError("need at least 2 quadruples");
    const int n = grid.size();
    if (n < 2 || samples[0].matrix.rows() != n)
        throw ParameterError("grid does not match sampled matrices");

    const TransferIndex transfers(grid);
    auto rng = substream_rng(selection_seed, 0);
    std::uniform_int_distribution<int> pick(0, n - 1);
    auto pick_pair = [&]() {
        int i = pick(rng), k = pick(rng);
        while (k == i) k = pick(rng);
        return std::pair<int, int>(i, k);
    };

    CovarianceReport report;
    report.strength = strength;
    report.n_samples = static_cast<int>(samples.size());
    double se_sum = 0.0;
    for (int t = 0; t < n_quadruples; ++t) {
        const auto [i1, i2] = pick_pair();
        int i3, i4;
        if (t % 2 == 0) {
            // The reversed pair always conserves: q1 + q3 = q2 + q4.
            i3 = i2;
            i4 = i1;
        } else {
            std::tie(i3, i4) = pick_pair();
        }
        // Conservation holds exactly when the two transfers cancel; the target
        // follows from the class, not from how the quadruple was drawn, so an
        // accidental conserving draw in the random branch is scored correctly.
        const bool conserving =
            transfers.key(i1, i2) == negated(transfers.key(i3, i4));
        const double target = conserving ? strength * strength : 0.0;

        Complex mean = 0.0;
        for (const auto& s : samples) mean += s.matrix(i1, i2) * s.matrix(i3, i4);
        mean /= static_cast<double>(samples.size());

        double var_re = 0.0, var_im = 0.0;
        for (const auto& s : samples) {
            const Complex z = s.matrix(i1, i2) * s.matrix(i3, i4) - mean;
            var_re += z.real() * z.real();
            var_im += z.imag() * z.imag();
        }
        const double denom = static_cast<double>(samples.size()) *
                             std::max<double>(1, samples.size() - 1);
        const double se = std::sqrt((var_re + var_im) / denom);

        const double dev = std::abs(mean - Complex(target, 0.0));
        report.max_abs_deviation = std::max(report.max_abs_deviation, dev);
        if (se > 0.0) report.max_deviation_se = std::max(report.max_deviation_se, dev / se);
        se_sum += se;
        ++report.n_quadruples;
    }
    report.mean_standard_error = se_sum / std::max(1, report.n_quadruples);
    return report;
}

}  // namespace phonring
