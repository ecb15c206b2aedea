#include "report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace phonring {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    return out;
}

void finish(std::ofstream& out, const std::string& path) {
    out.flush();
    if (!out) throw IoError("write failed: " + path);
}

std::string format_fixed(double value, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, value);
    return buf;
}

}  // namespace

std::string format_double(double value) { return format_fixed(value, 17); }

void write_response_csv(const std::string& path, const ResponseTable& table,
                        const ModeGrid& grid) {
    auto out = open_out(path);
    out << "omega,mode_q,re_chi,im_chi,abs2_chi\n";
    for (std::size_t w = 0; w < table.omega.size(); ++w)
        for (std::size_t j = 0; j < table.modes.size(); ++j) {
            const Complex chi = table.diagonal(static_cast<Eigen::Index>(w),
                                               static_cast<Eigen::Index>(j));
            out << format_double(table.omega[w]) << ','
                << format_double(grid.wavevectors[static_cast<std::size_t>(
                       table.modes[j])])
                << ',' << format_double(chi.real()) << ','
                << format_double(chi.imag()) << ',' << format_double(std::norm(chi))
                << '\n';
        }
    finish(out, path);
}

void write_linewidths_csv(const std::string& path,
                          std::span<const LinewidthEstimate> estimates) {
    auto out = open_out(path);
    out << "mode_q,omega_hat,gamma_hat,residual,n_excluded\n";
    for (const auto& e : estimates)
        out << format_double(e.mode_q) << ',' << format_double(e.omega_hat) << ','
            << format_double(e.gamma_hat) << ',' << format_double(e.residual) << ','
            << e.n_excluded << '\n';
    finish(out, path);
}

void write_predictions_csv(const std::string& path,
                           std::span<const PredictionRow> rows) {
    auto out = open_out(path);
    out << "x,rho_gamma,diffusion_ratio,sigmaD_im,sigmaP_im,kappa_tilde\n";
    for (const auto& r : rows)
        out << format_double(r.x) << ',' << format_double(r.rho_gamma) << ','
            << format_double(r.diffusion_ratio) << ',' << format_double(r.sigma_d_im)
            << ',' << format_double(r.sigma_p_im) << ','
            << format_double(r.kappa_tilde) << '\n';
    finish(out, path);
}

void write_matrix_csv(const std::string& path, const Eigen::MatrixXcd& matrix) {
    auto out = open_out(path);
    out << "row,col,re,im\n";
    for (Eigen::Index i = 0; i < matrix.rows(); ++i)
        for (Eigen::Index k = 0; k < matrix.cols(); ++k)
            out << i << ',' << k << ',' << format_double(matrix(i, k).real()) << ','
                << format_double(matrix(i, k).imag()) << '\n';
    finish(out, path);
}

namespace {

constexpr double kWidth = 860.0, kHeight = 560.0;
constexpr double kLeft = 90.0, kRight = 30.0, kTop = 50.0, kBottom = 70.0;

struct Range {
    double lo = 0.0, hi = 1.0;
    void grow(double v) {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
};

// Round tick step to 1/2/5 times a power of ten.
double nice_step(double span, int target) {
    if (!(span > 0.0)) return 1.0;
    const double raw = span / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double r = raw / mag;
    if (r < 1.5) return mag;
    if (r < 3.5) return 2.0 * mag;
    if (r < 7.5) return 5.0 * mag;
    return 10.0 * mag;
}

std::string svg_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (c == '&')
            out += "&amp;";
        else if (c == '<')
            out += "&lt;";
        else if (c == '>')
            out += "&gt;";
        else
            out += c;
    }
    return out;
}

}  // namespace

void write_svg_plot(const std::string& path, const PlotSpec& spec) {
    if (spec.series.empty()) throw ParameterError("plot has no series");

    bool any = false;
    double x_lo = 0, x_hi = 0, y_lo = 0, y_hi = 0;
    for (const auto& s : spec.series) {
        if (s.x.size() != s.y.size())
            throw ParameterError("series x/y length mismatch");
        if (!s.y_err.empty() && s.y_err.size() != s.y.size())
            throw ParameterError("series error-bar length mismatch");
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            const double err = s.y_err.empty() ? 0.0 : s.y_err[i];
            if (!any) {
                x_lo = x_hi = s.x[i];
                y_lo = s.y[i] - err;
                y_hi = s.y[i] + err;
                any = true;
            } else {
                x_lo = std::min(x_lo, s.x[i]);
                x_hi = std::max(x_hi, s.x[i]);
                y_lo = std::min(y_lo, s.y[i] - err);
                y_hi = std::max(y_hi, s.y[i] + err);
            }
        }
    }
    if (!any) throw ParameterError("plot has no points");
    if (x_hi == x_lo) {
        x_lo -= 0.5;
        x_hi += 0.5;
    }
    if (y_hi == y_lo) {
        y_lo -= 0.5;
        y_hi += 0.5;
    }
    const double x_pad = 0.04 * (x_hi - x_lo), y_pad = 0.06 * (y_hi - y_lo);
    x_lo -= x_pad;
    x_hi += x_pad;
    y_lo -= y_pad;
    y_hi += y_pad;

    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    auto px = [&](double x) { return kLeft + (x - x_lo) / (x_hi - x_lo) * plot_w; };
    auto py = [&](double y) {
        return kTop + (1.0 - (y - y_lo) / (y_hi - y_lo)) * plot_h;
    };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
        << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << ' '
        << kHeight << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w
        << "\" height=\"" << plot_h
        << "\" fill=\"none\" stroke=\"#333\" stroke-width=\"1\"/>\n";

    const double x_step = nice_step(x_hi - x_lo, 6);
    for (double t = std::ceil(x_lo / x_step) * x_step; t <= x_hi + 1e-9 * x_step;
         t += x_step) {
        const double gx = px(t);
        svg << "<line x1=\"" << format_fixed(gx, 8) << "\" y1=\"" << kTop
            << "\" x2=\"" << format_fixed(gx, 8) << "\" y2=\"" << kTop + plot_h
            << "\" stroke=\"#ddd\" stroke-width=\"0.5\"/>\n";
        svg << "<text x=\"" << format_fixed(gx, 8) << "\" y=\""
            << kTop + plot_h + 22
            << "\" font-size=\"13\" text-anchor=\"middle\" fill=\"#333\">"
            << format_fixed(std::abs(t) < 1e-12 * x_step ? 0.0 : t, 4)
            << "</text>\n";
    }
    const double y_step = nice_step(y_hi - y_lo, 6);
    for (double t = std::ceil(y_lo / y_step) * y_step; t <= y_hi + 1e-9 * y_step;
         t += y_step) {
        const double gy = py(t);
        svg << "<line x1=\"" << kLeft << "\" y1=\"" << format_fixed(gy, 8)
            << "\" x2=\"" << kLeft + plot_w << "\" y2=\"" << format_fixed(gy, 8)
            << "\" stroke=\"#ddd\" stroke-width=\"0.5\"/>\n";
        svg << "<text x=\"" << kLeft - 8 << "\" y=\"" << format_fixed(gy + 4, 8)
            << "\" font-size=\"13\" text-anchor=\"end\" fill=\"#333\">"
            << format_fixed(std::abs(t) < 1e-12 * y_step ? 0.0 : t, 4)
            << "</text>\n";
    }

    for (const auto& s : spec.series) {
        if (s.line && s.x.size() > 1) {
            svg << "<polyline fill=\"none\" stroke=\"" << s.color
                << "\" stroke-width=\"1.6\"";
            if (s.dashed) svg << " stroke-dasharray=\"6 4\"";
            svg << " points=\"";
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (i) svg << ' ';
                svg << format_fixed(px(s.x[i]), 8) << ',' << format_fixed(py(s.y[i]), 8);
            }
            svg << "\"/>\n";
        }
        if (!s.y_err.empty()) {
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (!(s.y_err[i] > 0.0)) continue;
                const double gx = px(s.x[i]);
                const double y1 = py(s.y[i] - s.y_err[i]);
                const double y2 = py(s.y[i] + s.y_err[i]);
                svg << "<line x1=\"" << format_fixed(gx, 8) << "\" y1=\""
                    << format_fixed(y1, 8) << "\" x2=\"" << format_fixed(gx, 8)
                    << "\" y2=\"" << format_fixed(y2, 8) << "\" stroke=\"" << s.color
                    << "\" stroke-width=\"1.2\"/>\n";
                for (double ye : {y1, y2})
                    svg << "<line x1=\"" << format_fixed(gx - 3, 8) << "\" y1=\""
                        << format_fixed(ye, 8) << "\" x2=\"" << format_fixed(gx + 3, 8)
                        << "\" y2=\"" << format_fixed(ye, 8) << "\" stroke=\""
                        << s.color << "\" stroke-width=\"1.2\"/>\n";
            }
        }
        if (s.markers) {
            for (std::size_t i = 0; i < s.x.size(); ++i)
                svg << "<circle cx=\"" << format_fixed(px(s.x[i]), 8) << "\" cy=\""
                    << format_fixed(py(s.y[i]), 8) << "\" r=\"3\" fill=\"" << s.color
                    << "\"/>\n";
        }
    }

    double legend_y = kTop + 16;
    for (const auto& s : spec.series) {
        if (s.label.empty()) continue;
        const double lx = kLeft + plot_w - 200;
        svg << "<line x1=\"" << lx << "\" y1=\"" << legend_y - 4 << "\" x2=\""
            << lx + 26 << "\" y2=\"" << legend_y - 4 << "\" stroke=\"" << s.color
            << "\" stroke-width=\"2\"";
        if (s.dashed) svg << " stroke-dasharray=\"6 4\"";
        svg << "/>\n";
        svg << "<text x=\"" << lx + 32 << "\" y=\"" << legend_y
            << "\" font-size=\"13\" fill=\"#333\">" << svg_escape(s.label)
            << "</text>\n";
        legend_y += 18;
    }

    svg << "<text x=\"" << kWidth / 2 << "\" y=\"" << kTop - 18
        << "\" font-size=\"16\" text-anchor=\"middle\" fill=\"#111\">"
        << svg_escape(spec.title) << "</text>\n";
    svg << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 18
        << "\" font-size=\"14\" text-anchor=\"middle\" fill=\"#111\">"
        << svg_escape(spec.x_label) << "</text>\n";
    svg << "<text x=\"22\" y=\"" << kTop + plot_h / 2
        << "\" font-size=\"14\" text-anchor=\"middle\" fill=\"#111\" transform=\"rotate(-90 22 "
        << kTop + plot_h / 2 << ")\">" << svg_escape(spec.y_label) << "</text>\n";
    svg << "</svg>\n";

    auto out = open_out(path);
    out << svg.str();
    finish(out, path);
}

std::uint64_t fnv1a_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for hashing: " + path);
    std::uint64_t hash = 0xcbf29ce484222325ull;
    char buf[8192];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        const std::streamsize got = in.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            hash ^= static_cast<unsigned char>(buf[i]);
            hash *= 0x100000001b3ull;
        }
        if (got < static_cast<std::streamsize>(sizeof buf)) break;
    }
    return hash;
}

std::string hex64(std::uint64_t value) {
    char buf[19];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

}  // namespace phonring
