#include "scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include <json.hpp>

#include "diagrammatics.hpp"
#include "rng.hpp"
#include "single_mode.hpp"

namespace phonring {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

// ---------------------------------------------------------------- config ----

ScenarioConfig::Kind parse_kind(const std::string& token) {
    if (token == "fig2") return ScenarioConfig::Kind::Fig2;
    if (token == "fig4") return ScenarioConfig::Kind::Fig4;
    if (token == "custom") return ScenarioConfig::Kind::Custom;
    throw ConfigError("unknown scenario '" + token + "' (expected fig2, fig4 or custom)");
}

std::string kind_token(ScenarioConfig::Kind kind) {
    switch (kind) {
        case ScenarioConfig::Kind::Fig2: return "fig2";
        case ScenarioConfig::Kind::Fig4: return "fig4";
        case ScenarioConfig::Kind::Custom: return "custom";
    }
    return "?";
}

std::string convention_token(DiffusionConvention c) {
    return c == DiffusionConvention::Raw ? "raw" : "subtracted";
}

std::string phase_match_token(PhaseMatchModel m) {
    return m == PhaseMatchModel::Exact ? "eq13" : "lorentzian";
}

void check_keys(const json& obj, const std::string& where,
                const std::set<std::string>& allowed) {
    for (const auto& item : obj.items())
        if (!allowed.contains(item.key()))
            throw ConfigError("unknown key '" + item.key() + "' in " + where);
}

const json* find(const json& obj, const char* key) {
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

double as_number(const json& v, const std::string& where) {
    if (!v.is_number()) throw ConfigError(where + " must be a number");
    return v.get<double>();
}

int as_int(const json& v, const std::string& where) {
    if (!v.is_number_integer()) throw ConfigError(where + " must be an integer");
    return v.get<int>();
}

std::uint64_t as_seed(const json& v, const std::string& where) {
    if (!v.is_number_unsigned() && !v.is_number_integer())
        throw ConfigError(where + " must be a non-negative integer");
    if (v.is_number_integer() && v.get<long long>() < 0)
        throw ConfigError(where + " must be a non-negative integer");
    return v.get<std::uint64_t>();
}

std::string as_string(const json& v, const std::string& where) {
    if (!v.is_string()) throw ConfigError(where + " must be a string");
    return v.get<std::string>();
}

bool as_bool(const json& v, const std::string& where) {
    if (!v.is_boolean()) throw ConfigError(where + " must be a boolean");
    return v.get<bool>();
}

std::vector<double> as_number_list(const json& v, const std::string& where) {
    if (!v.is_array() || v.empty())
        throw ConfigError(where + " must be a non-empty array of numbers");
    std::vector<double> out;
    for (const auto& e : v) out.push_back(as_number(e, where + " entry"));
    return out;
}

void fill_defaults(ScenarioConfig& cfg) {
    switch (cfg.kind) {
        case ScenarioConfig::Kind::Fig2:
            cfg.output_dir = "out/fig2";
            cfg.phase_match = PhaseMatchModel::Exact;
            cfg.mode_spacing = 0.01;
            cfg.q_center = 1.0;
            cfg.sound_speed = 1.0;
            cfg.n_pairs = 2;
            cfg.gamma_in = 2e-4;
            cfg.kappa = 0.3;
            cfg.detuning = -1.0;
            cfg.pair_coupling = 1e-5;
            cfg.gamma_opt_values = {1e-4, 3e-4, 1e-3, 3e-3};
            cfg.window_linewidths = 6.0;
            cfg.n_omega = 241;
            break;
        case ScenarioConfig::Kind::Fig4:
            cfg.output_dir = "out/fig4";
            cfg.phase_match = PhaseMatchModel::Lorentzian;
            cfg.mode_spacing = 1e-4;
            cfg.q_center = 1.0;
            cfg.sound_speed = 1.0;
            cfg.band_linewidths = 20.0;
            cfg.gamma_values = {2e-4, 5e-4, 1e-3};
            cfg.kappa = 0.1;
            cfg.detuning = -1.0;
            cfg.broadening_linewidths = 0.6;
            cfg.x_values = {0.0, 0.05, 0.1, 0.25, 0.6, 1.5, 3.5, 8.0, 20.0};
            cfg.n_realizations = 320;
            cfg.n_blocks = 8;
            cfg.window_linewidths = 6.0;
            cfg.n_omega = 193;
            break;
        case ScenarioConfig::Kind::Custom:
            break;  // everything explicit
    }
}

// Which value must be present when there is no default to fall back on.
void require_field(bool present, bool required, const std::string& where) {
    if (required && !present) throw ConfigError("missing required " + where);
}

}  // namespace

DiffusionConvention convention_from_token(const std::string& token) {
    if (token == "subtracted") return DiffusionConvention::Subtracted;
    if (token == "raw") return DiffusionConvention::Raw;
    throw ConfigError("unknown convention '" + token + "' (expected raw or subtracted)");
}

PhaseMatchModel phase_match_from_token(const std::string& token) {
    if (token == "eq13" || token == "exact") return PhaseMatchModel::Exact;
    if (token == "lorentzian") return PhaseMatchModel::Lorentzian;
    throw ConfigError("unknown phase_match '" + token +
                      "' (expected eq13 or lorentzian)");
}

ScenarioConfig parse_config(const std::string& json_text,
                            const std::string& scenario_override) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("config root must be a JSON object");

    std::string scenario_token;
    if (const json* s = find(root, "scenario"))
        scenario_token = as_string(*s, "scenario");
    if (!scenario_override.empty()) {
        if (!scenario_token.empty() && scenario_token != scenario_override)
            throw ConfigError("config is for scenario '" + scenario_token +
                              "' but '" + scenario_override + "' was requested");
        scenario_token = scenario_override;
    }
    if (scenario_token.empty())
        throw ConfigError("scenario not specified (config field or --scenario)");

    ScenarioConfig cfg;
    cfg.kind = parse_kind(scenario_token);
    fill_defaults(cfg);
    const bool sweep_kind = cfg.kind != ScenarioConfig::Kind::Fig2;
    const bool strict = cfg.kind == ScenarioConfig::Kind::Custom;

    std::set<std::string> allowed = {"scenario", "seed",     "output_dir",
                                     "convention", "phase_match", "grid",
                                     "phonon",   "optical",  "response",
                                     "debug"};
    if (sweep_kind) {
        allowed.insert("disorder");
        allowed.insert("sweep");
    } else {
        allowed.insert("coupling");
        allowed.insert("pump");
    }
    check_keys(root, "config", allowed);

    if (const json* v = find(root, "seed")) cfg.seed = as_seed(*v, "seed");
    if (const json* v = find(root, "output_dir"))
        cfg.output_dir = as_string(*v, "output_dir");
    else
        require_field(false, strict, "output_dir");
    if (const json* v = find(root, "convention"))
        cfg.convention = convention_from_token(as_string(*v, "convention"));
    if (const json* v = find(root, "phase_match"))
        cfg.phase_match = phase_match_from_token(as_string(*v, "phase_match"));

    if (const json* grid = find(root, "grid")) {
        std::set<std::string> keys = {"mode_spacing", "q_center", "sound_speed"};
        if (sweep_kind)
            keys.insert("band_linewidths");
        else
            keys.insert("n_pairs");
        check_keys(*grid, "grid", keys);
        if (const json* v = find(*grid, "mode_spacing"))
            cfg.mode_spacing = as_number(*v, "grid.mode_spacing");
        else
            require_field(false, strict, "grid.mode_spacing");
        if (const json* v = find(*grid, "q_center"))
            cfg.q_center = as_number(*v, "grid.q_center");
        else
            require_field(false, strict, "grid.q_center");
        if (const json* v = find(*grid, "sound_speed"))
            cfg.sound_speed = as_number(*v, "grid.sound_speed");
        if (const json* v = find(*grid, "n_pairs"))
            cfg.n_pairs = as_int(*v, "grid.n_pairs");
        if (const json* v = find(*grid, "band_linewidths"))
            cfg.band_linewidths = as_number(*v, "grid.band_linewidths");
        else if (sweep_kind)
            require_field(false, strict, "grid.band_linewidths");
    } else {
        require_field(false, strict, "grid section");
    }

    if (const json* phonon = find(root, "phonon")) {
        check_keys(*phonon, "phonon",
                   sweep_kind ? std::set<std::string>{"gamma_values"}
                              : std::set<std::string>{"gamma_in"});
        if (sweep_kind) {
            if (const json* v = find(*phonon, "gamma_values"))
                cfg.gamma_values = as_number_list(*v, "phonon.gamma_values");
            else
                require_field(false, strict, "phonon.gamma_values");
        } else if (const json* v = find(*phonon, "gamma_in")) {
            cfg.gamma_in = as_number(*v, "phonon.gamma_in");
        }
    } else {
        require_field(false, strict, "phonon section");
    }

    if (const json* optical = find(root, "optical")) {
        check_keys(*optical, "optical", {"kappa", "detuning"});
        if (const json* v = find(*optical, "kappa"))
            cfg.kappa = as_number(*v, "optical.kappa");
        else
            require_field(false, strict, "optical.kappa");
        if (const json* v = find(*optical, "detuning"))
            cfg.detuning = as_number(*v, "optical.detuning");
        else
            require_field(false, strict, "optical.detuning");
    } else {
        require_field(false, strict, "optical section");
    }

    if (!sweep_kind) {
        if (const json* coupling = find(root, "coupling")) {
            check_keys(*coupling, "coupling", {"pair_coupling"});
            if (const json* v = find(*coupling, "pair_coupling"))
                cfg.pair_coupling = as_number(*v, "coupling.pair_coupling");
        }
        if (const json* pump = find(root, "pump")) {
            check_keys(*pump, "pump", {"gamma_opt_values"});
            if (const json* v = find(*pump, "gamma_opt_values"))
                cfg.gamma_opt_values = as_number_list(*v, "pump.gamma_opt_values");
        }
    } else {
        if (const json* disorder = find(root, "disorder")) {
            check_keys(*disorder, "disorder", {"broadening_linewidths"});
            if (const json* v = find(*disorder, "broadening_linewidths"))
                cfg.broadening_linewidths =
                    as_number(*v, "disorder.broadening_linewidths");
            else
                require_field(false, strict, "disorder.broadening_linewidths");
        } else {
            require_field(false, strict, "disorder section");
        }
        if (const json* sweep = find(root, "sweep")) {
            check_keys(*sweep, "sweep", {"x_values", "n_realizations", "n_blocks"});
            if (const json* v = find(*sweep, "x_values"))
                cfg.x_values = as_number_list(*v, "sweep.x_values");
            else
                require_field(false, strict, "sweep.x_values");
            if (const json* v = find(*sweep, "n_realizations"))
                cfg.n_realizations = as_int(*v, "sweep.n_realizations");
            else
                require_field(false, strict, "sweep.n_realizations");
            if (const json* v = find(*sweep, "n_blocks"))
                cfg.n_blocks = as_int(*v, "sweep.n_blocks");
            else
                require_field(false, strict, "sweep.n_blocks");
        } else {
            require_field(false, strict, "sweep section");
        }
    }

    if (const json* response = find(root, "response")) {
        check_keys(*response, "response", {"window_linewidths", "n_omega"});
        if (const json* v = find(*response, "window_linewidths"))
            cfg.window_linewidths = as_number(*v, "response.window_linewidths");
        else
            require_field(false, strict, "response.window_linewidths");
        if (const json* v = find(*response, "n_omega"))
            cfg.n_omega = as_int(*v, "response.n_omega");
        else
            require_field(false, strict, "response.n_omega");
    } else {
        require_field(false, strict, "response section");
    }

    if (const json* debug = find(root, "debug")) {
        check_keys(*debug, "debug", {"dump_scattering"});
        if (const json* v = find(*debug, "dump_scattering"))
            cfg.dump_scattering = as_bool(*v, "debug.dump_scattering");
    }

    validate_config(cfg);
    return cfg;
}

ScenarioConfig load_config(const std::string& path,
                           const std::string& scenario_override) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read config file: " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str(), scenario_override);
}

void validate_config(const ScenarioConfig& cfg) {
    if (cfg.output_dir.empty()) throw ConfigError("output_dir must not be empty");
    if (!(cfg.mode_spacing > 0.0)) throw ConfigError("grid.mode_spacing must be > 0");
    if (!(cfg.q_center > 0.0)) throw ConfigError("grid.q_center must be > 0");
    if (!(cfg.sound_speed > 0.0)) throw ConfigError("grid.sound_speed must be > 0");
    if (!(cfg.kappa > 0.0)) throw ConfigError("optical.kappa must be > 0");
    if (!(cfg.window_linewidths >= 2.0))
        throw ConfigError("response.window_linewidths must be >= 2");
    if (cfg.n_omega < 16) throw ConfigError("response.n_omega must be >= 16");

    const bool guarded = cfg.kind != ScenarioConfig::Kind::Custom;
    if (guarded) {
        if (!(cfg.detuning < 0.0)) throw ConfigError("optical.detuning must be < 0");
        if (!(cfg.kappa < -cfg.detuning))
            throw ConfigError("need kappa < |detuning| (sideband-resolved regime)");
        const double resonance = cfg.q_center * cfg.sound_speed;
        if (std::abs(-cfg.detuning - resonance) > 1e-9 * resonance)
            throw ConfigError(
                "optical.detuning must equal -q_center*sound_speed: the pump "
                "normalization assumes the optical mode sits on the mechanical "
                "resonance");
    }

    if (cfg.kind == ScenarioConfig::Kind::Fig2) {
        if (cfg.n_pairs < 1) throw ConfigError("grid.n_pairs must be >= 1");
        if (!(cfg.gamma_in > 0.0)) throw ConfigError("phonon.gamma_in must be > 0");
        if (!(cfg.pair_coupling > 0.0))
            throw ConfigError("coupling.pair_coupling must be > 0");
        if (cfg.gamma_opt_values.empty())
            throw ConfigError("pump.gamma_opt_values must not be empty");
        double prev = 0.0;
        for (double g : cfg.gamma_opt_values) {
            if (!(g > prev))
                throw ConfigError(
                    "pump.gamma_opt_values must be positive and strictly increasing");
            prev = g;
        }
        // Few-mode regime: one mode per linewidth, so a single mode couples
        // resonantly.
        if (!(cfg.mode_spacing > cfg.gamma_in / cfg.sound_speed))
            throw ConfigError(
                "fig2 needs mode_spacing > gamma/sound_speed; with denser modes "
                "several modes fall inside one linewidth and the few-mode "
                "picture does not apply (use fig4)");
        return;
    }

    if (cfg.gamma_values.empty()) throw ConfigError("phonon.gamma_values must not be empty");
    std::set<double> distinct;
    for (double g : cfg.gamma_values) {
        if (!(g > 0.0)) throw ConfigError("phonon.gamma_values must be > 0");
        if (!distinct.insert(g).second)
            throw ConfigError("phonon.gamma_values must be distinct");
    }
    if (!(cfg.band_linewidths > 0.0))
        throw ConfigError("grid.band_linewidths must be > 0");
    if (cfg.kind == ScenarioConfig::Kind::Fig4 && cfg.band_linewidths < 20.0)
        throw ConfigError("fig4 requires grid.band_linewidths >= 20");
    if (!(cfg.broadening_linewidths > 0.0))
        throw ConfigError("disorder.broadening_linewidths must be > 0");
    if (cfg.x_values.size() < 2) throw ConfigError("sweep.x_values needs >= 2 points");
    if (cfg.x_values.front() != 0.0)
        throw ConfigError("sweep.x_values must start with 0 (the pump-off reference)");
    for (std::size_t i = 1; i < cfg.x_values.size(); ++i)
        if (!(cfg.x_values[i] > cfg.x_values[i - 1]))
            throw ConfigError("sweep.x_values must be strictly increasing");
    if (cfg.n_blocks < 2) throw ConfigError("sweep.n_blocks must be >= 2");
    if (cfg.n_realizations < cfg.n_blocks ||
        cfg.n_realizations % cfg.n_blocks != 0)
        throw ConfigError("sweep.n_realizations must be a positive multiple of n_blocks");

    if (cfg.kind == ScenarioConfig::Kind::Fig4) {
        // Continuum regime: many modes per linewidth.
        for (double g : cfg.gamma_values)
            if (!(cfg.mode_spacing < g / cfg.sound_speed))
                throw ConfigError(
                    "fig4 needs mode_spacing < gamma/sound_speed for every gamma; "
                    "with sparser modes the band holds too few modes per "
                    "linewidth for ensemble averaging (use fig2)");
    }

    // The band must stay on one side of q = 0 for the largest grid.
    const double g_max = *std::max_element(cfg.gamma_values.begin(), cfg.gamma_values.end());
    const double half_band = 0.5 * cfg.band_linewidths * g_max / cfg.sound_speed;
    if (!(cfg.q_center - half_band > 0.0))
        throw ConfigError("band extends past q = 0; raise q_center or shrink the band");
}

void apply_overrides(ScenarioConfig& cfg, const CliOverrides& o) {
    if (o.seed) cfg.seed = *o.seed;
    if (o.output_dir) cfg.output_dir = *o.output_dir;
    if (o.n_realizations) {
        cfg.n_realizations = *o.n_realizations;
        if (cfg.kind != ScenarioConfig::Kind::Fig2 && cfg.n_blocks > 0 &&
            cfg.n_realizations % cfg.n_blocks != 0)
            throw ConfigError("--realizations must be a multiple of sweep.n_blocks");
    }
    if (o.convention) cfg.convention = *o.convention;
    if (o.phase_match) cfg.phase_match = *o.phase_match;
    validate_config(cfg);
}

// ---------------------------------------------------------------- output ----

namespace {

class OutputSet {
  public:
    explicit OutputSet(const std::string& dir) : dir_(dir) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) throw IoError("cannot create output directory: " + dir);
    }

    std::string add(const std::string& name) {
        names_.push_back(name);
        return (dir_ / name).string();
    }

    const std::vector<std::string>& names() const { return names_; }

    std::vector<std::string> full_paths() const {
        std::vector<std::string> out;
        for (const auto& n : names_) out.push_back((dir_ / n).string());
        return out;
    }

    // Hash every file written so far, then append the manifest itself.
    std::string write_manifest(json manifest) {
        json outputs = json::array();
        for (const auto& n : names_)
            outputs.push_back({{"file", n}, {"fnv1a", hex64(fnv1a_file((dir_ / n).string()))}});
        manifest["outputs"] = std::move(outputs);
        const std::string path = add("manifest.json");
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IoError("cannot open for writing: " + path);
        out << manifest.dump(2) << '\n';
        out.flush();
        if (!out) throw IoError("write failed: " + path);
        return path;
    }

  private:
    fs::path dir_;
    std::vector<std::string> names_;
};

json common_manifest(const ScenarioConfig& cfg) {
    json m;
    m["schema_version"] = 1;
    m["program"] = "phonring";
    m["version"] = "0.1.0";
    m["scenario"] = kind_token(cfg.kind);
    m["seed"] = cfg.seed;
    m["convention"] = convention_token(cfg.convention);
    m["phase_match"] = phase_match_token(cfg.phase_match);
    json grid;
    grid["mode_spacing"] = cfg.mode_spacing;
    grid["q_center"] = cfg.q_center;
    grid["sound_speed"] = cfg.sound_speed;
    if (cfg.kind == ScenarioConfig::Kind::Fig2)
        grid["n_pairs"] = cfg.n_pairs;
    else
        grid["band_linewidths"] = cfg.band_linewidths;
    m["grid"] = std::move(grid);
    json optical;
    optical["kappa"] = cfg.kappa;
    optical["detuning"] = cfg.detuning;
    m["optical"] = std::move(optical);
    json response;
    response["window_linewidths"] = cfg.window_linewidths;
    response["n_omega"] = cfg.n_omega;
    m["response"] = std::move(response);
    return m;
}

std::string short_label(double value) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", value);
    return buf;
}

// ------------------------------------------------------------------ fig2 ----

ResponseTable fig2_solve(const ModeGrid& grid, const PhononDamping& damping,
                         const ScenarioConfig& cfg, double gamma_opt,
                         const DisorderSource& fixed, double half_window,
                         const std::vector<int>& tracked) {
    const double omega_center = grid.frequencies[static_cast<std::size_t>(tracked[0])];
    const std::vector<double> omega =
        linspace(omega_center - half_window, omega_center + half_window, cfg.n_omega);

    SolveOptions opts;
    opts.method = SolveMethod::Direct;
    opts.tracked_modes = tracked;

    if (gamma_opt == 0.0)
        return solve_response(grid, damping, nullptr, cfg.phase_match, fixed, omega, opts);

    OptoParams opto;
    opto.detuning = cfg.detuning;
    opto.kappa = cfg.kappa;
    opto.coupling_speed = std::sqrt(gamma_opt * cfg.kappa) / (2.0 * cfg.q_center);
    opto.q_center = cfg.q_center;
    opto.optical_spatial_width = 0.0;
    opto.phonon_half_width = damping.gamma / (2.0 * cfg.sound_speed);
    return solve_response(grid, damping, &opto, cfg.phase_match, fixed, omega, opts);
}

std::vector<Complex> column_of(const ResponseTable& table, int column) {
    std::vector<Complex> out(table.omega.size());
    for (std::size_t w = 0; w < table.omega.size(); ++w)
        out[w] = table.diagonal(static_cast<Eigen::Index>(w), column);
    return out;
}

std::vector<double> norm_to_peak(const std::vector<Complex>& chi) {
    std::vector<double> abs2(chi.size());
    double peak = 0.0;
    for (std::size_t i = 0; i < chi.size(); ++i) {
        abs2[i] = std::norm(chi[i]);
        peak = std::max(peak, abs2[i]);
    }
    if (peak > 0.0)
        for (double& v : abs2) v /= peak;
    return abs2;
}

}  // namespace

Fig2Result run_fig2(const ScenarioConfig& cfg) {
    if (cfg.kind != ScenarioConfig::Kind::Fig2)
        throw ConfigError("run_fig2 called with a non-fig2 config");
    validate_config(cfg);

    const ModeGrid grid =
        build_mode_grid(cfg.n_pairs, cfg.mode_spacing, cfg.sound_speed, cfg.q_center);
    const PhononDamping damping{cfg.gamma_in};
    const int cw = grid.closest_index(cfg.q_center);
    const int ccw = grid.mirror_index(cw);
    const std::vector<int> tracked_cw_first = {cw, ccw};

    Eigen::MatrixXcd pair = Eigen::MatrixXcd::Zero(grid.size(), grid.size());
    pair(cw, ccw) = cfg.pair_coupling;
    pair(ccw, cw) = cfg.pair_coupling;
    const DisorderSource fixed = DisorderSource::fixed_matrix(std::move(pair));

    OutputSet out(cfg.output_dir);
    if (cfg.dump_scattering)
        write_matrix_csv(out.add("scattering.csv"), fixed.fixed);

    Fig2Result result;
    result.gamma_opt.push_back(0.0);
    for (double g : cfg.gamma_opt_values) result.gamma_opt.push_back(g);

    // One solve per pump strength per fit window: the forward mode broadens
    // with the pump, so its window scales with gamma_in + gamma_opt while the
    // backward window stays at the bare width.
    PlotSpec plot;
    plot.title = "pair response vs pump";
    plot.x_label = "(omega - Omega_c) / gamma_in";
    plot.y_label = "|chi|^2 (peak-normalized)";
    const double omega_center = grid.frequencies[static_cast<std::size_t>(cw)];

    json manifest_points = json::array();
    for (std::size_t k = 0; k < result.gamma_opt.size(); ++k) {
        const double gamma_opt = result.gamma_opt[k];
        const double wide = cfg.window_linewidths * (cfg.gamma_in + gamma_opt);
        const double narrow = cfg.window_linewidths * cfg.gamma_in;

        const ResponseTable wide_table =
            fig2_solve(grid, damping, cfg, gamma_opt, fixed, wide, tracked_cw_first);
        const LinewidthEstimate cw_fit =
            extract_linewidth(wide_table.omega, column_of(wide_table, 0),
                              grid.wavevectors[static_cast<std::size_t>(cw)]);

        LinewidthEstimate ccw_fit;
        if (gamma_opt == 0.0) {
            ccw_fit = extract_linewidth(wide_table.omega, column_of(wide_table, 1),
                                        grid.wavevectors[static_cast<std::size_t>(ccw)]);
        } else {
            const ResponseTable narrow_table = fig2_solve(
                grid, damping, cfg, gamma_opt, fixed, narrow, tracked_cw_first);
            ccw_fit =
                extract_linewidth(narrow_table.omega, column_of(narrow_table, 1),
                                  grid.wavevectors[static_cast<std::size_t>(ccw)]);
        }
        result.cw.push_back(cw_fit);
        result.ccw.push_back(ccw_fit);

        const std::string suffix =
            k == 0 ? std::string("off") : "on_" + std::to_string(k);
        write_response_csv(out.add("response_" + suffix + ".csv"), wide_table, grid);
        const LinewidthEstimate rows[2] = {cw_fit, ccw_fit};
        write_linewidths_csv(out.add("linewidths_" + suffix + ".csv"), rows);

        json point;
        point["gamma_opt"] = gamma_opt;
        point["cw"] = {{"omega_hat", cw_fit.omega_hat},
                       {"gamma_hat", cw_fit.gamma_hat},
                       {"residual", cw_fit.residual}};
        point["ccw"] = {{"omega_hat", ccw_fit.omega_hat},
                        {"gamma_hat", ccw_fit.gamma_hat},
                        {"residual", ccw_fit.residual}};
        manifest_points.push_back(std::move(point));

        // Plot pump-off once plus both directions at the strongest pump.
        const bool strongest = k + 1 == result.gamma_opt.size();
        if (k == 0 || strongest) {
            auto add_series = [&](int column, const std::string& label,
                                  const std::string& color) {
                PlotSeries s;
                s.label = label;
                s.color = color;
                s.markers = false;
                const auto chi = column_of(wide_table, column);
                const auto y = norm_to_peak(chi);
                for (std::size_t w = 0; w < wide_table.omega.size(); ++w) {
                    s.x.push_back((wide_table.omega[w] - omega_center) / cfg.gamma_in);
                    s.y.push_back(y[w]);
                }
                plot.series.push_back(std::move(s));
            };
            if (k == 0) add_series(1, "pump off", "#555555");
            if (strongest) {
                add_series(0, "CW, pump on", "#d62728");
                add_series(1, "CCW, pump on", "#1f77b4");
            }
        }
    }

    write_svg_plot(out.add("fig2.svg"), plot);

    json manifest = common_manifest(cfg);
    json phonon;
    phonon["gamma_in"] = cfg.gamma_in;
    manifest["phonon"] = std::move(phonon);
    json coupling;
    coupling["pair_coupling"] = cfg.pair_coupling;
    manifest["coupling"] = std::move(coupling);
    json pump;
    pump["gamma_opt_values"] = cfg.gamma_opt_values;
    manifest["pump"] = std::move(pump);
    manifest["results"] = {{"points", std::move(manifest_points)}};
    out.write_manifest(std::move(manifest));

    result.files = out.full_paths();
    return result;
}

// ------------------------------------------------------------------ fig4 ----

namespace {

int sweep_pairs(const ScenarioConfig& cfg, double gamma) {
    const double ratio = cfg.band_linewidths * gamma / (cfg.sound_speed * cfg.mode_spacing);
    int n_pairs = 1 + static_cast<int>(std::ceil(ratio - 1e-9));
    if (n_pairs % 2 == 0) ++n_pairs;  // keep a mode exactly on q_center
    return n_pairs;
}

LinewidthEstimate fit_column(const std::vector<double>& omega,
                             const Eigen::MatrixXcd& diag, int column, double mode_q) {
    std::vector<Complex> chi(omega.size());
    for (std::size_t w = 0; w < omega.size(); ++w)
        chi[w] = diag(static_cast<Eigen::Index>(w), column);
    return extract_linewidth(omega, chi, mode_q);
}

}  // namespace

Fig4Result run_fig4(const ScenarioConfig& cfg) {
    if (cfg.kind == ScenarioConfig::Kind::Fig2)
        throw ConfigError("run_fig4 called with a fig2 config");
    validate_config(cfg);

    OutputSet out(cfg.output_dir);
    Fig4Result result;
    const double rho = 1.0 / (cfg.sound_speed * cfg.mode_spacing);

    PlotSpec plot;
    plot.title = "normalized diffusion vs rescaled pump power";
    plot.x_label = "x";
    plot.y_label = "D / D0";
    const char* colors[] = {"#1f77b4", "#d62728", "#ff7f0e", "#2ca02c", "#9467bd"};

    json manifest_curves = json::array();
    for (std::size_t ci = 0; ci < cfg.gamma_values.size(); ++ci) {
        const double gamma = cfg.gamma_values[ci];
        const double rho_gamma = rho * gamma;
        const std::string label = short_label(rho_gamma);

        SweepCurve curve;
        curve.gamma = gamma;
        curve.rho_gamma = rho_gamma;
        curve.n_pairs = sweep_pairs(cfg, gamma);
        curve.strength =
            std::sqrt(cfg.broadening_linewidths * gamma / (4.0 * std::numbers::pi * rho));

        const double q_offset =
            cfg.q_center - 0.5 * (curve.n_pairs - 1) * cfg.mode_spacing;
        const ModeGrid grid =
            build_mode_grid(curve.n_pairs, cfg.mode_spacing, cfg.sound_speed, q_offset);
        const PhononDamping damping{gamma};
        const int cw = grid.closest_index(cfg.q_center);
        const int ccw = grid.mirror_index(cw);
        const std::vector<int> tracked = {ccw, cw};

        OptoParams base;
        base.detuning = cfg.detuning;
        base.kappa = cfg.kappa;
        base.coupling_speed = 1.0;
        base.q_center = cfg.q_center;
        base.optical_spatial_width = 0.0;
        base.phonon_half_width = gamma / (2.0 * cfg.sound_speed);

        std::vector<double> speeds;
        for (double x : cfg.x_values)
            speeds.push_back(std::sqrt(x * gamma * cfg.kappa) / cfg.q_center);

        const double omega_center = grid.frequencies[static_cast<std::size_t>(ccw)];
        const std::vector<double> omega =
            linspace(omega_center - cfg.window_linewidths * gamma,
                     omega_center + cfg.window_linewidths * gamma, cfg.n_omega);

        DisorderConfig disorder;
        disorder.strength = curve.strength;
        disorder.seed = substream_seed(cfg.seed, ci);

        if (cfg.dump_scattering)
            write_matrix_csv(out.add("scattering_rg" + label + "_r0.csv"),
                             sample_scattering(grid, disorder, 0).matrix);

        const PowerSweepResult sweep = solve_power_sweep(
            grid, damping, base, cfg.phase_match, speeds, disorder, omega, tracked,
            cfg.n_realizations, cfg.n_blocks);
        curve.n_excluded = sweep.n_excluded;

        const double q_ccw = grid.wavevectors[static_cast<std::size_t>(ccw)];
        const double q_cw = grid.wavevectors[static_cast<std::size_t>(cw)];
        const std::size_t n_x = cfg.x_values.size();
        const std::size_t n_blocks = static_cast<std::size_t>(cfg.n_blocks);

        // Central estimates from the full-ensemble means; error bars from
        // block-wise ratios so shared realizations cancel between powers.
        std::vector<LinewidthEstimate> ccw_fits, cw_fits;
        for (std::size_t j = 0; j < n_x; ++j) {
            ccw_fits.push_back(fit_column(sweep.omega, sweep.mean[j], 0, q_ccw));
            cw_fits.push_back(fit_column(sweep.omega, sweep.mean[j], 1, q_cw));
        }
        std::vector<std::vector<double>> block_gamma(n_x,
                                                     std::vector<double>(n_blocks));
        for (std::size_t j = 0; j < n_x; ++j)
            for (std::size_t b = 0; b < n_blocks; ++b)
                block_gamma[j][b] =
                    fit_column(sweep.omega, sweep.block_mean[j][b], 0, q_ccw).gamma_hat;

        for (std::size_t j = 0; j < n_x; ++j) {
            SweepPoint point;
            point.x = cfg.x_values[j];
            point.gamma_ccw = ccw_fits[j].gamma_hat;
            point.gamma_cw = cw_fits[j].gamma_hat;
            point.diffusion = normalized_diffusion(
                ccw_fits[j].gamma_hat, ccw_fits[0].gamma_hat, gamma, cfg.convention);
            double mean = 0.0, var = 0.0;
            std::vector<double> ratios(n_blocks);
            for (std::size_t b = 0; b < n_blocks; ++b) {
                ratios[b] = normalized_diffusion(block_gamma[j][b], block_gamma[0][b],
                                                 gamma, cfg.convention);
                mean += ratios[b];
            }
            mean /= static_cast<double>(n_blocks);
            for (double r : ratios) var += (r - mean) * (r - mean);
            var /= static_cast<double>(n_blocks - 1);
            point.diffusion_err = std::sqrt(var / static_cast<double>(n_blocks));
            curve.points.push_back(point);

            ResponseTable table;
            table.omega = sweep.omega;
            table.modes = tracked;
            table.diagonal = sweep.mean[j];
            table.n_realizations = sweep.n_realizations;
            table.n_included = sweep.n_included;
            table.n_excluded = sweep.n_excluded;
            table.seed = disorder.seed;
            const std::string suffix = "rg" + label + "_x" + std::to_string(j);
            write_response_csv(out.add("response_" + suffix + ".csv"), table, grid);
            LinewidthEstimate rows[2] = {ccw_fits[j], cw_fits[j]};
            rows[0].n_excluded = sweep.n_excluded;
            rows[1].n_excluded = sweep.n_excluded;
            write_linewidths_csv(out.add("linewidths_" + suffix + ".csv"), rows);
        }

        // Weighted saturating fit; the x = 0 point is exact by construction so
        // its weight only needs a positive floor.
        std::vector<double> ys, sigmas;
        for (const auto& p : curve.points) {
            ys.push_back(p.diffusion);
            sigmas.push_back(std::max(p.diffusion_err, 1e-9));
        }
        std::string fit_error;
        try {
            curve.fit = fit_saturating(cfg.x_values, ys, sigmas, rho_gamma);
        } catch (const Error& e) {
            fit_error = e.what();
        }

        for (double x : cfg.x_values) {
            PredictionRow row;
            row.x = x;
            row.rho_gamma = rho_gamma;
            row.diffusion_ratio = diffusion_ratio(x, rho_gamma);
            row.sigma_d_im =
                sigma_disorder_continuum(rho, curve.strength).imag();
            const double c = std::sqrt(x * gamma * cfg.kappa) / cfg.q_center;
            row.kappa_tilde = kappa_effective_center(cfg.kappa, rho, c, cfg.q_center);
            if (x > 0.0) {
                const double norm2 =
                    pump_norm2_continuum(rho, c, cfg.q_center, gamma);
                const Complex eta(0.0, 2.0 * norm2 / row.kappa_tilde);
                row.sigma_p_im =
                    sigma_pump(eta, curve.strength, Complex(-1.0 / (gamma * gamma), 0.0))
                        .imag();
            }
            curve.predictions.push_back(row);
        }

        {
            const std::string path = out.add("sweep_rg" + label + ".csv");
            std::ofstream sweep_csv(path, std::ios::binary);
            if (!sweep_csv) throw IoError("cannot open for writing: " + path);
            sweep_csv << "x,diffusion,diffusion_err,gamma_ccw_hat,gamma_cw_hat\n";
            for (const auto& p : curve.points)
                sweep_csv << format_double(p.x) << ',' << format_double(p.diffusion)
                          << ',' << format_double(p.diffusion_err) << ','
                          << format_double(p.gamma_ccw) << ','
                          << format_double(p.gamma_cw) << '\n';
            sweep_csv.flush();
            if (!sweep_csv) throw IoError("write failed: " + path);
        }
        write_predictions_csv(out.add("predictions_rg" + label + ".csv"),
                              curve.predictions);

        const std::string color = colors[ci % 5];
        PlotSeries data;
        data.label = "rho*gamma = " + label + " (data)";
        data.color = color;
        for (const auto& p : curve.points) {
            data.x.push_back(p.x);
            data.y.push_back(p.diffusion);
            data.y_err.push_back(p.diffusion_err);
        }
        plot.series.push_back(std::move(data));
        PlotSeries theory;
        theory.label = "rho*gamma = " + label + " (theory)";
        theory.color = color;
        theory.markers = false;
        theory.dashed = true;
        const auto dense = linspace(0.0, cfg.x_values.back(), 200);
        for (double x : dense) {
            theory.x.push_back(x);
            theory.y.push_back(diffusion_ratio(x, rho_gamma));
        }
        plot.series.push_back(std::move(theory));

        json jcurve;
        jcurve["gamma"] = gamma;
        jcurve["rho_gamma"] = rho_gamma;
        jcurve["strength"] = curve.strength;
        jcurve["n_pairs"] = curve.n_pairs;
        jcurve["disorder_seed"] = disorder.seed;
        jcurve["n_excluded"] = curve.n_excluded;
        json jfit;
        if (fit_error.empty()) {
            jfit["a"] = curve.fit.a;
            jfit["b"] = curve.fit.b;
            jfit["a_err"] = curve.fit.a_err;
            jfit["b_err"] = curve.fit.b_err;
            jfit["chi2"] = curve.fit.chi2;
            jfit["converged"] = curve.fit.converged;
            jfit["degenerate"] = curve.fit.degenerate;
        } else {
            jfit["error"] = fit_error;
        }
        jcurve["fit"] = std::move(jfit);
        manifest_curves.push_back(std::move(jcurve));

        result.curves.push_back(std::move(curve));
    }

    write_svg_plot(out.add(kind_token(cfg.kind) == "custom" ? "sweep.svg"
                                                            : "fig4.svg"),
                   plot);

    json manifest = common_manifest(cfg);
    json phonon;
    phonon["gamma_values"] = cfg.gamma_values;
    manifest["phonon"] = std::move(phonon);
    json disorder_j;
    disorder_j["broadening_linewidths"] = cfg.broadening_linewidths;
    manifest["disorder"] = std::move(disorder_j);
    json sweep_j;
    sweep_j["x_values"] = cfg.x_values;
    sweep_j["n_realizations"] = cfg.n_realizations;
    sweep_j["n_blocks"] = cfg.n_blocks;
    manifest["sweep"] = std::move(sweep_j);
    manifest["results"] = {{"curves", std::move(manifest_curves)}};
    out.write_manifest(std::move(manifest));

    result.files = out.full_paths();
    return result;
}

std::vector<std::string> run_scenario(const ScenarioConfig& cfg) {
    if (cfg.kind == ScenarioConfig::Kind::Fig2) return run_fig2(cfg).files;
    return run_fig4(cfg).files;
}

}  // namespace phonring
