// experiments.hpp: figure-reproduction experiments, parameter resolution and
// deterministic CSV / summary output

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "dynmod/amplitude_dynamics.hpp"
#include "dynmod/errors.hpp"
#include "dynmod/grid.hpp"
#include "dynmod/parallel.hpp"
#include "dynmod/qubit_state.hpp"
#include "dynmod/ramsey_qfi.hpp"
#include "dynmod/tcl_dynamics.hpp"
#include "dynmod/thermo_qfi.hpp"

namespace dynmod::experiments {

inline constexpr const char* kUnitsLine =
    "# units: frequencies and rates in Omega, time in 1/Omega, temperature in Omega (k_B = hbar = 1)";

// ---------------------------------------------------------------- formatting

inline std::string format_number(double v) {
    if (v == 0.0) v = 0.0; // drop the sign of negative zero
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

// Column-name token for a parameter value: 2.404 -> "2404", 0.2 -> "02".
inline std::string column_token(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    std::string s;
    for (const char* c = buf; *c; ++c) {
        if (*c == '.') continue;
        s += *c == '-' ? 'm' : *c;
    }
    return s;
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::string render() const {
        std::string out = kUnitsLine;
        out += '\n';
        for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
        out += '\n';
        for (const auto& row : rows) {
            for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + format_number(row[i]);
            out += '\n';
        }
        return out;
    }
};

struct Output {
    std::vector<std::pair<std::string, Table>> files;           // file name, content
    std::vector<std::pair<std::string, std::string>> summary;   // key, value

    void metric(const std::string& key, double v) { summary.emplace_back(key, format_number(v)); }
    void flag(const std::string& key, bool v) { summary.emplace_back(key, v ? "true" : "false"); }

    std::string render_summary() const {
        std::string out;
        for (const auto& [k, v] : summary) out += k + " = " + v + "\n";
        return out;
    }
};

// ---------------------------------------------------------------- parameters

struct KeyInfo {
    const char* name;
    const char* help;
};

inline const std::vector<KeyInfo>& known_keys() {
    static const std::vector<KeyInfo> keys{
        {"omega0", "qubit frequency"},
        {"coupling", "bath coupling strength Omega"},
        {"lambda", "spectral width (list allowed)"},
        {"omega_c", "spectrum center; overrides delta_c"},
        {"delta_c", "detuning omega0 - omega_c"},
        {"xi", "modulation amplitude (list allowed)"},
        {"nu", "modulation frequency (list allowed)"},
        {"temp", "bath temperature (list allowed)"},
        {"stats", "bath statistics: fermionic | bosonic"},
        {"t_max", "final time"},
        {"h", "integration step, or auto"},
        {"dt_out", "output sampling interval"},
        {"free_time", "Ramsey free-evolution time"},
        {"initial_pe", "initial excited population"},
        {"xi_min", "amplitude grid start"},
        {"xi_max", "amplitude grid end"},
        {"xi_points", "amplitude grid size"},
        {"nu_min", "frequency grid start"},
        {"nu_max", "frequency grid end"},
        {"nu_points", "frequency grid size"},
        {"T_min", "temperature grid start (log spaced)"},
        {"T_max", "temperature grid end"},
        {"T_points", "temperature grid size"},
        {"x_max", "g-function x range"},
        {"y_max", "g-function y range"},
        {"grid_points", "g-function grid size per axis"},
    };
    return keys;
}

inline bool is_known_key(const std::string& k) {
    return std::any_of(known_keys().begin(), known_keys().end(), [&](const KeyInfo& i) { return k == i.name; });
}

inline double parse_number(const std::string& key, const std::string& text) {
    const char* begin = text.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    while (end && (*end == ' ' || *end == '\t')) ++end;
    if (end == begin || *end != '\0' || !std::isfinite(v)) {
        throw InvalidInput("parameter '" + key + "': cannot parse '" + text + "' as a number");
    }
    return v;
}

using ParamMap = std::map<std::string, std::string>;

class Params {
public:
    Params() = default;
    explicit Params(ParamMap values) : values_(std::move(values)) {}

    const ParamMap& values() const { return values_; }
    bool has(const std::string& key) const { return values_.count(key) != 0; }

    const std::string& text(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) throw InvalidInput("parameter '" + key + "' is not defined for this experiment");
        return it->second;
    }

    std::vector<double> list(const std::string& key) const {
        std::vector<double> out;
        std::stringstream ss(text(key));
        std::string item;
        while (std::getline(ss, item, ',')) {
            const auto b = item.find_first_not_of(" \t");
            const auto e = item.find_last_not_of(" \t");
            if (b == std::string::npos) throw InvalidInput("parameter '" + key + "': empty list entry");
            out.push_back(parse_number(key, item.substr(b, e - b + 1)));
        }
        if (out.empty()) throw InvalidInput("parameter '" + key + "': empty value");
        return out;
    }

    double num(const std::string& key) const {
        const auto l = list(key);
        if (l.size() != 1) throw InvalidInput("parameter '" + key + "' expects a single value");
        return l.front();
    }

    std::size_t count(const std::string& key) const {
        const double v = num(key);
        if (!(v >= 1.0) || v != std::floor(v) || v > 1e7) {
            throw InvalidInput("parameter '" + key + "' must be a positive integer");
        }
        return static_cast<std::size_t>(v);
    }

    std::optional<double> step() const {
        if (!has("h") || text("h") == "auto") return std::nullopt;
        return num("h");
    }

    Statistics statistics() const {
        const std::string& s = text("stats");
        if (s == "fermionic") return Statistics::fermionic;
        if (s == "bosonic") return Statistics::bosonic;
        throw InvalidInput("parameter 'stats' must be fermionic or bosonic, got '" + s + "'");
    }

private:
    ParamMap values_;
};

// Flat key = value file with # comments.
inline ParamMap read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot read config file '" + path + "'");
    ParamMap out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto eq = line.find('=');
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        if (eq == std::string::npos) {
            throw InvalidInput(path + ":" + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw InvalidInput(path + ":" + std::to_string(lineno) + ": expected key = value");
        }
        out[key] = value;
    }
    return out;
}

// ---------------------------------------------------------------- shared helpers

namespace detail {

inline LorentzianSpectrum spectrum(const Params& p, double lambda) {
    return {p.num("coupling"), lambda, p.num("omega0") - p.num("delta_c")};
}

inline SystemSpec system(const Params& p) { return {p.num("omega0")}; }

// Step and output stride for sampled trajectories. The step divides dt_out
// and dt_out divides t_max so every emitted row sits exactly on the grid.
struct Sampling {
    double h{0.0};
    std::size_t stride{1};
    std::size_t rows{1};
};

inline Sampling sampling(const Params& p, double h_max) {
    const double t_max = p.num("t_max");
    const double dt = p.num("dt_out");
    const double ratio = t_max / dt;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio)) {
        throw InvalidInput("t_max must be an integer multiple of dt_out");
    }
    Sampling s;
    s.rows = static_cast<std::size_t>(std::llround(ratio)) + 1;
    if (auto h = p.step()) {
        const double k = dt / *h;
        if (std::abs(k - std::round(k)) > 1e-9 * std::max(1.0, k) || std::round(k) < 1.0) {
            throw InvalidInput("dt_out must be an integer multiple of h");
        }
        s.stride = static_cast<std::size_t>(std::llround(k));
        s.h = dt / static_cast<double>(s.stride);
    } else {
        s.stride = static_cast<std::size_t>(std::ceil(dt / h_max - 1e-9));
        s.h = dt / static_cast<double>(s.stride);
    }
    return s;
}

inline std::vector<double> output_times(const Params& p) {
    const double dt = p.num("dt_out");
    const auto n = static_cast<std::size_t>(std::llround(p.num("t_max") / dt)) + 1;
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) t[i] = dt * static_cast<double>(i);
    return t;
}

template <typename V>
std::vector<double> sample(const std::vector<V>& series, const Sampling& s, auto&& fn) {
    std::vector<double> out(s.rows);
    for (std::size_t r = 0; r < s.rows; ++r) out[r] = fn(series.at(r * s.stride));
    return out;
}

inline Table columns_table(std::vector<std::string> header, const std::vector<std::vector<double>>& cols) {
    Table t;
    t.header = std::move(header);
    const std::size_t n = cols.front().size();
    t.rows.assign(n, std::vector<double>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c)
        for (std::size_t r = 0; r < n; ++r) t.rows[r][c] = cols[c][r];
    return t;
}

inline std::string panel_name(const std::string& base, std::size_t index, std::size_t total) {
    if (total == 1 && index == 0) return base + "a.csv";
    return base + static_cast<char>('a' + index) + ".csv";
}

inline double initial_amplitude(const Params& p) { return std::sqrt(p.num("initial_pe")); }

inline std::vector<double> xi_grid(const Params& p) {
    return linspace(p.num("xi_min"), p.num("xi_max"), p.count("xi_points"));
}
inline std::vector<double> nu_grid(const Params& p) {
    return linspace(p.num("nu_min"), p.num("nu_max"), p.count("nu_points"));
}
inline std::vector<double> temperature_grid(const Params& p) {
    return logspace(p.num("T_min"), p.num("T_max"), p.count("T_points"));
}

struct TclRun {
    PopulationTrajectory traj;
    double eq_steady{0.0};
    Sampling sampling;
};

inline TclRun tcl_run(const Params& p, double lambda, double temperature, Statistics stats) {
    ThermalBathSpec bath{spectrum(p, lambda), temperature, stats};
    const SystemSpec sys = system(p);
    const ModulationConfig mod{p.num("xi"), p.num("nu")};
    TclRun run;
    run.sampling = sampling(p, max_step(bath.spectrum, mod));
    const double t_max = p.num("t_max");
    const KernelTable table = build_kernel_table(bath, sys.omega0, t_max, run.sampling.h);
    const double pe0 = p.num("initial_pe");
    const cplx coh0 = std::sqrt(pe0 * (1.0 - pe0));
    run.traj = tcl_propagate(bath, sys, mod, pe0, coh0, table, t_max, run.sampling.h);
    run.eq_steady = steady_state_population(bath, sys, mod).population;
    return run;
}

// Rough cost model in seconds, calibrated on a single laptop core.
inline double amplitude_cost(double t_max, double h, bool sensitivity) {
    return (t_max / h) * (sensitivity ? 1.2e-6 : 0.6e-6);
}

inline double tcl_cost(const Params& p, double lambda, double temperature, Statistics stats) {
    const ThermalBathSpec bath{spectrum(p, lambda), temperature, stats};
    const ModulationConfig mod{p.num("xi"), p.num("nu")};
    const double t_max = p.num("t_max");
    const double h = p.step().value_or(max_step(bath.spectrum, mod));
    const double steps = t_max / h;
    const double nodes = static_cast<double>(FrequencyQuadrature::build(bath, t_max, {}).size());
    return nodes * steps * 3e-9 + steps * steps * 4e-9;
}

} // namespace detail

// ---------------------------------------------------------------- experiments

struct Experiment {
    std::string id;
    std::string description;
    ParamMap defaults;
    std::function<void(const Params&)> check; // extra invariants beyond the generic ones
    std::function<double(const Params&)> estimate_seconds;
    std::function<Output(const Params&)> run;
};

namespace detail {

inline const ParamMap kZeroTemperatureBase{
    {"omega0", "100"}, {"coupling", "1"}, {"delta_c", "0"}, {"h", "auto"}, {"initial_pe", "0.5"},
};

inline ParamMap with_base(const ParamMap& base, ParamMap extra) {
    for (const auto& [k, v] : base) extra.emplace(k, v);
    return extra;
}

inline Output run_fig1(const Params& p) {
    const auto lambdas = p.list("lambda");
    const auto xis = p.list("xi");
    const ModulationConfig base{0.0, p.num("nu")};
    const SystemSpec sys = system(p);
    const cplx ce0 = initial_amplitude(p);
    Output out;
    for (std::size_t li = 0; li < lambdas.size(); ++li) {
        const LorentzianSpectrum bath = spectrum(p, lambdas[li]);
        std::vector<std::string> header{"omega_t"};
        std::vector<std::vector<double>> cols{output_times(p)};
        const auto numeric = parallel_map(xis.size(), [&](std::size_t k) {
            const ModulationConfig mod{xis[k], base.frequency};
            const Sampling s = sampling(p, default_step(bath, mod));
            const auto traj = solve_amplitude_exact(sys, bath, mod, ce0, p.num("t_max"), s.h);
            return sample(traj.excited, s, [](cplx c) { return std::norm(c); });
        });
        const std::string panel = std::string(1, static_cast<char>('a' + li));
        for (std::size_t k = 0; k < xis.size(); ++k) {
            header.push_back("pe_numeric_xi" + column_token(xis[k]));
            cols.push_back(numeric[k]);
            out.metric("pe_final_numeric_" + panel + "_xi" + column_token(xis[k]), numeric[k].back());
        }
        for (std::size_t k = 0; k < xis.size(); ++k) {
            if (xis[k] == 0.0) continue;
            const ModulationConfig mod{xis[k], base.frequency};
            std::vector<double> col;
            for (double t : cols.front()) col.push_back(std::norm(amplitude_analytic(t, sys, bath, mod, ce0)));
            header.push_back("pe_analytic_xi" + column_token(xis[k]));
            out.metric("pe_final_analytic_" + panel + "_xi" + column_token(xis[k]), col.back());
            cols.push_back(std::move(col));
        }
        out.files.emplace_back(panel_name("fig1", li, lambdas.size()), columns_table(header, cols));
    }
    return out;
}

inline double fidelity_at(const SystemSpec& sys, const LorentzianSpectrum& bath, const ModulationConfig& mod,
                          double ce0_re, double t, std::optional<double> h, bool analytic) {
    const cplx ce0 = ce0_re;
    const cplx cg = std::sqrt(1.0 - ce0_re * ce0_re);
    cplx ce;
    if (analytic) {
        ce = amplitude_analytic(t, sys, bath, mod, ce0);
    } else {
        const auto traj = solve_amplitude_exact(sys, bath, mod, ce0, t, h.value_or(default_step(bath, mod)));
        ce = traj.excited.back();
    }
    return fidelity(reduced_state_from_amplitudes(ce0, cg, 0.0), reduced_state_from_amplitudes(ce, cg, 0.0));
}

inline Output run_fig2(const Params& p) {
    const auto lambdas = p.list("lambda");
    const auto xis = xi_grid(p);
    const double nu = p.num("nu"), t = p.num("t_max"), ce0 = initial_amplitude(p);
    const SystemSpec sys = system(p);
    Output out;
    std::vector<std::string> header{"xi"};
    std::vector<std::vector<double>> cols{xis};
    for (double lambda : lambdas) {
        const LorentzianSpectrum bath = spectrum(p, lambda);
        const auto vals = parallel_map(xis.size() * 2, [&](std::size_t i) {
            return fidelity_at(sys, bath, {xis[i / 2], nu}, ce0, t, p.step(), i % 2 == 1);
        });
        std::vector<double> num, ana;
        for (std::size_t i = 0; i < xis.size(); ++i) {
            num.push_back(vals[2 * i]);
            ana.push_back(vals[2 * i + 1]);
        }
        const std::string tok = column_token(lambda);
        header.push_back("fidelity_numeric_lambda" + tok);
        header.push_back("fidelity_analytic_lambda" + tok);
        cols.push_back(num);
        cols.push_back(ana);
        for (double xi : {1.0, 2.404, 5.520}) {
            out.metric("fidelity_numeric_lambda" + tok + "_xi" + column_token(xi),
                       fidelity_at(sys, bath, {xi, nu}, ce0, t, p.step(), false));
        }
    }
    out.files.emplace_back("fig2.csv", columns_table(header, cols));
    return out;
}

inline Output run_fig3(const Params& p) {
    const auto lambdas = p.list("lambda");
    const auto nus = p.list("nu");
    const double xi = p.num("xi");
    const SystemSpec sys = system(p);
    const cplx ce0 = initial_amplitude(p);
    Output out;
    std::vector<std::string> header{"omega_t"};
    std::vector<std::vector<double>> cols{output_times(p)};
    for (double nu : nus) {
        const auto idx = select_effective_index(p.num("delta_c"), nu);
        out.metric("n0_nu" + column_token(nu), idx.index);
        out.metric("effective_detuning_nu" + column_token(nu), idx.detuning);
    }
    for (double lambda : lambdas) {
        const LorentzianSpectrum bath = spectrum(p, lambda);
        const auto numeric = parallel_map(nus.size(), [&](std::size_t k) {
            const ModulationConfig mod{xi, nus[k]};
            const Sampling s = sampling(p, default_step(bath, mod));
            const auto traj = solve_amplitude_exact(sys, bath, mod, ce0, p.num("t_max"), s.h);
            return sample(traj.excited, s, [](cplx c) { return std::norm(c); });
        });
        for (std::size_t k = 0; k < nus.size(); ++k) {
            const std::string tag = "nu" + column_token(nus[k]) + "_lambda" + column_token(lambda);
            std::vector<double> ana;
            for (double t : cols.front())
                ana.push_back(std::norm(amplitude_analytic(t, sys, bath, {xi, nus[k]}, ce0)));
            header.push_back("pe_numeric_" + tag);
            header.push_back("pe_analytic_" + tag);
            out.metric("pe_final_numeric_" + tag, numeric[k].back());
            out.metric("pe_final_analytic_" + tag, ana.back());
            cols.push_back(numeric[k]);
            cols.push_back(std::move(ana));
        }
    }
    out.files.emplace_back("fig3.csv", columns_table(header, cols));
    return out;
}

inline Output run_fig4(const Params& p) {
    const auto lambdas = p.list("lambda");
    const SystemSpec sys = system(p);
    const double xi_fixed = p.num("xi"), nu_fixed = p.num("nu");
    Output out;
    for (int panel = 0; panel < 2; ++panel) {
        RamseySweepSpec spec;
        spec.axis = panel == 0 ? RamseyAxis::frequency : RamseyAxis::amplitude;
        spec.frequencies = nu_grid(p);
        spec.amplitudes = xi_grid(p);
        spec.free_time = p.num("free_time");
        spec.step = p.step();
        const auto& axis = panel == 0 ? spec.frequencies : spec.amplitudes;
        std::vector<std::string> header{panel == 0 ? "nu" : "xi"};
        std::vector<std::vector<double>> cols{axis};
        for (double lambda : lambdas) {
            const LorentzianSpectrum bath = spectrum(p, lambda);
            const auto rows = ramsey_sweep(sys, bath, {xi_fixed, nu_fixed}, spec);
            const std::string tok = column_token(lambda);
            std::vector<double> full, approx, ana, absr;
            double worst = 0.0;
            for (const auto& r : rows) {
                full.push_back(r.qfi_full_norm);
                approx.push_back(r.qfi_approx_norm);
                ana.push_back(r.qfi_analytic_norm);
                absr.push_back(r.abs_ratio);
                worst = std::max(worst, std::abs(r.qfi_full_norm - r.qfi_approx_norm));
            }
            for (const char* name : {"qfi_full", "qfi_approx", "qfi_analytic", "abs_r"})
                header.push_back(std::string(name) + "_lambda" + tok);
            const std::string key = std::string(panel == 0 ? "a" : "b") + "_lambda" + tok;
            out.metric("max_qfi_full_" + key, *std::max_element(full.begin(), full.end()));
            out.metric("max_full_minus_approx_" + key, worst);
            cols.push_back(full);
            cols.push_back(approx);
            cols.push_back(ana);
            cols.push_back(absr);
        }
        out.files.emplace_back(panel == 0 ? "fig4a.csv" : "fig4b.csv", columns_table(header, cols));
    }
    return out;
}

inline Output run_fig5(const Params& p) {
    const auto lambdas = p.list("lambda");
    const SystemSpec sys = system(p);
    Output out;
    for (std::size_t li = 0; li < lambdas.size(); ++li) {
        const LorentzianSpectrum bath = spectrum(p, lambdas[li]);
        RamseySweepSpec spec;
        spec.axis = RamseyAxis::grid;
        spec.frequencies = nu_grid(p);
        spec.amplitudes = xi_grid(p);
        spec.free_time = p.num("free_time");
        spec.step = p.step();
        const auto rows = ramsey_sweep(sys, bath, {0.0, spec.frequencies.front()}, spec);
        Table t;
        t.header = {"nu", "xi", "qfi_full", "qfi_approx", "qfi_analytic", "abs_r"};
        double best = -1.0;
        RamseySweepRow arg{};
        for (const auto& r : rows) {
            t.rows.push_back({r.frequency, r.amplitude, r.qfi_full_norm, r.qfi_approx_norm, r.qfi_analytic_norm,
                              r.abs_ratio});
            if (r.qfi_full_norm > best) {
                best = r.qfi_full_norm;
                arg = r;
            }
        }
        const std::string tok = column_token(lambdas[li]);
        out.metric("max_qfi_full_lambda" + tok, best);
        out.metric("argmax_nu_lambda" + tok, arg.frequency);
        out.metric("argmax_xi_lambda" + tok, arg.amplitude);
        out.files.emplace_back(panel_name("fig5", li, lambdas.size()), std::move(t));
    }
    return out;
}

inline Output run_thermal_dynamics(const Params& p, const std::string& base, Statistics stats) {
    const auto lambdas = p.list("lambda");
    const auto temps = p.list("temp");
    Output out;
    for (std::size_t li = 0; li < lambdas.size(); ++li) {
        const auto runs = parallel_map(temps.size(), [&](std::size_t k) { return tcl_run(p, lambdas[li], temps[k], stats); });
        std::vector<std::string> header{"omega_t"};
        std::vector<std::vector<double>> cols{output_times(p)};
        const std::string panel = std::string(1, static_cast<char>('a' + li));
        for (std::size_t k = 0; k < temps.size(); ++k) {
            const auto& r = runs[k];
            const std::string tok = "T" + column_token(temps[k]);
            header.push_back("pe_numeric_" + tok);
            header.push_back("pe_steady_" + tok);
            header.push_back("coh_" + tok);
            cols.push_back(sample(r.traj.excited_population, r.sampling, [](double v) { return v; }));
            cols.emplace_back(r.sampling.rows, r.eq_steady);
            cols.push_back(sample(r.traj.coherence, r.sampling, [](cplx c) { return std::abs(c); }));
            const auto [lo, hi] =
                std::minmax_element(r.traj.excited_population.begin(), r.traj.excited_population.end());
            const std::string key = panel + "_" + tok;
            out.metric("pe_end_" + key, r.traj.excited_population.back());
            out.metric("pe_tail_mean_" + key, r.traj.steady_state);
            out.metric("pe_steady_formula_" + key, r.eq_steady);
            out.metric("coh_end_" + key, std::abs(r.traj.coherence.back()));
            out.metric("pe_min_" + key, *lo);
            out.metric("pe_max_" + key, *hi);
            out.flag("steady_" + key, r.traj.steady);
        }
        out.files.emplace_back(panel_name(base, li, lambdas.size()), columns_table(header, cols));
    }
    return out;
}

inline void add_temperature_curve(Output& out, const Params& p, Statistics stats, const std::string& file) {
    const ThermalBathSpec bath{spectrum(p, p.num("lambda")), 0.0, stats};
    const SystemSpec sys = system(p);
    const ModulationConfig mod{p.num("xi"), p.num("nu")};
    ThermoSweepSpec spec;
    spec.temperatures = temperature_grid(p);
    const ThermoSweep sweep = thermo_sweep(bath, sys, mod, spec);
    Table t;
    t.header = {"T", "pe", "pe_low", "pe_high", "qfi", "qfi_low", "qfi_high"};
    std::vector<double> qfi;
    for (const auto& row : sweep.rows) {
        const auto& r = row.result;
        t.rows.push_back({r.temperature, r.population, r.population_low, r.population_high, r.qfi, r.qfi_low,
                          r.qfi_high});
        qfi.push_back(r.qfi);
    }
    const auto peaks = strict_local_maxima(qfi);
    out.metric("peak_count", static_cast<double>(peaks.size()));
    for (std::size_t i = 0; i < peaks.size(); ++i) {
        out.metric("peak" + std::to_string(i + 1) + "_T", spec.temperatures[peaks[i]]);
        out.metric("peak" + std::to_string(i + 1) + "_qfi", qfi[peaks[i]]);
    }
    const RegionalPopulations reg = regional_populations({bath.spectrum, 1.0, stats}, sys, mod);
    out.metric("omega_n1", reg.omega_n1);
    out.metric("omega_n0", reg.omega_n0);
    out.metric("t_opt_low", optimal_temperature(reg.omega_n1));
    out.metric("t_opt_high", optimal_temperature(reg.omega_n0));
    out.files.emplace_back(file, std::move(t));
}

inline Output run_fig7(const Params& p) {
    Output out;
    add_temperature_curve(out, p, p.statistics(), "fig7.csv");
    return out;
}

inline Output run_fig8(const Params& p) {
    const ThermalBathSpec bath{spectrum(p, p.num("lambda")), 0.0, p.statistics()};
    ThermoSweepSpec spec;
    spec.axis = ThermoAxis::grid;
    spec.temperatures = temperature_grid(p);
    spec.frequencies = nu_grid(p);
    const ThermoSweep sweep = thermo_sweep(bath, system(p), {p.num("xi"), 1.0}, spec);
    Output out;
    Table grid;
    grid.header = {"nu", "T", "qfi"};
    for (const auto& row : sweep.rows) grid.rows.push_back({row.frequency, row.result.temperature, row.result.qfi});
    Table ridges;
    ridges.header = {"nu", "t_ridge_low", "t_ridge_high"};
    for (const auto& r : sweep.ridges) ridges.rows.push_back({r.frequency, r.low, r.high});
    out.metric("grid_rows", static_cast<double>(grid.rows.size()));
    out.files.emplace_back("fig8.csv", std::move(grid));
    out.files.emplace_back("fig8_ridges.csv", std::move(ridges));
    return out;
}

inline Output run_figB1(const Params& p) {
    const std::size_t n = p.count("grid_points");
    const auto xs = linspace(0.0, p.num("x_max"), n);
    const auto ys = linspace(0.0, p.num("y_max"), n);
    Table t;
    t.header = {"x", "y", "g"};
    double gmin = 1e300;
    for (double x : xs)
        for (double y : ys) {
            const double g = g_function(x, y);
            gmin = std::min(gmin, g);
            t.rows.push_back({x, y, g});
        }
    Output out;
    out.metric("g_min", gmin);
    out.files.emplace_back("figB1.csv", std::move(t));
    return out;
}

inline Output run_figB2(const Params& p) {
    const auto lambdas = p.list("lambda");
    const auto xis = p.list("xi");
    const SystemSpec sys = system(p);
    const double nu = p.num("nu");
    const cplx ce0 = initial_amplitude(p);
    Output out;
    for (std::size_t li = 0; li < lambdas.size(); ++li) {
        const LorentzianSpectrum bath = spectrum(p, lambdas[li]);
        std::vector<std::string> header{"omega_t"};
        std::vector<std::vector<double>> cols{output_times(p)};
        const auto numeric = parallel_map(xis.size(), [&](std::size_t k) {
            const ModulationConfig mod{xis[k], nu};
            const Sampling s = sampling(p, default_step(bath, mod));
            const auto traj = solve_sensitivity(sys, bath, mod, ce0, p.num("t_max"), s.h);
            return sample(traj.sensitivity, s, [&](cplx c) { return std::abs(c / ce0); });
        });
        const std::string panel = std::string(1, static_cast<char>('a' + li));
        for (std::size_t k = 0; k < xis.size(); ++k) {
            std::vector<double> ana;
            for (double t : cols.front()) ana.push_back(std::abs(derivative_analytic(t, sys, bath, {xis[k], nu})));
            const std::string tok = "xi" + column_token(xis[k]);
            header.push_back("dr_numeric_" + tok);
            header.push_back("dr_analytic_" + tok);
            out.metric("max_dr_numeric_" + panel + "_" + tok, *std::max_element(numeric[k].begin(), numeric[k].end()));
            out.metric("max_dr_analytic_" + panel + "_" + tok, *std::max_element(ana.begin(), ana.end()));
            cols.push_back(numeric[k]);
            cols.push_back(std::move(ana));
        }
        out.files.emplace_back(panel_name("figB2", li, lambdas.size()), columns_table(header, cols));
    }
    return out;
}

inline Output run_figD1(const Params& p) {
    Output out = run_thermal_dynamics(p, "figD1", Statistics::bosonic);
    Output curve;
    add_temperature_curve(curve, p, Statistics::bosonic, "figD1b.csv");
    out.files.push_back(std::move(curve.files.front()));
    for (auto& kv : curve.summary) out.summary.push_back(kv);
    return out;
}

inline Output run_custom(const Params& p) {
    const LorentzianSpectrum bath = spectrum(p, p.num("lambda"));
    const ModulationConfig mod{p.num("xi"), p.num("nu")};
    const SystemSpec sys = system(p);
    const cplx ce0 = initial_amplitude(p);
    const Sampling s = sampling(p, default_step(bath, mod));
    const auto traj = solve_amplitude_exact(sys, bath, mod, ce0, p.num("t_max"), s.h);
    const auto times = output_times(p);
    std::vector<double> ana;
    for (double t : times) ana.push_back(std::norm(amplitude_analytic(t, sys, bath, mod, ce0)));
    const auto num = sample(traj.excited, s, [](cplx c) { return std::norm(c); });
    Output out;
    out.metric("pe_final_numeric", num.back());
    out.metric("pe_final_analytic", ana.back());
    out.metric("n0", effective_index(sys, bath, mod).index);
    out.files.emplace_back("custom.csv", columns_table({"omega_t", "pe_numeric", "pe_analytic"}, {times, num, ana}));
    return out;
}

inline double amplitude_runs_cost(const Params& p, bool sensitivity, const std::vector<double>& xis,
                                  const std::vector<double>& nus, double t_max) {
    double total = 0.0;
    for (double lambda : p.list("lambda")) {
        const LorentzianSpectrum bath = spectrum(p, lambda);
        for (double xi : xis)
            for (double nu : nus) total += amplitude_cost(t_max, p.step().value_or(default_step(bath, {xi, nu})), sensitivity);
    }
    return total;
}

} // namespace detail

inline const std::vector<Experiment>& registry() {
    using namespace detail;
    static const std::vector<Experiment> exps{
        {"fig1", "excited population vs time for several drive amplitudes",
         with_base(kZeroTemperatureBase, {{"lambda", "5,0.2"}, {"xi", "0,2,2.404"}, {"nu", "100"},
                                          {"t_max", "100"}, {"dt_out", "0.1"}}),
         nullptr,
         [](const Params& p) { return amplitude_runs_cost(p, false, p.list("xi"), {p.num("nu")}, p.num("t_max")); },
         run_fig1},
        {"fig2", "fidelity with the initial state vs drive amplitude",
         with_base(kZeroTemperatureBase, {{"lambda", "5,0.2"}, {"nu", "100"}, {"t_max", "100"},
                                          {"xi_min", "0"}, {"xi_max", "8"}, {"xi_points", "81"}}),
         nullptr,
         [](const Params& p) { return amplitude_runs_cost(p, false, xi_grid(p), {p.num("nu")}, p.num("t_max")); },
         run_fig2},
        {"fig3", "excited population with a detuned spectrum and two drive frequencies",
         with_base(kZeroTemperatureBase, {{"lambda", "5,0.2"}, {"xi", "2"}, {"nu", "50,40"}, {"delta_c", "40"},
                                          {"t_max", "100"}, {"dt_out", "0.1"}}),
         nullptr,
         [](const Params& p) { return amplitude_runs_cost(p, false, {p.num("xi")}, p.list("nu"), p.num("t_max")); },
         run_fig3},
        {"fig4", "normalized Ramsey QFI vs drive frequency (a) and amplitude (b)",
         with_base(kZeroTemperatureBase, {{"lambda", "5,0.2"}, {"xi", "2.404"}, {"nu", "200"}, {"free_time", "150"},
                                          {"nu_min", "10"}, {"nu_max", "300"}, {"nu_points", "30"},
                                          {"xi_min", "0"}, {"xi_max", "8"}, {"xi_points", "81"}}),
         nullptr,
         [](const Params& p) {
             return amplitude_runs_cost(p, true, {p.num("xi")}, nu_grid(p), p.num("free_time")) +
                    amplitude_runs_cost(p, true, xi_grid(p), {p.num("nu")}, p.num("free_time"));
         },
         run_fig4},
        {"fig5", "normalized Ramsey QFI over the (nu, xi) plane",
         with_base(kZeroTemperatureBase, {{"lambda", "5,0.2"}, {"free_time", "150"}, {"nu_min", "10"},
                                          {"nu_max", "200"}, {"nu_points", "20"}, {"xi_min", "0"},
                                          {"xi_max", "8"}, {"xi_points", "41"}}),
         nullptr,
         [](const Params& p) { return amplitude_runs_cost(p, true, xi_grid(p), nu_grid(p), p.num("free_time")); },
         run_fig5},
        {"fig6", "finite-temperature population and coherence dynamics",
         {{"omega0", "31"}, {"coupling", "1"}, {"delta_c", "0"}, {"lambda", "5,0.2"}, {"xi", "1"}, {"nu", "30"},
          {"temp", "2,20"}, {"stats", "fermionic"}, {"t_max", "100"}, {"dt_out", "0.1"}, {"h", "auto"},
          {"initial_pe", "0.5"}},
         nullptr,
         [](const Params& p) {
             double c = 0.0;
             for (double l : p.list("lambda"))
                 for (double t : p.list("temp")) c += tcl_cost(p, l, t, p.statistics());
             return c;
         },
         [](const Params& p) { return run_thermal_dynamics(p, "fig6", p.statistics()); }},
        {"fig7", "steady population and thermometer QFI vs temperature",
         {{"omega0", "31"}, {"coupling", "1"}, {"delta_c", "0"}, {"lambda", "5"}, {"xi", "1"}, {"nu", "30"},
          {"stats", "fermionic"}, {"T_min", "0.05"}, {"T_max", "50"}, {"T_points", "400"}},
         nullptr, [](const Params& p) { return 2e-6 * static_cast<double>(p.count("T_points")); }, run_fig7},
        {"fig8", "thermometer QFI over the (nu, T) plane with optimal-temperature ridges",
         {{"omega0", "31"}, {"coupling", "1"}, {"delta_c", "0"}, {"lambda", "5"}, {"xi", "1"},
          {"stats", "fermionic"}, {"nu_min", "5"}, {"nu_max", "40"}, {"nu_points", "71"}, {"T_min", "0.05"},
          {"T_max", "50"}, {"T_points", "200"}},
         nullptr,
         [](const Params& p) { return 2e-6 * static_cast<double>(p.count("T_points") * p.count("nu_points")); },
         run_fig8},
        {"figB1", "g(x, y) over a square grid",
         {{"x_max", "10"}, {"y_max", "10"}, {"grid_points", "200"}},
         nullptr,
         [](const Params& p) { return 1e-7 * std::pow(static_cast<double>(p.count("grid_points")), 2); },
         run_figB1},
        {"figB2", "modulus of dR/domega0 vs time",
         with_base(kZeroTemperatureBase, {{"lambda", "5,0.2"}, {"xi", "1,2.404"}, {"nu", "100"},
                                          {"t_max", "60"}, {"dt_out", "0.1"}}),
         nullptr,
         [](const Params& p) { return amplitude_runs_cost(p, true, p.list("xi"), {p.num("nu")}, p.num("t_max")); },
         run_figB2},
        {"figD1", "bosonic bath: population dynamics (a), steady population and QFI vs T (b)",
         {{"omega0", "31"}, {"coupling", "1"}, {"delta_c", "0"}, {"lambda", "5"}, {"xi", "1"}, {"nu", "30"},
          {"temp", "2"}, {"t_max", "100"}, {"dt_out", "0.1"}, {"h", "auto"}, {"initial_pe", "0.5"},
          {"T_min", "0.05"}, {"T_max", "50"}, {"T_points", "400"}},
         [](const Params& p) {
             if (p.list("lambda").size() != 1) throw InvalidInput("figD1 takes a single lambda");
         },
         [](const Params& p) { return tcl_cost(p, p.num("lambda"), p.num("temp"), Statistics::bosonic); },
         run_figD1},
        {"custom", "single zero-temperature amplitude run",
         with_base(kZeroTemperatureBase, {{"lambda", "5"}, {"xi", "0"}, {"nu", "100"}, {"t_max", "20"},
                                          {"dt_out", "0.1"}}),
         nullptr,
         [](const Params& p) { return amplitude_runs_cost(p, false, {p.num("xi")}, {p.num("nu")}, p.num("t_max")); },
         run_custom},
    };
    return exps;
}

inline const Experiment* find_experiment(const std::string& id) {
    for (const auto& e : registry())
        if (e.id == id) return &e;
    return nullptr;
}

namespace detail {

inline void require(bool ok, const std::string& message) {
    if (!ok) throw InvalidInput(message);
}

// Generic invariants for every key the experiment defines.
inline void check_params(const Params& p) {
    auto all = [&](const std::string& key, auto pred, const char* what) {
        if (!p.has(key)) return;
        for (double v : p.list(key)) require(pred(v), key + " must be " + what + " (got " + format_number(v) + ")");
    };
    auto positive = [](double v) { return v > 0.0; };
    all("omega0", positive, "> 0");
    all("coupling", positive, "> 0");
    all("lambda", positive, "> 0");
    all("nu", positive, "> 0");
    all("xi", [](double v) { return v >= 0.0; }, ">= 0");
    all("temp", positive, "> 0");
    all("t_max", [](double v) { return v >= 0.0; }, ">= 0");
    all("dt_out", positive, "> 0");
    all("free_time", positive, "> 0");
    all("initial_pe", [](double v) { return v >= 0.0 && v <= 1.0; }, "in [0, 1]");
    all("T_min", positive, "> 0");
    all("x_max", [](double v) { return v >= 0.0; }, ">= 0");
    all("y_max", [](double v) { return v >= 0.0; }, ">= 0");
    if (p.has("h") && p.text("h") != "auto") all("h", positive, "> 0 or auto");
    if (p.has("omega0") && p.has("delta_c")) {
        const double wc = p.num("omega0") - p.num("delta_c");
        require(wc > 0.0, "omega_c = omega0 - delta_c must be > 0 (got " + format_number(wc) + ")");
    }
    for (const char* axis : {"xi", "nu", "T"}) {
        const std::string lo = std::string(axis) + "_min", hi = std::string(axis) + "_max";
        if (p.has(lo) && p.has(hi)) require(p.num(lo) <= p.num(hi), lo + " must not exceed " + hi);
        if (p.has(std::string(axis) + "_points")) p.count(std::string(axis) + "_points");
    }
    all("xi_min", [](double v) { return v >= 0.0; }, ">= 0");
    all("nu_min", positive, "> 0");
    if (p.has("grid_points")) p.count("grid_points");
    if (p.has("stats")) p.statistics();
}

} // namespace detail

// Merges defaults, config-file values and command-line overrides (in that
// order of precedence), then validates. omega_c is folded into delta_c.
inline Params resolve(const Experiment& exp, const ParamMap& file_values, const ParamMap& cli_values) {
    ParamMap merged = exp.defaults;
    ParamMap given = file_values;
    for (const auto& [k, v] : cli_values) given[k] = v;

    std::optional<std::string> omega_c;
    for (const auto& [k, v] : given) {
        if (k == "omega_c" && exp.defaults.count("delta_c")) {
            omega_c = v;
            continue;
        }
        if (!is_known_key(k)) throw InvalidInput("unknown parameter '" + k + "'");
        if (!exp.defaults.count(k)) throw InvalidInput("parameter '" + k + "' does not apply to " + exp.id);
        merged[k] = v;
    }
    if (omega_c) {
        const double w0 = parse_number("omega0", merged.at("omega0"));
        const double wc = parse_number("omega_c", *omega_c);
        const std::string dc = format_number(w0 - wc);
        if (given.count("delta_c") && std::abs(parse_number("delta_c", given.at("delta_c")) - (w0 - wc)) > 1e-12) {
            throw InvalidInput("omega_c and delta_c overrides disagree (delta_c must equal omega0 - omega_c)");
        }
        merged["delta_c"] = dc;
    }
    Params p(std::move(merged));
    detail::check_params(p);
    if (exp.check) exp.check(p);
    return p;
}

// Resolved parameters plus derived omega_c, one key = value per line.
inline std::string describe(const Experiment& exp, const Params& p) {
    std::string out = "experiment = " + exp.id + "\n";
    for (const auto& [k, v] : p.values()) out += k + " = " + v + "\n";
    if (p.has("delta_c") && p.has("omega0"))
        out += "omega_c = " + format_number(p.num("omega0") - p.num("delta_c")) + "\n";
    return out;
}

inline void write_text(const std::filesystem::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw InvalidInput("cannot write '" + path.string() + "'");
    f << content;
    if (!f) throw InvalidInput("failed writing '" + path.string() + "'");
}

// All computation happens before the first byte is written.
inline void write_output(const Output& out, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw InvalidInput("cannot create output directory '" + dir.string() + "': " + ec.message());
    for (const auto& [name, table] : out.files) write_text(dir / name, table.render());
    write_text(dir / "summary.txt", out.render_summary());
}

} // namespace dynmod::experiments
