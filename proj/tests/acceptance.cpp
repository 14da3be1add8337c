// Acceptance checks 1-13. One PASS/FAIL line per criterion; exit status 1 if
// any criterion fails.

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numbers>
#include <string>
#include <vector>

#include "dynmod/amplitude_dynamics.hpp"
#include "dynmod/grid.hpp"
#include "dynmod/qubit_state.hpp"
#include "dynmod/ramsey_qfi.hpp"
#include "dynmod/special_functions.hpp"
#include "dynmod/tcl_dynamics.hpp"
#include "dynmod/thermo_qfi.hpp"

using namespace dynmod;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass{true};
    std::string detail;

    void check(bool ok, const std::string& what) {
        pass = pass && ok;
        if (!detail.empty()) detail += "; ";
        detail += what + (ok ? "" : " [violated]");
    }
};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

const SystemSpec kQubit{100.0};
LorentzianSpectrum zero_t_bath(double lambda) { return {1.0, lambda, 100.0}; }
const cplx kHalf{1.0 / std::numbers::sqrt2, 0.0};

Verdict bessel() {
    Verdict v;
    const double z1 = std::abs(bessel_jn(0, 2.404826)), z2 = std::abs(bessel_jn(0, 5.520078));
    double s = 0.0;
    for (int n = -40; n <= 40; ++n) s += bessel_jn(n, 2.0) * bessel_jn(n, 2.0);
    v.check(z1 < 1e-6 && z2 < 1e-6, "|J0| at zeros " + num(z1) + ", " + num(z2));
    v.check(std::abs(s - 1.0) <= 1e-10, "sum J_n(2)^2 - 1 = " + num(s - 1.0));
    return v;
}

Verdict undriven_exact() {
    Verdict v;
    for (double lambda : {5.0, 0.2}) {
        const auto b = zero_t_bath(lambda);
        const ModulationConfig mod{0.0, 100.0};
        const auto traj = solve_amplitude_exact(kQubit, b, mod, 1.0, 100.0, default_step(b, mod));
        double worst = 0.0;
        for (std::size_t i = 0; i < traj.size(); ++i)
            worst = std::max(worst, std::abs(traj.excited[i] - amplitude_analytic(traj.time[i], kQubit, b, mod, 1.0)));
        v.check(worst <= 1e-3, "lambda=" + num(lambda) + " max|dc_e|=" + num(worst));
    }
    return v;
}

Verdict volterra_oracle() {
    Verdict v;
    double worst = 0.0;
    std::string where;
    for (double lambda : {0.2, 1.0, 5.0})
        for (double xi : {0.0, 1.0, 2.404})
            for (double nu : {40.0, 100.0}) {
                const auto b = zero_t_bath(lambda);
                const ModulationConfig mod{xi, nu};
                const double h = default_step(b, mod);
                const auto local = solve_amplitude_exact(kQubit, b, mod, kHalf, 20.0, h);
                const auto direct = solve_volterra_direct(kQubit, b, mod, kHalf, 20.0, h);
                for (std::size_t i = 0; i < local.size(); ++i) {
                    const double d = std::abs(local.excited[i] - direct.excited[i]);
                    if (d > worst) {
                        worst = d;
                        where = "lambda=" + num(lambda) + " xi=" + num(xi) + " nu=" + num(nu);
                    }
                }
            }
    v.check(worst <= 5e-3, "18 cases, worst " + num(worst) + " at " + where);
    return v;
}

double final_population(double lambda, double xi) {
    const auto b = zero_t_bath(lambda);
    const ModulationConfig mod{xi, 100.0};
    return std::norm(solve_amplitude_exact(kQubit, b, mod, kHalf, 100.0, default_step(b, mod)).excited.back());
}

Verdict freezing() {
    Verdict v;
    for (double lambda : {5.0, 0.2}) {
        const double pe = final_population(lambda, 2.404);
        v.check(pe >= 0.48 && pe <= 0.51, "xi=2.404 lambda=" + num(lambda) + " P_e=" + num(pe));
    }
    const double pe0 = final_population(5.0, 0.0);
    v.check(pe0 < 0.01, "xi=0 lambda=5 P_e=" + num(pe0));
    return v;
}

double fidelity_after(double lambda, double xi) {
    const auto b = zero_t_bath(lambda);
    const ModulationConfig mod{xi, 100.0};
    const cplx ce = solve_amplitude_exact(kQubit, b, mod, kHalf, 100.0, default_step(b, mod)).excited.back();
    return fidelity(reduced_state_from_amplitudes(kHalf, kHalf.real(), 0.0),
                    reduced_state_from_amplitudes(ce, kHalf.real(), 0.0));
}

Verdict fidelity_plateau() {
    Verdict v;
    for (double lambda : {5.0, 0.2})
        for (double xi : {2.404, 5.520}) {
            const double f = fidelity_after(lambda, xi);
            v.check(f >= 0.99, "lambda=" + num(lambda) + " xi=" + num(xi) + " I=" + num(f));
        }
    const double f1 = fidelity_after(5.0, 1.0);
    v.check(std::abs(f1 - 1.0 / std::numbers::sqrt2) <= 0.05, "xi=1 lambda=5 I=" + num(f1));
    return v;
}

Verdict ramsey_recovery() {
    Verdict v;
    for (double lambda : {5.0, 0.2}) {
        const auto b = zero_t_bath(lambda);
        const ModulationConfig mod{2.404, 200.0};
        const RamseyResult r = ramsey_point(kQubit, b, mod, 150.0, default_step(b, mod));
        const double t2 = 150.0 * 150.0;
        v.check(r.qfi_full / t2 >= 0.95, "lambda=" + num(lambda) + " F/T^2=" + num(r.qfi_full / t2));
        v.check(std::abs(r.qfi_full - r.qfi_approx) / t2 <= 0.05,
                "|F-F_approx|/T^2=" + num(std::abs(r.qfi_full - r.qfi_approx) / t2));
    }
    return v;
}

QubitState ramsey_state(double w0, const LorentzianSpectrum& b, const ModulationConfig& mod, double h) {
    const cplx ce = solve_amplitude_exact({w0}, b, mod, kRamseyInitialExcited, 150.0, h).excited.back();
    return reduced_state_from_amplitudes(ce, 1.0 / std::numbers::sqrt2, w0 * 150.0 + mod.amplitude * std::sin(mod.frequency * 150.0));
}

Verdict sensitivity() {
    Verdict v;
    const double dw = 1e-4;
    for (double lambda : {5.0, 0.2}) {
        const auto b = zero_t_bath(lambda);
        const ModulationConfig mod{2.404, 200.0};
        const double h = default_step(b, mod);
        const auto sens = solve_sensitivity(kQubit, b, mod, kRamseyInitialExcited, 150.0, h);
        const auto plus = solve_amplitude_exact({100.0 + dw}, b, mod, kRamseyInitialExcited, 150.0, h);
        const auto minus = solve_amplitude_exact({100.0 - dw}, b, mod, kRamseyInitialExcited, 150.0, h);
        double worst = 0.0;
        for (std::size_t i = 0; i < sens.size(); ++i) {
            const double mag = std::abs(sens.sensitivity[i]);
            if (mag <= 1e-6) continue;
            const cplx fd = (plus.excited[i] - minus.excited[i]) / (2.0 * dw);
            worst = std::max(worst, std::abs(fd - sens.sensitivity[i]) / mag);
        }
        v.check(worst <= 1e-3, "lambda=" + num(lambda) + " max rel FD error " + num(worst));

        const QubitState s = ramsey_state(100.0, b, mod, h);
        const QubitState p = ramsey_state(100.0 + dw, b, mod, h);
        const QubitState m = ramsey_state(100.0 - dw, b, mod, h);
        const BlochVector d{(p.bloch.x - m.bloch.x) / (2 * dw), (p.bloch.y - m.bloch.y) / (2 * dw),
                            (p.bloch.z - m.bloch.z) / (2 * dw)};
        const double bloch = bloch_qfi(s, d);
        const double closed = ramsey_point(kQubit, b, mod, 150.0, h).qfi_full;
        v.check(std::abs(bloch - closed) <= 0.01 * closed, "Bloch route rel diff " + num(std::abs(bloch - closed) / closed));
    }
    return v;
}

Verdict g_nonnegative() {
    Verdict v;
    double lowest = INFINITY;
    for (double x : linspace(0.0, 10.0, 200))
        for (double y : linspace(0.0, 10.0, 200)) lowest = std::min(lowest, g_function(x, y));
    v.check(lowest >= -1e-12, "min g = " + num(lowest));
    return v;
}

PopulationTrajectory tcl(const ThermalBathSpec& bath, const ModulationConfig& mod, double pe0, cplx coh0) {
    const double h = max_step(bath.spectrum, mod);
    const KernelTable k = build_kernel_table(bath, 31.0, 100.0, h);
    return tcl_propagate(bath, {31.0}, mod, pe0, coh0, k, 100.0, h);
}

Verdict thermal_fixed_point() {
    Verdict v;
    for (auto stats : {Statistics::fermionic, Statistics::bosonic})
        for (double t : {2.0, 20.0}) {
            const ThermalBathSpec bath{{1.0, 5.0, 31.0}, t, stats};
            const double pe = tcl(bath, {0.0, 30.0}, 0.5, 0.0).excited_population.back();
            const double gibbs = 1.0 / (std::exp(31.0 / t) + 1.0);
            v.check(std::abs(pe - gibbs) <= 2e-2, std::string(to_string(stats)) + " T=" + num(t) + " |dP|=" + num(std::abs(pe - gibbs)));
        }
    return v;
}

Verdict steady_superposition() {
    Verdict v;
    const ModulationConfig mod{1.0, 30.0};
    for (double lambda : {5.0, 0.2})
        for (double t : {2.0, 20.0}) {
            const ThermalBathSpec bath{{1.0, lambda, 31.0}, t, Statistics::fermionic};
            const auto traj = tcl(bath, mod, 0.5, 0.5);
            const double eq = steady_state_population(bath, {31.0}, mod).population;
            const double d = std::abs(traj.excited_population.back() - eq);
            v.check(d <= 2e-2, "lambda=" + num(lambda) + " T=" + num(t) + " |dP|=" + num(d));
            if (lambda == 5.0) {
                const double c = std::abs(traj.coherence.back());
                v.check(c <= 1e-3, "|rho_eg|=" + num(c));
            }
        }
    return v;
}

Verdict optimal_temperature_check() {
    Verdict v;
    const double t = optimal_temperature(1.0);
    v.check(std::abs(t - 0.242) <= 0.001, "T_opt/omega0=" + num(t));
    const auto temps = logspace(0.02, 2.0, 2001);
    std::size_t best = 0;
    for (std::size_t i = 1; i < temps.size(); ++i)
        if (qfi_conventional(1.0, temps[i]) > qfi_conventional(1.0, temps[best])) best = i;
    v.check(best > 0 && best + 1 < temps.size() && t >= temps[best - 1] && t <= temps[best + 1],
            "grid argmax " + num(temps[best]));
    return v;
}

Verdict double_peak() {
    Verdict v;
    const ModulationConfig mod{1.0, 30.0};
    const SystemSpec sys{31.0};
    const auto temps = logspace(0.05, 50.0, 400);
    std::vector<double> q, qb;
    double worst_low = 0.0, worst_high = 0.0, worst_low_t = 0.0;
    for (double t : temps) {
        const auto r = qfi_modulated({{1.0, 5.0, 31.0}, t, Statistics::fermionic}, sys, mod, t);
        q.push_back(r.qfi);
        if (t <= 0.1 * mod.frequency) {
            const double e = std::abs(r.qfi_low - r.qfi) / r.qfi;
            if (e > worst_low) worst_low = e, worst_low_t = t;
        }
        if (t >= 2.0 * 0.242 * 31.0) worst_high = std::max(worst_high, std::abs(r.qfi_high - r.qfi) / r.qfi);
        qb.push_back(qfi_modulated({{1.0, 5.0, 31.0}, t, Statistics::bosonic}, sys, mod, t).qfi);
    }
    const auto peaks = strict_local_maxima(q);
    std::string where;
    for (auto i : peaks) where += (where.empty() ? "" : ",") + num(temps[i]);
    const bool placed = peaks.size() == 2 && std::abs(temps[peaks[0]] - 0.242) <= 0.25 * 0.242 &&
                        std::abs(temps[peaks[1]] - 0.242 * 31.0) <= 0.25 * 0.242 * 31.0;
    v.check(placed, "fermionic maxima at T=" + where);
    v.check(worst_low <= 0.1, "low-T regional worst rel err " + num(worst_low) + " at T=" + num(worst_low_t));
    v.check(worst_high <= 0.1, "high-T regional worst rel err " + num(worst_high));
    v.check(strict_local_maxima(qb).size() == 2, "bosonic maxima " + std::to_string(strict_local_maxima(qb).size()));
    return v;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Verdict determinism() {
    Verdict v;
    const fs::path root = fs::path(DYNMOD_TEST_SCRATCH) / "acceptance";
    fs::remove_all(root);
    for (const std::string id : {"fig1", "fig7"}) {
        for (const char* run : {"a", "b"}) {
            const std::string cmd = std::string("'") + DYNMOD_CLI_PATH + "' " + id + " --out '" +
                                    (root / id / run).string() + "' >/dev/null 2>&1";
            const int raw = std::system(cmd.c_str());
            if (!WIFEXITED(raw) || WEXITSTATUS(raw) != 0) {
                v.check(false, id + " run " + run + " exited abnormally");
                return v;
            }
        }
        std::size_t files = 0;
        bool same = true;
        for (const auto& e : fs::directory_iterator(root / id / "a")) {
            if (e.path().extension() != ".csv") continue;
            ++files;
            same = same && slurp(e.path()) == slurp(root / id / "b" / e.path().filename());
        }
        v.check(same && files > 0, id + ": " + std::to_string(files) + " CSVs byte-identical");
    }
    return v;
}

} // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
        {"Bessel correctness", bessel},
        {"undriven exact recovery", undriven_exact},
        {"local ODE vs direct Volterra", volterra_oracle},
        {"decoherence freezing", freezing},
        {"fidelity plateau and drop", fidelity_plateau},
        {"Ramsey QFI recovery", ramsey_recovery},
        {"sensitivity and Bloch route", sensitivity},
        {"g-function nonnegativity", g_nonnegative},
        {"thermal fixed point", thermal_fixed_point},
        {"steady-state superposition", steady_superposition},
        {"optimal temperature", optimal_temperature_check},
        {"double peak and regional approximations", double_peak},
        {"determinism", determinism},
    };
    int failed = 0;
    const auto start = std::chrono::steady_clock::now();
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v.check(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s criterion %zu (%s, %.1f s): %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, secs,
                    v.detail.c_str());
        std::fflush(stdout);
        failed += v.pass ? 0 : 1;
    }
    const double total = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%zu/%zu criteria passed in %.1f s\n", criteria.size() - failed, criteria.size(), total);
    return failed == 0 ? 0 : 1;
}
