// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "helistrip/helistrip.hpp"

using namespace helistrip;

namespace {

constexpr auto dirichlet = BoundaryCondition::dirichlet;

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* format, auto... args) {
    char buffer[512];
    std::snprintf(buffer, sizeof buffer, format, args...);
    return buffer;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

StripGeometry twisted(double omega, double width) { return StripGeometry(1.0, 0.0, width).with_omega(omega); }

Outcome landmarks_exact() {
    const auto g = twisted(1.0, 10.0);
    const auto r = landmarks(g, TransverseMode::from_ratio(0.0, g));
    const double e_v0 = rel(r.v0, 0.5);
    const double e_zero = rel(*r.numeric_xi_zero, std::sqrt(2.0));
    const double e_min_at = rel(*r.xi_min, std::sqrt(5.0));
    const double e_min = rel(v_eff(*r.xi_min, g), -1.0 / 48.0);
    const double worst = std::max({e_v0, e_zero, e_min_at, e_min});
    return {worst <= 1e-10, fmt("worst relative error %.2e (V(0), zero crossing, argmin, V_min); sampled argmin "
                                "off by %.1e",
                                worst, rel(*r.numeric_xi_min, std::sqrt(5.0)))};
}

Outcome metric_oracle() {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> xi(0.0, 100.0);
    double worst = 0.0;
    for (double w : {0.1, 1.0, 10.0}) {
        const auto g = twisted(w, 100.0);
        for (int i = 0; i < 1000; ++i) {
            const double x = xi(rng);
            worst = std::max(worst, std::abs(v_eff(x, g) - v_eff_from_metric(x, g).value) / (w * w));
        }
    }
    return {worst <= 1e-7, fmt("max |V - V_metric| / w^2 = %.2e over 3000 samples", worst)};
}

Outcome net_identity() {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double w = std::pow(10.0, -1.0 + 2.0 * unit(rng));
        const double kx = w * (-1.0 + 2.0 * unit(rng));
        const double x = 100.0 / w * unit(rng);
        const auto g = twisted(w, 100.0 / w);
        const double h1 = lame_h1(x, g);
        const double direct = v_eff(x, g) + kx * kx / (h1 * h1);
        const double u = net_potential(x, g, TransverseMode::from_wavenumber(kx, g));
        const double scale = std::max({std::abs(u), std::abs(v_eff(x, g)), kx * kx / (h1 * h1)});
        worst = std::max(worst, std::abs(u - direct) / scale);
    }
    return {worst <= 1e-13, fmt("max relative difference %.2e over 1000 random points", worst)};
}

Outcome negativity_threshold() {
    const auto g = twisted(1.0, 20.0);
    const std::size_t points = 4001;
    const double spacing = 20.0 / (points - 1);
    double worst = 0.0;
    bool all_found = true;
    for (double c : {0.1, 0.3, 0.45}) {
        const auto found = first_sign_change(potential_table(g, TransverseMode::from_ratio(c, g), points));
        if (!found) {
            all_found = false;
            continue;
        }
        worst = std::max(worst, std::abs(*found - *scaled_zero_crossing(c)) / spacing);
    }
    return {all_found && worst <= 1.0, fmt("worst offset %.2e grid spacings", worst)};
}

Outcome minimum_depth() {
    const auto g = twisted(1.0, 20.0);
    double worst = 0.0;
    std::string deviations;
    for (double c : {0.0, 0.1, 0.3}) {
        const auto r = landmarks(g, TransverseMode::from_ratio(c, g));
        const double gap = 1.0 - 4.0 * c * c;
        worst = std::max(worst, rel(*r.numeric_u_min, -gap * gap / 48.0));
        deviations += fmt(" C=%.1f:%.3e", c, r.u_min_simplified_deviation);
    }
    return {worst <= 1e-8, fmt("worst relative error %.2e; simplified-form deviation%s", worst, deviations.c_str())};
}

Outcome box_regression() {
    const StripGeometry flat(1.0, 0.0, 1.0);
    const auto s = solve_transverse(flat, TransverseMode::from_wavenumber(0.0, flat),
                                    TransverseGrid(1.0, 4001, dirichlet, dirichlet), 3);
    double worst = 0.0;
    for (int j = 0; j < 3; ++j) {
        worst = std::max(worst, rel(s.energies[j], std::pow((j + 1) * constants::pi, 2)));
    }
    return {worst <= 1e-5, fmt("worst relative error %.2e", worst)};
}

Outcome oracle_equivalence() {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double worst = 0.0;
    double slowest = 0.0;
    bool pass = true;
    for (int trial = 0; trial < 20; ++trial) {
        const double w = std::pow(10.0, -1.0 + 2.0 * unit(rng));
        const double c = 0.49 * unit(rng);
        const double d = (5.0 + 45.0 * unit(rng)) / w;
        const auto g = twisted(w, d);
        const auto mode = TransverseMode::from_ratio(c, g);
        const TransverseGrid grid(d, 4001, dirichlet, dirichlet);
        const auto start = std::chrono::steady_clock::now();
        const auto matrix = extrapolated_energies(g, mode, grid, 3);
        const auto roots = numerov_eigenvalues(g, mode, grid, 3);
        slowest = std::max(slowest, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
        for (int j = 0; j < 3; ++j) {
            const double tol = std::max(1e-8 * std::abs(roots[j]), 1e-10 * w * w);
            const double diff = std::abs(matrix[j] - roots[j]);
            worst = std::max(worst, diff / tol);
            pass = pass && diff <= tol;
        }
    }
    pass = pass && slowest < 1.0;
    return {pass, fmt("worst |matrix - numerov| / tolerance = %.2e, slowest case %.3f s", worst, slowest)};
}

Outcome convergence_order() {
    const auto g = twisted(1.0, 40.0);
    const auto mode = TransverseMode::from_ratio(0.0, g);
    std::vector<double> e;
    for (std::size_t n : {1001u, 2001u, 4001u}) {
        e.push_back(solve_transverse(g, mode, TransverseGrid(40.0, n, dirichlet, dirichlet), 1).energies[0]);
    }
    const double ratio = (e[0] - e[1]) / (e[1] - e[2]);
    return {std::abs(ratio - 4.0) <= 0.4, fmt("error ratio %.4f on 1001/2001/4001 points", ratio)};
}

Outcome localization() {
    const auto g = twisted(1.0, 40.0);
    const TransverseGrid grid(40.0, 4001, dirichlet, dirichlet);
    const auto s = solve_transverse(g, TransverseMode::from_ratio(0.0, g), grid, 1);
    const double outer = *observables(s, g, grid)[0].outer_mass;
    return {outer > 1.0 - outer, fmt("outer mass %.6f, inner mass %.6f", outer, 1.0 - outer)};
}

Outcome heun_chain(std::string& info) {
    const auto g = twisted(1.0, 40.0);
    const auto mode = TransverseMode::from_ratio(0.0, g);
    const TransverseGrid grid(40.0, 8001, dirichlet, dirichlet);
    const auto s = solve_transverse(g, mode, grid, 1);
    const auto r = residual_chain(grid, s.wavefunctions[0], s.energies[0], g, mode);
    const double stated = r.stage(stage_names::normal_form_stated, r.selected).residual;
    const double rederived = r.stage(stage_names::normal_form_rederived, r.selected).residual;
    const bool stated_flagged = r.stage(stage_names::l_equation_stated, r.selected).flagged;
    const bool b_flagged = r.coefficients.listed_b_disagrees;
    info = fmt("rederived normal form residual %.2e (convention %s)", rederived,
               std::string(to_string(r.selected)).c_str());
    return {stated <= 1e-5 && stated_flagged && b_flagged,
            fmt("stated normal-form residual %.2e (limit 1e-05); L-equation flag %s, B flag %s", stated,
                stated_flagged ? "present" : "missing", b_flagged ? "present" : "missing")};
}

double box_filling(std::size_t electrons, double length, double width) {
    std::vector<double> levels;
    for (int m = 1; m <= 30; ++m) {
        for (int j = -100; j <= 100; ++j) {
            levels.push_back(std::pow(m * constants::pi / width, 2) + std::pow(2 * constants::pi * j / length, 2));
        }
    }
    std::sort(levels.begin(), levels.end());
    double sum = 0.0;
    std::size_t left = electrons;
    for (double e : levels) {
        if (left == 0) {
            break;
        }
        const std::size_t take = std::min<std::size_t>(left, 2);
        sum += static_cast<double>(take) * e;
        left -= take;
    }
    return sum;
}

Outcome stability_decomposition() {
    bool exact = true;
    const TransverseGrid wide(40.0, 801, dirichlet, dirichlet);
    StabilityScenario s{StripGeometry(200.0, 0.0, 40.0), 0.05, 10, 2, 0.0};
    const std::vector<double> omegas{0.0, 0.05, 0.1, 0.2, 0.4};
    for (const auto& row : total_energy_scan(s, omegas, wide, 4).rows) {
        exact = exact && row.total == row.elastic + row.electronic;
    }
    double worst = 0.0;
    const TransverseGrid box(1.0, 4001, dirichlet, dirichlet);
    for (std::size_t n = 1; n <= 20; ++n) {
        StabilityScenario flat{StripGeometry(20.0, 0.0, 1.0), 0.0, n, 2, 0.0};
        worst = std::max(worst, rel(electronic_energy(flat, 0.0, box), box_filling(n, 20.0, 1.0)));
    }
    return {exact && worst <= 1e-6,
            fmt("row decomposition %s; worst flat-filling relative error %.2e for N = 1..20",
                exact ? "exact" : "broken", worst)};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome determinism() {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / "helistrip_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string exe = HELISTRIP_CLI_PATH;
    bool ran = true;
    for (int i = 0; i < 2; ++i) {
        const std::string tag = std::to_string(i);
        const std::string solve = exe + " solve --L 100 --n 5 --D 20 --C 0.1 --states 3 --wavefunctions --output " +
                                  (dir / ("solve" + tag)).string();
        const std::string stab = exe + " stability --L 200 --D 40 --N 8 --Cstar 0.01 --n-values 0,1,2,4 "
                                       "--points 801 --output " +
                                 (dir / ("stab" + tag)).string();
        ran = ran && std::system(solve.c_str()) == 0 && std::system(stab.c_str()) == 0;
    }
    bool same = ran;
    for (const char* name : {"solve{}.csv", "solve{}.wavefunctions.csv", "stab{}.csv", "stab{}.summary.json"}) {
        std::string a = name;
        std::string b = name;
        a.replace(a.find("{}"), 2, "0");
        b.replace(b.find("{}"), 2, "1");
        same = same && !slurp(dir / a).empty() && slurp(dir / a) == slurp(dir / b);
    }
    fs::remove_all(dir);
    return {same, ran ? (same ? "data files byte-identical across runs" : "data files differ")
                      : "a CLI run failed"};
}

} // namespace

int main() {
    std::string heun_info;
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"landmark exactness", landmarks_exact},
        {"metric oracle", metric_oracle},
        {"net potential identity", net_identity},
        {"negativity threshold", negativity_threshold},
        {"minimum depth", minimum_depth},
        {"box regression", box_regression},
        {"oracle equivalence", oracle_equivalence},
        {"convergence order", convergence_order},
        {"localization", localization},
        {"heun chain", [&] { return heun_chain(heun_info); }},
        {"stability decomposition", stability_decomposition},
        {"determinism", determinism},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += o.pass ? 0 : 1;
        std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
        if (i + 1 == 10 && !heun_info.empty()) {
            std::printf("INFO 10 %s\n", heun_info.c_str());
        }
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
