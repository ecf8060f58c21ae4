// Acceptance run: unit-suite timing plus the figure trend checks.
// Prints one PASS/FAIL line per criterion; exits nonzero if any fail.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "crn/experiment.hpp"

namespace fs = std::filesystem;
using namespace crn;

namespace {

// Pinned acceptance settings.
constexpr int kEpisodes = 3000;
constexpr std::size_t kFinalWindow = 300;
constexpr double kUnitBudgetSeconds = 60.0;
constexpr std::size_t kMovingAverage = 100;
constexpr double kConvergenceRatio = 0.10;
constexpr int kAllowedInversions = 1;
constexpr int kImprovementSeedsRequired = 4;
const std::vector<std::uint64_t> kSeeds = {1, 2, 3, 4, 5};

const char* const kUnitTests[] = {
#include "unit_tests.inc"
};

struct Verdict {
    std::string name;
    bool pass = false;
    std::string detail;
};

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(5) << v;
    return os.str();
}

// Seed-major learning curves of one preset, keyed by curve id.
using Curves = std::map<std::string, std::vector<std::vector<EpisodeStats>>>;

std::optional<Curves> load_existing(const Preset& preset, const fs::path& dir) {
    Curves out;
    for (const auto& c : preset.curves) {
        for (std::uint64_t s : kSeeds) {
            const fs::path file = dir / (c.id + "_seed" + std::to_string(s) + ".csv");
            if (!fs::exists(file)) return std::nullopt;
            auto stats = read_curve_csv(file);
            if (stats.size() != static_cast<std::size_t>(kEpisodes)) return std::nullopt;
            out[c.id].push_back(std::move(stats));
        }
    }
    return out;
}

Curves run_or_load(const std::string& name, const fs::path& root, bool reuse) {
    const Preset preset = make_preset(name);
    const fs::path dir = root / name;
    if (reuse) {
        if (auto existing = load_existing(preset, dir)) {
            std::cerr << name << ": reusing " << dir << '\n';
            return *existing;
        }
    }
    const auto start = std::chrono::steady_clock::now();
    std::cerr << name << ": running " << preset.curves.size() << " curves x " << kSeeds.size()
              << " seeds x " << kEpisodes << " episodes\n";
    const ExperimentResult r = run_preset(name, kSeeds, dir, kEpisodes);
    const std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;
    std::cerr << name << ": done in " << fmt(took.count()) << " s\n";
    Curves out;
    for (const auto& run : r.runs) out[run.run_id].push_back(run.stats);
    return out;
}

double window_mean(const std::vector<EpisodeStats>& stats, std::size_t begin, std::size_t end) {
    double sum = 0.0;
    for (std::size_t i = begin; i < end; ++i) sum += stats[i].mean_reward;
    return sum / static_cast<double>(end - begin);
}

// Seed-averaged mean reward over the last kFinalWindow episodes.
double final_mean(const Curves& curves, const std::string& id) {
    const auto& seeds = curves.at(id);
    double sum = 0.0;
    for (const auto& s : seeds) sum += window_mean(s, s.size() - kFinalWindow, s.size());
    return sum / static_cast<double>(seeds.size());
}

// Per-episode mean reward averaged over seeds.
std::vector<double> seed_average(const Curves& curves, const std::string& id) {
    const auto& seeds = curves.at(id);
    std::vector<double> avg(seeds.front().size(), 0.0);
    for (const auto& s : seeds) {
        for (std::size_t i = 0; i < avg.size(); ++i) avg[i] += s[i].mean_reward;
    }
    for (double& v : avg) v /= static_cast<double>(seeds.size());
    return avg;
}

// Least-squares slope of y over the index range [begin, end).
double slope(const std::vector<double>& y, std::size_t begin, std::size_t end) {
    const double n = static_cast<double>(end - begin);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = begin; i < end; ++i) {
        const double x = static_cast<double>(i);
        sx += x;
        sy += y[i];
        sxx += x * x;
        sxy += x * y[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

Verdict unit_suite() {
    Verdict v{"unit/property suite passes in < 60 s", true, ""};
    double total = 0.0;
    for (const char* exe : kUnitTests) {
        const std::string cmd = std::string(exe) + " > /dev/null 2>&1";
        const auto start = std::chrono::steady_clock::now();
        const int status = std::system(cmd.c_str());
        const std::chrono::duration<double> took = std::chrono::steady_clock::now() - start;
        total += took.count();
        if (status != 0) {
            v.pass = false;
            v.detail += fs::path(exe).filename().string() + " failed; ";
        }
    }
    if (total >= kUnitBudgetSeconds) v.pass = false;
    v.detail += "total " + fmt(total) + " s";
    return v;
}

Verdict fig1(const Curves& c) {
    const double r1 = final_mean(c, "fig1_N_m1");
    const double r2 = final_mean(c, "fig1_N_m2");
    const double r3 = final_mean(c, "fig1_N_m3");
    return {"fig1: reward(N_m=1) > reward(N_m=2) > reward(N_m=3)", r1 > r2 && r2 > r3,
            "N_m=1 " + fmt(r1) + ", N_m=2 " + fmt(r2) + ", N_m=3 " + fmt(r3)};
}

Verdict fig2(const Curves& c) {
    std::string detail = "eta=0.9:";
    double best = -INFINITY;
    std::string best_theta;
    int best_index = 0;
    for (int i = 1; i <= 9; ++i) {
        const std::string theta = format_real(i / 10.0);
        const double r = final_mean(c, "fig2_eta0.9_theta" + theta);
        detail += " " + fmt(r);
        if (r > best) {
            best = r;
            best_theta = theta;
            best_index = i;
        }
    }
    const double low_eta = final_mean(c, "fig2_eta0.5_theta" + best_theta);
    const bool interior = best_index >= 2 && best_index <= 8;
    detail += "; argmax theta " + best_theta + "; eta=0.5 there " + fmt(low_eta);
    return {"fig2: interior argmax over theta (eta=0.9) and eta=0.9 >= eta=0.5 there",
            interior && best >= low_eta, detail};
}

Verdict fig3(const Curves& c) {
    const double x2 = final_mean(c, "fig3_xi2_ds15");
    const double x10 = final_mean(c, "fig3_xi10_ds15");
    const double x20 = final_mean(c, "fig3_xi20_ds15");
    const double near = final_mean(c, "fig3_xi10_ds5");
    const bool pass = x2 > x10 && x10 > x20 && x20 < 0.0 && near > x10;
    return {"fig3: reward(xi=2) > reward(xi=10) > reward(xi=20), xi=20 < 0, d_s=5 > d_s=15 at xi=10",
            pass,
            "xi=2 " + fmt(x2) + ", xi=10 " + fmt(x10) + ", xi=20 " + fmt(x20) + ", xi=10/d_s=5 " +
                fmt(near)};
}

// One I_th series: non-decreasing up to kAllowedInversions, positive at the top, negative at the bottom.
bool ith_series_ok(const std::vector<double>& r, std::string& detail) {
    int inversions = 0;
    for (std::size_t i = 1; i < r.size(); ++i) inversions += r[i] < r[i - 1] ? 1 : 0;
    for (double v : r) detail += " " + fmt(v);
    detail += " (inversions " + std::to_string(inversions) + ")";
    return inversions <= kAllowedInversions && r.back() > 0.0 && r.front() < 0.0;
}

Verdict fig45(const Curves& c4, const Curves& c5) {
    Verdict v{"fig4/5: reward non-decreasing in I_th, > 0 at 1e-2, < 0 at 1e-9", true, ""};
    for (const char* cmax : {"0.5", "1"}) {
        std::vector<double> r;
        for (int e = -9; e <= -2; ++e) {
            r.push_back(final_mean(c4, std::string("fig4_Cmax") + cmax + "_Ith" +
                                           format_real(std::pow(10.0, e))));
        }
        v.detail += std::string("fig4 C_max=") + cmax + ":";
        v.pass = ith_series_ok(r, v.detail) && v.pass;
        v.detail += "; ";
    }
    std::vector<double> r;
    for (int e = -9; e <= -2; ++e) r.push_back(final_mean(c5, "fig5_I_th" + format_real(std::pow(10.0, e))));
    v.detail += "fig5:";
    v.pass = ith_series_ok(r, v.detail) && v.pass;
    return v;
}

Verdict ordering(const Curves& c, const std::string& fig, const std::string& what) {
    const double dqn = final_mean(c, fig + "_dqn");
    const double rnd = final_mean(c, fig + "_random");
    const double ht = final_mean(c, fig + "_harvest_transmit");
    return {fig + ": " + what + " DQN > random > harvest_transmit", dqn > rnd && rnd > ht,
            "dqn " + fmt(dqn) + ", random " + fmt(rnd) + ", harvest_transmit " + fmt(ht)};
}

Verdict convergence(const Curves& c) {
    const auto avg = seed_average(c, "fig6_dqn");
    std::vector<double> ma(avg.size(), 0.0);
    double run = 0.0;
    for (std::size_t i = 0; i < avg.size(); ++i) {
        run += avg[i];
        if (i >= kMovingAverage) run -= avg[i - kMovingAverage];
        ma[i] = run / static_cast<double>(std::min(i + 1, kMovingAverage));
    }
    const std::size_t fifth = avg.size() / 5;
    // The moving average is defined from the first full window onward.
    const double early = slope(ma, kMovingAverage - 1, fifth);
    const double late = slope(ma, avg.size() - fifth, avg.size());
    return {"convergence: |late MA slope| < 10% of |early MA slope| (fig6 DQN)",
            std::abs(late) < kConvergenceRatio * std::abs(early),
            "early " + fmt(early) + "/episode, late " + fmt(late) + "/episode"};
}

Verdict improvement(const Curves& c) {
    int improved = 0;
    std::string detail;
    for (const auto& s : c.at("fig6_dqn")) {
        const std::size_t tenth = s.size() / 10;
        const double first = window_mean(s, 0, tenth);
        const double last = window_mean(s, s.size() - tenth, s.size());
        improved += last > first ? 1 : 0;
        detail += " " + fmt(first) + "->" + fmt(last);
    }
    return {"learning-curve improvement: last 10% > first 10% on >= 4 of 5 seeds (fig6 DQN)",
            improved >= kImprovementSeedsRequired,
            std::to_string(improved) + "/5 seeds:" + detail};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance checks for the figure presets"};
    std::string out = "acceptance_results";
    bool reuse = false;
    bool skip_units = false;
    app.add_option("--out", out, "Directory for preset outputs");
    app.add_flag("--reuse", reuse, "Reuse complete preset outputs already in --out");
    app.add_flag("--skip-units", skip_units, "Do not run the unit suites");
    CLI11_PARSE(app, argc, argv);

    std::vector<Verdict> verdicts;
    try {
        if (!skip_units) verdicts.push_back(unit_suite());
        const fs::path root(out);
        const Curves c1 = run_or_load("fig1", root, reuse);
        verdicts.push_back(fig1(c1));
        const Curves c2 = run_or_load("fig2", root, reuse);
        verdicts.push_back(fig2(c2));
        const Curves c3 = run_or_load("fig3", root, reuse);
        verdicts.push_back(fig3(c3));
        const Curves c4 = run_or_load("fig4", root, reuse);
        const Curves c5 = run_or_load("fig5", root, reuse);
        verdicts.push_back(fig45(c4, c5));
        const Curves c6 = run_or_load("fig6", root, reuse);
        verdicts.push_back(ordering(c6, "fig6", "secrecy reward"));
        const Curves c7 = run_or_load("fig7", root, reuse);
        verdicts.push_back(ordering(c7, "fig7", "throughput"));
        verdicts.push_back(convergence(c6));
        verdicts.push_back(improvement(c6));
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }

    int failed = 0;
    for (const auto& v : verdicts) {
        std::cout << (v.pass ? "PASS  " : "FAIL  ") << v.name << "  [" << v.detail << "]\n";
        failed += v.pass ? 0 : 1;
    }
    std::cout << (verdicts.size() - static_cast<std::size_t>(failed)) << "/" << verdicts.size()
              << " criteria passed\n";
    return failed == 0 ? 0 : 1;
}
