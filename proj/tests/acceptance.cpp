// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
// Tolerances are fixed here and are not tuned per run.

#include "gsc/gsc.hpp"
#include "gsc/studies.hpp"
#include "oracles.hpp"

#include <array>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#ifndef GSC_CLI_PATH
#error "GSC_CLI_PATH must name the gsc executable"
#endif

using namespace gsc;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

// criterion 1
constexpr double kShuffleMax = 0.5;
constexpr double kUnsegmentedMin = 1.15;
constexpr double kSegmentedLo = 0.7, kSegmentedHi = 1.2;
// criterion 2
constexpr double kMeanRef = 0.293, kMeanTol = 0.01;
constexpr double kSeRef = 0.0072, kSeTol = 0.001, kSigmaRelTol = 0.20;
// criterion 4
constexpr double kSizeLo = 0.02, kSizeHi = 0.10;
constexpr std::size_t kSizeTrials = 500;
// criterion 7
constexpr double kSlopeLo = 0.8, kSlopeHi = 1.3;
constexpr double kMinReplicatesPerSecond = 1000.0;
// criterion 8
constexpr double kCutRecoveryMin = 0.9;
constexpr std::size_t kCutRuns = 200;

int failures = 0;

void report(int n, bool ok, const std::string& what) {
    std::cout << (ok ? "[PASS]" : "[FAIL]") << " criterion " << n << ": " << what << std::endl;
    if (!ok) ++failures;
}

std::string fmt(double v) {
    std::ostringstream s;
    s.precision(4);
    s << v;
    return s.str();
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string run_cli(const std::string& args, int& code) {
    const std::string cmd = std::string(GSC_CLI_PATH) + " " + args + " 2>/dev/null";
    std::string out;
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) {
        code = -1;
        return out;
    }
    std::array<char, 4096> buf{};
    std::size_t got;
    while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), got);
    const int status = pclose(pipe);
    code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return out;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void criterion1(const Table2Result& r) {
    const double sh = r.shuffle / r.truth, un = r.unsegmented / r.truth;
    const double tr = r.true_segmentation / r.truth, es = r.estimated_segmentation / r.truth;
    const bool ok = sh <= kShuffleMax && un >= kUnsegmentedMin && tr >= kSegmentedLo && tr <= kSegmentedHi &&
                    es >= kSegmentedLo && es <= kSegmentedHi;
    report(1, ok,
           "two-region SE ratios to truth " + fmt(r.truth) + ": shuffle " + fmt(sh) + " (<= 0.5), unsegmented " +
               fmt(un) + " (>= 1.15), true seg " + fmt(tr) + ", estimated seg " + fmt(es) + " (in [0.7, 1.2])");
}

void criteria2and3() {
    RegionOverlapConfig cfg;
    const auto t0 = Clock::now();
    const auto r = run_region_overlap_study(cfg);
    const double sigma = r.average.standard_error;
    const bool mean_ok = std::abs(r.population_mean - kMeanRef) <= kMeanTol;
    const bool se_ok = std::abs(r.population_sd - kSeRef) <= kSeTol;
    const bool sigma_ok = std::abs(sigma - kSeRef) <= kSigmaRelTol * kSeRef;
    report(2, mean_ok && se_ok && sigma_ok,
           "R_n over " + std::to_string(cfg.pairs) + " pairs: mean " + fmt(r.population_mean) + " (0.293 +- 0.01), sd " +
               fmt(r.population_sd) + " (0.0072 +- 0.001), double bootstrap sigma " + fmt(sigma) +
               " on the average pair (0.0072 +- 20%), " + fmt(seconds_since(t0)) + " s");
    report(3, r.shuffle_mean > r.extreme.observed,
           "shuffle null mean " + fmt(r.shuffle_mean) + " vs extreme pair R_n " + fmt(r.extreme.observed) +
               " (mean must exceed R_n)");
}

void criterion4() {
    SizeStudyConfig cfg;
    cfg.trials = kSizeTrials;
    const auto r = run_size_study(cfg);
    report(4, r.rate() >= kSizeLo && r.rate() <= kSizeHi,
           "bp overlap test rejects " + std::to_string(r.rejections) + "/" + std::to_string(r.trials) +
               " independent pairs at alpha 0.05, rate " + fmt(r.rate()) + " (in [0.02, 0.10])");
}

void criterion5() {
    std::size_t checks = 0, mismatches = 0;
    std::string first;
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        auto s = oracle::run_sweep(seed, 25);
        checks += s.checks;
        mismatches += s.mismatches;
        if (first.empty()) first = s.first_failure;
    }
    report(5, mismatches == 0 && checks > 0,
           std::to_string(checks) + " oracle comparisons, " + std::to_string(mismatches) + " mismatches" +
               (first.empty() ? "" : " (first: " + first + ")"));
}

void criterion6() {
    const fs::path dir = fs::temp_directory_path() / ("gsc_accept_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    int code = 0;
    bool ok = true;
    std::string detail;
    run_cli("simulate --model two-region --seed 17 --output-dir " + (dir / "sim").string(), code);
    ok = ok && code == 0;
    const std::string in = "--genome " + (dir / "sim" / "genome.txt").string() + " --a " +
                           (dir / "sim" / "a.bed").string() + " --b " + (dir / "sim" / "b.bed").string();
    const std::vector<std::string> commands{
        "test " + in + " --block-length 1000 --replicates 400 --seed 3",
        "test " + in + " --statistic region_overlap --block-length 1000 --replicates 200 --outer-replicates 50 --seed 3",
        "subsample " + in + " --statistic bp_overlap --block-length 1000 --replicates 400 --auto-segment --seed 3",
        "select-block-size " + in + " --statistic mean_overlap --replicates 100 --auto-segment --seed 3",
    };
    int idx = 0;
    for (const auto& cmd : commands) {
        std::string outputs[3];
        std::string artifacts[3];
        const unsigned threads[3] = {1, 4, 1};
        for (int k = 0; k < 3; ++k) {
            const fs::path od = dir / ("run" + std::to_string(idx) + "_" + std::to_string(k));
            outputs[k] = run_cli(cmd + " --threads " + std::to_string(threads[k]) + " --output-dir " + od.string(),
                                 code);
            ok = ok && code == 0;
            std::vector<fs::path> files;
            for (const auto& e : fs::directory_iterator(od)) files.push_back(e.path());
            std::sort(files.begin(), files.end());
            for (const auto& f : files) artifacts[k] += f.filename().string() + slurp(f);
        }
        const bool same = outputs[0] == outputs[1] && outputs[0] == outputs[2] && artifacts[0] == artifacts[1] &&
                          artifacts[0] == artifacts[2] && !outputs[0].empty();
        if (!same) detail += " [differs: " + cmd.substr(0, cmd.find(' ')) + "]";
        ok = ok && same;
        ++idx;
    }
    run_cli("simulate --model two-region --seed 17 --output-dir " + (dir / "sim2").string(), code);
    const bool sim_same = slurp(dir / "sim" / "a.bed") == slurp(dir / "sim2" / "a.bed") &&
                          slurp(dir / "sim" / "b.bed") == slurp(dir / "sim2" / "b.bed");
    ok = ok && sim_same;
    fs::remove_all(dir);
    report(6, ok,
           std::to_string(commands.size()) + " randomized commands plus simulate rerun with threads 1/4/1, reports and "
                                             "artifacts byte-identical" + detail);
}

/// Track pair with about k instances per track on a line of 20 k bases.
TrackPair perf_pair(std::size_t k, std::uint64_t seed) {
    const Pos n = static_cast<Pos>(20 * k);
    auto space = std::make_shared<const CoordinateSpace>(CoordinateSpace::single("perf", n));
    Engine rng = make_engine(seed);
    auto make = [&] {
        std::vector<Interval> iv;
        iv.reserve(k);
        for (std::size_t i = 0; i < k; ++i) {
            const Pos s = uniform_int<Pos>(rng, 0, n - 8);
            iv.push_back({s, s + uniform_int<Pos>(rng, 1, 8)});
        }
        return FeatureTrack(space, std::move(iv));
    };
    auto a = make();
    auto b = make();
    return {std::move(a), std::move(b)};
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const double mx = mean(x), my = mean(y);
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

/// Repeats fn until at least `budget` seconds pass; returns seconds per call.
template <typename Fn>
double time_per_call(Fn&& fn, double budget = 0.3) {
    std::size_t calls = 0;
    const auto t0 = Clock::now();
    do {
        fn();
        ++calls;
    } while (seconds_since(t0) < budget);
    return seconds_since(t0) / static_cast<double>(calls);
}

void criterion7() {
    const std::vector<std::size_t> sizes{1000, 10000, 100000, 1000000};
    std::vector<double> lx, leval, lrep;
    double throughput = 0.0;
    volatile double sink = 0.0;
    for (std::size_t k : sizes) {
        const auto p = perf_pair(k, k);
        const double inst = static_cast<double>(p.a().run_count() + p.b().run_count());
        const double te = time_per_call([&] { sink = sink + evaluate(StatisticKind::bp_overlap(), p).value; });
        // one replicate: a tenth of the sequence in one block
        const Pos L = p.size() / 10;
        const std::size_t B = 200;
        const double tb = time_per_call([&] {
            auto d = subsample_distribution(p, StatisticKind::mean_overlap(), {L, B, 1, Segmentation::trivial(p.size()), 1});
            sink = sink + d.values.front();
        });
        const double tr = tb / static_cast<double>(B);
        if (k == 10000) throughput = 1.0 / tr;
        lx.push_back(std::log(inst));
        leval.push_back(std::log(te));
        lrep.push_back(std::log(tr));
    }
    const double se = fit_slope(lx, leval);
    const double sr = fit_slope(lx, lrep);
    const bool ok = se >= kSlopeLo && se <= kSlopeHi && sr >= kSlopeLo && sr <= kSlopeHi &&
                    throughput >= kMinReplicatesPerSecond;
    report(7, ok,
           "log-log slope over 1e3..1e6 instances: evaluation " + fmt(se) + ", replicate " + fmt(sr) +
               " (in [0.8, 1.3]); " + fmt(throughput) + " replicates/s at 1e4 instances (>= 1000)");
}

void criterion8(const Table2Result& r) {
    NormalityStudyConfig cfg;
    const auto nr = run_normality_study(cfg);
    const bool ok = r.estimate_pairs >= kCutRuns && r.cut_recovery >= kCutRecoveryMin &&
                    nr.total_unsegmented() > nr.total_segmented();
    report(8, ok,
           "cut within 500 bp in " + fmt(100.0 * r.cut_recovery) + "% of " + std::to_string(r.estimate_pairs) +
               " runs (>= 90%); Lilliefors rejections unsegmented " + std::to_string(nr.total_unsegmented()) +
               " vs segmented " + std::to_string(nr.total_segmented()) + " over " +
               std::to_string(nr.pairs * nr.grid.size()) + " distributions each");
}

}  // namespace

int main() {
    const auto t0 = Clock::now();
    Table2Config t2;
    t2.estimate_pairs = kCutRuns;
    const auto table2 = run_table2_study(t2);
    criterion1(table2);
    criteria2and3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8(table2);
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << " in "
              << fmt(seconds_since(t0)) << " s" << std::endl;
    return failures == 0 ? 0 : 1;
}
