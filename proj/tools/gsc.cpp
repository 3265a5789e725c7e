// gsc: command-line front end for segmentation, block subsampling and
// independence tests on pairs of feature tracks.
//
// Exit codes: 0 success, 1 unexpected failure, 2 input error (unreadable or
// malformed files, bad command line), 3 parameter or feasibility error.

#include "gsc/gsc.hpp"
#include "gsc/report.hpp"
#include "gsc/studies.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace gsc;

namespace {

struct CommonOptions {
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;
    std::string format = "json";
    std::string output_dir;
};

struct TrackInputs {
    std::string genome;
    std::string a;
    std::string b;
};

struct SegmentOptions {
    std::string file;
    bool automatic = false;
    Pos min_segment = 0;  // 0: n / 20
    double threshold = 0.0;
    Pos hint = 0;
    std::string signal = "both";
};

struct Loaded {
    SpacePtr space;
    TrackPair pair;
    std::size_t clipped_a = 0;
    std::size_t clipped_b = 0;
};

Loaded load_inputs(const TrackInputs& in) {
    auto space = std::make_shared<const CoordinateSpace>(load_genome(in.genome));
    auto a = load_bed(in.a, space);
    auto b = load_bed(in.b, space);
    return {space, TrackPair(std::move(a.track), std::move(b.track)), a.clipped, b.clipped};
}

std::uint64_t resolve_seed(const CommonOptions& c) { return c.seed ? *c.seed : generate_seed(); }

unsigned resolve_threads(const CommonOptions& c) { return c.threads ? c.threads : default_threads(); }

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    out << content;
}

fs::path output_dir(const CommonOptions& c) {
    fs::path dir(c.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw InputError("cannot create output directory " + c.output_dir + ": " + ec.message());
    return dir;
}

// One "path<TAB>value" line per leaf, paths in JSON-pointer form.
void flatten(const Json& j, const std::string& path, std::ostringstream& out) {
    if (j.is_object() && !j.empty()) {
        for (const auto& [key, value] : j.items()) flatten(value, path + "/" + key, out);
    } else if (j.is_array() && !j.empty()) {
        for (std::size_t i = 0; i < j.size(); ++i) flatten(j[i], path + "/" + std::to_string(i), out);
    } else {
        out << path << '\t' << (j.is_string() ? j.get<std::string>() : j.dump()) << '\n';
    }
}

std::string render(const Json& j, const std::string& format) {
    if (format == "json") return j.dump(2) + "\n";
    std::ostringstream out;
    flatten(j, "", out);
    return out.str();
}

/// Prints the report and, with an output directory, stores it as report.<format>.
void emit(const Json& report, const CommonOptions& c) {
    const std::string text = render(report, c.format);
    std::cout << text;
    if (!c.output_dir.empty()) write_file(output_dir(c) / ("report." + c.format), text);
}

SegmentationParams segmentation_params(const SegmentOptions& s, Pos n) {
    SegmentationParams p;
    p.min_length = s.min_segment > 0 ? s.min_segment : std::max<Pos>(1, n / 20);
    p.threshold = s.threshold;
    if (s.hint > 0) p.block_length_hint = s.hint;
    p.signal = parse_signal(s.signal);
    return p;
}

Json segmentation_config(const SegmentOptions& s, const SegmentationParams& p) {
    Json j;
    j["min_segment"] = p.min_length;
    j["threshold_b"] = p.threshold;
    j["block_length_hint"] = p.block_length_hint ? Json(*p.block_length_hint) : Json(nullptr);
    j["signal"] = s.signal;
    return j;
}

/// Segmentation named by --segmentation, computed with --auto-segment, or the
/// natural one (sequence boundaries).
Segmentation choose_segmentation(const SegmentOptions& s, const TrackPair& p, Json& config) {
    if (!s.file.empty()) {
        Segmentation seg = load_segmentation(s.file);
        if (seg.size() != p.size()) {
            throw InputError("segmentation " + s.file + " covers " + std::to_string(seg.size()) +
                             " bases but the genome has " + std::to_string(p.size()));
        }
        config["segmentation"] = {{"file", s.file}};
        return seg;
    }
    if (s.automatic) {
        const auto params = segmentation_params(s, p.size());
        config["segmentation"] = segmentation_config(s, params);
        config["segmentation"]["automatic"] = true;
        return segment_pair(p, params).segmentation;
    }
    config["segmentation"] = "natural";
    return Segmentation::natural(p.space());
}

Json inputs_json(const TrackInputs& in, const Loaded& l) {
    return {{"genome", in.genome},
            {"a", in.a},
            {"b", in.b},
            {"length", l.pair.size()},
            {"clipped_a", l.clipped_a},
            {"clipped_b", l.clipped_b}};
}

void add_track_inputs(CLI::App* cmd, TrackInputs& in) {
    cmd->add_option("--genome", in.genome, "Two-column file: sequence name and length")->required();
    cmd->add_option("--a", in.a, "BED file of feature A")->required();
    cmd->add_option("--b", in.b, "BED file of feature B")->required();
}

void add_common(CLI::App* cmd, CommonOptions& c, bool seeded) {
    if (seeded) cmd->add_option("--seed", c.seed, "RNG seed (generated and recorded when omitted)");
    cmd->add_option("--threads", c.threads, "Worker threads (default: GSC_THREADS or hardware concurrency)");
    cmd->add_option("--format", c.format, "Report format")->check(CLI::IsMember({"json", "tsv"}));
    cmd->add_option("--output-dir", c.output_dir, "Directory for report and artifacts");
}

void add_segment_options(CLI::App* cmd, SegmentOptions& s, bool selectable) {
    if (selectable) {
        cmd->add_option("--segmentation", s.file, "Segmentation file (start<TAB>end per region)");
        cmd->add_flag("--auto-segment", s.automatic, "Estimate a segmentation by dyadic splitting");
    }
    cmd->add_option("--min-segment", s.min_segment, "Minimum region length L_s (default n/20)");
    cmd->add_option("--threshold-b", s.threshold, "Stopping threshold b");
    cmd->add_option("--segment-block-length", s.hint, "Ballpark block length for the variance normalization");
    cmd->add_option("--signal", s.signal, "Series to segment")->check(CLI::IsMember({"a", "b", "joint", "union", "both"}));
}

// ---------------------------------------------------------------------------

int cmd_segment(const TrackInputs& in, const SegmentOptions& so, const CommonOptions& c) {
    const Loaded l = load_inputs(in);
    const auto params = segmentation_params(so, l.pair.size());
    const auto merged = segment_pair(l.pair, params);
    Json report;
    report["command"] = "segment";
    report["config"] = {{"inputs", inputs_json(in, l)}, {"segmentation", segmentation_config(so, params)}};
    report["segmentation"] = to_json(merged.segmentation);
    Json regions = Json::array();
    for (const auto& r : merged.segmentation.regions()) {
        const auto len = static_cast<double>(r.length());
        regions.push_back({{"start", r.start},
                           {"end", r.end},
                           {"mean_a", static_cast<double>(l.pair.a().indicator_sum(r.start, r.end)) / len},
                           {"mean_b", static_cast<double>(l.pair.b().indicator_sum(r.start, r.end)) / len},
                           {"flagged", r.length() < params.min_length}});
    }
    report["regions"] = regions;
    report["flagged_length"] = merged.flagged_length;
    if (!c.output_dir.empty()) {
        std::ostringstream seg;
        write_segmentation(seg, merged.segmentation);
        write_file(output_dir(c) / "segmentation.txt", seg.str());
    }
    emit(report, c);
    return 0;
}

struct SubsampleOptions {
    std::string statistic = "bp_overlap";
    Pos L = 0;
    std::size_t B = 1000;
    double level = 0.95;
};

int cmd_subsample(const TrackInputs& in, const SegmentOptions& so, const SubsampleOptions& o, const CommonOptions& c) {
    const Loaded l = load_inputs(in);
    const auto kind = StatisticKind::parse(o.statistic);
    const std::uint64_t seed = resolve_seed(c);
    Json config;
    config["inputs"] = inputs_json(in, l);
    config["statistic"] = kind.name();
    config["block_length"] = o.L;
    config["replicates"] = o.B;
    config["level"] = o.level;
    config["seed"] = seed;
    const Segmentation seg = choose_segmentation(so, l.pair, config);
    const StatValue obs = evaluate(kind, l.pair);
    const auto d = subsample_distribution(l.pair, kind, {o.L, o.B, seed, seg, resolve_threads(c)});

    Json report;
    report["command"] = "subsample";
    report["config"] = config;
    report["observed"] = number(obs.value);
    report["segmentation"] = to_json(seg);
    report["replicates"] = to_json(d);
    report["variance"] = number(subsample_variance(d));
    report["standard_error"] = number(subsample_standard_error(d, l.pair.size()));
    Json intervals = Json::array();
    intervals.push_back(to_json(ci_gaussian(obs, d, l.pair.size(), o.level)));
    try {
        intervals.push_back(to_json(ci_percentile(d, o.level)));
    } catch (const ParameterError&) {
    }
    report["intervals"] = intervals;
    try {
        report["normality"] = to_json(normality_diagnostic(d));
    } catch (const ParameterError&) {
        report["normality"] = nullptr;
    }
    if (!c.output_dir.empty()) {
        std::ostringstream rep;
        write_replicates(rep, d);
        write_file(output_dir(c) / "replicates.txt", rep.str());
    }
    emit(report, c);
    return 0;
}

struct GridOptions {
    double rho = 0.7;
    int steps = 12;
};

int cmd_select(const TrackInputs& in, const SegmentOptions& so, const SubsampleOptions& o, const GridOptions& g,
               const CommonOptions& c) {
    const Loaded l = load_inputs(in);
    const auto kind = StatisticKind::parse(o.statistic);
    const std::uint64_t seed = resolve_seed(c);
    Json config;
    config["inputs"] = inputs_json(in, l);
    config["statistic"] = kind.name();
    config["replicates"] = o.B;
    config["rho"] = g.rho;
    config["grid_steps"] = g.steps;
    config["seed"] = seed;
    const Segmentation seg = choose_segmentation(so, l.pair, config);
    const auto sel = select_block_size(l.pair, seg, kind, g.rho, g.steps, o.B, seed, resolve_threads(c));
    Json report;
    report["command"] = "select-block-size";
    report["config"] = config;
    report["selection"] = to_json(sel);
    emit(report, c);
    return 0;
}

struct TestOptions {
    std::string statistic = "bp_overlap";
    Pos L = 0;
    std::size_t B = 1000;
    std::string formulation = "conditional";
    double outer_multiplier = kDefaultOuterMultiplier;
    std::size_t outer_replicates = 0;
    double alpha = 0.05;
    bool two_sided = false;
    bool strict_disjoint = false;
    bool select = false;
};

int cmd_test(const TrackInputs& in, SegmentOptions so, const TestOptions& o, const GridOptions& g,
             const CommonOptions& c) {
    const Loaded l = load_inputs(in);
    const std::uint64_t seed = resolve_seed(c);
    const unsigned threads = resolve_threads(c);
    if (o.statistic != "bp_overlap" && o.statistic != "region_overlap") {
        throw ParameterError("test supports bp_overlap and region_overlap, not '" + o.statistic + "'");
    }
    Json config;
    config["inputs"] = inputs_json(in, l);
    config["statistic"] = o.statistic;
    config["replicates"] = o.B;
    config["formulation"] = o.formulation;
    config["alpha"] = o.alpha;
    config["two_sided"] = o.two_sided;
    config["strict_disjoint"] = o.strict_disjoint;
    config["seed"] = seed;
    // a test without a segmentation file estimates one
    if (so.file.empty()) so.automatic = true;
    const Segmentation seg = choose_segmentation(so, l.pair, config);

    TestParams tp;
    tp.B = o.B;
    tp.seed = child_seed(seed, 0);
    tp.segmentation = seg;
    tp.formulation = parse_formulation(o.formulation);
    tp.outer_multiplier = o.outer_multiplier;
    tp.outer_replicates = o.outer_replicates;
    tp.two_sided = o.two_sided;
    tp.strict_disjoint = o.strict_disjoint;
    tp.threads = threads;
    tp.L = o.L;

    Json report;
    report["command"] = "test";
    if (o.select) {
        const auto kind = StatisticKind::parse(o.statistic);
        const auto sel = select_block_size(l.pair, seg, kind, g.rho, g.steps, o.B, child_seed(seed, 1), threads);
        tp.L = sel.chosen;
        // the stability choice may be too long for two blocks per segment;
        // fall back to the most stable candidate that can be cross-paired
        auto pairable = [&](Pos L) {
            try {
                (void)make_cross_plan(seg, L);
                return true;
            } catch (const ParameterError&) {
                return false;
            }
        };
        if (!pairable(tp.L)) {
            std::optional<Pos> best;
            double best_d = 0.0;
            for (const auto& cand : sel.candidates) {
                if (!cand.feasible || !cand.distance || !pairable(cand.L)) continue;
                if (!best || *cand.distance < best_d) best = cand.L, best_d = *cand.distance;
            }
            if (!best) {
                for (const auto& cand : sel.candidates) {
                    if (cand.feasible && pairable(cand.L)) best = cand.L;
                }
            }
            if (!best) throw ParameterError("no candidate block length fits two blocks in every segment");
            tp.L = *best;
            config["block_length_fallback"] = true;
        }
        config["rho"] = g.rho;
        config["grid_steps"] = g.steps;
        report["block_size_selection"] = to_json(sel);
    } else if (o.L <= 0) {
        throw ParameterError("--block-length is required unless --select-block-size is given");
    }
    config["block_length"] = tp.L;
    if (o.statistic == "region_overlap") {
        config["outer_multiplier"] = o.outer_multiplier;
        config["outer_replicates"] = o.outer_replicates ? o.outer_replicates : o.B;
    }
    const TestResult r = o.statistic == "bp_overlap" ? test_bp_overlap(l.pair, tp, o.alpha)
                                                     : double_bootstrap_region_overlap(l.pair, tp, o.alpha);
    report["config"] = config;
    report["segmentation"] = to_json(seg);
    report["result"] = to_json(r);
    if (!c.output_dir.empty()) {
        std::ostringstream rep;
        write_replicates(rep, r.replicates);
        write_file(output_dir(c) / "replicates.txt", rep.str());
    }
    emit(report, c);
    return 0;
}

struct SimulateOptions {
    std::string model = "two-region";
    std::string regions;
    std::string cluster_count = "poisson";
    std::string offset_sign = "symmetric";
    Pos n = 10000;
    double p0 = 0.9;
    Pos w = 20;
    bool independent = false;
};

/// "T:lambda:alpha:mu:beta" entries separated by commas.
std::vector<NeymanScottRegion> parse_regions(const std::string& text, OffsetSign sign) {
    std::vector<NeymanScottRegion> out;
    std::stringstream all(text);
    std::string item;
    while (std::getline(all, item, ',')) {
        std::stringstream fields(item);
        std::string f;
        std::vector<std::string> parts;
        while (std::getline(fields, f, ':')) parts.push_back(f);
        if (parts.size() != 5) throw ParameterError("region '" + item + "' must be T:lambda:alpha:mu:beta");
        try {
            out.push_back({std::stoll(parts[0]), std::stod(parts[1]), std::stod(parts[2]), std::stod(parts[3]),
                           std::stod(parts[4]), sign});
        } catch (const std::logic_error&) {
            throw ParameterError("region '" + item + "' has a non-numeric field");
        }
    }
    if (out.empty()) throw ParameterError("--regions is empty");
    return out;
}

int cmd_simulate(const SimulateOptions& o, const CommonOptions& c) {
    if (c.output_dir.empty()) throw ParameterError("simulate needs --output-dir");
    const std::uint64_t seed = resolve_seed(c);
    Engine rng = make_engine(seed);
    Json manifest;
    manifest["command"] = "simulate";
    Json config;
    config["model"] = o.model;
    config["seed"] = seed;

    std::optional<SimulatedPair> sim;
    if (o.model == "markov") {
        config["n"] = o.n;
        config["p0"] = o.p0;
        config["w"] = o.w;
        config["independent"] = o.independent;
        const MarkovParams mp{o.n, o.p0, o.w};
        const auto x = simulate_markov(mp, rng);
        const auto y = o.independent ? simulate_markov(mp, rng) : x;
        auto space = std::make_shared<const CoordinateSpace>(CoordinateSpace::single("sim", o.n));
        sim = SimulatedPair{TrackPair(derive_features(x, DerivedFeatureRule::PatternMatch, space),
                                      derive_features(y, DerivedFeatureRule::RunDensity, space)),
                            Segmentation(o.n, {0, o.n}, SegmentationSource::Truth)};
    } else {
        NeymanScottParams params;
        if (o.model == "two-region") {
            params = two_region_model();
        } else if (o.model == "region-overlap") {
            params = region_overlap_model();
        } else if (o.model == "custom") {
            const OffsetSign sign = o.offset_sign == "downstream" ? OffsetSign::Downstream : OffsetSign::Symmetric;
            params.regions = parse_regions(o.regions, sign);
            params.cluster_count = o.cluster_count == "fixed" ? ClusterCount::Fixed : ClusterCount::Poisson;
        } else {
            throw ParameterError("unknown model '" + o.model + "'");
        }
        Json regions = Json::array();
        for (const auto& r : params.regions) {
            regions.push_back({{"length", r.length},
                               {"rate", r.rate},
                               {"cluster_size", r.cluster_size},
                               {"offset_mean", r.offset_mean},
                               {"length_mean", r.length_mean},
                               {"offset_sign", r.offset_sign == OffsetSign::Symmetric ? "symmetric" : "downstream"}});
        }
        config["regions"] = regions;
        config["cluster_count"] = params.cluster_count == ClusterCount::Poisson ? "poisson" : "fixed";
        sim = simulate_piecewise_pair(params, rng);
    }

    const fs::path dir = output_dir(c);
    const auto& space = sim->pair.space();
    {
        std::ostringstream g;
        for (std::size_t i = 0; i < space.size(); ++i) g << space.name(i) << '\t' << space.length(i) << '\n';
        write_file(dir / "genome.txt", g.str());
    }
    std::ostringstream a, b, t;
    write_bed(a, sim->pair.a());
    write_bed(b, sim->pair.b());
    write_segmentation(t, sim->truth);
    write_file(dir / "a.bed", a.str());
    write_file(dir / "b.bed", b.str());
    write_file(dir / "truth.txt", t.str());

    const auto n = static_cast<double>(sim->pair.size());
    manifest["config"] = config;
    manifest["files"] = {{"genome", "genome.txt"}, {"a", "a.bed"}, {"b", "b.bed"}, {"truth", "truth.txt"}};
    manifest["truth"] = sim->truth.cuts();
    manifest["a"] = {{"instances", sim->pair.a().run_count()},
                     {"coverage", static_cast<double>(sim->pair.a().coverage()) / n}};
    manifest["b"] = {{"instances", sim->pair.b().run_count()},
                     {"coverage", static_cast<double>(sim->pair.b().coverage()) / n}};
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");
    std::cout << render(manifest, c.format);
    return 0;
}

Json checks_json(const std::vector<StudyCheck>& checks, bool& all_pass) {
    Json rows = Json::array();
    all_pass = true;
    for (const auto& ch : checks) {
        all_pass = all_pass && ch.pass();
        rows.push_back({{"name", ch.name},
                        {"value", number(ch.value)},
                        {"lower", number(ch.lower)},
                        {"upper", number(ch.upper)},
                        {"published", number(ch.reference)},
                        {"pass", ch.pass()}});
    }
    return rows;
}

void write_histogram_file(const CommonOptions& c, const std::string& name, const std::vector<double>& v) {
    if (c.output_dir.empty()) return;
    std::ostringstream h;
    write_histogram(h, v);
    write_file(output_dir(c) / name, h.str());
}

int cmd_reproduce(const std::string& study, const std::string& scale, const CommonOptions& c) {
    const bool quick = scale == "quick";
    const std::uint64_t seed = c.seed.value_or(kStudySeed);
    const unsigned threads = resolve_threads(c);
    Json report;
    report["command"] = "reproduce";
    report["config"] = {{"study", study}, {"scale", scale}, {"seed", seed}};
    bool all_pass = true;
    if (study == "sim1") {
        MarkovStudyConfig cfg;
        cfg.seed = seed;
        cfg.threads = threads;
        if (quick) {
            cfg.truth_sequences = 1000;
            cfg.replicates = 300;
        }
        const auto r = run_markov_study(cfg);
        report["config"]["p0"] = cfg.model.p0;
        report["config"]["w"] = cfg.model.w;
        report["config"]["truth_sequences"] = cfg.truth_sequences;
        report["config"]["replicates"] = cfg.replicates;
        report["config"]["block_length"] = cfg.block_length;
        report["observed"] = number(r.observed);
        report["sd"] = {{"truth", number(r.truth_sd)},
                        {"ordinary_bootstrap", number(r.bootstrap_sd)},
                        {"feature_randomization", number(r.shuffle_sd)},
                        {"block_subsampling", number(r.block_sd)}};
        report["mean"] = {{"truth", number(mean(r.truth))},
                          {"ordinary_bootstrap", number(mean(r.bootstrap))},
                          {"feature_randomization", number(mean(r.shuffle))},
                          {"block_subsampling", number(mean(r.block))}};
        report["checks"] = checks_json(markov_checks(r), all_pass);
        write_histogram_file(c, "sim1_truth.tsv", r.truth);
        write_histogram_file(c, "sim1_bootstrap.tsv", r.bootstrap);
        write_histogram_file(c, "sim1_shuffle.tsv", r.shuffle);
        write_histogram_file(c, "sim1_block.tsv", r.block);
    } else if (study == "sim2a") {
        Table2Config cfg;
        cfg.seed = seed;
        cfg.threads = threads;
        if (quick) {
            cfg.truth_pairs = 300;
            cfg.estimate_pairs = 30;
            cfg.replicates = 300;
            cfg.shuffle_replicates = 100;
        }
        const auto r = run_table2_study(cfg);
        report["config"]["truth_pairs"] = cfg.truth_pairs;
        report["config"]["estimate_pairs"] = cfg.estimate_pairs;
        report["config"]["replicates"] = cfg.replicates;
        report["config"]["block_length"] = cfg.L;
        report["config"]["statistic"] = cfg.statistic.name();
        report["config"]["min_segment"] = cfg.segmentation.min_length;
        report["config"]["threshold_b"] = cfg.segmentation.threshold;
        report["table"] = Json::array({
            {{"method", "True value"}, {"standard_error", number(r.truth)}, {"fold_change", nullptr}},
            {{"method", "Uniform shuffle"}, {"standard_error", number(r.shuffle)}, {"fold_change", number(r.shuffle / r.truth)}},
            {{"method", "Subsample, no segmentation"}, {"standard_error", number(r.unsegmented)}, {"fold_change", number(r.unsegmented / r.truth)}},
            {{"method", "Subsample, true segmentation"}, {"standard_error", number(r.true_segmentation)}, {"fold_change", number(r.true_segmentation / r.truth)}},
            {{"method", "Subsample, estimated segmentation"}, {"standard_error", number(r.estimated_segmentation)}, {"fold_change", number(r.estimated_segmentation / r.truth)}},
        });
        report["cut_recovery"] = number(r.cut_recovery);
        report["mean_cuts"] = number(r.mean_cuts);
        report["checks"] = checks_json(table2_checks(r), all_pass);
        write_histogram_file(c, "sim2a_truth.tsv", r.truth_values);
    } else if (study == "sim2b") {
        RegionOverlapConfig cfg;
        cfg.seed = seed;
        cfg.threads = threads;
        if (quick) {
            cfg.pairs = 300;
            cfg.replicates = 500;
            cfg.outer_replicates = 200;
            cfg.shuffle_replicates = 200;
        }
        const auto r = run_region_overlap_study(cfg);
        report["config"]["pairs"] = cfg.pairs;
        report["config"]["block_length"] = cfg.L;
        report["config"]["outer_multiplier"] = cfg.outer_multiplier;
        report["config"]["replicates"] = cfg.replicates;
        report["config"]["outer_replicates"] = cfg.outer_replicates;
        report["population"] = {{"mean", number(r.population_mean)}, {"sd", number(r.population_sd)}};
        report["average_pair"] = {{"index", r.average_index}, {"test", to_json(r.average)}};
        report["extreme_pair"] = {{"index", r.extreme_index},
                                  {"population_z", number(r.extreme_population_z)},
                                  {"test", to_json(r.extreme)},
                                  {"shuffle_mean", number(r.shuffle_mean)},
                                  {"shuffle_sd", number(r.shuffle_sd)}};
        report["checks"] = checks_json(region_overlap_checks(r), all_pass);
        write_histogram_file(c, "sim2b_population.tsv", r.population);
    } else {
        throw ParameterError("unknown study '" + study + "'");
    }
    report["all_pass"] = all_pass;
    emit(report, c);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Genome structure correction: segmentation, block subsampling and independence tests"};
    app.require_subcommand(1);

    CommonOptions common;
    TrackInputs inputs;
    SegmentOptions seg;
    SubsampleOptions sub;
    GridOptions grid;
    TestOptions test;
    SimulateOptions sim;
    std::string study;
    std::string scale = "full";

    auto* segment = app.add_subcommand("segment", "Dyadic segmentation of a track pair");
    add_track_inputs(segment, inputs);
    add_segment_options(segment, seg, false);
    add_common(segment, common, false);

    auto* subsample = app.add_subcommand("subsample", "Stratified block subsampling of a statistic");
    add_track_inputs(subsample, inputs);
    add_segment_options(subsample, seg, true);
    subsample->add_option("--statistic", sub.statistic, "mean_overlap, bp_overlap, region_overlap, coverage_a, ...");
    subsample->add_option("--block-length", sub.L, "Total subsample length L")->required();
    subsample->add_option("--replicates", sub.B, "Replicate count B");
    subsample->add_option("--level", sub.level, "Confidence level");
    add_common(subsample, common, true);

    auto* select = app.add_subcommand("select-block-size", "Choose L by interquartile-range stability");
    add_track_inputs(select, inputs);
    add_segment_options(select, seg, true);
    select->add_option("--statistic", sub.statistic, "Statistic");
    select->add_option("--replicates", sub.B, "Replicates per candidate");
    select->add_option("--rho", grid.rho, "Grid ratio: L_v = rho^v n");
    select->add_option("--grid-steps", grid.steps, "Number of candidates V");
    add_common(select, common, true);

    auto* tst = app.add_subcommand("test", "Test independence of two features");
    add_track_inputs(tst, inputs);
    add_segment_options(tst, seg, true);
    tst->add_option("--statistic", test.statistic, "bp_overlap or region_overlap")
        ->check(CLI::IsMember({"bp_overlap", "region_overlap"}));
    tst->add_option("--block-length", test.L, "Block length L");
    tst->add_option("--replicates", test.B, "Replicate count B");
    tst->add_option("--formulation", test.formulation, "conditional or marginal")
        ->check(CLI::IsMember({"conditional", "marginal"}));
    tst->add_option("--outer-multiplier", test.outer_multiplier, "Outer block length m L for the double bootstrap");
    tst->add_option("--outer-replicates", test.outer_replicates, "Outer replicate count B1 (default B)");
    tst->add_option("--alpha", test.alpha, "Significance level");
    tst->add_flag("--two-sided", test.two_sided, "Two-sided test");
    tst->add_flag("--strict-disjoint", test.strict_disjoint, "Require the two blocks of a pair to be disjoint");
    tst->add_flag("--select-block-size", test.select, "Pick L with select-block-size first");
    tst->add_option("--rho", grid.rho, "Grid ratio for --select-block-size");
    tst->add_option("--grid-steps", grid.steps, "Grid size for --select-block-size");
    add_common(tst, common, true);

    auto* simulate = app.add_subcommand("simulate", "Simulate a track pair");
    simulate->add_option("--model", sim.model, "two-region, region-overlap, markov or custom")
        ->check(CLI::IsMember({"two-region", "region-overlap", "markov", "custom"}));
    simulate->add_option("--regions", sim.regions, "custom model: T:lambda:alpha:mu:beta[,...]");
    simulate->add_option("--cluster-count", sim.cluster_count, "custom model: poisson or fixed")
        ->check(CLI::IsMember({"poisson", "fixed"}));
    simulate->add_option("--offset-sign", sim.offset_sign, "custom model: symmetric or downstream")
        ->check(CLI::IsMember({"symmetric", "downstream"}));
    simulate->add_option("--n", sim.n, "markov: sequence length");
    simulate->add_option("--p0", sim.p0, "markov: base rate p0");
    simulate->add_option("--w", sim.w, "markov: window w");
    simulate->add_flag("--independent", sim.independent, "markov: feature II from an independent sequence");
    add_common(simulate, common, true);

    auto* reproduce = app.add_subcommand("reproduce", "Run a scaled simulation study with pass/fail checks");
    reproduce->add_option("--study", study, "sim1, sim2a or sim2b")
        ->required()
        ->check(CLI::IsMember({"sim1", "sim2a", "sim2b"}));
    reproduce->add_option("--scale", scale, "full or quick")->check(CLI::IsMember({"full", "quick"}));
    add_common(reproduce, common, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "gsc: " << e.what() << "\n";
        return 2;
    }

    try {
        if (*segment) return cmd_segment(inputs, seg, common);
        if (*subsample) return cmd_subsample(inputs, seg, sub, common);
        if (*select) return cmd_select(inputs, seg, sub, grid, common);
        if (*tst) return cmd_test(inputs, seg, test, grid, common);
        if (*simulate) return cmd_simulate(sim, common);
        if (*reproduce) return cmd_reproduce(study, scale, common);
    } catch (const InputError& e) {
        std::cerr << "gsc: input error: " << e.what() << "\n";
        return 2;
    } catch (const ParameterError& e) {
        std::cerr << "gsc: parameter error: " << e.what() << "\n";
        return 3;
    } catch (const DegenerateDenominator& e) {
        std::cerr << "gsc: degenerate statistic: " << e.what() << "\n";
        return 3;
    } catch (const std::out_of_range& e) {
        std::cerr << "gsc: parameter error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "gsc: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
