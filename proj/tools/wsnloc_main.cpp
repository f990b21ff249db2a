// wsnloc: command-line front end for scenario generation, localization
// batches, anchor-placement optimization and method comparison.

#ifdef WSNLOC_CLI11_PACKAGE
#include <CLI/CLI.hpp>
#else
#include <CLI11.hpp>
#endif

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "wsnloc/dvhop.hpp"
#include "wsnloc/errors.hpp"
#include "wsnloc/experiment.hpp"
#include "wsnloc/report_io.hpp"
#include "wsnloc/scenario_io.hpp"
#include "wsnloc/svg.hpp"
#include "wsnloc/text.hpp"

namespace {

using namespace wsnloc;

struct GlobalOptions {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::string> config;
    std::vector<std::string> settings;  // key=value overrides
};

// Subcommand flags that map onto config keys.
struct Overrides {
    std::optional<std::string> method;
    std::optional<std::string> placement;
    std::optional<std::size_t> anchors;
    std::optional<std::size_t> trials;
    std::optional<std::size_t> workers;
};

ExperimentConfig load_config(const GlobalOptions& g, const Overrides& o = {}) {
    ExperimentConfig config = g.config ? parse_config(std::filesystem::path(*g.config)) : ExperimentConfig{};
    for (const auto& s : g.settings) {
        const auto eq = s.find('=');
        if (eq == std::string::npos) throw ConfigError(s, "--set expects key=value, got '" + s + "'");
        apply_setting(config, std::string(trim(s.substr(0, eq))), std::string(trim(s.substr(eq + 1))));
    }
    if (g.seed) config.seed = *g.seed;
    if (g.out) config.out_dir = *g.out;
    if (o.method) apply_setting(config, "method", *o.method);
    if (o.placement) apply_setting(config, "placement", *o.placement);
    if (o.anchors) config.anchor_count = *o.anchors;
    if (o.trials) config.trials = *o.trials;
    if (o.workers) config.workers = *o.workers;
    config.validate();
    return config;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    for (auto& part : split(s, ','))
        if (!part.empty()) out.push_back(part);
    return out;
}

int cmd_scenario(const GlobalOptions& g, const Overrides& o, std::size_t trial) {
    GlobalOptions g2 = g;
    g2.out.reset();  // --out names a file here, not the output directory
    const ExperimentConfig config = load_config(g2, o);
    if (config.placement == PlacementMode::mo)
        throw ConfigError("placement", "scenario cannot place anchors with placement=mo; use optimize");
    FieldScenario base = trial_base(config, trial);
    const std::uint64_t seed = trial_seed(config.seed, trial);
    const auto mode = config.placement == PlacementMode::edge ? Placement::edge : Placement::random;
    const auto anchors = place_anchors_preset(mode, config.anchor_count, base.bounds(), seed);
    ScenarioFile file{with_anchors(base, anchors), config.model()};
    const std::filesystem::path path = g.out ? *g.out : "scenario.txt";
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    write_scenario(path, file);
    std::printf("wrote %s (%zu nodes, %zu anchors)\n", path.string().c_str(), file.scenario.size(),
                file.scenario.anchor_count());
    return 0;
}

int localize_file(const ExperimentConfig& config, const std::filesystem::path& scenario_path) {
    const ScenarioFile file = read_scenario(scenario_path);
    const FieldScenario& s = file.scenario;
    const RangeGraph ranges = measure_ranges(s, file.model, derive_seed(s.rng_seed, {tag("noise")}));
    NbpParams nbp = config.nbp;
    nbp.steps = config.energy.step_table;
    const LocalizationResult result =
        config.method == Method::nbp ? run_nbp(s, ranges, file.model, nbp, derive_seed(s.rng_seed, {tag("nbp")}))
                                     : dvhop_localize(s, ranges, config.energy.step_table);
    const EnergyLedger ledger = account_trace(result.trace, config.energy);
    const std::string method = to_string(config.method);

    ArtifactWriter out(config.out_dir);
    std::ostringstream nodes, trace, energy, energy_summary;
    write_node_csv(nodes, s, result);
    write_trace_csv(trace, result.trace);
    write_energy_header(energy);
    write_energy_rows(energy, method, "file", ledger);
    const LabelledLedger labelled{method, "file", &ledger, result.is_anchor};
    write_energy_summary_csv(energy_summary, energy_report({&labelled, 1}));
    out.add("nodes.csv", nodes.str());
    out.add("trace.csv", trace.str());
    out.add("energy.csv", energy.str());
    out.add("energy_summary.csv", energy_summary.str());
    FieldPlot plot{s.bounds(), {}, result.estimates, result.is_anchor};
    for (const auto& n : s.nodes) plot.truth.push_back(n.true_pos);
    out.add("field.svg", field_svg(plot));
    if (config.method == Method::nbp) out.add("convergence.svg", convergence_svg(result.error_history));
    out.commit();
    std::printf("%s on %s: mean error %.6f m after %zu iteration(s)\n", method.c_str(),
                scenario_path.string().c_str(), mean_error(result), result.iterations_run);
    return 0;
}

int cmd_localize(const GlobalOptions& g, const Overrides& o, const std::optional<std::string>& scenario) {
    const ExperimentConfig config = load_config(g, o);
    if (scenario) return localize_file(config, *scenario);
    const auto summary = run_experiment(config);
    std::printf("%s/%s, %zu anchors, %zu trial(s): mean error %.6f m (std %.6f)\n", to_string(config.method).c_str(),
                to_string(config.placement).c_str(), config.anchor_count, config.trials, summary.stats.mean,
                summary.stats.stddev);
    std::printf("artifacts in %s (%zu files)\n", config.out_dir.string().c_str(), summary.files.size());
    return 0;
}

int cmd_optimize(const GlobalOptions& g, std::size_t trial, bool quiet) {
    ExperimentConfig config = load_config(g);
    NbpParams nbp = config.nbp;
    nbp.steps = config.energy.step_table;
    GaConfig ga = config.ga;
    ga.field = field_box(config.width, config.height);
    ga.master_seed = derive_seed(trial_seed(config.seed, trial), {tag("ga")});
    const FrozenScenario frozen = trial_frozen(config, trial);
    const auto progress = [&](const GenerationStats& s) {
        if (!quiet)
            std::fprintf(stderr, "generation %zu: front1 %zu, min error %.3f, median %.3f\n", s.generation,
                         s.front1_size, s.min_error, s.median_error);
    };
    const Nsga2Result run = nsga2_run(frozen, nbp, ga, progress);
    const auto front = run.archive.front1();

    ArtifactWriter out(config.out_dir);
    std::ostringstream cfg, pareto, gens;
    write_config(cfg, config);
    write_pareto_csv(pareto, front);
    write_generation_csv(gens, run.log);
    std::vector<ParetoPoint> points;
    for (const auto& m : front) points.push_back({static_cast<double>(m.objectives.anchor_count), m.objectives.error_m});
    out.add("config.txt", cfg.str());
    out.add("pareto.csv", pareto.str());
    out.add("generations.csv", gens.str());
    out.add("pareto.svg", pareto_svg(points));
    out.commit();
    std::printf("front 1 after %zu generation(s), %zu evaluations:\n", run.generations_run, run.evaluations);
    for (const auto& m : front) std::printf("  %2zu anchors  %.6f m\n", m.objectives.anchor_count, m.objectives.error_m);
    return 0;
}

int cmd_report(const GlobalOptions& g, const Overrides& o, const std::string& methods, const std::string& placements,
               const std::string& anchors) {
    const ExperimentConfig config = load_config(g, o);
    std::vector<Method> ms;
    for (const auto& m : split_list(methods)) {
        if (m == "nbp") ms.push_back(Method::nbp);
        else if (m == "dvhop") ms.push_back(Method::dvhop);
        else throw ConfigError("methods", "unknown method '" + m + "'");
    }
    std::vector<PlacementMode> ps;
    for (const auto& p : split_list(placements)) {
        ExperimentConfig probe;
        apply_setting(probe, "placement", p);
        ps.push_back(probe.placement);
    }
    std::vector<std::size_t> ks;
    for (const auto& k : split_list(anchors)) ks.push_back(parse_uint("anchors", k, 0));
    const auto rows = run_comparison(config, ms, ps, ks);
    std::printf("%-6s %-5s %7s %10s %10s %12s\n", "method", "place", "anchors", "mean_m", "std_m", "remaining_j");
    for (const auto& r : rows)
        std::printf("%-6s %-5s %7zu %10.3f %10.3f %12.4f\n", to_string(r.method).c_str(),
                    to_string(r.placement).c_str(), r.anchor_count, r.stats.mean, r.stats.stddev, r.mean_remaining_j);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sensor-network localization: NBP, DV-Hop and NSGA-II anchor placement"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalOptions g;
    app.add_option("--seed", g.seed, "Master seed");
    app.add_option("--out", g.out, "Output directory (scenario: output file)");
    app.add_option("--config", g.config, "Config file with key = value lines")->check(CLI::ExistingFile);
    app.add_option("--set", g.settings, "Override one config key, e.g. --set nbp.particles=200");
    bool list_keys = false;
    app.add_flag("--list-keys", list_keys, "Print every config key with its default and exit");

    Overrides o;
    auto add_overrides = [&](CLI::App* sub, bool with_trials) {
        sub->add_option("--method", o.method, "nbp or dvhop");
        sub->add_option("--placement", o.placement, "edge, rand or mo");
        sub->add_option("--anchors", o.anchors, "Anchor count");
        if (with_trials) {
            sub->add_option("--trials", o.trials, "Number of seeded trials");
            sub->add_option("--workers", o.workers, "Concurrent trials");
        }
    };

    std::size_t trial = 0;
    auto* scenario = app.add_subcommand("scenario", "Write one trial's scenario file");
    add_overrides(scenario, false);
    scenario->add_option("--trial", trial, "Trial index whose seed is used");

    std::optional<std::string> scenario_file;
    auto* localize = app.add_subcommand("localize", "Run seeded localization trials and write artifacts");
    add_overrides(localize, true);
    localize->add_option("--scenario", scenario_file, "Localize a scenario file once instead")
        ->check(CLI::ExistingFile);

    bool quiet = false;
    auto* optimize = app.add_subcommand("optimize", "NSGA-II anchor placement on one trial's frozen scenario");
    optimize->add_option("--trial", trial, "Trial index whose scenario is optimized");
    optimize->add_flag("--quiet", quiet, "No per-generation progress");

    std::string methods = "nbp,dvhop", placements = "edge,rand", anchor_list = "3,6,9";
    auto* report = app.add_subcommand("report", "Method x placement x anchor-count comparison on common seeds");
    report->add_option("--trials", o.trials, "Number of seeded trials");
    report->add_option("--workers", o.workers, "Concurrent trials");
    report->add_option("--methods", methods, "Comma-separated methods");
    report->add_option("--placements", placements, "Comma-separated placements");
    report->add_option("--anchor-counts", anchor_list, "Comma-separated anchor counts");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        if (!list_keys) return app.exit(e);
    }
    try {
        if (list_keys) {
            write_config(std::cout, ExperimentConfig{});
            return 0;
        }
        if (*scenario) return cmd_scenario(g, o, trial);
        if (*localize) return cmd_localize(g, o, scenario_file);
        if (*optimize) return cmd_optimize(g, trial, quiet);
        if (*report) return cmd_report(g, o, methods, placements, anchor_list);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "wsnloc: config error [%s]: %s\n", e.key().c_str(), e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "wsnloc: %s\n", e.what());
        return 1;
    }
    return 1;
}
