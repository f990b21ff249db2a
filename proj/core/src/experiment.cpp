#include "wsnloc/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "wsnloc/digest.hpp"
#include "wsnloc/dvhop.hpp"
#include "wsnloc/errors.hpp"
#include "wsnloc/parallel.hpp"
#include "wsnloc/random.hpp"
#include "wsnloc/report_io.hpp"
#include "wsnloc/svg.hpp"
#include "wsnloc/text.hpp"

namespace wsnloc {

std::string to_string(Method m) { return m == Method::nbp ? "nbp" : "dvhop"; }

std::string to_string(PlacementMode p) {
    switch (p) {
        case PlacementMode::mo: return "mo";
        case PlacementMode::edge: return "edge";
        case PlacementMode::rand: return "rand";
    }
    return "?";
}

namespace {

std::string at_line(std::size_t line_no) {
    return line_no ? " (line " + std::to_string(line_no) + ")" : std::string{};
}

struct Key {
    const char* name;
    std::function<void(ExperimentConfig&, const std::string& key, const std::string& value, std::size_t line)> set;
    std::function<std::string(const ExperimentConfig&)> get;
};

template <class T>
Key real_key(const char* name, T ExperimentConfig::*block, double T::*field) {
    return {name,
            [=](ExperimentConfig& c, const std::string& k, const std::string& v, std::size_t l) {
                c.*block.*field = parse_real(k, v, l);
            },
            [=](const ExperimentConfig& c) { return format_exact(c.*block.*field); }};
}

Key real_key(const char* name, double ExperimentConfig::*field) {
    return {name,
            [=](ExperimentConfig& c, const std::string& k, const std::string& v, std::size_t l) {
                c.*field = parse_real(k, v, l);
            },
            [=](const ExperimentConfig& c) { return format_exact(c.*field); }};
}

template <class T, class U>
Key uint_key(const char* name, T ExperimentConfig::*block, U T::*field) {
    return {name,
            [=](ExperimentConfig& c, const std::string& k, const std::string& v, std::size_t l) {
                c.*block.*field = static_cast<U>(parse_uint(k, v, l));
            },
            [=](const ExperimentConfig& c) { return std::to_string(c.*block.*field); }};
}

template <class U>
Key uint_key(const char* name, U ExperimentConfig::*field) {
    return {name,
            [=](ExperimentConfig& c, const std::string& k, const std::string& v, std::size_t l) {
                c.*field = static_cast<U>(parse_uint(k, v, l));
            },
            [=](const ExperimentConfig& c) { return std::to_string(c.*field); }};
}

template <class E>
Key enum_key(const char* name, E ExperimentConfig::*field, std::vector<std::pair<std::string, E>> values) {
    return {name,
            [=](ExperimentConfig& c, const std::string& k, const std::string& v, std::size_t l) {
                std::string options;
                for (const auto& [text, e] : values) {
                    if (v == text) {
                        c.*field = e;
                        return;
                    }
                    options += (options.empty() ? "" : "|") + text;
                }
                throw ConfigError(k, "key '" + k + "' expects one of " + options + ", got '" + v + "'" + at_line(l));
            },
            [=](const ExperimentConfig& c) {
                for (const auto& [text, e] : values)
                    if (c.*field == e) return text;
                return std::string("?");
            }};
}

const std::vector<Key>& keys() {
    using C = ExperimentConfig;
    static const std::vector<Key> table = [] {
        std::vector<Key> k;
        k.push_back(real_key("width", &C::width));
        k.push_back(real_key("height", &C::height));
        k.push_back(real_key("radius", &C::radius));
        k.push_back(uint_key("n_unknown", &C::n_unknown));
        k.push_back(real_key("noise_sigma", &C::noise_sigma));
        k.push_back(enum_key<Method>("method", &C::method, {{"nbp", Method::nbp}, {"dvhop", Method::dvhop}}));
        k.push_back(enum_key<PlacementMode>(
            "placement", &C::placement,
            {{"mo", PlacementMode::mo}, {"edge", PlacementMode::edge}, {"rand", PlacementMode::rand}}));
        k.push_back(uint_key("anchor_count", &C::anchor_count));
        k.push_back(uint_key("trials", &C::trials));
        k.push_back(uint_key("seed", &C::seed));
        k.push_back(uint_key("workers", &C::workers));
        k.push_back({"out",
                     [](C& c, const std::string&, const std::string& v, std::size_t) { c.out_dir = v; },
                     [](const C& c) { return c.out_dir.string(); }});
        k.push_back(uint_key("nbp.particles", &C::nbp, &NbpParams::particles));
        k.push_back(uint_key("nbp.max_iterations", &C::nbp, &NbpParams::max_iterations));
        k.push_back(real_key("nbp.convergence_shift", &C::nbp, &NbpParams::convergence_shift));
        k.push_back(real_key("nbp.weight_floor_eps", &C::nbp, &NbpParams::weight_floor_eps));
        k.push_back(real_key("nbp.sigma_eval", &C::nbp, &NbpParams::sigma_eval));
        k.push_back({"nbp.estimator",
                     [](C& c, const std::string& key, const std::string& v, std::size_t l) {
                         if (v == "map") c.nbp.estimator = Estimator::map;
                         else if (v == "mean") c.nbp.estimator = Estimator::weighted_mean;
                         else
                             throw ConfigError(key, "key '" + key + "' expects map|mean, got '" + v + "'" + at_line(l));
                     },
                     [](const C& c) { return std::string(c.nbp.estimator == Estimator::map ? "map" : "mean"); }});
        k.push_back(uint_key("nbp.workers", &C::nbp, &NbpParams::workers));
        k.push_back(uint_key("ga.population", &C::ga, &GaConfig::population));
        k.push_back(uint_key("ga.max_generations", &C::ga, &GaConfig::max_generations));
        k.push_back(uint_key("ga.stall_generations", &C::ga, &GaConfig::stall_generations));
        k.push_back(real_key("ga.crossover_rate", &C::ga, &GaConfig::crossover_rate));
        k.push_back(real_key("ga.mutation_sigma", &C::ga, &GaConfig::mutation_sigma));
        k.push_back(real_key("ga.length_mutation_rate", &C::ga, &GaConfig::length_mutation_rate));
        k.push_back(uint_key("ga.n_min", &C::ga, &GaConfig::n_min));
        k.push_back(uint_key("ga.n_max", &C::ga, &GaConfig::n_max));
        k.push_back(uint_key("ga.workers", &C::ga, &GaConfig::workers));
        k.push_back(real_key("energy.initial_j", &C::energy, &EnergyConfig::initial_j));
        k.push_back(real_key("energy.send_j", &C::energy, &EnergyConfig::send_j));
        k.push_back(real_key("energy.receive_j", &C::energy, &EnergyConfig::receive_j));
        k.push_back(real_key("energy.step_j", &C::energy, &EnergyConfig::step_j));
        auto step_key = [](const char* name, std::uint64_t StepTable::*field) {
            return Key{name,
                       [=](C& c, const std::string& key, const std::string& v, std::size_t l) {
                           c.energy.step_table.*field = parse_uint(key, v, l);
                       },
                       [=](const C& c) { return std::to_string(c.energy.step_table.*field); }};
        };
        k.push_back(step_key("steps.nbp_message_per_particle", &StepTable::nbp_message_per_particle));
        k.push_back(step_key("steps.nbp_update_per_particle_message", &StepTable::nbp_update_per_particle_message));
        k.push_back(step_key("steps.dvhop_flood_packet", &StepTable::dvhop_flood_packet));
        k.push_back(step_key("steps.dvhop_multilaterate", &StepTable::dvhop_multilaterate));
        return k;
    }();
    return table;
}

// Copies shared settings into the nested blocks.
ExperimentConfig resolved(const ExperimentConfig& config) {
    ExperimentConfig c = config;
    c.nbp.steps = c.energy.step_table;
    c.ga.field = field_box(c.width, c.height);
    return c;
}

}  // namespace

MeasurementModel ExperimentConfig::model() const {
    MeasurementModel m;
    m.noise_sigma = noise_sigma;
    return m;
}

void ExperimentConfig::validate() const {
    auto positive = [](const char* key, double v) {
        if (!(v > 0.0)) throw ConfigError(key, std::string("key '") + key + "' must be positive");
    };
    positive("width", width);
    positive("height", height);
    positive("radius", radius);
    if (!(noise_sigma >= 0.0)) throw ConfigError("noise_sigma", "key 'noise_sigma' must be non-negative");
    if (n_unknown < 1) throw ConfigError("n_unknown", "key 'n_unknown' must be at least 1");
    if (trials < 1) throw ConfigError("trials", "key 'trials' must be at least 1");
    if (workers < 1) throw ConfigError("workers", "key 'workers' must be at least 1");
    if (anchor_count < 1) throw ConfigError("anchor_count", "key 'anchor_count' must be at least 1");
    if (method == Method::dvhop && anchor_count < 3)
        throw ConfigError("anchor_count", "key 'anchor_count' must be at least 3 for dvhop");
    const ExperimentConfig c = resolved(*this);
    try {
        c.nbp.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError("nbp", std::string("nbp block: ") + e.what());
    }
    try {
        c.ga.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError("ga", std::string("ga block: ") + e.what());
    }
    try {
        c.energy.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError("energy", std::string("energy block: ") + e.what());
    }
}

void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value, std::size_t line_no) {
    for (const auto& k : keys()) {
        if (key == k.name) {
            k.set(config, key, value, line_no);
            return;
        }
    }
    throw ConfigError(key, "unknown key '" + key + "'" + at_line(line_no));
}

ExperimentConfig parse_config(std::istream& is) {
    ExperimentConfig config;
    std::map<std::string, std::size_t> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const auto kv = parse_key_value(line, line_no);
        if (!kv) continue;
        const auto& [key, value] = *kv;
        if (auto it = seen.find(key); it != seen.end())
            throw ConfigError(key, "duplicate key '" + key + "'" + at_line(line_no) + ", first defined on line " +
                                       std::to_string(it->second));
        seen.emplace(key, line_no);
        apply_setting(config, key, value, line_no);
    }
    config.validate();
    return config;
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot read config file " + path.string());
    return parse_config(in);
}

void write_config(std::ostream& os, const ExperimentConfig& config) {
    for (const auto& k : keys()) os << k.name << " = " << k.get(config) << '\n';
}

std::vector<std::string> config_keys() {
    std::vector<std::string> out;
    for (const auto& k : keys()) out.emplace_back(k.name);
    return out;
}

std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t trial) {
    return derive_seed(master_seed, {tag("trial"), trial});
}

FieldScenario trial_base(const ExperimentConfig& config, std::size_t trial) {
    return build_scenario(config.width, config.height, config.radius, config.n_unknown, {},
                          trial_seed(config.seed, trial));
}

FrozenScenario trial_frozen(const ExperimentConfig& config, std::size_t trial) {
    return {trial_base(config, trial), config.model(), derive_seed(trial_seed(config.seed, trial), {tag("noise")})};
}

ArchiveMember select_front_member(const ParetoArchive& archive, std::size_t k) {
    const auto front = archive.front1();
    if (front.empty()) throw ArgumentError("empty archive");
    const ArchiveMember* best = &front.front();
    auto gap = [k](std::size_t n) { return n > k ? n - k : k - n; };
    for (const auto& m : front) {
        const std::size_t n = m.objectives.anchor_count, b = best->objectives.anchor_count;
        if (gap(n) < gap(b) || (gap(n) == gap(b) && n < b)) best = &m;
    }
    return *best;
}

std::vector<TrialOutcome> run_trials(const ExperimentConfig& input) {
    input.validate();
    const ExperimentConfig config = resolved(input);
    std::vector<TrialOutcome> outcomes(config.trials);
    parallel_for(config.trials, config.workers, [&](std::size_t i) {
        TrialOutcome& o = outcomes[i];
        o.index = i;
        o.seed = trial_seed(config.seed, i);
        const FrozenScenario frozen = trial_frozen(config, i);
        const Box field = frozen.base.bounds();

        std::vector<Vec2> anchors;
        switch (config.placement) {
            case PlacementMode::edge:
                anchors = place_anchors_preset(Placement::edge, config.anchor_count, field, o.seed);
                break;
            case PlacementMode::rand:
                anchors = place_anchors_preset(Placement::random, config.anchor_count, field, o.seed);
                break;
            case PlacementMode::mo: {
                GaConfig ga = config.ga;
                ga.master_seed = derive_seed(o.seed, {tag("ga")});
                MoSelection mo;
                mo.run = nsga2_run(frozen, config.nbp, ga);
                mo.requested = config.anchor_count;
                const ArchiveMember chosen = select_front_member(mo.run.archive, config.anchor_count);
                mo.selected = chosen.objectives.anchor_count;
                anchors = chosen.chromosome.anchors();
                o.mo = std::move(mo);
                break;
            }
        }
        o.scenario = with_anchors(frozen.base, anchors);
        const RangeGraph ranges = measure_ranges(o.scenario, frozen.model, frozen.noise_seed);
        if (config.method == Method::nbp)
            o.result = run_nbp(o.scenario, ranges, frozen.model, config.nbp, derive_seed(o.seed, {tag("nbp")}));
        else
            o.result = dvhop_localize(o.scenario, ranges, config.energy.step_table);
        o.mean_error = mean_error(o.result);
        o.ledger = account_trace(o.result.trace, config.energy);
    });
    return outcomes;
}

ErrorStats error_stats(const std::vector<double>& values) {
    ErrorStats s;
    if (values.empty()) return s;
    for (double v : values) s.mean += v;
    s.mean /= static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return s;
}

void write_manifest(const std::filesystem::path& dir, const std::vector<std::filesystem::path>& files) {
    std::string text;
    for (const auto& f : files) text += f.generic_string() + "," + sha256_file(dir / f) + "\n";
    write_text_file(dir / "manifest.txt", text);
}

ArtifactWriter::ArtifactWriter(std::filesystem::path dir) : dir_(std::move(dir)) {}

void ArtifactWriter::add(std::filesystem::path rel, std::string content) {
    files_.emplace_back(std::move(rel), std::move(content));
}

std::vector<std::filesystem::path> ArtifactWriter::commit() {
    std::vector<std::filesystem::path> written;
    const bool existed = std::filesystem::exists(dir_);
    try {
        std::filesystem::create_directories(dir_);
        for (const auto& [rel, content] : files_) {
            written.push_back(rel);
            write_text_file(dir_ / rel, content);
        }
        write_manifest(dir_, written);
        written.emplace_back("manifest.txt");
    } catch (...) {
        std::error_code ec;
        for (const auto& rel : written) std::filesystem::remove(dir_ / rel, ec);
        std::filesystem::remove(dir_ / "manifest.txt", ec);
        if (!existed) std::filesystem::remove(dir_, ec);
        throw;
    }
    return written;
}

namespace {

std::string trial_name(std::size_t i, const char* suffix) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "trial_%03zu_%s", i, suffix);
    return buf;
}

}  // namespace

ExperimentSummary run_experiment(const ExperimentConfig& input) {
    const ExperimentConfig config = resolved(input);
    const auto outcomes = run_trials(config);
    const std::string method = to_string(config.method), placement = to_string(config.placement);

    ExperimentSummary summary;
    ArtifactWriter bundle(config.out_dir);
    {
        std::ostringstream os;
        write_config(os, config);
        bundle.add("config.txt", os.str());
    }

    std::ostringstream trials_csv, energy_csv;
    trials_csv << "trial,seed,mean_error_m,iterations,flagged\n";
    write_energy_header(energy_csv);
    std::vector<LabelledLedger> ledgers;
    for (const auto& o : outcomes) {
        summary.trial_errors.push_back(o.mean_error);
        const auto flagged = std::count(o.result.flagged.begin(), o.result.flagged.end(), true);
        trials_csv << o.index << ',' << o.seed << ',' << format_fixed6(o.mean_error) << ',' << o.result.iterations_run
                   << ',' << flagged << '\n';
        write_energy_rows(energy_csv, method, placement, o.ledger);
        ledgers.push_back({method, placement, &o.ledger, o.result.is_anchor});

        std::ostringstream nodes, trace;
        write_node_csv(nodes, o.scenario, o.result);
        write_trace_csv(trace, o.result.trace);
        bundle.add(trial_name(o.index, "nodes.csv"), nodes.str());
        bundle.add(trial_name(o.index, "trace.csv"), trace.str());

        FieldPlot plot{o.scenario.bounds(), {}, o.result.estimates, o.result.is_anchor};
        for (const auto& n : o.scenario.nodes) plot.truth.push_back(n.true_pos);
        bundle.add(trial_name(o.index, "field.svg"), field_svg(plot));
        if (config.method == Method::nbp)
            bundle.add(trial_name(o.index, "convergence.svg"), convergence_svg(o.result.error_history));

        if (o.mo) {
            const auto front = o.mo->run.archive.front1();
            std::ostringstream pareto, gens, meta;
            write_pareto_csv(pareto, front);
            write_generation_csv(gens, o.mo->run.log);
            std::vector<ParetoPoint> points;
            for (const auto& m : front)
                points.push_back({static_cast<double>(m.objectives.anchor_count), m.objectives.error_m});
            meta << "requested_anchor_count = " << o.mo->requested << "\n"
                 << "selected_anchor_count = " << o.mo->selected << "\n"
                 << "selection_rule = front-1 member with the requested count, else nearest count (smaller on ties)\n"
                 << "generations_run = " << o.mo->run.generations_run << "\n"
                 << "evaluations = " << o.mo->run.evaluations << "\n";
            bundle.add(trial_name(o.index, "pareto.csv"), pareto.str());
            bundle.add(trial_name(o.index, "generations.csv"), gens.str());
            bundle.add(trial_name(o.index, "pareto.svg"), pareto_svg(points));
            bundle.add(trial_name(o.index, "mo_selection.txt"), meta.str());
        }
    }
    summary.stats = error_stats(summary.trial_errors);

    std::ostringstream summary_csv;
    summary_csv << "method,placement,anchor_count,trials,mean_error_m,std_error_m\n"
                << method << ',' << placement << ',' << config.anchor_count << ',' << config.trials << ','
                << format_fixed6(summary.stats.mean) << ',' << format_fixed6(summary.stats.stddev) << '\n';
    const auto energy_rows = energy_report(ledgers);
    std::ostringstream energy_summary, counts;
    write_energy_summary_csv(energy_summary, energy_rows);
    write_message_counts_csv(counts, energy_rows);
    bundle.add("trials.csv", trials_csv.str());
    bundle.add("summary.csv", summary_csv.str());
    bundle.add("energy.csv", energy_csv.str());
    bundle.add("energy_summary.csv", energy_summary.str());
    bundle.add("messages.csv", counts.str());
    summary.files = bundle.commit();
    return summary;
}

std::vector<ComparisonRow> run_comparison(const ExperimentConfig& config, const std::vector<Method>& methods,
                                          const std::vector<PlacementMode>& placements,
                                          const std::vector<std::size_t>& anchor_counts, bool write_files) {
    std::vector<ComparisonRow> rows;
    for (Method m : methods) {
        for (PlacementMode p : placements) {
            for (std::size_t k : anchor_counts) {
                ExperimentConfig c = config;
                c.method = m;
                c.placement = p;
                c.anchor_count = k;
                const auto outcomes = run_trials(c);
                std::vector<double> errors;
                ComparisonRow row{m, p, k, {}, 0.0, 0};
                for (const auto& o : outcomes) {
                    errors.push_back(o.mean_error);
                    row.mean_remaining_j += o.ledger.mean_remaining();
                    row.total_sent += o.ledger.total_sent();
                }
                row.stats = error_stats(errors);
                row.mean_remaining_j /= static_cast<double>(outcomes.size());
                rows.push_back(row);
            }
        }
    }
    if (write_files) {
        std::ostringstream os;
        os << "method,placement,anchor_count,trials,mean_error_m,std_error_m,mean_remaining_j,total_sent\n";
        for (const auto& r : rows)
            os << to_string(r.method) << ',' << to_string(r.placement) << ',' << r.anchor_count << ','
               << config.trials << ',' << format_fixed6(r.stats.mean) << ',' << format_fixed6(r.stats.stddev) << ','
               << format_fixed6(r.mean_remaining_j) << ',' << r.total_sent << '\n';
        std::ostringstream cfg;
        write_config(cfg, resolved(config));
        ArtifactWriter bundle(config.out_dir);
        bundle.add("config.txt", cfg.str());
        bundle.add("comparison.csv", os.str());
        bundle.commit();
    }
    return rows;
}

}  // namespace wsnloc
