#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "wsnloc/energy.hpp"
#include "wsnloc/field.hpp"
#include "wsnloc/moea.hpp"
#include "wsnloc/nbp.hpp"

namespace wsnloc {

enum class Method { nbp, dvhop };
enum class PlacementMode { mo, edge, rand };

std::string to_string(Method m);
std::string to_string(PlacementMode p);

/// Every knob of a batch run. Config files use `key = value` lines; nested
/// blocks use dotted keys (`nbp.particles`, `ga.population`, `energy.send_j`).
/// See `config_keys()` for the full list.
struct ExperimentConfig {
    double width = 100.0;
    double height = 100.0;
    double radius = 15.0;
    std::size_t n_unknown = 100;
    double noise_sigma = 1.0;
    Method method = Method::nbp;
    PlacementMode placement = PlacementMode::edge;
    std::size_t anchor_count = 9;
    std::size_t trials = 10;
    std::uint64_t seed = 1;
    std::size_t workers = 1;  // concurrent trials
    NbpParams nbp;
    GaConfig ga;
    EnergyConfig energy;
    std::filesystem::path out_dir = "out";

    MeasurementModel model() const;
    /// Throws ConfigError naming the offending key.
    void validate() const;
};

/// Sets one key from its textual value. Throws ConfigError for unknown keys
/// or malformed values; `line_no` (when non-zero) is quoted in the message.
void apply_setting(ExperimentConfig& config, const std::string& key, const std::string& value,
                   std::size_t line_no = 0);

/// Parses a config file on top of the defaults. Unknown and duplicate keys
/// are rejected. The result is validated.
ExperimentConfig parse_config(std::istream& is);
ExperimentConfig parse_config(const std::filesystem::path& path);

/// `key = value` for every key, in the order accepted by parse_config.
void write_config(std::ostream& os, const ExperimentConfig& config);
std::vector<std::string> config_keys();

std::uint64_t trial_seed(std::uint64_t master_seed, std::size_t trial);

/// The trial's scenario with unknowns only (anchors are placed separately).
FieldScenario trial_base(const ExperimentConfig& config, std::size_t trial);
/// The frozen scenario that placement=mo optimizes for this trial.
FrozenScenario trial_frozen(const ExperimentConfig& config, std::size_t trial);

struct MoSelection {
    Nsga2Result run;
    std::size_t requested = 0;
    std::size_t selected = 0;  // anchor count of the chosen front-1 member
};

struct TrialOutcome {
    std::size_t index = 0;
    std::uint64_t seed = 0;
    FieldScenario scenario;
    LocalizationResult result;
    EnergyLedger ledger;
    double mean_error = 0.0;
    std::optional<MoSelection> mo;
};

/// Runs every trial in memory (concurrently when workers > 1). Output is
/// independent of the worker count.
std::vector<TrialOutcome> run_trials(const ExperimentConfig& config);

/// Front-1 member with `k` anchors; the nearest count (smaller on ties) when absent.
ArchiveMember select_front_member(const ParetoArchive& archive, std::size_t k);

struct ErrorStats {
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation, 0 for a single value
};
ErrorStats error_stats(const std::vector<double>& values);

struct ExperimentSummary {
    std::vector<double> trial_errors;
    ErrorStats stats;
    std::vector<std::filesystem::path> files;  // relative to out_dir, manifest last
};

/// Runs the trials and writes the artifact bundle plus manifest.txt into
/// config.out_dir. On failure every file written by this call is removed.
ExperimentSummary run_experiment(const ExperimentConfig& config);

struct ComparisonRow {
    Method method = Method::nbp;
    PlacementMode placement = PlacementMode::edge;
    std::size_t anchor_count = 0;
    ErrorStats stats;
    double mean_remaining_j = 0.0;
    std::uint64_t total_sent = 0;
};

/// method x placement x anchor-count grid on common trial seeds, written to
/// comparison.csv (plus manifest) in config.out_dir.
std::vector<ComparisonRow> run_comparison(const ExperimentConfig& config, const std::vector<Method>& methods,
                                          const std::vector<PlacementMode>& placements,
                                          const std::vector<std::size_t>& anchor_counts, bool write_files = true);

/// Collects artifacts in memory, then writes them plus manifest.txt in one
/// go. Files written by a failed commit are removed again.
class ArtifactWriter {
public:
    explicit ArtifactWriter(std::filesystem::path dir);
    void add(std::filesystem::path rel, std::string content);
    /// Returns the relative paths written, manifest.txt last.
    std::vector<std::filesystem::path> commit();

private:
    std::filesystem::path dir_;
    std::vector<std::pair<std::filesystem::path, std::string>> files_;
};

/// Writes manifest.txt (`path,sha256` per file) for files relative to dir.
void write_manifest(const std::filesystem::path& dir, const std::vector<std::filesystem::path>& files);

}  // namespace wsnloc
