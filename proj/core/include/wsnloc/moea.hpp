#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "wsnloc/field.hpp"
#include "wsnloc/nbp.hpp"

namespace wsnloc {

struct GaConfig {
    std::size_t population = 40;
    std::size_t max_generations = 100;
    std::size_t stall_generations = 10;
    double crossover_rate = 0.9;
    double mutation_sigma = 5.0;  // meters
    double length_mutation_rate = 0.1;
    std::size_t n_min = 3;
    std::size_t n_max = 12;
    std::uint64_t master_seed = 0;
    std::size_t workers = 1;  // concurrent chromosome evaluations
    Box field{0.0, 0.0, 100.0, 100.0};

    void validate() const;
};

/// Flat genes x0,y0,x1,y1,...; every pair is one anchor position.
struct AnchorChromosome {
    std::vector<double> genes;

    std::size_t anchor_count() const { return genes.size() / 2; }
    std::vector<Vec2> anchors() const;
    static AnchorChromosome from_anchors(std::span<const Vec2> anchors);
    /// Throws ArgumentError / BoundsError.
    void validate(const GaConfig& config) const;

    friend bool operator==(const AnchorChromosome&, const AnchorChromosome&) = default;
    friend auto operator<=>(const AnchorChromosome&, const AnchorChromosome&) = default;
};

struct ObjectiveVector {
    double error_m = 0.0;
    std::size_t anchor_count = 0;
    bool penalized = false;  // evaluation failed; error_m is the field diagonal

    friend bool operator==(const ObjectiveVector&, const ObjectiveVector&) = default;
};

/// Unknown nodes and the range-noise realization shared by every candidate
/// of one optimization run.
struct FrozenScenario {
    FieldScenario base;  // anchors, if any, are ignored
    MeasurementModel model;
    std::uint64_t noise_seed = 0;
};

AnchorChromosome random_chromosome(const GaConfig& config, std::uint64_t seed);

ObjectiveVector evaluate_chromosome(const AnchorChromosome& chrom, const FrozenScenario& frozen,
                                    const NbpParams& params, std::uint64_t master_seed);

bool dominates(const ObjectiveVector& a, const ObjectiveVector& b);

/// Fronts of indices into `objs`, best first, ascending indices within a front.
std::vector<std::vector<std::size_t>> nondominated_sort(std::span<const ObjectiveVector> objs);

/// Same order as `front`. Boundary members are +infinity.
std::vector<double> crowding_distance(std::span<const ObjectiveVector> front);

enum class CrossoverMode { one_point, two_point, arithmetic };

using ChildPair = std::pair<AnchorChromosome, AnchorChromosome>;

// Cuts are anchor indices, not gene indices.
ChildPair one_point_crossover(const AnchorChromosome& p1, const AnchorChromosome& p2, std::size_t c1,
                              std::size_t c2);
/// Swaps p1[a1, b1) with p2[a2, b2).
ChildPair two_point_crossover(const AnchorChromosome& p1, const AnchorChromosome& p2, std::size_t a1,
                              std::size_t b1, std::size_t a2, std::size_t b2);
ChildPair arithmetic_crossover(const AnchorChromosome& p1, const AnchorChromosome& p2, double alpha);

/// Draws cuts (or alpha) from `seed`; children outside [n_min, n_max] trigger
/// up to 10 redraws, after which the parents are cloned.
ChildPair crossover(const AnchorChromosome& p1, const AnchorChromosome& p2, CrossoverMode mode,
                    const GaConfig& config, std::uint64_t seed);

AnchorChromosome mutate(const AnchorChromosome& chrom, const GaConfig& config, std::uint64_t seed);

struct ArchiveMember {
    AnchorChromosome chromosome;
    ObjectiveVector objectives;
};

struct ParetoArchive {
    std::vector<ArchiveMember> members;
    std::vector<std::vector<std::size_t>> fronts;
    std::vector<double> crowding;  // per member, within its own front

    /// Front-1 members ordered by anchor count, then error.
    std::vector<ArchiveMember> front1() const;
};

/// Sorts members into fronts and fills in crowding distances.
ParetoArchive make_archive(std::vector<ArchiveMember> members);

struct GenerationStats {
    std::size_t generation = 0;
    std::size_t front1_size = 0;
    double min_error = 0.0;
    double median_error = 0.0;

    friend bool operator==(const GenerationStats&, const GenerationStats&) = default;
};

struct Nsga2Result {
    ParetoArchive archive;
    std::vector<GenerationStats> log;  // generation 0 is the initial population
    std::size_t generations_run = 0;
    std::size_t evaluations = 0;       // distinct chromosomes evaluated
};

using GenerationCallback = std::function<void(const GenerationStats&)>;

Nsga2Result nsga2_run(const FrozenScenario& frozen, const NbpParams& nbp_params, const GaConfig& config,
                      const GenerationCallback& on_generation = {});

}  // namespace wsnloc
