#include "wsnloc/moea.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "wsnloc/errors.hpp"
#include "wsnloc/parallel.hpp"
#include "wsnloc/random.hpp"

namespace wsnloc {

namespace {

constexpr int kMaxCutAttempts = 10;

double uniform(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

std::size_t uniform_index(Rng& rng, std::size_t lo, std::size_t hi) {  // inclusive
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

bool length_ok(const AnchorChromosome& c, const GaConfig& config) {
    return c.anchor_count() >= config.n_min && c.anchor_count() <= config.n_max;
}

void append_anchors(std::vector<double>& out, const AnchorChromosome& src, std::size_t from, std::size_t to) {
    out.insert(out.end(), src.genes.begin() + static_cast<std::ptrdiff_t>(2 * from),
               src.genes.begin() + static_cast<std::ptrdiff_t>(2 * to));
}

}  // namespace

void GaConfig::validate() const {
    if (population < 4 || population % 2 != 0)
        throw ArgumentError("population must be even and at least 4");
    if (n_min < 1) throw ArgumentError("n_min must be at least 1");
    if (n_max < n_min) throw ArgumentError("n_max must be >= n_min");
    if (!(crossover_rate >= 0.0 && crossover_rate <= 1.0)) throw ArgumentError("crossover_rate must lie in [0,1]");
    if (!(length_mutation_rate >= 0.0 && length_mutation_rate <= 1.0))
        throw ArgumentError("length_mutation_rate must lie in [0,1]");
    if (!(mutation_sigma >= 0.0) || !std::isfinite(mutation_sigma))
        throw ArgumentError("mutation_sigma must be finite and non-negative");
    if (!(field.xmax > field.xmin && field.ymax > field.ymin)) throw ArgumentError("field must have positive area");
}

std::vector<Vec2> AnchorChromosome::anchors() const {
    std::vector<Vec2> out(anchor_count());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = {genes[2 * i], genes[2 * i + 1]};
    return out;
}

AnchorChromosome AnchorChromosome::from_anchors(std::span<const Vec2> anchors) {
    AnchorChromosome c;
    c.genes.reserve(2 * anchors.size());
    for (const Vec2& a : anchors) {
        c.genes.push_back(a.x);
        c.genes.push_back(a.y);
    }
    return c;
}

void AnchorChromosome::validate(const GaConfig& config) const {
    if (genes.size() % 2 != 0) throw ArgumentError("chromosome length must be even");
    if (!length_ok(*this, config))
        throw ArgumentError("chromosome has " + std::to_string(anchor_count()) + " anchors, outside [n_min, n_max]");
    for (const Vec2& a : anchors())
        if (!config.field.contains(a)) throw BoundsError("chromosome anchor outside the field");
}

AnchorChromosome random_chromosome(const GaConfig& config, std::uint64_t seed) {
    config.validate();
    Rng rng = make_stream(seed, {tag("chromosome")});
    const std::size_t n = uniform_index(rng, config.n_min, config.n_max);
    AnchorChromosome c;
    c.genes.resize(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        c.genes[2 * i] = uniform(rng, config.field.xmin, config.field.xmax);
        c.genes[2 * i + 1] = uniform(rng, config.field.ymin, config.field.ymax);
    }
    return c;
}

ObjectiveVector evaluate_chromosome(const AnchorChromosome& chrom, const FrozenScenario& frozen,
                                    const NbpParams& params, std::uint64_t master_seed) {
    ObjectiveVector obj;
    obj.anchor_count = chrom.anchor_count();
    try {
        const auto anchors = chrom.anchors();
        const FieldScenario scenario = with_anchors(frozen.base, anchors);
        const RangeGraph ranges = measure_ranges(scenario, frozen.model, frozen.noise_seed);
        const auto result =
            run_nbp(scenario, ranges, frozen.model, params, hash_doubles(master_seed, chrom.genes));
        obj.error_m = mean_error(result);
    } catch (const NumericalError&) {
        obj.error_m = frozen.base.bounds().diagonal();
        obj.penalized = true;
    } catch (const BoundsError&) {
        obj.error_m = frozen.base.bounds().diagonal();
        obj.penalized = true;
    }
    return obj;
}

bool dominates(const ObjectiveVector& a, const ObjectiveVector& b) {
    const bool no_worse = a.error_m <= b.error_m && a.anchor_count <= b.anchor_count;
    const bool better = a.error_m < b.error_m || a.anchor_count < b.anchor_count;
    return no_worse && better;
}

std::vector<std::vector<std::size_t>> nondominated_sort(std::span<const ObjectiveVector> objs) {
    const std::size_t n = objs.size();
    std::vector<std::vector<std::size_t>> dominated(n);
    std::vector<std::size_t> count(n, 0);
    std::vector<std::vector<std::size_t>> fronts(1);
    for (std::size_t p = 0; p < n; ++p) {
        for (std::size_t q = 0; q < n; ++q) {
            if (p == q) continue;
            if (dominates(objs[p], objs[q])) dominated[p].push_back(q);
            else if (dominates(objs[q], objs[p])) ++count[p];
        }
        if (count[p] == 0) fronts[0].push_back(p);
    }
    while (true) {
        std::vector<std::size_t> next;
        for (std::size_t p : fronts.back())
            for (std::size_t q : dominated[p])
                if (--count[q] == 0) next.push_back(q);
        if (next.empty()) break;
        std::sort(next.begin(), next.end());
        fronts.push_back(std::move(next));
    }
    if (n == 0) fronts.clear();
    return fronts;
}

std::vector<double> crowding_distance(std::span<const ObjectiveVector> front) {
    const std::size_t n = front.size();
    std::vector<double> cd(n, 0.0);
    if (n <= 2) {
        std::fill(cd.begin(), cd.end(), std::numeric_limits<double>::infinity());
        return cd;
    }
    std::vector<std::size_t> order(n);
    auto accumulate = [&](auto value) {
        for (std::size_t i = 0; i < n; ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return value(front[a]) < value(front[b]); });
        const double lo = value(front[order.front()]);
        const double hi = value(front[order.back()]);
        cd[order.front()] = std::numeric_limits<double>::infinity();
        cd[order.back()] = std::numeric_limits<double>::infinity();
        if (!(hi > lo)) return;
        for (std::size_t k = 1; k + 1 < n; ++k)
            cd[order[k]] += (value(front[order[k + 1]]) - value(front[order[k - 1]])) / (hi - lo);
    };
    accumulate([](const ObjectiveVector& o) { return o.error_m; });
    accumulate([](const ObjectiveVector& o) { return static_cast<double>(o.anchor_count); });
    return cd;
}

ChildPair one_point_crossover(const AnchorChromosome& p1, const AnchorChromosome& p2, std::size_t c1,
                              std::size_t c2) {
    const std::size_t n1 = p1.anchor_count(), n2 = p2.anchor_count();
    if (c1 > n1 || c2 > n2) throw ArgumentError("crossover cut beyond chromosome length");
    ChildPair kids;
    append_anchors(kids.first.genes, p1, 0, c1);
    append_anchors(kids.first.genes, p2, c2, n2);
    append_anchors(kids.second.genes, p2, 0, c2);
    append_anchors(kids.second.genes, p1, c1, n1);
    return kids;
}

ChildPair two_point_crossover(const AnchorChromosome& p1, const AnchorChromosome& p2, std::size_t a1,
                              std::size_t b1, std::size_t a2, std::size_t b2) {
    if (a1 > b1 || b1 > p1.anchor_count() || a2 > b2 || b2 > p2.anchor_count())
        throw ArgumentError("crossover cuts out of order or beyond chromosome length");
    ChildPair kids;
    append_anchors(kids.first.genes, p1, 0, a1);
    append_anchors(kids.first.genes, p2, a2, b2);
    append_anchors(kids.first.genes, p1, b1, p1.anchor_count());
    append_anchors(kids.second.genes, p2, 0, a2);
    append_anchors(kids.second.genes, p1, a1, b1);
    append_anchors(kids.second.genes, p2, b2, p2.anchor_count());
    return kids;
}

ChildPair arithmetic_crossover(const AnchorChromosome& p1, const AnchorChromosome& p2, double alpha) {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw ArgumentError("alpha must lie in [0,1]");
    ChildPair kids{p1, p2};
    const std::size_t shared = 2 * std::min(p1.anchor_count(), p2.anchor_count());
    for (std::size_t i = 0; i < shared; ++i) {
        const double g1 = p1.genes[i], g2 = p2.genes[i];
        kids.first.genes[i] = alpha * g1 + (1.0 - alpha) * g2;
        kids.second.genes[i] = (1.0 - alpha) * g1 + alpha * g2;
    }
    return kids;
}

ChildPair crossover(const AnchorChromosome& p1, const AnchorChromosome& p2, CrossoverMode mode,
                    const GaConfig& config, std::uint64_t seed) {
    Rng rng = make_stream(seed, {tag("crossover")});
    const std::size_t n1 = p1.anchor_count(), n2 = p2.anchor_count();
    if (mode == CrossoverMode::arithmetic) return arithmetic_crossover(p1, p2, uniform(rng, 0.0, 1.0));

    for (int attempt = 0; attempt < kMaxCutAttempts; ++attempt) {
        ChildPair kids;
        if (mode == CrossoverMode::one_point) {
            if (n1 < 2 || n2 < 2) break;  // no interior cut exists
            const std::size_t c1 = uniform_index(rng, 1, n1 - 1);
            const std::size_t c2 = uniform_index(rng, 1, n2 - 1);
            kids = one_point_crossover(p1, p2, c1, c2);
        } else {
            auto cut_pair = [&](std::size_t n) {
                std::size_t a = uniform_index(rng, 0, n), b = uniform_index(rng, 0, n - 1);
                if (b >= a) ++b;  // distinct cut points
                return std::pair{std::min(a, b), std::max(a, b)};
            };
            const auto [a1, b1] = cut_pair(n1);
            const auto [a2, b2] = cut_pair(n2);
            kids = two_point_crossover(p1, p2, a1, b1, a2, b2);
        }
        if (length_ok(kids.first, config) && length_ok(kids.second, config)) return kids;
    }
    return {p1, p2};
}

AnchorChromosome mutate(const AnchorChromosome& chrom, const GaConfig& config, std::uint64_t seed) {
    Rng rng = make_stream(seed, {tag("mutate")});
    AnchorChromosome out = chrom;
    const std::size_t len = out.genes.size();
    if (len > 0) {
        const double p = 1.0 / static_cast<double>(len);
        std::normal_distribution<double> step(0.0, 1.0);
        for (std::size_t i = 0; i < len; ++i) {
            if (uniform(rng, 0.0, 1.0) >= p) continue;
            const double lo = i % 2 == 0 ? config.field.xmin : config.field.ymin;
            const double hi = i % 2 == 0 ? config.field.xmax : config.field.ymax;
            out.genes[i] = std::clamp(out.genes[i] + config.mutation_sigma * step(rng), lo, hi);
        }
    }
    if (uniform(rng, 0.0, 1.0) < config.length_mutation_rate) {
        const std::size_t n = out.anchor_count();
        bool insert = uniform(rng, 0.0, 1.0) < 0.5;
        // When the coin picks a move the bounds forbid, take the other one.
        if (insert && n + 1 > config.n_max) insert = false;
        else if (!insert && (n == 0 || n - 1 < config.n_min)) insert = true;
        if (insert && n + 1 <= config.n_max) {
            const std::size_t at = uniform_index(rng, 0, n);
            const double x = uniform(rng, config.field.xmin, config.field.xmax);
            const double y = uniform(rng, config.field.ymin, config.field.ymax);
            out.genes.insert(out.genes.begin() + static_cast<std::ptrdiff_t>(2 * at), {x, y});
        } else if (!insert && n >= 1 && n - 1 >= config.n_min) {
            const std::size_t at = uniform_index(rng, 0, n - 1);
            const auto first = out.genes.begin() + static_cast<std::ptrdiff_t>(2 * at);
            out.genes.erase(first, first + 2);
        }
    }
    return out;
}

std::vector<ArchiveMember> ParetoArchive::front1() const {
    std::vector<ArchiveMember> out;
    if (fronts.empty()) return out;
    for (std::size_t i : fronts.front()) out.push_back(members[i]);
    std::stable_sort(out.begin(), out.end(), [](const ArchiveMember& a, const ArchiveMember& b) {
        if (a.objectives.anchor_count != b.objectives.anchor_count)
            return a.objectives.anchor_count < b.objectives.anchor_count;
        return a.objectives.error_m < b.objectives.error_m;
    });
    return out;
}

ParetoArchive make_archive(std::vector<ArchiveMember> members) {
    ParetoArchive archive;
    archive.members = std::move(members);
    std::vector<ObjectiveVector> objs;
    objs.reserve(archive.members.size());
    for (const auto& m : archive.members) objs.push_back(m.objectives);
    archive.fronts = nondominated_sort(objs);
    archive.crowding.assign(objs.size(), 0.0);
    for (const auto& front : archive.fronts) {
        std::vector<ObjectiveVector> fo;
        for (std::size_t i : front) fo.push_back(objs[i]);
        const auto cd = crowding_distance(fo);
        for (std::size_t k = 0; k < front.size(); ++k) archive.crowding[front[k]] = cd[k];
    }
    return archive;
}

namespace {

class Evaluator {
public:
    Evaluator(const FrozenScenario& frozen, const NbpParams& params, const GaConfig& config)
        : frozen_(frozen), params_(params), config_(config) {}

    std::vector<ObjectiveVector> operator()(const std::vector<AnchorChromosome>& batch) {
        std::vector<const AnchorChromosome*> todo;
        std::set<std::vector<double>> queued;
        for (const auto& c : batch)
            if (!cache_.count(c.genes) && queued.insert(c.genes).second) todo.push_back(&c);
        std::vector<ObjectiveVector> fresh(todo.size());
        parallel_for(todo.size(), config_.workers, [&](std::size_t i) {
            fresh[i] = evaluate_chromosome(*todo[i], frozen_, params_, config_.master_seed);
        });
        for (std::size_t i = 0; i < todo.size(); ++i) cache_.emplace(todo[i]->genes, fresh[i]);
        evaluations_ += todo.size();
        std::vector<ObjectiveVector> out;
        out.reserve(batch.size());
        for (const auto& c : batch) out.push_back(cache_.at(c.genes));
        return out;
    }

    std::size_t evaluations() const { return evaluations_; }

private:
    const FrozenScenario& frozen_;
    const NbpParams& params_;
    const GaConfig& config_;
    std::map<std::vector<double>, ObjectiveVector> cache_;
    std::size_t evaluations_ = 0;
};

GenerationStats stats_of(const ParetoArchive& archive, std::size_t generation) {
    GenerationStats s;
    s.generation = generation;
    s.front1_size = archive.fronts.empty() ? 0 : archive.fronts.front().size();
    std::vector<double> errors;
    for (const auto& m : archive.members) errors.push_back(m.objectives.error_m);
    std::sort(errors.begin(), errors.end());
    s.min_error = errors.front();
    const std::size_t n = errors.size();
    s.median_error = n % 2 ? errors[n / 2] : 0.5 * (errors[n / 2 - 1] + errors[n / 2]);
    return s;
}

std::vector<std::pair<double, std::size_t>> front1_objectives(const ParetoArchive& archive) {
    std::set<std::pair<double, std::size_t>> s;
    for (std::size_t i : archive.fronts.front())
        s.emplace(archive.members[i].objectives.error_m, archive.members[i].objectives.anchor_count);
    return {s.begin(), s.end()};
}

// Steps 2-4: rank the pooled members and fill by front, breaking the last
// front by descending crowding distance.
std::vector<ArchiveMember> truncate(const ParetoArchive& pooled, std::size_t size) {
    std::vector<ArchiveMember> keep;
    for (const auto& front : pooled.fronts) {
        if (keep.size() + front.size() <= size) {
            for (std::size_t i : front) keep.push_back(pooled.members[i]);
            continue;
        }
        std::vector<std::size_t> order = front;
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return pooled.crowding[a] > pooled.crowding[b]; });
        for (std::size_t k = 0; keep.size() < size; ++k) keep.push_back(pooled.members[order[k]]);
        break;
    }
    return keep;
}

}  // namespace

Nsga2Result nsga2_run(const FrozenScenario& frozen, const NbpParams& nbp_params, const GaConfig& config,
                      const GenerationCallback& on_generation) {
    config.validate();
    nbp_params.validate();
    Evaluator evaluate(frozen, nbp_params, config);
    const std::uint64_t seed = config.master_seed;

    std::vector<AnchorChromosome> pop;
    for (std::size_t i = 0; i < config.population; ++i)
        pop.push_back(random_chromosome(config, derive_seed(seed, {tag("init"), i})));
    auto objs = evaluate(pop);
    std::vector<ArchiveMember> members;
    for (std::size_t i = 0; i < pop.size(); ++i) members.push_back({pop[i], objs[i]});
    ParetoArchive archive = make_archive(std::move(members));

    Nsga2Result result;
    auto record = [&](std::size_t g) {
        result.log.push_back(stats_of(archive, g));
        if (on_generation) on_generation(result.log.back());
    };
    record(0);

    std::vector<std::size_t> rank(config.population);
    auto last_front = front1_objectives(archive);
    std::size_t stall = 0;
    for (std::size_t g = 1; g <= config.max_generations; ++g) {
        for (std::size_t f = 0; f < archive.fronts.size(); ++f)
            for (std::size_t i : archive.fronts[f]) rank[i] = f;
        auto better = [&](std::size_t a, std::size_t b) {
            if (rank[a] != rank[b]) return rank[a] < rank[b] ? a : b;
            if (archive.crowding[a] != archive.crowding[b]) return archive.crowding[a] > archive.crowding[b] ? a : b;
            return std::min(a, b);
        };

        std::vector<AnchorChromosome> offspring;
        for (std::size_t m = 0; m < config.population / 2; ++m) {
            Rng rng = make_stream(seed, {tag("mating"), g, m});
            auto tournament = [&] {
                const std::size_t a = uniform_index(rng, 0, config.population - 1);
                const std::size_t b = uniform_index(rng, 0, config.population - 1);
                return better(a, b);
            };
            const auto& p1 = archive.members[tournament()].chromosome;
            const auto& p2 = archive.members[tournament()].chromosome;
            ChildPair kids{p1, p2};
            if (uniform(rng, 0.0, 1.0) < config.crossover_rate) {
                const auto mode = static_cast<CrossoverMode>(uniform_index(rng, 0, 2));
                kids = crossover(p1, p2, mode, config, rng());
            }
            offspring.push_back(mutate(kids.first, config, rng()));
            offspring.push_back(mutate(kids.second, config, rng()));
        }
        const auto child_objs = evaluate(offspring);

        std::vector<ArchiveMember> pool = archive.members;
        for (std::size_t i = 0; i < offspring.size(); ++i) pool.push_back({offspring[i], child_objs[i]});
        archive = make_archive(truncate(make_archive(std::move(pool)), config.population));
        result.generations_run = g;
        record(g);

        auto front = front1_objectives(archive);
        stall = front == last_front ? stall + 1 : 0;
        last_front = std::move(front);
        if (config.stall_generations > 0 && stall >= config.stall_generations) break;
    }
    result.archive = std::move(archive);
    result.evaluations = evaluate.evaluations();
    return result;
}

}  // namespace wsnloc
