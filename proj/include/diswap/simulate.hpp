#pragma once

// Monitoring partitions, model specifications and exact-in-distribution path
// sampling of forward prices.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace diswap {

struct Partition {
    std::vector<double> times;
    std::string label;

    double maturity() const { return times.back(); }
    std::size_t steps() const { return times.size() - 1; }
    /// Throws std::invalid_argument unless times start at 0 and strictly increase.
    void validate() const;
};

Partition regular_partition(int N, double T);
/// N - 1 uniform interior points, sorted, deterministic in seed.
Partition irregular_partition(int N, double T, std::uint64_t seed);
/// Superset of base containing the regular N-step grid as well.
Partition refine_partition(const Partition& base, int N);
/// Splits every interval of base into factor equal pieces.
Partition subdivide(const Partition& base, int factor);
/// Sorted union, merging times closer than 1e-12 * T.
Partition union_of(const std::vector<Partition>& parts);
/// Position of every coarse time inside fine. Throws if coarse is not a subset.
std::vector<std::size_t> restriction_indices(const Partition& fine, const Partition& coarse);

/// "daily" (252), "weekly" (52), "monthly" (12), "quarterly" (4), "trivial" (1),
/// an integer N, or "irregular:SEED[:N]" (N defaults to 50).
Partition parse_partition(const std::string& spec, double T);

enum class ModelKind { GBM, MertonJump, Heston };

struct JumpParams {
    double intensity = 0.0;
    double mean_log_jump = 0.0;
    double sd_log_jump = 0.0;
};

struct HestonParams {
    double kappa = 1.0;
    double theta = 0.04;
    double xi = 0.5;
    double rho = -0.7;
    double v0 = 0.04;
};

struct ModelSpec {
    ModelKind kind = ModelKind::GBM;
    double F0 = 100.0;
    double vol = 0.2;
    double drift = 0.0;
    std::optional<JumpParams> jump;
    std::optional<HestonParams> heston;

    void validate() const;
    /// E[e^J] - 1 for the log jump J; zero without jumps.
    double jump_compensator() const;
    double jump_intensity() const { return jump ? jump->intensity : 0.0; }
    std::string label() const;
    /// Same model under the pricing measure.
    ModelSpec risk_neutral() const;
};

std::string to_string(ModelKind kind);
ModelKind model_kind_from_string(const std::string& name);

/// Per-path random stream keyed by (seed, path index).
std::mt19937_64 path_rng(std::uint64_t seed, std::uint64_t path);

/// Draws one path of F (and the Heston variance) on a partition.
class PathSampler {
public:
    PathSampler(ModelSpec model, Partition partition, std::uint64_t seed);

    struct Path {
        std::vector<double> F;
        std::vector<double> v;  // Heston variance (truncated at zero), empty otherwise
    };

    void sample(std::uint64_t path_index, Path& out) const;

    const ModelSpec& model() const { return model_; }
    const Partition& partition() const { return partition_; }
    std::uint64_t seed() const { return seed_; }

private:
    ModelSpec model_;
    Partition partition_;
    std::uint64_t seed_;
    std::vector<int> substeps_;
};

/// Materialised paths: F always, plus optional auxiliary components
/// (power log contracts, options) stored [path][time][component].
struct PathPanel {
    Partition partition;
    std::size_t n_paths = 0;
    std::uint64_t seed = 0;
    std::vector<double> F;         // [path][time]
    std::vector<double> variance;  // [path][time], Heston only
    std::vector<std::string> aux_labels;
    std::vector<double> aux;       // [path][time][aux component]

    std::size_t n_times() const { return partition.times.size(); }
    double forward(std::size_t path, std::size_t t) const { return F[path * n_times() + t]; }
    double log_forward(std::size_t path, std::size_t t) const;
    double aux_value(std::size_t path, std::size_t t, std::size_t c) const {
        return aux[(path * n_times() + t) * aux_labels.size() + c];
    }
};

PathPanel simulate_paths(const ModelSpec& model, const Partition& partition, std::size_t n_paths,
                         std::uint64_t seed, unsigned threads = 0);

/// Long-format CSV: path,time,component,value with components F, x and the aux labels.
void write_panel_csv(const PathPanel& panel, const std::string& path);
/// Binary layout: "DIPANEL\0", u32 version, u32 reserved, u64 n_paths, u64 n_times,
/// u64 n_components, u64 seed, f64 times[n_times], f64 data[path][time][component],
/// all little-endian. Component order is F, x, then aux labels.
void write_panel_binary(const PathPanel& panel, const std::string& path);
PathPanel read_panel_binary(const std::string& path);

/// Runs fn(begin, end) over [0, n) in contiguous blocks. threads = 0 means all cores.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t, std::size_t)>& fn);
unsigned resolve_threads(unsigned threads);

} // namespace diswap
