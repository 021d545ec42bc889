#include "diswap/simulate.hpp"

#include "diswap/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace diswap {

namespace {

constexpr double kMergeTolerance = 1e-12;

int parse_int(const std::string& text, const std::string& what) {
    int value = 0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw std::invalid_argument("invalid " + what + " '" + text + "'");
    return value;
}

std::uint64_t parse_u64(const std::string& text, const std::string& what) {
    std::uint64_t value = 0;
    auto res = std::from_chars(text.data(), text.data() + text.size(), value);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size())
        throw std::invalid_argument("invalid " + what + " '" + text + "'");
    return value;
}

void check_horizon(int N, double T) {
    if (N < 1) throw std::invalid_argument("partition needs N >= 1, got " + std::to_string(N));
    if (!(T > 0.0) || !std::isfinite(T)) throw std::invalid_argument("partition needs a positive finite horizon");
}

template <class T>
void put_le(std::string& buf, T value) {
    static_assert(std::endian::native == std::endian::little, "binary panel writer assumes a little-endian host");
    char bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    buf.append(bytes, sizeof(T));
}

template <class T>
T get_le(std::istream& in) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw std::runtime_error("truncated panel file");
    return value;
}

constexpr char kPanelMagic[8] = {'D', 'I', 'P', 'A', 'N', 'E', 'L', '\0'};
constexpr std::uint32_t kPanelVersion = 1;

} // namespace

void Partition::validate() const {
    if (times.size() < 2) throw std::invalid_argument("partition '" + label + "' needs at least two times");
    if (times.front() != 0.0) throw std::invalid_argument("partition '" + label + "' must start at 0");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (!(times[i] > times[i - 1]))
            throw std::invalid_argument("partition '" + label + "' is not strictly increasing");
}

Partition regular_partition(int N, double T) {
    check_horizon(N, T);
    Partition p;
    p.times.resize(static_cast<std::size_t>(N) + 1);
    for (int i = 0; i <= N; ++i) p.times[static_cast<std::size_t>(i)] = T * i / N;
    p.times.back() = T;
    p.label = "N=" + std::to_string(N);
    return p;
}

Partition irregular_partition(int N, double T, std::uint64_t seed) {
    check_horizon(N, T);
    std::mt19937_64 rng = path_rng(seed, 0x1227E6u);
    std::uniform_real_distribution<double> uniform(0.0, T);
    const double tol = kMergeTolerance * T;
    std::vector<double> interior;
    const auto wanted = static_cast<std::size_t>(N - 1);
    for (int attempt = 0; attempt < 64 && interior.size() < wanted; ++attempt) {
        while (interior.size() < wanted) interior.push_back(uniform(rng));
        std::sort(interior.begin(), interior.end());
        std::vector<double> kept;
        double last = 0.0;
        for (double t : interior) {
            if (t - last > tol && T - t > tol) {
                kept.push_back(t);
                last = t;
            }
        }
        interior = std::move(kept);
    }
    if (interior.size() < wanted)
        throw std::runtime_error("irregular_partition: could not draw distinct interior points");
    Partition p;
    p.times.reserve(wanted + 2);
    p.times.push_back(0.0);
    p.times.insert(p.times.end(), interior.begin(), interior.end());
    p.times.push_back(T);
    p.label = "irregular-seed" + std::to_string(seed) + "-N=" + std::to_string(N);
    return p;
}

Partition refine_partition(const Partition& base, int N) {
    base.validate();
    Partition p = union_of({base, regular_partition(N, base.maturity())});
    p.label = base.label + "+N=" + std::to_string(N);
    return p;
}

Partition subdivide(const Partition& base, int factor) {
    base.validate();
    if (factor < 1) throw std::invalid_argument("subdivide: factor must be at least 1");
    Partition p;
    p.times.reserve(base.steps() * static_cast<std::size_t>(factor) + 1);
    p.times.push_back(0.0);
    for (std::size_t i = 1; i < base.times.size(); ++i) {
        const double a = base.times[i - 1];
        const double b = base.times[i];
        for (int j = 1; j < factor; ++j) p.times.push_back(a + (b - a) * j / factor);
        p.times.push_back(b);
    }
    p.label = base.label + "x" + std::to_string(factor);
    return p;
}

Partition union_of(const std::vector<Partition>& parts) {
    if (parts.empty()) throw std::invalid_argument("union_of: no partitions");
    const double T = parts.front().maturity();
    for (const auto& p : parts) {
        p.validate();
        if (std::abs(p.maturity() - T) > kMergeTolerance * T)
            throw std::invalid_argument("union_of: partitions have different horizons");
    }
    struct Point {
        double t;
        std::size_t rank;
    };
    std::vector<Point> points;
    for (std::size_t r = 0; r < parts.size(); ++r)
        for (double t : parts[r].times) points.push_back({t, r});
    std::stable_sort(points.begin(), points.end(), [](const Point& a, const Point& b) { return a.t < b.t; });

    const double tol = kMergeTolerance * T;
    Partition out;
    std::size_t i = 0;
    while (i < points.size()) {
        std::size_t j = i;
        Point best = points[i];
        while (j < points.size() && points[j].t - points[i].t <= tol) {
            if (points[j].rank < best.rank) best = points[j];
            ++j;
        }
        out.times.push_back(best.t);
        i = j;
    }
    out.times.front() = 0.0;
    out.times.back() = T;
    out.label = "union";
    return out;
}

std::vector<std::size_t> restriction_indices(const Partition& fine, const Partition& coarse) {
    const double tol = kMergeTolerance * fine.maturity();
    std::vector<std::size_t> idx;
    idx.reserve(coarse.times.size());
    std::size_t j = 0;
    for (double t : coarse.times) {
        while (j < fine.times.size() && fine.times[j] < t - tol) ++j;
        if (j == fine.times.size() || std::abs(fine.times[j] - t) > tol)
            throw std::invalid_argument("partition '" + coarse.label + "' is not contained in '" + fine.label + "'");
        idx.push_back(j);
    }
    return idx;
}

Partition parse_partition(const std::string& spec, double T) {
    Partition p;
    if (spec == "daily") p = regular_partition(252, T);
    else if (spec == "weekly") p = regular_partition(52, T);
    else if (spec == "monthly") p = regular_partition(12, T);
    else if (spec == "quarterly") p = regular_partition(4, T);
    else if (spec == "trivial") p = regular_partition(1, T);
    else if (spec.rfind("irregular", 0) == 0) {
        std::uint64_t seed = 0;
        int N = 50;
        if (spec != "irregular") {
            if (spec.size() < 11 || spec[9] != ':') throw std::invalid_argument("invalid partition '" + spec + "'");
            const std::string rest = spec.substr(10);
            const auto colon = rest.find(':');
            seed = parse_u64(rest.substr(0, colon), "partition seed");
            if (colon != std::string::npos) N = parse_int(rest.substr(colon + 1), "partition size");
        }
        p = irregular_partition(N, T, seed);
    } else {
        p = regular_partition(parse_int(spec, "partition"), T);
    }
    p.label = spec;
    return p;
}

std::string to_string(ModelKind kind) {
    switch (kind) {
    case ModelKind::GBM: return "gbm";
    case ModelKind::MertonJump: return "merton";
    case ModelKind::Heston: return "heston";
    }
    return "unknown";
}

ModelKind model_kind_from_string(const std::string& name) {
    if (name == "gbm" || name == "GBM") return ModelKind::GBM;
    if (name == "merton" || name == "MertonJump") return ModelKind::MertonJump;
    if (name == "heston" || name == "Heston") return ModelKind::Heston;
    throw std::invalid_argument("unknown model '" + name + "' (expected gbm, merton or heston)");
}

void ModelSpec::validate() const {
    if (!(F0 > 0.0) || !std::isfinite(F0)) throw std::invalid_argument("model: F0 must be positive");
    if (!(vol > 0.0) || !std::isfinite(vol)) throw std::invalid_argument("model: vol must be positive");
    if (!std::isfinite(drift)) throw std::invalid_argument("model: drift must be finite");
    if (kind == ModelKind::MertonJump && !jump) throw std::invalid_argument("model: MertonJump needs jump parameters");
    if (kind != ModelKind::MertonJump && jump) throw std::invalid_argument("model: jump parameters only apply to MertonJump");
    if (kind == ModelKind::Heston && !heston) throw std::invalid_argument("model: Heston needs its parameters");
    if (kind != ModelKind::Heston && heston) throw std::invalid_argument("model: Heston parameters only apply to Heston");
    if (jump) {
        if (!(jump->intensity >= 0.0) || !std::isfinite(jump->intensity))
            throw std::invalid_argument("model: jump intensity must be non-negative");
        if (!std::isfinite(jump->mean_log_jump)) throw std::invalid_argument("model: jump mean must be finite");
        if (!(jump->sd_log_jump >= 0.0) || !std::isfinite(jump->sd_log_jump))
            throw std::invalid_argument("model: jump sd must be non-negative");
    }
    if (heston) {
        if (!(heston->kappa > 0.0)) throw std::invalid_argument("model: kappa must be positive");
        if (!(heston->theta > 0.0)) throw std::invalid_argument("model: theta must be positive");
        if (!(heston->xi > 0.0)) throw std::invalid_argument("model: xi must be positive");
        if (!(heston->rho >= -1.0 && heston->rho <= 1.0)) throw std::invalid_argument("model: rho must lie in [-1, 1]");
        if (!(heston->v0 > 0.0)) throw std::invalid_argument("model: v0 must be positive");
    }
}

double ModelSpec::jump_compensator() const {
    if (!jump) return 0.0;
    return std::expm1(jump->mean_log_jump + 0.5 * jump->sd_log_jump * jump->sd_log_jump);
}

std::string ModelSpec::label() const {
    std::ostringstream os;
    os << to_string(kind) << "(F0=" << F0;
    if (kind == ModelKind::Heston) {
        os << ",kappa=" << heston->kappa << ",theta=" << heston->theta << ",xi=" << heston->xi
           << ",rho=" << heston->rho << ",v0=" << heston->v0;
    } else {
        os << ",vol=" << vol;
    }
    if (jump) os << ",lambda=" << jump->intensity << ",m=" << jump->mean_log_jump << ",s=" << jump->sd_log_jump;
    if (drift != 0.0) os << ",drift=" << drift;
    os << ")";
    return os.str();
}

ModelSpec ModelSpec::risk_neutral() const {
    ModelSpec q = *this;
    q.drift = 0.0;
    return q;
}

std::mt19937_64 path_rng(std::uint64_t seed, std::uint64_t path) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32)};
    return std::mt19937_64(seq);
}

PathSampler::PathSampler(ModelSpec model, Partition partition, std::uint64_t seed)
    : model_(std::move(model)), partition_(std::move(partition)), seed_(seed) {
    model_.validate();
    partition_.validate();
    substeps_.assign(partition_.steps(), 1);
    if (model_.kind == ModelKind::Heston) {
        const double max_step = partition_.maturity() / 2016.0;
        for (std::size_t i = 0; i < partition_.steps(); ++i) {
            const double dt = partition_.times[i + 1] - partition_.times[i];
            substeps_[i] = std::max(8, static_cast<int>(std::ceil(dt / max_step - 1e-9)));
        }
    }
}

void PathSampler::sample(std::uint64_t path_index, Path& out) const {
    const auto n = partition_.times.size();
    out.F.resize(n);
    auto rng = path_rng(seed_, path_index);
    std::normal_distribution<double> normal;
    double x = std::log(model_.F0);
    out.F[0] = model_.F0;

    if (model_.kind == ModelKind::Heston) {
        const auto& h = *model_.heston;
        const double rho_bar = std::sqrt(std::max(0.0, 1.0 - h.rho * h.rho));
        out.v.resize(n);
        double v = h.v0;
        out.v[0] = v;
        for (std::size_t i = 1; i < n; ++i) {
            const double dt = (partition_.times[i] - partition_.times[i - 1]) / substeps_[i - 1];
            for (int s = 0; s < substeps_[i - 1]; ++s) {
                const double vp = std::max(v, 0.0);
                const double z1 = normal(rng);
                const double z2 = normal(rng);
                const double sd = std::sqrt(vp * dt);
                x += (model_.drift - 0.5 * vp) * dt + sd * z1;
                v += h.kappa * (h.theta - vp) * dt + h.xi * sd * (h.rho * z1 + rho_bar * z2);
            }
            out.F[i] = std::exp(x);
            out.v[i] = std::max(v, 0.0);
        }
        return;
    }

    out.v.clear();
    const double sigma = model_.vol;
    const double lambda = model_.jump_intensity();
    const double comp = model_.jump_compensator();
    const double m = model_.jump ? model_.jump->mean_log_jump : 0.0;
    const double s = model_.jump ? model_.jump->sd_log_jump : 0.0;
    const double drift = model_.drift - 0.5 * sigma * sigma - lambda * comp;
    for (std::size_t i = 1; i < n; ++i) {
        const double dt = partition_.times[i] - partition_.times[i - 1];
        x += drift * dt + sigma * std::sqrt(dt) * normal(rng);
        if (lambda > 0.0) {
            std::poisson_distribution<int> poisson(lambda * dt);
            const int jumps = poisson(rng);
            if (jumps > 0) x += jumps * m + s * std::sqrt(static_cast<double>(jumps)) * normal(rng);
        }
        out.F[i] = std::exp(x);
    }
}

double PathPanel::log_forward(std::size_t path, std::size_t t) const { return std::log(forward(path, t)); }

PathPanel simulate_paths(const ModelSpec& model, const Partition& partition, std::size_t n_paths,
                         std::uint64_t seed, unsigned threads) {
    if (n_paths < 1) throw std::invalid_argument("simulate_paths: n_paths must be at least 1");
    PathSampler sampler(model, partition, seed);
    PathPanel panel;
    panel.partition = partition;
    panel.n_paths = n_paths;
    panel.seed = seed;
    const auto nt = partition.times.size();
    panel.F.resize(n_paths * nt);
    if (model.kind == ModelKind::Heston) panel.variance.resize(n_paths * nt);
    parallel_for(n_paths, threads, [&](std::size_t begin, std::size_t end) {
        PathSampler::Path path;
        for (std::size_t p = begin; p < end; ++p) {
            sampler.sample(p, path);
            std::copy(path.F.begin(), path.F.end(), panel.F.begin() + static_cast<std::ptrdiff_t>(p * nt));
            if (!path.v.empty())
                std::copy(path.v.begin(), path.v.end(), panel.variance.begin() + static_cast<std::ptrdiff_t>(p * nt));
        }
    });
    return panel;
}

void write_panel_csv(const PathPanel& panel, const std::string& path) {
    std::string out = "path,time,component,value\n";
    const auto nt = panel.n_times();
    for (std::size_t p = 0; p < panel.n_paths; ++p) {
        for (std::size_t t = 0; t < nt; ++t) {
            const std::string prefix = std::to_string(p) + "," + format_double(panel.partition.times[t]) + ",";
            out += prefix + "F," + format_double(panel.forward(p, t)) + "\n";
            out += prefix + "x," + format_double(panel.log_forward(p, t)) + "\n";
            for (std::size_t c = 0; c < panel.aux_labels.size(); ++c)
                out += prefix + panel.aux_labels[c] + "," + format_double(panel.aux_value(p, t, c)) + "\n";
        }
    }
    write_file_atomic(path, out);
}

void write_panel_binary(const PathPanel& panel, const std::string& path) {
    std::string buf(kPanelMagic, sizeof(kPanelMagic));
    const auto nt = panel.n_times();
    const std::uint64_t nc = 2 + panel.aux_labels.size();
    put_le<std::uint32_t>(buf, kPanelVersion);
    put_le<std::uint32_t>(buf, 0);
    put_le<std::uint64_t>(buf, panel.n_paths);
    put_le<std::uint64_t>(buf, nt);
    put_le<std::uint64_t>(buf, nc);
    put_le<std::uint64_t>(buf, panel.seed);
    for (double t : panel.partition.times) put_le<double>(buf, t);
    for (std::size_t p = 0; p < panel.n_paths; ++p) {
        for (std::size_t t = 0; t < nt; ++t) {
            put_le<double>(buf, panel.forward(p, t));
            put_le<double>(buf, panel.log_forward(p, t));
            for (std::size_t c = 0; c < panel.aux_labels.size(); ++c) put_le<double>(buf, panel.aux_value(p, t, c));
        }
    }
    write_file_atomic(path, buf);
}

PathPanel read_panel_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open panel file '" + path + "'");
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kPanelMagic, sizeof(magic)) != 0)
        throw std::runtime_error("'" + path + "' is not a panel file");
    if (get_le<std::uint32_t>(in) != kPanelVersion) throw std::runtime_error("unsupported panel version");
    get_le<std::uint32_t>(in);
    PathPanel panel;
    panel.n_paths = get_le<std::uint64_t>(in);
    const auto nt = get_le<std::uint64_t>(in);
    const auto nc = get_le<std::uint64_t>(in);
    panel.seed = get_le<std::uint64_t>(in);
    if (nc < 2) throw std::runtime_error("panel file has fewer than two components");
    panel.partition.times.resize(nt);
    for (auto& t : panel.partition.times) t = get_le<double>(in);
    panel.partition.label = "panel";
    for (std::uint64_t c = 2; c < nc; ++c) panel.aux_labels.push_back("aux" + std::to_string(c - 2));
    panel.F.resize(panel.n_paths * nt);
    panel.aux.resize(panel.n_paths * nt * (nc - 2));
    for (std::size_t p = 0; p < panel.n_paths; ++p) {
        for (std::size_t t = 0; t < nt; ++t) {
            panel.F[p * nt + t] = get_le<double>(in);
            get_le<double>(in);
            for (std::size_t c = 0; c + 2 < nc; ++c) panel.aux[(p * nt + t) * (nc - 2) + c] = get_le<double>(in);
        }
    }
    return panel;
}

unsigned resolve_threads(unsigned threads) {
    if (threads > 0) return threads;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t, std::size_t)>& fn) {
    if (n == 0) return;
    const auto workers = static_cast<std::size_t>(std::min<std::size_t>(resolve_threads(threads), n));
    if (workers <= 1) {
        fn(0, n);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back([&, w, begin, end] {
            try {
                fn(begin, end);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace diswap
