#include "diswap/verify.hpp"

#include "batch.hpp"
#include "diswap/hedging.hpp"
#include "diswap/model_pricer.hpp"
#include "diswap/stats.hpp"
#include "diswap/swaps.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace diswap {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::size_t kDualFormPaths = 1000;

// Realised-leg evaluator working on rows of a (time x instrument) value table.
class LegEvaluator {
public:
    LegEvaluator(const Characteristic& c, const std::vector<std::string>& universe) {
        const auto position = [&](const std::string& label) {
            const auto it = std::find(universe.begin(), universe.end(), label);
            return static_cast<std::size_t>(it - universe.begin());
        };
        if (const auto* classic = std::get_if<ClassicPayoff>(&c)) {
            classic_ = true;
            kind_ = classic->kind;
            if (kind_ == ClassicKind::NeubergerPsi)
                throw std::invalid_argument("NeubergerPsi needs a variance increment and has no simulated realised leg");
            map_ = {position("F")};
            return;
        }
        const auto& p = std::get<DiPayoff>(c);
        d_ = static_cast<std::size_t>(p.dim());
        for (const auto& label : p.labels()) map_.push_back(position(label));
        alpha_.assign(p.alpha().data(), p.alpha().data() + d_);
        beta_.assign(p.beta().data(), p.beta().data() + d_);
        gamma_.assign(p.gamma().data(), p.gamma().data() + d_);
        omega_.resize(d_ * d_);
        for (std::size_t a = 0; a < d_; ++a)
            for (std::size_t b = 0; b < d_; ++b) omega_[a * d_ + b] = p.omega()(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    }

    // One monitoring step between two rows of values and their logs.
    double step(const double* v0, const double* v1, const double* l0, const double* l1) const {
        if (classic_) return classic_eval(kind_, l1[map_[0]] - l0[map_[0]]);
        thread_local std::vector<double> dF;
        dF.resize(d_);
        double phi = 0.0;
        for (std::size_t j = 0; j < d_; ++j) {
            dF[j] = v1[map_[j]] - v0[map_[j]];
            phi += alpha_[j] * dF[j];
        }
        for (std::size_t a = 0; a < d_; ++a) {
            double row = 0.0;
            for (std::size_t b = 0; b < d_; ++b) row += omega_[a * d_ + b] * dF[b];
            phi += dF[a] * row;
        }
        for (std::size_t j = 0; j < d_; ++j) {
            if (beta_[j] == 0.0 && gamma_[j] == 0.0) continue;
            const double dx = l1[map_[j]] - l0[map_[j]];
            if (!std::isfinite(dx)) throw std::domain_error("log increment undefined for a non-positive component");
            phi += beta_[j] * std::expm1(dx) + gamma_[j] * dx;
        }
        return phi;
    }

    double leg(const std::vector<std::size_t>& idx, const double* values, const double* logs, std::size_t width) const {
        double total = 0.0;
        for (std::size_t i = 1; i < idx.size(); ++i)
            total += step(values + idx[i - 1] * width, values + idx[i] * width, logs + idx[i - 1] * width,
                          logs + idx[i] * width);
        return total;
    }

    // Same step with prices rebuilt from logs, phi(e^x1 - e^x0, x1 - x0). NaN if a
    // component is not positive.
    double dual_step(const double* l0, const double* l1) const {
        std::vector<double> f0(map_.size() ? *std::max_element(map_.begin(), map_.end()) + 1 : 0);
        std::vector<double> f1(f0.size());
        for (std::size_t j : map_) {
            if (std::isnan(l0[j]) || std::isnan(l1[j])) return kNaN;
            f0[j] = std::exp(l0[j]);
            f1[j] = std::exp(l1[j]);
        }
        return step(f0.data(), f1.data(), l0, l1);
    }

    bool classic() const { return classic_; }

private:
    bool classic_ = false;
    ClassicKind kind_ = ClassicKind::SquaredLogReturn;
    std::size_t d_ = 0;
    std::vector<std::size_t> map_;
    std::vector<double> alpha_, beta_, gamma_, omega_;
};

std::vector<std::string> label_union(const std::vector<Characteristic>& payoffs) {
    std::vector<std::string> labels;
    for (const auto& c : payoffs)
        for (const auto& l : required_labels(c))
            if (std::find(labels.begin(), labels.end(), l) == labels.end()) labels.push_back(l);
    return labels;
}

// Simulates paths on a grid and tabulates every instrument and its log.
class PathTable {
public:
    PathTable(const ModelSpec& model, const Partition& grid, std::vector<std::string> labels, std::uint64_t seed)
        : sampler_(model, grid, seed), pricer_(model, grid.maturity(), std::move(labels)) {}

    struct Workspace {
        PathSampler::Path path;
        std::vector<double> values;
        std::vector<double> logs;
    };

    void fill(std::size_t p, Workspace& ws) const {
        sampler_.sample(p, ws.path);
        const auto& times = sampler_.partition().times;
        const std::size_t w = width();
        ws.values.resize(times.size() * w);
        ws.logs.resize(times.size() * w);
        for (std::size_t i = 0; i < times.size(); ++i) {
            const double v = ws.path.v.empty() ? ModelPricer::kNoVariance : ws.path.v[i];
            double* row = ws.values.data() + i * w;
            pricer_.values(times[i], ws.path.F[i], v, row);
            for (std::size_t c = 0; c < w; ++c) ws.logs[i * w + c] = row[c] > 0.0 ? std::log(row[c]) : kNaN;
        }
    }

    std::size_t width() const { return pricer_.labels().size(); }
    const std::vector<std::string>& labels() const { return pricer_.labels(); }
    const ModelPricer& pricer() const { return pricer_; }
    const Partition& grid() const { return sampler_.partition(); }

private:
    PathSampler sampler_;
    ModelPricer pricer_;
};

Estimate to_estimate(const RunningStats& s) { return {s.mean, s.se(), s.n}; }

Matrix assemble_residual(const Vector& dJx, const Matrix& dH, const Vector& F) {
    const auto d = F.size();
    Matrix R(d, d);
    for (Eigen::Index a = 0; a < d; ++a) {
        if (!(F[a] > 0.0)) throw std::invalid_argument("pde_residual: price levels must be positive");
    }
    for (Eigen::Index a = 0; a < d; ++a) {
        const double ia = 1.0 / F[a];
        for (Eigen::Index b = 0; b < d; ++b) {
            const double ib = 1.0 / F[b];
            double r = dH(a, b) + dH(a, d + b) * ib + dH(d + a, b) * ia + dH(d + a, d + b) * (ia * ib);
            if (a == b) r -= dJx[a] * (ia * ia);
            R(a, b) = r;
        }
    }
    return R;
}

ResidualReport finish(std::vector<ResidualPoint> points, std::vector<Matrix> residuals, DerivativeMode mode, double h) {
    ResidualReport report;
    report.points = std::move(points);
    report.residuals = std::move(residuals);
    report.mode = mode;
    report.h = h;
    for (const auto& R : report.residuals) {
        if (!R.allFinite()) throw std::runtime_error("pde_residual: non-finite residual");
        report.max_norm = std::max(report.max_norm, R.norm());
    }
    return report;
}

void check_point(const ResidualPoint& pt, Eigen::Index d) {
    if (pt.F_hat.size() != d || pt.x_hat.size() != d || pt.F.size() != d)
        throw std::invalid_argument("pde_residual: point dimension mismatch");
    for (Eigen::Index j = 0; j < d; ++j)
        if (!(pt.F[j] > 0.0)) throw std::invalid_argument("pde_residual: price levels must be positive");
}

// Central-difference gradient and Hessian of phi over z = (dF, dx).
void fd_derivatives(const Candidate& phi, const Vector& z, Eigen::Index d, double h, Vector& J, Matrix& H) {
    const auto n = z.size();
    const auto f = [&](const Vector& at) { return phi(at.head(d), at.tail(d)); };
    Vector step(n);
    for (Eigen::Index i = 0; i < n; ++i) step[i] = h * std::max(1.0, std::abs(z[i]));
    const double f0 = f(z);
    J.resize(n);
    H.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        Vector up = z, dn = z;
        up[i] += step[i];
        dn[i] -= step[i];
        const double fu = f(up), fd = f(dn);
        J[i] = (fu - fd) / (2.0 * step[i]);
        H(i, i) = (fu - 2.0 * f0 + fd) / (step[i] * step[i]);
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            Vector pp = z, pm = z, mp = z, mm = z;
            pp[i] += step[i]; pp[j] += step[j];
            pm[i] += step[i]; pm[j] -= step[j];
            mp[i] -= step[i]; mp[j] += step[j];
            mm[i] -= step[i]; mm[j] -= step[j];
            H(i, j) = H(j, i) = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * step[i] * step[j]);
        }
    }
}

} // namespace

std::string describe(const Characteristic& c) {
    if (const auto* classic = std::get_if<ClassicPayoff>(&c)) return to_string(classic->kind);
    const auto& p = std::get<DiPayoff>(c);
    std::string s = "DiPayoff(";
    for (std::size_t i = 0; i < p.labels().size(); ++i) s += (i ? "," : "") + p.labels()[i];
    return s + ")";
}

std::vector<std::string> required_labels(const Characteristic& c) {
    if (std::holds_alternative<ClassicPayoff>(c)) return {"F"};
    return std::get<DiPayoff>(c).labels();
}

Estimate estimate_rate(const Characteristic& payoff, const ModelSpec& model, const Partition& partition,
                       std::size_t n_paths, std::uint64_t seed, unsigned threads) {
    if (n_paths < 1) throw std::invalid_argument("estimate_rate: n_paths must be at least 1");
    const PathTable table(model, partition, required_labels(payoff), seed);
    const LegEvaluator eval(payoff, table.labels());
    std::vector<std::size_t> all(partition.times.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    RunningStats stats;
    detail::batched_paths<double>(
        n_paths, threads,
        [&](std::size_t p, double& out) {
            PathTable::Workspace ws;
            table.fill(p, ws);
            out = eval.leg(all, ws.values.data(), ws.logs.data(), table.width());
        },
        [&](std::size_t, double leg) { stats.add(leg); });
    return to_estimate(stats);
}

double paired_z(const Estimate& difference, double scale) {
    if (difference.se > 0.0) return difference.mean / difference.se;
    return std::abs(difference.mean) <= 1e-12 * std::max(1.0, std::abs(scale)) ? 0.0
                                                                               : std::numeric_limits<double>::infinity();
}

double dual_form(const DiPayoff& payoff, const Vector& x_prev, const Vector& x_curr) {
    if (x_prev.size() != payoff.dim() || x_curr.size() != payoff.dim())
        throw std::invalid_argument("dual_form: dimension mismatch");
    Increment inc{x_curr.array().exp().matrix() - x_prev.array().exp().matrix(), x_curr - x_prev};
    return payoff.evaluate(inc);
}

std::vector<ApVerdict> ap_check(const std::vector<Characteristic>& payoffs, const ModelSpec& model,
                                const std::vector<Partition>& partitions, std::size_t n_paths, std::uint64_t seed,
                                double z_threshold, unsigned threads) {
    if (!(z_threshold > 0.0)) throw std::invalid_argument("ap_check: z threshold must be positive");
    if (payoffs.empty()) throw std::invalid_argument("ap_check: no pay-offs");
    if (partitions.empty()) throw std::invalid_argument("ap_check: need at least one partition besides the trivial one");
    if (n_paths < 2) throw std::invalid_argument("ap_check: need at least two paths");
    const double T = partitions.front().maturity();
    Partition trivial = regular_partition(1, T);
    trivial.label = "trivial";
    std::vector<Partition> all{trivial};
    all.insert(all.end(), partitions.begin(), partitions.end());
    const Partition grid = union_of(all);
    std::vector<std::vector<std::size_t>> idx;
    for (const auto& p : all) idx.push_back(restriction_indices(grid, p));

    const PathTable table(model, grid, label_union(payoffs), seed);
    std::vector<LegEvaluator> evals;
    for (const auto& c : payoffs) evals.emplace_back(c, table.labels());
    const std::size_t np = payoffs.size();
    const std::size_t ns = all.size();
    const std::size_t w = table.width();

    struct Slot {
        std::vector<double> legs;
        std::vector<double> dual_error;
        std::vector<std::size_t> dual_steps;
    };
    std::vector<RunningStats> legs(np * ns), diffs(np * ns);
    std::vector<double> dual_error(np, 0.0);
    std::vector<std::size_t> dual_steps(np, 0);

    detail::batched_paths<Slot>(
        n_paths, threads,
        [&](std::size_t p, Slot& s) {
            PathTable::Workspace ws;
            table.fill(p, ws);
            s.legs.resize(np * ns);
            s.dual_error.assign(np, 0.0);
            s.dual_steps.assign(np, 0);
            for (std::size_t k = 0; k < np; ++k) {
                for (std::size_t j = 0; j < ns; ++j)
                    s.legs[k * ns + j] = evals[k].leg(idx[j], ws.values.data(), ws.logs.data(), w);
                if (p >= kDualFormPaths || evals[k].classic()) continue;
                for (std::size_t i = 1; i < grid.times.size(); ++i) {
                    const double* l0 = ws.logs.data() + (i - 1) * w;
                    const double* l1 = ws.logs.data() + i * w;
                    const double dual = evals[k].dual_step(l0, l1);
                    if (std::isnan(dual)) continue;
                    const double direct = evals[k].step(ws.values.data() + (i - 1) * w, ws.values.data() + i * w, l0, l1);
                    s.dual_error[k] = std::max(s.dual_error[k], std::abs(dual - direct) / std::max(1.0, std::abs(direct)));
                    ++s.dual_steps[k];
                }
            }
        },
        [&](std::size_t, const Slot& s) {
            for (std::size_t k = 0; k < np; ++k) {
                for (std::size_t j = 0; j < ns; ++j) {
                    legs[k * ns + j].add(s.legs[k * ns + j]);
                    diffs[k * ns + j].add(s.legs[k * ns + j] - s.legs[k * ns]);
                }
                dual_error[k] = std::max(dual_error[k], s.dual_error[k]);
                dual_steps[k] += s.dual_steps[k];
            }
        });

    std::vector<ApVerdict> verdicts;
    for (std::size_t k = 0; k < np; ++k) {
        ApVerdict v;
        v.payoff_label = describe(payoffs[k]);
        v.model_label = model.label();
        v.z_threshold = z_threshold;
        v.reference = to_estimate(legs[k * ns]);
        for (std::size_t j = 1; j < ns; ++j) {
            PartitionEstimate pe;
            pe.label = all[j].label;
            pe.leg = to_estimate(legs[k * ns + j]);
            pe.difference = to_estimate(diffs[k * ns + j]);
            pe.z = paired_z(pe.difference, v.reference.mean);
            v.max_abs_z = std::max(v.max_abs_z, std::abs(pe.z));
            v.partitions.push_back(pe);
        }
        v.pass = v.max_abs_z < z_threshold;
        v.dual_form_steps = dual_steps[k];
        v.dual_form_max_error = dual_steps[k] > 0 ? dual_error[k] : kNaN;
        verdicts.push_back(std::move(v));
    }
    return verdicts;
}

ApVerdict ap_check(const Characteristic& payoff, const ModelSpec& model, const std::vector<Partition>& partitions,
                   std::size_t n_paths, std::uint64_t seed, double z_threshold, unsigned threads) {
    return ap_check(std::vector<Characteristic>{payoff}, model, partitions, n_paths, seed, z_threshold, threads).front();
}

DeltaReport delta_n(const Characteristic& payoff, const ModelSpec& model, const Partition& partition,
                    std::size_t n_paths, int fine_factor, std::uint64_t seed, unsigned threads) {
    if (fine_factor < 2) throw std::invalid_argument("delta_n: fine_factor must be at least 2");
    if (n_paths < 2) throw std::invalid_argument("delta_n: need at least two paths");
    const Partition fine = subdivide(partition, fine_factor);
    const auto coarse_idx = restriction_indices(fine, partition);
    std::vector<std::size_t> fine_idx(fine.times.size());
    for (std::size_t i = 0; i < fine_idx.size(); ++i) fine_idx[i] = i;
    const PathTable table(model, fine, required_labels(payoff), seed);
    const LegEvaluator eval(payoff, table.labels());

    RunningStats coarse, refined, delta;
    detail::batched_paths<std::pair<double, double>>(
        n_paths, threads,
        [&](std::size_t p, std::pair<double, double>& out) {
            PathTable::Workspace ws;
            table.fill(p, ws);
            out.first = eval.leg(coarse_idx, ws.values.data(), ws.logs.data(), table.width());
            out.second = eval.leg(fine_idx, ws.values.data(), ws.logs.data(), table.width());
        },
        [&](std::size_t, const std::pair<double, double>& legs) {
            coarse.add(legs.first);
            refined.add(legs.second);
            delta.add(legs.first - legs.second);
        });
    return {to_estimate(delta), to_estimate(coarse), to_estimate(refined), fine_factor};
}

FrequencyEstimate frequency_estimate(const DiPayoff& payoff, const ModelSpec& model, const Partition& fine,
                                     const Partition& coarse, std::size_t n_paths, std::uint64_t seed,
                                     unsigned threads) {
    if (n_paths < 2) throw std::invalid_argument("frequency_estimate: need at least two paths");
    const auto coarse_idx = restriction_indices(fine, coarse);
    std::vector<std::size_t> fine_idx(fine.times.size());
    for (std::size_t i = 0; i < fine_idx.size(); ++i) fine_idx[i] = i;
    const PathTable table(model, fine, payoff.labels(), seed);
    const LegEvaluator eval(Characteristic{payoff}, table.labels());
    RunningStats diff;
    double max_abs = 0.0;
    detail::batched_paths<double>(
        n_paths, threads,
        [&](std::size_t p, double& out) {
            PathTable::Workspace ws;
            table.fill(p, ws);
            out = eval.leg(fine_idx, ws.values.data(), ws.logs.data(), table.width()) -
                  eval.leg(coarse_idx, ws.values.data(), ws.logs.data(), table.width());
        },
        [&](std::size_t, double d) {
            diff.add(d);
            max_abs = std::max(max_abs, std::abs(d));
        });
    return {to_estimate(diff), max_abs};
}

Candidate as_candidate(const DiPayoff& payoff) {
    return [payoff](const Vector& dF, const Vector& dx) { return payoff.evaluate(Increment{dF, dx}); };
}

Candidate as_candidate(ClassicKind kind) {
    if (kind == ClassicKind::NeubergerPsi)
        throw std::invalid_argument("NeubergerPsi is not a function of the log return alone");
    return [kind](const Vector&, const Vector& dx) { return classic_eval(kind, dx[0]); };
}

ResidualReport pde_residual(const DiPayoff& payoff, const std::vector<ResidualPoint>& points) {
    const auto d = payoff.dim();
    std::vector<Matrix> residuals;
    for (const auto& pt : points) {
        check_point(pt, d);
        Vector dJx(d);
        Matrix dH = Matrix::Zero(2 * d, 2 * d);
        for (Eigen::Index j = 0; j < d; ++j) {
            const double shift = payoff.beta()[j] * std::expm1(pt.x_hat[j]);
            dJx[j] = shift;
            dH(d + j, d + j) = shift;
        }
        residuals.push_back(assemble_residual(dJx, dH, pt.F));
    }
    return finish(points, std::move(residuals), DerivativeMode::Analytic, 0.0);
}

ResidualReport pde_residual(ClassicKind kind, const std::vector<ResidualPoint>& points) {
    std::vector<Matrix> residuals;
    for (const auto& pt : points) {
        check_point(pt, 1);
        const auto shifts = classic_derivative_shifts(kind, pt.x_hat[0]);
        Vector dJx(1);
        dJx[0] = shifts.d1;
        Matrix dH = Matrix::Zero(2, 2);
        dH(1, 1) = shifts.d2;
        residuals.push_back(assemble_residual(dJx, dH, pt.F));
    }
    return finish(points, std::move(residuals), DerivativeMode::Analytic, 0.0);
}

ResidualReport pde_residual_fd(const Candidate& phi, Eigen::Index dim, const std::vector<ResidualPoint>& points,
                               double h) {
    if (!(h > 0.0)) throw std::invalid_argument("pde_residual_fd: step must be positive");
    std::vector<Matrix> residuals;
    Vector J0, J;
    Matrix H0, H;
    fd_derivatives(phi, Vector::Zero(2 * dim), dim, h, J0, H0);
    for (const auto& pt : points) {
        check_point(pt, dim);
        Vector z(2 * dim);
        z << pt.F_hat, pt.x_hat;
        fd_derivatives(phi, z, dim, h, J, H);
        residuals.push_back(assemble_residual((J - J0).tail(dim), H - H0, pt.F));
    }
    return finish(points, std::move(residuals), DerivativeMode::FiniteDifference, h);
}

ConvergenceStudy fd_convergence(const Candidate& phi, Eigen::Index dim, const std::vector<ResidualPoint>& points,
                                const std::vector<double>& steps) {
    if (steps.size() < 2) throw std::invalid_argument("fd_convergence: need at least two steps");
    ConvergenceStudy study;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (double h : steps) {
        const double norm = pde_residual_fd(phi, dim, points, h).max_norm;
        study.h.push_back(h);
        study.max_norm.push_back(norm);
        const double lx = std::log(h), ly = std::log(norm);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double n = static_cast<double>(steps.size());
    study.order = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    study.constant = std::exp((sy - study.order * sx) / n);
    return study;
}

std::vector<ResidualPoint> random_points(Eigen::Index dim, std::size_t count, std::uint64_t seed) {
    auto rng = path_rng(seed, 0x9E5u);
    std::uniform_real_distribution<double> level(0.5, 2.0), jump(-0.5, 0.5), ret(-0.3, 0.3);
    std::vector<ResidualPoint> points;
    for (std::size_t i = 0; i < count; ++i) {
        ResidualPoint pt{Vector(dim), Vector(dim), Vector(dim)};
        for (Eigen::Index j = 0; j < dim; ++j) {
            pt.F[j] = level(rng);
            pt.F_hat[j] = jump(rng);
            pt.x_hat[j] = ret(rng);
        }
        points.push_back(std::move(pt));
    }
    return points;
}

PremiumReport premium_study(const Characteristic& payoff, const ModelSpec& model, const Partition& partition,
                            std::size_t n_paths, std::uint64_t seed, unsigned threads) {
    if (n_paths < 2) throw std::invalid_argument("premium_study: need at least two paths");
    std::vector<std::size_t> all(partition.times.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    const auto labels = required_labels(payoff);
    const PathTable physical(model, partition, labels, seed);
    const LegEvaluator eval(payoff, physical.labels());
    const std::size_t w = physical.width();
    const std::size_t nt = partition.times.size();

    PremiumReport report;
    report.times = partition.times;
    RunningStats realised;

    if (std::holds_alternative<ClassicPayoff>(payoff)) {
        report.method = "paired";
        const PathTable pricing(model.risk_neutral(), partition, labels, seed);
        RunningStats fair, premium;
        detail::batched_paths<std::pair<double, double>>(
            n_paths, threads,
            [&](std::size_t p, std::pair<double, double>& out) {
                PathTable::Workspace ws;
                physical.fill(p, ws);
                out.first = eval.leg(all, ws.values.data(), ws.logs.data(), w);
                pricing.fill(p, ws);
                out.second = eval.leg(all, ws.values.data(), ws.logs.data(), w);
            },
            [&](std::size_t, const std::pair<double, double>& legs) {
                realised.add(legs.first);
                fair.add(legs.second);
                premium.add(legs.first - legs.second);
            });
        report.fair_value = fair.mean;
        report.fair_value_se = fair.se();
        report.premium = premium.mean;
        report.premium_se = premium.se();
    } else {
        report.method = "fair-value";
        const auto& di = std::get<DiPayoff>(payoff);
        const ModelPricer& pricer = physical.pricer();
        report.fair_value = fair_value(di, pricer.state(0.0, model.F0)).value;
        struct Slot {
            double leg = 0.0;
            std::vector<double> realised, implied;
        };
        std::vector<RunningStats> realised_t(nt), implied_t(nt);
        detail::batched_paths<Slot>(
            n_paths, threads,
            [&](std::size_t p, Slot& s) {
                PathTable::Workspace ws;
                physical.fill(p, ws);
                s.leg = eval.leg(all, ws.values.data(), ws.logs.data(), w);
                s.realised.assign(nt, 0.0);
                s.implied.assign(nt, 0.0);
                const auto var = [&](std::size_t i) { return ws.path.v.empty() ? ModelPricer::kNoVariance : ws.path.v[i]; };
                MarketState prev = pricer.state(partition.times[0], ws.path.F[0], var(0));
                for (std::size_t i = 1; i < nt; ++i) {
                    MarketState curr = pricer.state(partition.times[i], ws.path.F[i], var(i));
                    const auto parts = decompose(di, prev, curr);
                    s.realised[i] = s.realised[i - 1] + parts.realised;
                    s.implied[i] = s.implied[i - 1] + parts.implied;
                    prev = std::move(curr);
                }
            },
            [&](std::size_t, const Slot& s) {
                realised.add(s.leg);
                for (std::size_t i = 0; i < nt; ++i) {
                    realised_t[i].add(s.realised[i]);
                    implied_t[i].add(s.implied[i]);
                }
            });
        report.fair_value_se = 0.0;
        report.premium = realised.mean - report.fair_value;
        report.premium_se = realised.se();
        for (std::size_t i = 0; i < nt; ++i) {
            report.realised_series.push_back(realised_t[i].mean);
            report.implied_series.push_back(implied_t[i].mean);
        }
    }
    report.realised = to_estimate(realised);
    report.realised_variance = realised.variance();
    return report;
}

} // namespace diswap
