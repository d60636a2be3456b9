#include "roughavg/averaging.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <random>
#include <span>
#include <string>

#include "roughavg/errors.hpp"
#include "roughavg/parallel.hpp"
#include "roughavg/rng.hpp"

namespace roughavg {

namespace {

using Index = Eigen::Index;

Index idx(std::size_t i) { return static_cast<Index>(i); }

std::size_t steps_for(double span, double dt, const char* field) {
    if (!(dt > 0.0)) throw ConfigError("time step must be positive", field);
    const double ratio = span / dt;
    const auto n = static_cast<std::size_t>(std::llround(ratio));
    if (n == 0 || std::abs(ratio - static_cast<double>(n)) > 1e-6 * std::max(1.0, ratio)) {
        throw ConfigError("span " + std::to_string(span) + " is not a multiple of dt " + std::to_string(dt), field);
    }
    return n;
}

void validate(const FbarOptions& o) {
    if (!(o.burn_in >= 0.0)) throw ConfigError("burn_in must be nonnegative", "burn_in");
    if (!(o.horizon > o.burn_in)) throw ConfigError("horizon must exceed burn_in", "horizon");
    if (o.replicas == 0) throw ConfigError("replicas must be positive", "replicas");
}

Vec initial_phi(const CoefficientSet& coeffs, const std::optional<Vec>& phi0) {
    if (!phi0) return Vec::Zero(idx(coeffs.n));
    if (static_cast<std::size_t>(phi0->size()) != coeffs.n) throw ConfigError("phi0 must have n entries", "phi0");
    return *phi0;
}

// Ito Euler-Maruyama for the frozen equation, one replica stream at a time.
class FrozenStepper {
public:
    FrozenStepper(const CoefficientSet& coeffs, const Vec& xi, double dt, Engine rng)
        : coeffs_(coeffs), xi_(xi), dt_(dt), sqdt_(std::sqrt(dt)), rng_(std::move(rng)),
          dw_(idx(coeffs.dp)) {}

    void step(Vec& y, std::size_t k) {
        for (Index j = 0; j < dw_.size(); ++j) dw_(j) = sqdt_ * normal_(rng_);
        y += ito_correction(coeffs_, xi_, y) * dt_ + coeffs_.eval_h(xi_, y) * dw_;
        if (!y.allFinite()) throw DivergenceError("frozen Euler-Maruyama produced a non-finite state", k);
    }

private:
    const CoefficientSet& coeffs_;
    const Vec& xi_;
    double dt_;
    double sqdt_;
    Engine rng_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    Vec dw_;
};

Vec tree_sum_rows(const std::vector<Vec>& xs) {
    const Index m = xs.front().size();
    Vec out(m);
    std::vector<double> col(xs.size());
    for (Index c = 0; c < m; ++c) {
        for (std::size_t r = 0; r < xs.size(); ++r) col[r] = xs[r](c);
        out(c) = tree_sum(col);
    }
    return out;
}

} // namespace

FrozenEnsemble sample_frozen_ensemble(const CoefficientSet& coeffs, const Vec& xi, const FbarOptions& options,
                                      std::size_t record_every) {
    validate(options);
    if (record_every == 0) throw ConfigError("record_every must be positive", "record_every");
    const std::size_t n = steps_for(options.horizon, options.dt, "horizon");
    const auto first = static_cast<std::size_t>(std::ceil(options.burn_in / options.dt - 1e-9));
    const Vec phi0 = initial_phi(coeffs, options.phi0);
    std::vector<std::vector<Vec>> per(options.replicas);
    parallel_for(options.replicas, [&](std::size_t r) {
        FrozenStepper stepper(coeffs, xi, options.dt, make_engine(options.seed, {tag(StreamTag::fbar), r}));
        Vec y = phi0;
        for (std::size_t k = 0; k <= n; ++k) {
            if (k >= first && (k - first) % record_every == 0) per[r].push_back(y);
            if (k < n) stepper.step(y, k + 1);
        }
    }, options.workers);
    FrozenEnsemble ens;
    ens.xi = xi;
    ens.burn_in = options.burn_in;
    ens.horizon = options.horizon;
    ens.replicas = options.replicas;
    for (auto& p : per) std::move(p.begin(), p.end(), std::back_inserter(ens.samples));
    return ens;
}

FbarEstimate estimate_fbar(const CoefficientSet& coeffs, const Vec& xi, const FbarOptions& options) {
    validate(options);
    if (static_cast<std::size_t>(xi.size()) != coeffs.m) throw ConfigError("xi must have m entries", "xi");
    const std::size_t n = steps_for(options.horizon, options.dt, "horizon");
    const auto first = static_cast<std::size_t>(std::ceil(options.burn_in / options.dt - 1e-9));
    const Vec phi0 = initial_phi(coeffs, options.phi0);
    std::vector<Vec> means(options.replicas);
    parallel_for(options.replicas, [&](std::size_t r) {
        FrozenStepper stepper(coeffs, xi, options.dt, make_engine(options.seed, {tag(StreamTag::fbar), r}));
        Vec y = phi0;
        Vec acc = Vec::Zero(idx(coeffs.m));
        for (std::size_t k = 0; k <= n; ++k) {
            if (k >= first) acc += coeffs.eval_f(xi, y);
            if (k < n) stepper.step(y, k + 1);
        }
        means[r] = acc / static_cast<double>(n + 1 - first);
    }, options.workers);

    const double reps = static_cast<double>(options.replicas);
    FbarEstimate est;
    est.value = tree_sum_rows(means) / reps;
    std::vector<Vec> sq(means.size());
    for (std::size_t r = 0; r < means.size(); ++r) sq[r] = (means[r] - est.value).array().square().matrix();
    est.std_error = options.replicas > 1 ? Vec((tree_sum_rows(sq) / (reps * (reps - 1.0))).array().sqrt())
                                         : Vec::Zero(est.value.size());
    est.samples = options.replicas * (n + 1 - first);
    return est;
}

std::string to_string(FbarStrategy strategy) {
    switch (strategy) {
    case FbarStrategy::on_the_fly: return "on_the_fly";
    case FbarStrategy::tabulated: return "tabulated";
    case FbarStrategy::analytic: return "analytic";
    }
    return "unknown";
}

FbarStrategy fbar_strategy_from_string(const std::string& s) {
    if (s == "on_the_fly") return FbarStrategy::on_the_fly;
    if (s == "tabulated") return FbarStrategy::tabulated;
    if (s == "analytic") return FbarStrategy::analytic;
    throw ConfigError("unknown fbar strategy '" + s + "'", "fbar_strategy");
}

struct AveragedDrift::Cache {
    std::mutex mutex;
    std::map<std::vector<double>, Vec> values;
};

AveragedDrift AveragedDrift::tabulate(const CoefficientSet& coeffs, const LatticeSpec& lattice,
                                      const FbarOptions& options) {
    const std::size_t m = coeffs.m;
    if (static_cast<std::size_t>(lattice.lower.size()) != m || static_cast<std::size_t>(lattice.upper.size()) != m) {
        throw ConfigError("lattice box must have m coordinates", "lattice");
    }
    if (lattice.points_per_dim < 2) throw ConfigError("lattice needs at least 2 points per dimension", "lattice");
    if (!((lattice.upper - lattice.lower).array() > 0.0).all()) throw ConfigError("lattice box is empty", "lattice");
    std::size_t total = 1;
    for (std::size_t k = 0; k < m; ++k) total *= lattice.points_per_dim;

    AveragedDrift out;
    out.strategy_ = FbarStrategy::tabulated;
    out.m_ = m;
    out.lattice_ = lattice;
    out.options_ = options;
    out.table_.resize(total);
    out.table_se_.resize(total);
    FbarOptions inner = options;
    inner.workers = 1;
    const double steps = static_cast<double>(lattice.points_per_dim - 1);
    parallel_for(total, [&](std::size_t flat) {
        Vec xi(idx(m));
        std::size_t rest = flat;
        for (std::size_t k = 0; k < m; ++k) {
            const std::size_t i = rest % lattice.points_per_dim;
            rest /= lattice.points_per_dim;
            xi(idx(k)) = lattice.lower(idx(k)) + (lattice.upper(idx(k)) - lattice.lower(idx(k))) * static_cast<double>(i) / steps;
        }
        const FbarEstimate est = estimate_fbar(coeffs, xi, inner);
        out.table_[flat] = est.value;
        out.table_se_[flat] = est.std_error;
    }, options.workers);
    return out;
}

AveragedDrift AveragedDrift::on_the_fly(const CoefficientSet& coeffs, const FbarOptions& options) {
    validate(options);
    AveragedDrift out;
    out.strategy_ = FbarStrategy::on_the_fly;
    out.m_ = coeffs.m;
    out.options_ = options;
    out.options_.workers = 1;
    out.coeffs_ = std::make_shared<const CoefficientSet>(coeffs);
    out.cache_ = std::make_shared<Cache>();
    return out;
}

AveragedDrift AveragedDrift::analytic(std::function<Vec(const Vec&)> fbar, std::size_t m) {
    if (!fbar) throw ConfigError("analytic fbar requires a closed form", "fbar_strategy");
    AveragedDrift out;
    out.strategy_ = FbarStrategy::analytic;
    out.m_ = m;
    out.exact_ = std::move(fbar);
    return out;
}

Vec AveragedDrift::interpolate(const Vec& xi) const {
    const std::size_t m = m_;
    const std::size_t p = lattice_.points_per_dim;
    std::vector<std::size_t> base(m);
    std::vector<double> frac(m);
    for (std::size_t k = 0; k < m; ++k) {
        const double lo = lattice_.lower(idx(k));
        const double hi = lattice_.upper(idx(k));
        const double x = xi(idx(k));
        if (!(x >= lo && x <= hi)) {
            throw DomainError("f-bar queried at " + std::to_string(x) + " outside the tabulated box [" +
                              std::to_string(lo) + ", " + std::to_string(hi) + "]");
        }
        const double u = (x - lo) / (hi - lo) * static_cast<double>(p - 1);
        const auto i = std::min(static_cast<std::size_t>(u), p - 2);
        base[k] = i;
        frac[k] = u - static_cast<double>(i);
    }
    Vec out = Vec::Zero(idx(m));
    for (std::size_t corner = 0; corner < (std::size_t{1} << m); ++corner) {
        double weight = 1.0;
        std::size_t flat = 0;
        std::size_t scale = 1;
        for (std::size_t k = 0; k < m; ++k) {
            const bool up = (corner >> k) & 1U;
            weight *= up ? frac[k] : 1.0 - frac[k];
            flat += (base[k] + (up ? 1 : 0)) * scale;
            scale *= p;
        }
        if (weight != 0.0) out += weight * table_[flat];
    }
    return out;
}

Vec AveragedDrift::operator()(const Vec& xi) const {
    if (static_cast<std::size_t>(xi.size()) != m_) throw ConfigError("f-bar argument must have m entries", "xi");
    switch (strategy_) {
    case FbarStrategy::analytic: return exact_(xi);
    case FbarStrategy::tabulated: return interpolate(xi);
    case FbarStrategy::on_the_fly: {
        std::vector<double> key(xi.data(), xi.data() + xi.size());
        {
            std::lock_guard lock(cache_->mutex);
            if (auto it = cache_->values.find(key); it != cache_->values.end()) return it->second;
        }
        Vec value = estimate_fbar(*coeffs_, xi, options_).value;
        std::lock_guard lock(cache_->mutex);
        cache_->values.emplace(std::move(key), value);
        return value;
    }
    }
    throw ConfigError("unknown fbar strategy", "fbar_strategy");
}

nlohmann::json AveragedDrift::to_json() const {
    nlohmann::json j;
    j["strategy"] = to_string(strategy_);
    j["m"] = m_;
    if (strategy_ != FbarStrategy::analytic) {
        j["estimator"] = {{"burn_in", options_.burn_in}, {"horizon", options_.horizon},
                          {"replicas", options_.replicas}, {"dt", options_.dt}, {"seed", options_.seed}};
    }
    if (strategy_ == FbarStrategy::tabulated) {
        j["lattice"] = {{"lower", std::vector<double>(lattice_.lower.data(), lattice_.lower.data() + m_)},
                        {"upper", std::vector<double>(lattice_.upper.data(), lattice_.upper.data() + m_)},
                        {"points_per_dim", lattice_.points_per_dim}};
        auto values = nlohmann::json::array();
        auto errors = nlohmann::json::array();
        for (std::size_t i = 0; i < table_.size(); ++i) {
            values.push_back(std::vector<double>(table_[i].data(), table_[i].data() + table_[i].size()));
            errors.push_back(std::vector<double>(table_se_[i].data(), table_se_[i].data() + table_se_[i].size()));
        }
        j["values"] = std::move(values);
        j["std_error"] = std::move(errors);
    }
    return j;
}

Path solve_averaged(const AveragedDrift& fbar, const CoefficientSet& coeffs, const RoughLift& lift, const Vec& x0) {
    if (lift.block_dims().fbm != coeffs.d) throw ConfigError("lift fBm block does not match d", "lift");
    if (static_cast<std::size_t>(x0.size()) != coeffs.m) throw ConfigError("x0 must have m entries", "initial_state");
    const Grid& grid = lift.coarse_grid();
    const double dt = grid.dt();
    const std::size_t d = coeffs.d;
    Path out(grid, coeffs.m);
    out.values.row(0) = x0.transpose();
    Vec x = x0;
    for (std::size_t k = 0; k < grid.n_steps(); ++k) {
        const Mat sig = coeffs.eval_sigma(x);
        Vec next = x + fbar(x) * dt + sig * lift.increment(k, k + 1).head(idx(d));
        next += levy_correction(sig, coeffs.eval_sigma_jacobian(x),
                                lift.second_level(k, k + 1).topLeftCorner(idx(d), idx(d)));
        if (!next.allFinite()) throw DivergenceError("averaged rough Euler produced a non-finite state", k + 1);
        x = std::move(next);
        out.values.row(idx(k + 1)) = x.transpose();
    }
    return out;
}

double breakpoint(double s, double delta) {
    if (!(delta > 0.0)) throw DomainError("delta must be positive");
    if (!(s >= 0.0)) throw DomainError("breakpoint time must be nonnegative");
    return std::floor(s / delta + 1e-9) * delta;
}

KhasminskiiPaths khasminskii_auxiliary(const CoefficientSet& coeffs, const FastSlowSolution& sol, double delta,
                                       const RoughLift& lift, const GaussianPath& bm_fine) {
    const Grid& grid = lift.coarse_grid();
    if (!(sol.x.grid == grid)) throw ConfigError("slow solution is not on the lift's coarse grid", "lift");
    const double dt = grid.dt();
    if (delta < dt * (1.0 - 1e-9)) throw ConfigError("delta must be at least the coarse step", "delta");
    const std::size_t q = sol.substep_factor;
    const std::size_t fine_factor = lift.fine_factor();
    if (q == 0 || fine_factor % q != 0) throw ConfigError("substep_factor must divide fine_factor", "substep_factor");
    if (grid.nesting_factor(bm_fine.grid()) != fine_factor) throw ConfigError("Bm path is not on the fine grid", "bm");
    const std::size_t stride = fine_factor / q;
    const double hs = dt / static_cast<double>(q);
    const double inv_eps = 1.0 / sol.eps;
    const double inv_sqrt_eps = 1.0 / std::sqrt(sol.eps);
    const std::size_t d = coeffs.d;
    const Eigen::MatrixXd& w = bm_fine.values();
    const Grid sub_grid = grid.refine(q);

    auto frozen_node = [&](std::size_t sub) {
        const double bp = breakpoint(sub_grid.time(sub) - grid.t_start(), delta);
        return std::min(static_cast<std::size_t>(std::floor(bp / dt + 1e-9)), grid.n_steps());
    };

    KhasminskiiPaths out{Path(grid, coeffs.m), Path(grid, coeffs.n), Path(sub_grid, coeffs.n)};
    Vec x_hat = sol.x.at(0);
    Vec y = sol.y.at(0);
    out.x_hat.values.row(0) = x_hat.transpose();
    out.y_hat.values.row(0) = y.transpose();
    out.y_hat_fast.values.row(0) = y.transpose();
    for (std::size_t k = 0; k < grid.n_steps(); ++k) {
        Vec f_integral = Vec::Zero(idx(coeffs.m));
        for (std::size_t s = 0; s < q; ++s) {
            const std::size_t sub = k * q + s;
            const Vec xf = sol.x.at(frozen_node(sub));
            const Vec dw = (w.row(idx((sub + 1) * stride)) - w.row(idx(sub * stride))).transpose();
            const Vec f_left = coeffs.eval_f(xf, y);
            Vec y_next = y + ito_correction(coeffs, xf, y) * (hs * inv_eps) + coeffs.eval_h(xf, y) * dw * inv_sqrt_eps;
            if (!y_next.allFinite()) throw DivergenceError("auxiliary fast process produced a non-finite state", k + 1);
            f_integral += 0.5 * hs * (f_left + coeffs.eval_f(xf, y_next));
            y = std::move(y_next);
            out.y_hat_fast.values.row(idx(sub + 1)) = y.transpose();
        }
        const Vec xk = sol.x.at(k);
        const Mat sig = coeffs.eval_sigma(xk);
        x_hat += f_integral + sig * lift.increment(k, k + 1).head(idx(d));
        x_hat += levy_correction(sig, coeffs.eval_sigma_jacobian(xk),
                                 lift.second_level(k, k + 1).topLeftCorner(idx(d), idx(d)));
        out.x_hat.values.row(idx(k + 1)) = x_hat.transpose();
        out.y_hat.values.row(idx(k + 1)) = y.transpose();
    }
    return out;
}

MixingReport mixing_probe(const CoefficientSet& coeffs, const Vec& xi, const MixingOptions& options) {
    if (options.replicas == 0) throw ConfigError("replicas must be positive", "replicas");
    if (!(options.horizon > options.burn_in) || options.burn_in < 0.0) {
        throw ConfigError("horizon must exceed burn_in", "horizon");
    }
    if (options.component >= coeffs.m) throw ConfigError("component out of range", "component");
    const std::size_t n = steps_for(options.horizon, options.dt, "horizon");
    const auto first = static_cast<std::size_t>(std::ceil(options.burn_in / options.dt - 1e-9));
    const std::size_t kept = n + 1 - first;
    std::vector<std::size_t> lag_steps{0};
    MixingReport report;
    report.lags.push_back(0.0);
    for (double lag : options.lags) {
        if (!(lag > 0.0)) throw ConfigError("lags must be positive", "lags");
        const std::size_t l = steps_for(lag, options.dt, "lags");
        if (l >= kept) throw ConfigError("lag exceeds the recorded window", "lags");
        lag_steps.push_back(l);
        report.lags.push_back(lag);
    }
    const Vec phi0 = initial_phi(coeffs, options.phi0);
    const auto comp = idx(options.component);

    std::vector<std::vector<double>> series(options.replicas);
    parallel_for(options.replicas, [&](std::size_t r) {
        FrozenStepper stepper(coeffs, xi, options.dt, make_engine(options.seed, {tag(StreamTag::probe), r}));
        Vec y = phi0;
        auto& a = series[r];
        a.reserve(kept);
        for (std::size_t k = 0; k <= n; ++k) {
            if (k >= first) a.push_back(coeffs.eval_f(xi, y)(comp));
            if (k < n) stepper.step(y, k + 1);
        }
    }, options.workers);

    std::vector<double> sums(options.replicas);
    for (std::size_t r = 0; r < options.replicas; ++r) sums[r] = tree_sum(series[r]);
    const double mean = tree_sum(sums) / static_cast<double>(options.replicas * kept);
    report.stationary_mean = mean;
    for (std::size_t l : lag_steps) {
        std::vector<double> per(options.replicas);
        std::vector<double> prod(kept);
        for (std::size_t r = 0; r < options.replicas; ++r) {
            const auto& a = series[r];
            const std::size_t count = kept - l;
            for (std::size_t i = 0; i < count; ++i) prod[i] = (a[i] - mean) * (a[i + l] - mean);
            per[r] = tree_sum(std::span<const double>(prod.data(), count));
        }
        report.autocov.push_back(tree_sum(per) / static_cast<double>(options.replicas * (kept - l)));
    }
    report.stationary_variance = report.autocov.front();
    if (coeffs.beta1) report.beta1_half = *coeffs.beta1 / 2.0;

    // least squares on log C(lag) = c - rate * lag over positive values
    const double floor = 1e-12 * (1.0 + mean * mean);
    if (report.autocov.front() > floor) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        std::size_t count = 0;
        for (std::size_t i = 0; i < report.lags.size(); ++i) {
            if (!(report.autocov[i] > floor)) continue;
            const double x = report.lags[i];
            const double yv = std::log(report.autocov[i]);
            sx += x;
            sy += yv;
            sxx += x * x;
            sxy += x * yv;
            ++count;
        }
        const double denom = static_cast<double>(count) * sxx - sx * sx;
        if (count >= 2 && denom > 0.0) report.fitted_rate = -(static_cast<double>(count) * sxy - sx * sy) / denom;
    }
    return report;
}

nlohmann::json to_json(const MixingReport& report) {
    nlohmann::json j;
    j["lags"] = report.lags;
    j["autocov"] = report.autocov;
    j["fitted_rate"] = report.fitted_rate ? nlohmann::json(*report.fitted_rate) : nlohmann::json(nullptr);
    j["beta1_half"] = report.beta1_half ? nlohmann::json(*report.beta1_half) : nlohmann::json(nullptr);
    j["stationary_variance"] = report.stationary_variance;
    j["stationary_mean"] = report.stationary_mean;
    return j;
}

} // namespace roughavg
