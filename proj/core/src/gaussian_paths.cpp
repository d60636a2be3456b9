#include "roughavg/gaussian_paths.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "roughavg/errors.hpp"
#include "roughavg/rng.hpp"

namespace roughavg {

std::string to_string(ProcessKind kind) {
    switch (kind) {
        case ProcessKind::fbm: return "fbm";
        case ProcessKind::bm: return "bm";
        case ProcessKind::deterministic: return "deterministic";
    }
    return "unknown";
}

std::string to_string(SamplingMethod method) {
    switch (method) {
        case SamplingMethod::circulant: return "circulant";
        case SamplingMethod::cholesky: return "cholesky";
        case SamplingMethod::iid: return "iid";
        case SamplingMethod::given: return "given";
    }
    return "unknown";
}

ProcessKind process_kind_from_string(const std::string& s) {
    if (s == "fbm") return ProcessKind::fbm;
    if (s == "bm") return ProcessKind::bm;
    if (s == "deterministic") return ProcessKind::deterministic;
    throw ConfigError("unknown process kind '" + s + "'", "kind");
}

double fbm_covariance(double s, double t, double hurst) {
    if (!(s >= 0.0) || !(t >= 0.0)) throw DomainError("fbm_covariance: times must be nonnegative");
    if (!(hurst > 0.0 && hurst < 1.0)) throw DomainError("fbm_covariance: H must lie in (0,1)");
    const double h2 = 2.0 * hurst;
    return 0.5 * (std::pow(t, h2) + std::pow(s, h2) - std::pow(std::abs(t - s), h2));
}

double fgn_autocovariance(std::size_t lag, double hurst) {
    const double k = static_cast<double>(lag);
    const double h2 = 2.0 * hurst;
    if (lag == 0) return 1.0;
    return 0.5 * (std::pow(k + 1.0, h2) - 2.0 * std::pow(k, h2) + std::pow(k - 1.0, h2));
}

void require_supported_hurst(double hurst) {
    if (!(hurst > 1.0 / 3.0 && hurst <= 0.5)) {
        throw DomainError("Hurst index " + std::to_string(hurst) + " outside the supported range (1/3, 1/2]");
    }
}

namespace {

// Unit-step fGn of length n via circulant embedding; false if the embedding is not PSD.
bool circulant_fgn(double hurst, std::size_t n, Engine& rng, std::vector<double>& out) {
    const std::size_t m = 2 * n;
    std::vector<double> row(m);
    for (std::size_t k = 0; k <= n; ++k) row[k] = fgn_autocovariance(k, hurst);
    for (std::size_t k = 1; k < n; ++k) row[m - k] = row[k];

    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> eig;
    fft.fwd(eig, row);

    double max_eig = 0.0;
    for (const auto& e : eig) max_eig = std::max(max_eig, e.real());
    std::vector<double> scale(m);
    for (std::size_t k = 0; k < m; ++k) {
        double lambda = eig[k].real();
        if (lambda < -1e-10 * max_eig) return false;
        scale[k] = std::sqrt(std::max(lambda, 0.0) / static_cast<double>(m));
    }

    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<std::complex<double>> noise(m);
    for (std::size_t k = 0; k < m; ++k) {
        const double re = normal(rng);
        const double im = normal(rng);
        noise[k] = scale[k] * std::complex<double>(re, im);
    }
    std::vector<std::complex<double>> mixed;
    fft.fwd(mixed, noise);
    out.resize(n);
    for (std::size_t k = 0; k < n; ++k) out[k] = mixed[k].real();
    return true;
}

void cholesky_fgn(double hurst, std::size_t n, Engine& rng, std::vector<double>& out) {
    Eigen::MatrixXd cov(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                fgn_autocovariance(i > j ? i - j : j - i, hurst);
        }
    }
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) throw DomainError("fGn covariance is not positive definite");
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd z(static_cast<Eigen::Index>(n));
    for (Eigen::Index k = 0; k < z.size(); ++k) z(k) = normal(rng);
    const Eigen::VectorXd x = llt.matrixL() * z;
    out.assign(x.data(), x.data() + x.size());
}

} // namespace

GaussianPath sample_fbm(double hurst, const Grid& grid, std::uint64_t seed, std::size_t dim,
                        SamplerPolicy policy) {
    require_supported_hurst(hurst);
    const std::size_t n = grid.n_steps();
    GaussianPath result;
    result.path = Path(grid, dim);
    result.kind = ProcessKind::fbm;
    result.hurst = hurst;
    result.seed = seed;
    result.method = policy == SamplerPolicy::cholesky ? SamplingMethod::cholesky : SamplingMethod::circulant;

    const double step_scale = std::pow(grid.dt(), hurst);
    std::vector<double> fgn;
    for (std::size_t c = 0; c < dim; ++c) {
        Engine rng = make_engine(seed, {tag(StreamTag::fbm), c});
        bool done = false;
        if (policy != SamplerPolicy::cholesky) {
            done = circulant_fgn(hurst, n, rng, fgn);
            if (!done && policy == SamplerPolicy::circulant) {
                throw DomainError("circulant embedding is not positive semidefinite");
            }
        }
        if (!done) {
            cholesky_fgn(hurst, n, rng, fgn);
            result.method = SamplingMethod::cholesky;
        }
        double acc = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            acc += step_scale * fgn[k];
            result.path.values(static_cast<Eigen::Index>(k + 1), static_cast<Eigen::Index>(c)) = acc;
        }
    }
    return result;
}

GaussianPath sample_bm(std::size_t dim, const Grid& grid, std::uint64_t seed) {
    GaussianPath result;
    result.path = Path(grid, dim);
    result.kind = ProcessKind::bm;
    result.hurst = 0.5;
    result.seed = seed;
    result.method = SamplingMethod::iid;
    const double sd = std::sqrt(grid.dt());
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::size_t c = 0; c < dim; ++c) {
        Engine rng = make_engine(seed, {tag(StreamTag::bm), c});
        double acc = 0.0;
        for (std::size_t k = 0; k < grid.n_steps(); ++k) {
            acc += sd * normal(rng);
            result.path.values(static_cast<Eigen::Index>(k + 1), static_cast<Eigen::Index>(c)) = acc;
        }
    }
    return result;
}

HolderEstimate holder_norm_estimate(const Path& path, double beta, std::size_t pair_budget) {
    if (!(beta > 0.0 && beta <= 1.0)) throw DomainError("Hoelder exponent must lie in (0,1]");
    HolderEstimate est;
    est.beta = beta;
    est.pair_budget = pair_budget;
    const std::size_t n = path.n_points();
    const double dt = path.grid.dt();
    for (std::size_t sep = 1; sep < n && est.pairs_inspected < pair_budget; sep *= 2) {
        const double denom = std::pow(dt * static_cast<double>(sep), beta);
        for (std::size_t i = 0; i + sep < n && est.pairs_inspected < pair_budget; ++i) {
            const double diff = (path.values.row(static_cast<Eigen::Index>(i + sep)) -
                                 path.values.row(static_cast<Eigen::Index>(i))).norm();
            est.value = std::max(est.value, diff / denom);
            ++est.pairs_inspected;
        }
    }
    return est;
}

} // namespace roughavg
