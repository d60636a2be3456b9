#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "roughavg/grid.hpp"
#include "roughavg/path.hpp"

namespace roughavg {

enum class ProcessKind { fbm, bm, deterministic };

/// How an fBm sample was produced.
enum class SamplingMethod { circulant, cholesky, iid, given };

/// Which fBm sampler to use. `automatic` tries circulant embedding and
/// falls back to dense Cholesky if the embedding has negative eigenvalues.
enum class SamplerPolicy { automatic, circulant, cholesky };

std::string to_string(ProcessKind kind);
std::string to_string(SamplingMethod method);
ProcessKind process_kind_from_string(const std::string& s);

/// A sampled Gaussian path with its generation metadata. values[0] = 0.
struct GaussianPath {
    Path path;
    ProcessKind kind = ProcessKind::bm;
    double hurst = 0.5;
    std::uint64_t seed = 0;
    SamplingMethod method = SamplingMethod::iid;

    const Grid& grid() const noexcept { return path.grid; }
    std::size_t dim() const noexcept { return path.dim(); }
    const Eigen::MatrixXd& values() const noexcept { return path.values; }
};

struct HolderEstimate {
    double beta = 0.0;
    double value = 0.0;
    std::size_t pair_budget = 0;
    std::size_t pairs_inspected = 0;
};

/// R_H(s,t) = (t^{2H} + s^{2H} - |t-s|^{2H}) / 2.
double fbm_covariance(double s, double t, double hurst);

/// Autocovariance of unit-step fractional Gaussian noise at integer lag k.
double fgn_autocovariance(std::size_t lag, double hurst);

/// Throws DomainError unless H lies in the supported range (1/3, 1/2].
void require_supported_hurst(double hurst);

/// One exact-in-law fBm sample with `dim` independent coordinates.
/// Deterministic in (hurst, grid, seed, dim, policy).
GaussianPath sample_fbm(double hurst, const Grid& grid, std::uint64_t seed, std::size_t dim = 1,
                        SamplerPolicy policy = SamplerPolicy::automatic);

/// Standard Brownian motion with independent coordinates.
GaussianPath sample_bm(std::size_t dim, const Grid& grid, std::uint64_t seed);

/// Lower bound on the beta-Hoelder seminorm from pairs (i, i + 2^k), smallest
/// separations first, stopping after pair_budget pairs.
HolderEstimate holder_norm_estimate(const Path& path, double beta, std::size_t pair_budget);

} // namespace roughavg
