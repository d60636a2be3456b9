#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "roughavg/coefficients.hpp"

namespace roughavg::testing {

inline Vec vec1(double v) { return Vec::Constant(1, v); }
inline Mat mat1(double v) { return Mat::Constant(1, 1, v); }

/// Scalar system with g = xi - 8 phi, h = 1 and the given slow coefficients.
inline CoefficientSet ou_system(std::function<Vec(const Vec&, const Vec&)> f,
                                std::function<Mat(const Vec&)> sigma = [](const Vec&) { return mat1(0.0); }) {
    CoefficientSet c;
    c.name = "ou-test";
    c.f = std::move(f);
    c.sigma = std::move(sigma);
    c.g = [](const Vec& xi, const Vec& phi) { return vec1(xi(0) - 8.0 * phi(0)); };
    c.h = [](const Vec&, const Vec&) { return mat1(1.0); };
    c.beta1 = 16.0;
    return c;
}

struct Moments {
    double mean = 0.0;
    double variance = 0.0;  // unbiased
    double std_error = 0.0;
};

inline Moments moments(const std::vector<double>& xs) {
    Moments m;
    const double n = static_cast<double>(xs.size());
    for (double x : xs) m.mean += x;
    m.mean /= n;
    for (double x : xs) m.variance += (x - m.mean) * (x - m.mean);
    m.variance /= (n - 1.0);
    m.std_error = std::sqrt(m.variance / n);
    return m;
}

inline double slope(const std::vector<double>& x, const std::vector<double>& y) {
    double mx = 0.0, my = 0.0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
        sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
    }
    return sxy / sxx;
}

} // namespace roughavg::testing
