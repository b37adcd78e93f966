#pragma once

#include <cstddef>
#include <span>

namespace iafmc {

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}

// y += a * x
inline void axpy(double a, std::span<const double> x, std::span<double> y) {
    for (std::size_t k = 0; k < x.size(); ++k) y[k] += a * x[k];
}

inline void scale(double a, std::span<double> x) {
    for (auto& v : x) v *= a;
}

}  // namespace iafmc
