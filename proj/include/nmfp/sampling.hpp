#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "nmfp/expr.hpp"

namespace nmfp {

// Small vector helpers shared by the modules.

inline double dot(std::span<const double> a, std::span<const double> b)
{
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

inline double norm_inf(std::span<const double> a)
{
    double m = 0.0;
    for (double x : a) m = std::max(m, std::abs(x));
    return m;
}

/// a + s*b
inline Vector axpy(std::span<const double> a, double s, std::span<const double> b)
{
    Vector r(a.begin(), a.end());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] += s * b[i];
    return r;
}

inline Vector scaled(std::span<const double> a, double s)
{
    Vector r(a.begin(), a.end());
    for (double& x : r) x *= s;
    return r;
}

inline Vector normalized(std::span<const double> a)
{
    double n = norm2(a);
    return n > 0.0 ? scaled(a, 1.0 / n) : Vector(a.begin(), a.end());
}

/// splitmix64 finalizer, used to derive independent sub-stream seeds.
inline std::uint64_t mix_seed(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag, std::uint64_t index = 0)
{
    std::uint64_t h = 1469598103934665603ULL;
    for (char c : tag) h = (h ^ static_cast<unsigned char>(c)) * 1099511628211ULL;
    return mix_seed(mix_seed(seed ^ h) + index);
}

using Rng = std::mt19937_64;

// Distributions are written out by hand so that streams are identical
// across standard library implementations.

inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline double standard_normal(Rng& rng)
{
    double u1 = uniform01(rng);
    double u2 = uniform01(rng);
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

inline Vector unit_sphere_sample(Rng& rng, std::size_t n)
{
    Vector v(n);
    double s = 0.0;
    do {
        for (double& x : v) x = standard_normal(rng);
        s = norm2(v);
    } while (s < 1e-12);
    for (double& x : v) x /= s;
    return v;
}

inline Vector unit_ball_sample(Rng& rng, std::size_t n)
{
    Vector v = unit_sphere_sample(rng, n);
    double r = std::pow(uniform01(rng), 1.0 / static_cast<double>(n));
    for (double& x : v) x *= r;
    return v;
}

}  // namespace nmfp
