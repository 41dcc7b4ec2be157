#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

// Tiny dense-vector helpers. Dimensions here are small (optimization in
// R^d with d in the single digits), so plain std::vector<double> plus a
// handful of free functions beats pulling in a linear-algebra dependency.

namespace cohere {

using Vec = std::vector<double>;

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(std::span<const double> a) { return dot(a, a); }

inline double norm(std::span<const double> a) { return std::sqrt(norm2(a)); }

inline Vec scaled(std::span<const double> a, double c) {
  Vec r(a.begin(), a.end());
  for (double& v : r) v *= c;
  return r;
}

inline Vec add(std::span<const double> a, std::span<const double> b) {
  Vec r(a.begin(), a.end());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += b[i];
  return r;
}

inline Vec sub(std::span<const double> a, std::span<const double> b) {
  Vec r(a.begin(), a.end());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
  return r;
}

// r += c * a
inline void axpy(Vec& r, double c, std::span<const double> a) {
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += c * a[i];
}

inline double dist(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

}  // namespace cohere
