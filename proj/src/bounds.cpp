#include "cohere/bounds.hpp"

#include <cmath>
#include <stdexcept>

namespace cohere {

namespace {

void require_args(std::int64_t T, double alpha, double G, double r) {
  if (!(alpha > 0.5) || !(alpha < 1.0))
    throw std::domain_error("alpha must lie in (1/2, 1)");
  if (T < 1) throw std::domain_error("T must be >= 1");
  if (!(G > 0.0) || !std::isfinite(G)) throw std::domain_error("G must be positive");
  if (!(r >= 0.0) || !std::isfinite(r)) throw std::domain_error("r must be nonnegative");
}

double s_power(double alpha) { return std::sqrt(5.0 + 1.0 / (2.0 * alpha - 1.0)); }

double avg_factor(double alpha, double r) {
  const double S = s_power(alpha);
  return 1.0 + S * r * (2.0 * std::log1p(2.0 * r) + 9.0 * S);
}

}  // namespace

double theorem2_bound(std::int64_t T, double alpha, double G, double r) {
  require_args(T, alpha, G, r);
  return G / std::pow(static_cast<double>(T), 1.0 - alpha) * avg_factor(alpha, r);
}

double theorem3_bound(std::int64_t T, double alpha, double G, double r) {
  require_args(T, alpha, G, r);
  const double S = s_power(alpha);
  const double lead = 2.0 + 1.0 / (std::exp(1.0) * (2.0 * alpha - 1.0));
  const double inner = std::exp(S) + 3.0 * r + 6.0 * (S + 2.0) * (1.0 + avg_factor(alpha, r));
  return G / std::pow(static_cast<double>(T), 1.0 - alpha) * lead * inner;
}

double theoremF_bound(std::int64_t T, double alpha, double G, double sigma, double L,
                      double phi_inf_u) {
  require_args(T, alpha, G, 0.0);
  if (!(sigma >= 0.0) || !(L >= 0.0) || !std::isfinite(phi_inf_u))
    throw std::domain_error("sigma and L must be nonnegative, phi_inf_u finite");
  const double onep = 1.0 + phi_inf_u;
  const double a = std::pow(2.0, alpha) * std::pow(G, (1.0 - 2.0 * alpha) * (1.0 - alpha)) *
                   std::pow(onep, 1.0 - alpha) *
                   std::pow(2.0 * G * G + 2.0 * static_cast<double>(T - 1) * sigma * sigma,
                            alpha * (1.0 - alpha));
  const double b = std::pow(G, 1.0 - 2.0 * alpha) * std::pow(2.0, alpha / (1.0 - alpha)) *
                   onep * std::pow(4.0 * L, alpha);
  return std::max(a, b) / std::pow(static_cast<double>(T), 1.0 - alpha);
}

}  // namespace cohere
