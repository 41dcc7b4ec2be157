#pragma once

#include <cstdint>
#include <stdexcept>

#include "cohere/vec.hpp"

// Plain SGD comparator. Shares the problem/schedule interfaces so harness
// CSV rows are directly comparable with the FTRL runs; also the reference
// trace for the quadratic-regularizer instantiation of the generic engine.

namespace cohere {

struct SgdState {
  Vec x;
  std::int64_t t = 0;
};

inline SgdState sgd_step(const SgdState& s, std::span<const double> g, double eta) {
  if (g.size() != s.x.size()) throw std::invalid_argument("gradient dimension mismatch");
  if (!std::isfinite(eta) || eta < 0.0)
    throw std::invalid_argument("eta must be finite and nonnegative");
  for (double v : g)
    if (!std::isfinite(v)) throw std::invalid_argument("g must be finite");
  SgdState out = s;
  axpy(out.x, -eta, g);
  out.t = s.t + 1;
  return out;
}

}  // namespace cohere
