#pragma once

#include <functional>
#include <string>
#include <vector>

#include "lendtext/neural/param.hpp"

namespace lendtext::neural {

struct GradCheckBlock {
  std::string name;
  std::size_t checked = 0;
  double max_rel_error = 0;
  double max_abs_grad = 0;
};

struct GradCheckReport {
  std::vector<GradCheckBlock> blocks;
  double max_rel_error() const;
};

struct GradCheckOptions {
  double eps = 1e-4;
  // Entries per block; blocks smaller than this are checked exhaustively.
  std::size_t samples_per_block = 24;
  // Denominator floor for the relative error.
  double floor = 1e-4;
  std::uint64_t seed = 1;
};

// loss(true) must zero and accumulate gradients into params; loss(false)
// only evaluates. Numeric derivatives use the fourth-order central stencil
// [f(-2h) - 8f(-h) + 8f(h) - f(2h)] / 12h.
GradCheckReport grad_check(const std::function<double(bool)>& loss, const ParamList& params,
                           const GradCheckOptions& options = {});

}  // namespace lendtext::neural
