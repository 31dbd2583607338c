#include "lendtext/neural/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lendtext::neural {

double GradCheckReport::max_rel_error() const {
  double m = 0;
  for (const auto& b : blocks) m = std::max(m, b.max_rel_error);
  return m;
}

GradCheckReport grad_check(const std::function<double(bool)>& loss, const ParamList& params,
                           const GradCheckOptions& opt) {
  zero_grads(params);
  loss(true);
  std::vector<Matrix> analytic;
  for (auto* p : params) analytic.push_back(p->grad);

  GradCheckReport report;
  Rng rng(derive_seed(opt.seed, "grad-check"));
  for (std::size_t k = 0; k < params.size(); ++k) {
    auto* p = params[k];
    GradCheckBlock block{p->name};
    const std::size_t n = static_cast<std::size_t>(p->value.size());
    std::vector<std::size_t> entries(n);
    std::iota(entries.begin(), entries.end(), 0);
    if (n > opt.samples_per_block) {
      shuffle_in_place(entries, rng);
      entries.resize(opt.samples_per_block);
    }
    for (auto e : entries) {
      double& w = p->value.data()[e];
      const double orig = w;
      auto at = [&](double delta) {
        w = orig + delta;
        return loss(false);
      };
      const double h = opt.eps;
      double num = (at(-2 * h) - 8 * at(-h) + 8 * at(h) - at(2 * h)) / (12 * h);
      w = orig;
      double a = analytic[k].data()[e];
      double rel = std::abs(a - num) / std::max({std::abs(a), std::abs(num), opt.floor});
      block.max_rel_error = std::max(block.max_rel_error, rel);
      block.max_abs_grad = std::max(block.max_abs_grad, std::abs(a));
      ++block.checked;
    }
    report.blocks.push_back(block);
  }
  return report;
}

}  // namespace lendtext::neural
