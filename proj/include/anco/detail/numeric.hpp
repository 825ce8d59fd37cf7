#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>

namespace anco::detail {

// Neumaier's variant of Kahan summation.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  CompensatedSum& operator+=(double x) {
    add(x);
    return *this;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

// Full N-point Gauss-Legendre rule on [-1, 1], unpacked from boost's
// half-range tables.
template <unsigned N>
struct GaussRule {
  std::array<double, N> nodes{};
  std::array<double, N> weights{};

  GaussRule() {
    using G = boost::math::quadrature::gauss<double, N>;
    const auto& x = G::abscissa();
    const auto& w = G::weights();
    std::size_t k = 0;
    // boost stores the nonnegative abscissae; index 0 is the origin when N is odd.
    const std::size_t start = (N % 2 == 1) ? 1 : 0;
    for (std::size_t i = x.size(); i-- > start;) {
      nodes[k] = -x[i];
      weights[k] = w[i];
      ++k;
    }
    if (N % 2 == 1) {
      nodes[k] = 0.0;
      weights[k] = w[0];
      ++k;
    }
    for (std::size_t i = start; i < x.size(); ++i) {
      nodes[k] = x[i];
      weights[k] = w[i];
      ++k;
    }
  }

  static const GaussRule& get() {
    static const GaussRule rule;
    return rule;
  }
};

// Composite Gauss-Legendre on [a, b] with `panels` equal panels.
template <unsigned N = 20, class F>
double integrate_panels(F&& f, double a, double b, std::size_t panels) {
  const auto& rule = GaussRule<N>::get();
  const double width = (b - a) / static_cast<double>(panels);
  CompensatedSum acc;
  for (std::size_t k = 0; k < panels; ++k) {
    const double lo = a + width * static_cast<double>(k);
    const double mid = lo + 0.5 * width;
    double panel = 0.0;
    for (unsigned i = 0; i < N; ++i) {
      panel += rule.weights[i] * f(mid + 0.5 * width * rule.nodes[i]);
    }
    acc += 0.5 * width * panel;
  }
  return acc.value();
}

// Visits every node of a composite rule: visit(x, w).
template <unsigned N = 20, class Visit>
void for_each_node(double a, double b, std::size_t panels, Visit&& visit) {
  const auto& rule = GaussRule<N>::get();
  const double width = (b - a) / static_cast<double>(panels);
  for (std::size_t k = 0; k < panels; ++k) {
    const double mid = a + width * (static_cast<double>(k) + 0.5);
    for (unsigned i = 0; i < N; ++i) {
      visit(mid + 0.5 * width * rule.nodes[i], 0.5 * width * rule.weights[i]);
    }
  }
}

inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

}  // namespace anco::detail
