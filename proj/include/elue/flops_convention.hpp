#pragma once

#include <cstdint>
#include <string_view>

namespace elue {

using Flops = std::int64_t;

// Published FLOPs-counting convention. Every closed form in the cost model is
// built from these constants; docs/flops_convention.md mirrors them exactly.
// Bump kConventionVersion whenever any constant or closed form changes.
struct FlopsConvention {
  static constexpr std::string_view kConventionVersion = "elue-flops/1";

  static constexpr Flops kMultiply = 1;
  static constexpr Flops kAdd = 1;
  static constexpr Flops kSubtract = 1;
  static constexpr Flops kDivide = 1;
  static constexpr Flops kExp = 1;
  static constexpr Flops kSqrt = 1;
  static constexpr Flops kGelu = 8;
  static constexpr Flops kTanh = 4;

  // (n x a) @ (a x b): one multiply and one accumulate per term, the
  // accumulator starting from the bias (or zero when there is none).
  static constexpr Flops matmul(Flops n, Flops a, Flops b) {
    return (kMultiply + kAdd) * n * a * b;
  }

  // Row of width w: subtract the max, exponentiate, sum, divide.
  static constexpr Flops softmax_row(Flops w) {
    return kSubtract * w + kExp * w + kAdd * (w - 1) + kDivide * w;
  }

  // n rows of width d, two-pass form:
  //   mean (d-1 adds, 1 divide), variance (d subtracts, d squares, d-1 adds,
  //   1 divide), eps add, sqrt, re-centre (d subtracts), scale (d divides),
  //   gamma (d multiplies), beta (d adds).
  static constexpr Flops layer_norm(Flops n, Flops d) {
    const Flops mean = kAdd * (d - 1) + kDivide;
    const Flops variance = kSubtract * d + kMultiply * d + kAdd * (d - 1) + kDivide;
    const Flops denom = kAdd + kSqrt;
    const Flops normalize = kSubtract * d + kDivide * d + kMultiply * d + kAdd * d;
    return n * (mean + variance + denom + normalize);
  }
};

static_assert(FlopsConvention::layer_norm(1, 768) == 8 * 768 + 2);
static_assert(FlopsConvention::softmax_row(10) == 4 * 10 - 1);

}  // namespace elue
