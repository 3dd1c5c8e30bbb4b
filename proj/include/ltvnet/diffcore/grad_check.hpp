#pragma once

#include <functional>

#include "ltvnet/common.hpp"

namespace ltvnet::diffcore {

// Scalar function of a vector. When `gradient` is non-null the function also
// writes its analytic gradient there.
using GradientFunction = std::function<double(const Vector& point, Vector* gradient)>;

// Max over coordinates of |analytic - central difference| / max(1, |analytic|).
// Throws NumericalError if the function is not finite at a perturbed point.
double grad_check(const GradientFunction& f, const Vector& point, double step);

}  // namespace ltvnet::diffcore
