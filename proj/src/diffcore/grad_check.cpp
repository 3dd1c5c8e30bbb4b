#include "ltvnet/diffcore/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ltvnet::diffcore {

double grad_check(const GradientFunction& f, const Vector& point, double step) {
    if (!(step > 0.0)) {
        throw UsageError("grad_check step must be positive");
    }
    Vector analytic(point.size());
    f(point, &analytic);
    require_dims(analytic.size() == point.size(), "gradient length");

    double worst = 0.0;
    Vector probe = point;
    for (Eigen::Index i = 0; i < point.size(); ++i) {
        probe(i) = point(i) + step;
        const double up = f(probe, nullptr);
        probe(i) = point(i) - step;
        const double down = f(probe, nullptr);
        probe(i) = point(i);
        if (!std::isfinite(up) || !std::isfinite(down)) {
            throw NumericalError("function not finite near coordinate " + std::to_string(i));
        }
        const double numeric = (up - down) / (2.0 * step);
        const double err = std::abs(analytic(i) - numeric) / std::max(1.0, std::abs(analytic(i)));
        worst = std::max(worst, err);
    }
    return worst;
}

}  // namespace ltvnet::diffcore
