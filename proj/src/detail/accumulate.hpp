#pragma once

#include <cmath>

namespace krclust::detail {

// Neumaier-compensated running sum. Used for every per-cluster reduction so
// that results do not depend on how the points were partitioned or ordered.
struct CompensatedSum {
    double sum = 0.0;
    double comp = 0.0;

    void add(double v) noexcept {
        const double t = sum + v;
        if (std::fabs(sum) >= std::fabs(v))
            comp += (sum - t) + v;
        else
            comp += (v - t) + sum;
        sum = t;
    }

    double value() const noexcept { return sum + comp; }
};

}  // namespace krclust::detail
