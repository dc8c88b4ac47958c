#pragma once

#include <cmath>

namespace advgeo::numeric {

// Neumaier-compensated running sum; order-dependent but far less lossy than a
// plain += loop over many equal-sized terms.
class CompensatedSum {
public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) {
            carry_ += (sum_ - t) + x;
        } else {
            carry_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    double value() const { return sum_ + carry_; }

private:
    double sum_ = 0.0;
    double carry_ = 0.0;
};

}  // namespace advgeo::numeric
