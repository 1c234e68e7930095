#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace coordmech {

/// Compensated (Kahan) accumulator; keeps long discounted sums honest at
/// 1e-9 tolerances.
class KahanSum {
public:
    void add(double x) {
        const double y = x - comp_;
        const double t = sum_ + y;
        comp_ = (t - sum_) - y;
        sum_ = t;
    }
    double value() const { return sum_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

/// Mean, standard error and 95% confidence interval of a sample.
struct SampleSummary {
    double mean = 0.0;
    double stderr_ = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::size_t count = 0;
};

inline SampleSummary summarize_sample(std::span<const double> xs) {
    SampleSummary s;
    s.count = xs.size();
    if (xs.empty()) return s;
    KahanSum total;
    for (double x : xs) total.add(x);
    s.mean = total.value() / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        KahanSum sq;
        for (double x : xs) {
            const double d = x - s.mean;
            sq.add(d * d);
        }
        const double var = sq.value() / static_cast<double>(xs.size() - 1);
        s.stderr_ = std::sqrt(var / static_cast<double>(xs.size()));
    }
    s.ci_low = s.mean - 1.96 * s.stderr_;
    s.ci_high = s.mean + 1.96 * s.stderr_;
    return s;
}

/// Least-squares slope of y over x; used for log-log scaling exponents.
inline double regression_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("regression_slope: need >= 2 paired points");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(x.size());
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("regression_slope: degenerate x");
    return sxy / sxx;
}

} // namespace coordmech
