#pragma once

#include <cstddef>
#include <span>

namespace aee {

struct Summary {
    std::size_t count = 0;
    double mean = 0.0;
    /// Sample standard deviation (n - 1 denominator); 0 for fewer than 2 values.
    double stddev = 0.0;
    /// Half-width of the two-sided Student-t interval at `confidence`; 0 for
    /// fewer than 2 values.
    double halfwidth = 0.0;
};

Summary summarize(std::span<const double> values, double confidence = 0.95);

/// One-sided Welch test of H1: mean(a) > mean(b). Returns the p-value.
double welch_greater_p(std::span<const double> a, std::span<const double> b);

} // namespace aee
