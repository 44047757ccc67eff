#pragma once

#include <optional>
#include <span>

namespace dcnn {

struct Metrics {
    double accuracy = 0.0;
    double micro_f1 = 0.0;
    double macro_f1 = 0.0;
};

/// Accuracy, micro-F1 (pooled per-class TP/FP/FN), and macro-F1 (mean of
/// per-class F1 over all num_classes classes, with 0/0 := 0). For
/// single-label prediction micro-F1 equals accuracy exactly.
Metrics evaluate_metrics(std::span<const int> predictions, std::span<const int> truth,
                         int num_classes);

struct TTestResult {
    double t = 0.0;
    double degrees_of_freedom = 0.0;
    double p_value = 1.0;
    bool defined = true;  // false when both samples are constant and equal
};

/// Welch's unequal-variance t-test with Welch-Satterthwaite degrees of
/// freedom. One-tailed tests H1: mean(a) > mean(b). Both samples constant
/// with equal means -> result marked undefined; constant with different
/// means -> t = +-infinity, p = 0 or 1. Throws if either sample has fewer
/// than two points.
TTestResult welch_t_test(std::span<const double> sample_a, std::span<const double> sample_b,
                         bool one_tailed);

/// One-sample t-test of mean(sample) against mu0; one-tailed tests
/// H1: mean > mu0.
TTestResult one_sample_t_test(std::span<const double> sample, double mu0, bool one_tailed);

/// Half-width of the Student-t confidence interval for the mean; nullopt
/// when the sample has fewer than two points.
std::optional<double> confidence_half_width(std::span<const double> sample,
                                            double level = 0.95);

}  // namespace dcnn
