#include "dcnn/metrics.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace dcnn {

Metrics evaluate_metrics(std::span<const int> predictions, std::span<const int> truth,
                         int num_classes) {
    if (predictions.empty()) throw std::invalid_argument("evaluate_metrics: empty input");
    if (predictions.size() != truth.size())
        throw std::invalid_argument("evaluate_metrics: length mismatch");
    if (num_classes < 1) throw std::invalid_argument("evaluate_metrics: num_classes must be >= 1");

    std::vector<long> tp(num_classes, 0), fp(num_classes, 0), fn(num_classes, 0);
    long correct = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const int p = predictions[i];
        const int y = truth[i];
        if (p < 0 || p >= num_classes || y < 0 || y >= num_classes)
            throw std::invalid_argument("evaluate_metrics: label out of range");
        if (p == y) {
            ++tp[y];
            ++correct;
        } else {
            ++fp[p];
            ++fn[y];
        }
    }

    Metrics m;
    m.accuracy = static_cast<double>(correct) / static_cast<double>(predictions.size());

    long tp_sum = 0, fp_sum = 0, fn_sum = 0;
    double macro = 0.0;
    for (int c = 0; c < num_classes; ++c) {
        tp_sum += tp[c];
        fp_sum += fp[c];
        fn_sum += fn[c];
        const double denom = static_cast<double>(2 * tp[c] + fp[c] + fn[c]);
        macro += denom == 0.0 ? 0.0 : 2.0 * static_cast<double>(tp[c]) / denom;
    }
    m.micro_f1 = static_cast<double>(2 * tp_sum) / static_cast<double>(2 * tp_sum + fp_sum + fn_sum);
    m.macro_f1 = macro / static_cast<double>(num_classes);
    return m;
}

namespace {

struct Moments {
    double mean = 0.0;
    double variance = 0.0;  // unbiased
    double n = 0.0;
};

Moments moments(std::span<const double> sample, const char* who) {
    if (sample.size() < 2)
        throw std::invalid_argument(std::string(who) + ": need at least two points per sample");
    Moments m;
    m.n = static_cast<double>(sample.size());
    for (double v : sample) m.mean += v;
    m.mean /= m.n;
    for (double v : sample) m.variance += (v - m.mean) * (v - m.mean);
    m.variance /= (m.n - 1.0);
    return m;
}

double survival(double t, double df) {
    const boost::math::students_t dist(df);
    return boost::math::cdf(boost::math::complement(dist, t));
}

// Shared tail handling once t and df are fixed.
TTestResult finish(double t, double df, bool one_tailed) {
    TTestResult r;
    r.t = t;
    r.degrees_of_freedom = df;
    if (std::isinf(t)) {
        r.p_value = one_tailed ? (t > 0.0 ? 0.0 : 1.0) : 0.0;
        return r;
    }
    r.p_value = one_tailed ? survival(t, df) : 2.0 * survival(std::abs(t), df);
    return r;
}

TTestResult undefined_result() {
    TTestResult r;
    r.t = 0.0;
    r.degrees_of_freedom = std::numeric_limits<double>::quiet_NaN();
    r.p_value = std::numeric_limits<double>::quiet_NaN();
    r.defined = false;
    return r;
}

}  // namespace

TTestResult welch_t_test(std::span<const double> sample_a, std::span<const double> sample_b,
                         bool one_tailed) {
    const Moments a = moments(sample_a, "welch_t_test");
    const Moments b = moments(sample_b, "welch_t_test");

    if (a.variance == 0.0 && b.variance == 0.0) {
        if (a.mean == b.mean) return undefined_result();
        const double inf = std::numeric_limits<double>::infinity();
        return finish(a.mean > b.mean ? inf : -inf, inf, one_tailed);
    }

    const double sa = a.variance / a.n;
    const double sb = b.variance / b.n;
    const double se2 = sa + sb;
    const double t = (a.mean - b.mean) / std::sqrt(se2);
    const double df = se2 * se2 / (sa * sa / (a.n - 1.0) + sb * sb / (b.n - 1.0));
    return finish(t, df, one_tailed);
}

TTestResult one_sample_t_test(std::span<const double> sample, double mu0, bool one_tailed) {
    const Moments m = moments(sample, "one_sample_t_test");
    if (m.variance == 0.0) {
        if (m.mean == mu0) return undefined_result();
        const double inf = std::numeric_limits<double>::infinity();
        return finish(m.mean > mu0 ? inf : -inf, inf, one_tailed);
    }
    const double t = (m.mean - mu0) / std::sqrt(m.variance / m.n);
    return finish(t, m.n - 1.0, one_tailed);
}

std::optional<double> confidence_half_width(std::span<const double> sample, double level) {
    if (sample.size() < 2) return std::nullopt;
    if (!(level > 0.0 && level < 1.0))
        throw std::invalid_argument("confidence_half_width: level must lie in (0, 1)");
    const Moments m = moments(sample, "confidence_half_width");
    if (m.variance == 0.0) return 0.0;
    const boost::math::students_t dist(m.n - 1.0);
    const double quantile = boost::math::quantile(dist, 0.5 + level / 2.0);
    return quantile * std::sqrt(m.variance / m.n);
}

}  // namespace dcnn
