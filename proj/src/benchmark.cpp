#include "cmx/benchmark.hpp"

#include <cmath>
#include <numeric>

#include "cmx/error.hpp"

namespace cmx {

std::string_view metric_name(Metric m) noexcept
{
    switch (m) {
        case Metric::cpu_single: return "cpu_single";
        case Metric::cpu_multi: return "cpu_multi";
        case Metric::ram: return "ram";
        case Metric::storage: return "storage";
    }
    return "?";
}

double normalized_metric_weight(Metric m) noexcept
{
    static const double total =
        std::accumulate(published_metric_weights.begin(), published_metric_weights.end(), 0.0);
    return published_metric_weights[static_cast<std::size_t>(m)] / total;
}

void validate(const BenchmarkVector &v)
{
    for (auto m : all_metrics) {
        if (!std::isfinite(v[m]) || v[m] < 0.0)
            fail(ErrorCode::invalid_input, "benchmark metric " + std::string(metric_name(m)) + " must be finite and >= 0");
    }
}

BenchmarkVector scaled(const BenchmarkVector &v, double factor)
{
    BenchmarkVector out = v;
    for (auto &x : out.values)
        x *= factor;
    return out;
}

} // namespace cmx
