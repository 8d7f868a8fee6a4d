#pragma once

#include <array>
#include <cstddef>
#include <string_view>

namespace cmx {

enum class Metric : std::size_t { cpu_single = 0, cpu_multi = 1, ram = 2, storage = 3 };

inline constexpr std::size_t metric_count = 4;
inline constexpr std::array<Metric, metric_count> all_metrics{Metric::cpu_single, Metric::cpu_multi, Metric::ram,
                                                              Metric::storage};

std::string_view metric_name(Metric m) noexcept;

/// Pool weights as published. They sum to 0.9998, so payouts and slashing
/// use the normalized weights below.
inline constexpr std::array<double, metric_count> published_metric_weights{0.2307, 0.2307, 0.4615, 0.0769};

double normalized_metric_weight(Metric m) noexcept;

/// Measured or committed compute per benchmark metric, in benchmark score
/// units. All components are finite and non-negative.
struct BenchmarkVector {
    std::array<double, metric_count> values{};

    double &operator[](Metric m) noexcept { return values[static_cast<std::size_t>(m)]; }
    double operator[](Metric m) const noexcept { return values[static_cast<std::size_t>(m)]; }

    bool operator==(const BenchmarkVector &) const = default;
};

/// Throws invalid_input on a negative or non-finite component.
void validate(const BenchmarkVector &v);

BenchmarkVector scaled(const BenchmarkVector &v, double factor);

} // namespace cmx
