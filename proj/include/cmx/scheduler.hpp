#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cmx/domain.hpp"
#include "cmx/types.hpp"

namespace cmx {

// All intervals in this module are half-open [start, end).

struct ExecutionSlot {
    DeploymentId deployment;
    std::uint32_t index = 1; // 1-based
    TimestampMs start = 0;
    TimestampMs end = 0;

    bool operator==(const ExecutionSlot &) const = default;
};

struct BusyInterval {
    TimestampMs start = 0;
    TimestampMs end = 0;
    DeploymentId owner;

    bool operator==(const BusyInterval &) const = default;
};

/// Sorted, pairwise disjoint busy intervals of one processor.
class ProcessorCalendar {
public:
    ProcessorCalendar() = default;

    /// Throws invalid_input if the intervals are empty-length or overlap.
    explicit ProcessorCalendar(std::vector<BusyInterval> intervals);

    /// First busy interval intersecting [start, end), if any.
    const BusyInterval *first_conflict(TimestampMs start, TimestampMs end) const;

    bool is_free(TimestampMs start, TimestampMs end) const { return first_conflict(start, end) == nullptr; }

    /// Books every slot; throws invalid_input if any slot is not free.
    void book(std::span<const ExecutionSlot> slots);

    /// Drops intervals that ended at or before `t`.
    void prune_before(TimestampMs t);

    const std::vector<BusyInterval> &intervals() const noexcept { return _intervals; }
    bool empty() const noexcept { return _intervals.empty(); }

    bool operator==(const ProcessorCalendar &) const = default;

private:
    std::vector<BusyInterval> _intervals;
};

/// Number of executions that fit for a given delay: the largest K with
/// start + delay + (K-1)*interval + duration <= end, or 0.
std::uint32_t execution_count(const Schedule &schedule, DurationMs start_delay);

/// Slots k = 1..K. Throws delay_out_of_range unless 0 <= delay <= max_start_delay.
std::vector<ExecutionSlot> enumerate_executions(const Schedule &schedule, DurationMs start_delay,
                                                DeploymentId deployment = {});

/// All-or-nothing: true iff no slot intersects a busy interval.
bool fits(const ProcessorCalendar &calendar, std::span<const ExecutionSlot> slots);

/// Smallest delay in [0, max_start_delay] for which a non-empty slot list
/// fits the calendar.
std::optional<DurationMs> find_start_delay(const Schedule &schedule, const ProcessorCalendar &calendar);

struct TimeWindow {
    TimestampMs start = 0;
    TimestampMs end = 0;

    bool contains(TimestampMs t) const noexcept { return start <= t && t < end; }
    bool operator==(const TimeWindow &) const = default;
};

TimeWindow acceptance_window(const ExecutionSlot &slot, DurationMs report_grace);

enum class ReportTiming { in_window, out_of_window };

ReportTiming classify_report(const ExecutionSlot &slot, TimestampMs reported_at, DurationMs report_grace);

/// Report grace is either an absolute duration or a fraction of the
/// execution duration (floored to whole milliseconds).
struct GracePolicy {
    std::optional<DurationMs> absolute_ms;
    double fraction_of_duration = 0.1;

    DurationMs grace_for(const Schedule &schedule) const;

    bool operator==(const GracePolicy &) const = default;
};

} // namespace cmx
