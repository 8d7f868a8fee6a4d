#include "cmx/scheduler.hpp"

#include <algorithm>
#include <cmath>

#include "cmx/error.hpp"

namespace cmx {

ProcessorCalendar::ProcessorCalendar(std::vector<BusyInterval> intervals) : _intervals(std::move(intervals))
{
    std::sort(_intervals.begin(), _intervals.end(),
              [](const auto &a, const auto &b) { return a.start < b.start; });
    for (std::size_t i = 0; i < _intervals.size(); ++i) {
        if (_intervals[i].start >= _intervals[i].end)
            fail(ErrorCode::invalid_input, "busy interval must have positive length");
        if (i > 0 && _intervals[i - 1].end > _intervals[i].start)
            fail(ErrorCode::invalid_input, "busy intervals overlap");
    }
}

const BusyInterval *ProcessorCalendar::first_conflict(TimestampMs start, TimestampMs end) const
{
    // first interval ending after `start`; it is the only candidate that can
    // begin before `end` without an earlier one also ending after `start`
    auto it = std::upper_bound(_intervals.begin(), _intervals.end(), start,
                               [](TimestampMs t, const BusyInterval &b) { return t < b.end; });
    if (it != _intervals.end() && it->start < end)
        return &*it;
    return nullptr;
}

void ProcessorCalendar::book(std::span<const ExecutionSlot> slots)
{
    for (const auto &slot : slots) {
        if (!is_free(slot.start, slot.end))
            fail(ErrorCode::invalid_input, "slot overlaps an existing booking");
    }
    for (const auto &slot : slots) {
        BusyInterval b{slot.start, slot.end, slot.deployment};
        auto it = std::lower_bound(_intervals.begin(), _intervals.end(), b.start,
                                   [](const BusyInterval &x, TimestampMs t) { return x.start < t; });
        _intervals.insert(it, b);
    }
}

void ProcessorCalendar::prune_before(TimestampMs t)
{
    std::erase_if(_intervals, [t](const BusyInterval &b) { return b.end <= t; });
}

std::uint32_t execution_count(const Schedule &s, DurationMs delay)
{
    const TimestampMs first_end = s.start + delay + s.duration;
    if (first_end > s.end || s.interval <= 0)
        return 0;
    return static_cast<std::uint32_t>((s.end - first_end) / s.interval + 1);
}

std::vector<ExecutionSlot> enumerate_executions(const Schedule &s, DurationMs delay, DeploymentId deployment)
{
    if (delay < 0 || delay > s.max_start_delay)
        fail(ErrorCode::delay_out_of_range, "start delay " + std::to_string(delay) + " outside [0, " +
                                                std::to_string(s.max_start_delay) + "]");
    const auto count = execution_count(s, delay);
    std::vector<ExecutionSlot> slots;
    slots.reserve(count);
    for (std::uint32_t k = 1; k <= count; ++k) {
        const TimestampMs begin = s.start + delay + static_cast<TimestampMs>(k - 1) * s.interval;
        slots.push_back({deployment, k, begin, begin + s.duration});
    }
    return slots;
}

bool fits(const ProcessorCalendar &calendar, std::span<const ExecutionSlot> slots)
{
    return std::all_of(slots.begin(), slots.end(),
                       [&](const ExecutionSlot &slot) { return calendar.is_free(slot.start, slot.end); });
}

std::optional<DurationMs> find_start_delay(const Schedule &s, const ProcessorCalendar &calendar)
{
    // Delay search by jumps. When slot k at delay d overlaps busy [bs, be),
    // every delay in (d, d + jump) keeps slot k overlapping, where the jump
    // either moves slot k to start at be or pushes it past the schedule end
    // (slot k then no longer exists). So no feasible delay is skipped.
    DurationMs delay = 0;
    while (delay <= s.max_start_delay) {
        const auto count = execution_count(s, delay);
        if (count == 0)
            return std::nullopt; // the slot count only shrinks as the delay grows
        std::optional<DurationMs> jump;
        for (std::uint32_t k = 1; k <= count; ++k) {
            const TimestampMs offset = s.start + static_cast<TimestampMs>(k - 1) * s.interval;
            const TimestampMs begin = offset + delay;
            if (const auto *busy = calendar.first_conflict(begin, begin + s.duration)) {
                const DurationMs to_clear = busy->end - begin;
                // slot k exists while offset + d + duration <= end
                const DurationMs to_vanish = (s.end - s.duration - offset + 1) - delay;
                jump = std::min(to_clear, to_vanish);
                break;
            }
        }
        if (!jump)
            return delay;
        delay += *jump;
    }
    return std::nullopt;
}

TimeWindow acceptance_window(const ExecutionSlot &slot, DurationMs report_grace)
{
    if (report_grace < 0)
        fail(ErrorCode::invalid_input, "report grace must be non-negative");
    return {slot.start, slot.end + report_grace};
}

ReportTiming classify_report(const ExecutionSlot &slot, TimestampMs reported_at, DurationMs report_grace)
{
    return acceptance_window(slot, report_grace).contains(reported_at) ? ReportTiming::in_window
                                                                       : ReportTiming::out_of_window;
}

DurationMs GracePolicy::grace_for(const Schedule &schedule) const
{
    if (absolute_ms)
        return *absolute_ms;
    return static_cast<DurationMs>(std::floor(fraction_of_duration * static_cast<double>(schedule.duration)));
}

} // namespace cmx
