#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "cmx/types.hpp"

namespace cmx {

struct Schedule {
    TimestampMs start = 0;
    TimestampMs end = 0;
    DurationMs interval = 0;
    DurationMs duration = 0;
    DurationMs max_start_delay = 0;

    bool operator==(const Schedule &) const = default;
};

/// Throws ErrorCode::invalid_schedule when start >= end, duration is not in
/// (0, interval], the delay is negative or not even one execution fits.
void validate(const Schedule &schedule);

struct ResourceRequirements {
    std::uint64_t memory_bytes = 0;
    std::uint64_t network_requests = 0;
    std::uint64_t storage_bytes = 0;

    bool operator==(const ResourceRequirements &) const = default;
};

struct DeploymentSpec {
    DeploymentId id;
    AccountId consumer;
    Schedule schedule;
    TokenAmount reward_per_execution = 0;
    std::optional<double> min_reputation;
    std::optional<std::uint32_t> min_security_level;
    // opaque settlement target, recorded but never interpreted
    std::string destination;
    ResourceRequirements resources;

    bool operator==(const DeploymentSpec &) const = default;
};

/// Throws invalid_input on a min_reputation outside [0,1) and
/// invalid_schedule on a bad schedule.
void validate(const DeploymentSpec &spec);

struct OutcomeTally {
    std::uint32_t succeeded = 0;
    std::uint32_t failed = 0;

    bool operator==(const OutcomeTally &) const = default;
};

namespace state {
struct Open {
    bool operator==(const Open &) const = default;
};
struct Matched {
    bool operator==(const Matched &) const = default;
};
struct Assigned {
    bool operator==(const Assigned &) const = default;
};
struct Done {
    OutcomeTally outcome;
    bool operator==(const Done &) const = default;
};
} // namespace state

using DeploymentState = std::variant<state::Open, state::Matched, state::Assigned, state::Done>;

namespace event {
struct Matched {};
struct AcknowledgedAllSlots {};
struct AllExecutionsReported {
    OutcomeTally outcome;
};
} // namespace event

using LifecycleEvent = std::variant<event::Matched, event::AcknowledgedAllSlots, event::AllExecutionsReported>;

/// OPEN -> MATCHED -> ASSIGNED -> DONE. Anything else throws illegal_transition.
DeploymentState transition(const DeploymentState &state, const LifecycleEvent &event);

std::string_view state_name(const DeploymentState &state) noexcept;
std::string_view event_name(const LifecycleEvent &event) noexcept;

struct ExecutionSuccess {
    std::string settlement_ref;
    bool operator==(const ExecutionSuccess &) const = default;
};

struct ExecutionFailure {
    std::string error;
    bool operator==(const ExecutionFailure &) const = default;
};

using ExecutionOutcome = std::variant<ExecutionSuccess, ExecutionFailure>;

struct ExecutionReport {
    DeploymentId deployment;
    std::uint32_t execution_index = 1; // 1-based
    ExecutionOutcome outcome;
    TimestampMs reported_at = 0;

    bool succeeded() const noexcept { return std::holds_alternative<ExecutionSuccess>(outcome); }
    bool operator==(const ExecutionReport &) const = default;
};

} // namespace cmx
