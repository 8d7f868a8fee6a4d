#include "cmx/domain.hpp"

#include <string>

#include "cmx/error.hpp"

namespace cmx {

std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
        case ErrorCode::invalid_input: return "InvalidInput";
        case ErrorCode::illegal_transition: return "IllegalTransition";
        case ErrorCode::duplicate_attestation: return "DuplicateAttestation";
        case ErrorCode::unknown_processor: return "UnknownProcessor";
        case ErrorCode::delay_out_of_range: return "DelayOutOfRange";
        case ErrorCode::non_positive_reward: return "NonPositiveReward";
        case ErrorCode::weight_out_of_range: return "WeightOutOfRange";
        case ErrorCode::insufficient_funds: return "InsufficientFunds";
        case ErrorCode::invalid_schedule: return "InvalidSchedule";
        case ErrorCode::unknown_deployment: return "UnknownDeployment";
        case ErrorCode::duplicate_deployment: return "DuplicateDeployment";
        case ErrorCode::duplicate_report: return "DuplicateReport";
        case ErrorCode::wrong_state: return "WrongState";
        case ErrorCode::clock_regression: return "ClockRegression";
        case ErrorCode::cooldown_out_of_range: return "CooldownOutOfRange";
        case ErrorCode::empty_pool: return "EmptyPool";
        case ErrorCode::zero_weight: return "ZeroWeight";
        case ErrorCode::wrong_status: return "WrongStatus";
        case ErrorCode::cooldown_not_elapsed: return "CooldownNotElapsed";
        case ErrorCode::fee_increase: return "FeeIncrease";
        case ErrorCode::empty_input: return "EmptyInput";
        case ErrorCode::config_invalid: return "ConfigInvalid";
        case ErrorCode::conservation_violation: return "ConservationViolation";
    }
    return "Unknown";
}

void validate(const Schedule &s)
{
    if (s.start >= s.end)
        fail(ErrorCode::invalid_schedule, "start must precede end");
    if (s.duration <= 0 || s.duration > s.interval)
        fail(ErrorCode::invalid_schedule, "duration must be in (0, interval]");
    if (s.max_start_delay < 0)
        fail(ErrorCode::invalid_schedule, "max_start_delay must be non-negative");
    if (s.start + s.duration > s.end)
        fail(ErrorCode::invalid_schedule, "no execution fits between start and end");
}

void validate(const DeploymentSpec &spec)
{
    if (spec.min_reputation && !(*spec.min_reputation >= 0.0 && *spec.min_reputation < 1.0))
        fail(ErrorCode::invalid_input, "min_reputation must be in [0,1)");
    validate(spec.schedule);
}

namespace {

template<class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

} // namespace

DeploymentState transition(const DeploymentState &current, const LifecycleEvent &ev)
{
    auto illegal = [&]() -> DeploymentState {
        fail(ErrorCode::illegal_transition,
             std::string(event_name(ev)) + " is not valid in state " + std::string(state_name(current)));
    };
    return std::visit(
        overloaded{
            [](const state::Open &, const event::Matched &) -> DeploymentState { return state::Matched{}; },
            [](const state::Matched &, const event::AcknowledgedAllSlots &) -> DeploymentState {
                return state::Assigned{};
            },
            [](const state::Assigned &, const event::AllExecutionsReported &e) -> DeploymentState {
                return state::Done{e.outcome};
            },
            [&](const auto &, const auto &) -> DeploymentState { return illegal(); },
        },
        current, ev);
}

std::string_view state_name(const DeploymentState &s) noexcept
{
    static constexpr std::string_view names[] = {"OPEN", "MATCHED", "ASSIGNED", "DONE"};
    return names[s.index()];
}

std::string_view event_name(const LifecycleEvent &e) noexcept
{
    static constexpr std::string_view names[] = {"matched", "acknowledged_all_slots", "all_executions_reported"};
    return names[e.index()];
}

} // namespace cmx
