#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cmx {

enum class ErrorCode {
    invalid_input,
    illegal_transition,
    duplicate_attestation,
    unknown_processor,
    delay_out_of_range,
    non_positive_reward,
    weight_out_of_range,
    insufficient_funds,
    invalid_schedule,
    unknown_deployment,
    duplicate_deployment,
    duplicate_report,
    wrong_state,
    clock_regression,
    cooldown_out_of_range,
    empty_pool,
    zero_weight,
    wrong_status,
    cooldown_not_elapsed,
    fee_increase,
    empty_input,
    config_invalid,
    conservation_violation,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string &what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), _code(code), _detail(what)
    {
    }

    ErrorCode code() const noexcept { return _code; }
    /// Message without the code prefix.
    const std::string &detail() const noexcept { return _detail; }

private:
    ErrorCode _code;
    std::string _detail;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string &what)
{
    throw Error(code, what);
}

} // namespace cmx
