#pragma once

#include <cstdint>

#include "cmx/types.hpp"

namespace cmx {

/// Discount factor for the reputation engine, strictly inside (0, 1).
class ReputationParams {
public:
    static constexpr double default_lambda = 0.98;

    ReputationParams() : ReputationParams(default_lambda) {}

    /// Throws invalid_input unless 0 < lambda < 1.
    explicit ReputationParams(double lambda);

    double lambda() const noexcept { return _lambda; }

    /// Upper bound of the discounted favorable sum, 1/(1 - lambda).
    double max_sum() const noexcept { return 1.0 / (1.0 - _lambda); }

    /// Highest score the unscaled beta expectation can reach,
    /// (max_sum + 1) / (max_sum + 2).
    double mu() const noexcept { return (max_sum() + 1.0) / (max_sum() + 2.0); }

    bool operator==(const ReputationParams &) const = default;

private:
    double _lambda;
};

/// Constant-size reputation state of one processor. No outcome history is
/// kept: r and s are the discounted weighted favorable and unfavorable sums,
/// reward_sum and n feed the next update's weight.
struct ReputationAccumulator {
    double r = 0.0;
    double s = 0.0;
    std::uint64_t n = 0;
    TokenAmount reward_sum = 0;
    ReputationParams params;

    bool operator==(const ReputationAccumulator &) const = default;
};

/// Undiscounted beta expectation (f + 1) / (f + g + 2).
double naive_score(double favorable, double unfavorable);

/// Weight of the next update. 1 for the first one; otherwise the reward
/// relative to the mean of all earlier rewards plus itself. Throws
/// non_positive_reward for a zero reward once history exists.
double weight_for(const ReputationAccumulator &acc, TokenAmount reward);

/// One discounted update of r or s. Leaves n and reward_sum untouched.
/// Throws weight_out_of_range unless 0 < weight <= 1.
ReputationAccumulator update(const ReputationAccumulator &acc, bool favorable, double weight);

/// Scaled score (1/mu) * (r + 1) / (r + s + 2), clamped to at most 1.
double score(const ReputationAccumulator &acc);

/// weight_for + update, then folds the reward into the history.
ReputationAccumulator record_outcome(const ReputationAccumulator &acc, bool favorable, TokenAmount reward);

} // namespace cmx
