#include "cmx/reputation.hpp"

#include <algorithm>
#include <string>

#include "cmx/error.hpp"

namespace cmx {

ReputationParams::ReputationParams(double lambda) : _lambda(lambda)
{
    if (!(lambda > 0.0 && lambda < 1.0))
        fail(ErrorCode::invalid_input, "lambda must lie strictly between 0 and 1, got " + std::to_string(lambda));
}

double naive_score(double favorable, double unfavorable)
{
    return (favorable + 1.0) / (favorable + unfavorable + 2.0);
}

double weight_for(const ReputationAccumulator &acc, TokenAmount reward)
{
    if (acc.n == 0)
        return 1.0;
    if (reward == 0)
        fail(ErrorCode::non_positive_reward, "reward must be positive once a history exists");
    const double mean = static_cast<double>(acc.reward_sum) / static_cast<double>(acc.n);
    const double phi = static_cast<double>(reward);
    return phi / (mean + phi);
}

ReputationAccumulator update(const ReputationAccumulator &acc, bool favorable, double weight)
{
    if (!(weight > 0.0 && weight <= 1.0))
        fail(ErrorCode::weight_out_of_range, "weight must be in (0, 1], got " + std::to_string(weight));
    auto next = acc;
    const double lambda = acc.params.lambda();
    next.r = acc.r * lambda + (favorable ? weight : 0.0);
    next.s = acc.s * lambda + (favorable ? 0.0 : weight);
    return next;
}

double score(const ReputationAccumulator &acc)
{
    return std::min(1.0, naive_score(acc.r, acc.s) / acc.params.mu());
}

ReputationAccumulator record_outcome(const ReputationAccumulator &acc, bool favorable, TokenAmount reward)
{
    auto next = update(acc, favorable, weight_for(acc, reward));
    next.reward_sum += reward;
    next.n += 1;
    return next;
}

} // namespace cmx
