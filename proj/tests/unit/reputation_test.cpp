#include <cmath>
#include <random>

#include "check.hpp"
#include "cmx/reputation.hpp"
#include "oracles.hpp"

using namespace cmx;

namespace {

ReputationAccumulator fresh(double lambda)
{
    return ReputationAccumulator{.params = ReputationParams(lambda)};
}

} // namespace

TEST_CASE("lambda must lie strictly inside (0, 1)")
{
    CHECK_THROWS_CODE(ReputationParams(1.0), ErrorCode::invalid_input);
    CHECK_THROWS_CODE(ReputationParams(0.0), ErrorCode::invalid_input);
    CHECK_THROWS_CODE(ReputationParams(-0.5), ErrorCode::invalid_input);
    CHECK_THROWS_CODE(ReputationParams(std::nan("")), ErrorCode::invalid_input);
    CHECK(ReputationParams{}.lambda() == 0.98);
}

TEST_CASE("mu closed forms")
{
    CHECK(ReputationParams(0.9).mu() == doctest::Approx(11.0 / 12.0).epsilon(1e-15));
    CHECK(ReputationParams(0.98).mu() == doctest::Approx(51.0 / 52.0).epsilon(1e-15));
}

TEST_CASE("naive score")
{
    CHECK(naive_score(0, 0) == 0.5);
    CHECK(naive_score(1, 0) == doctest::Approx(2.0 / 3.0));
    CHECK(naive_score(10, 10) == 0.5);
}

TEST_CASE("recency weight")
{
    auto acc = fresh(0.98);
    CHECK(weight_for(acc, 100) == 1.0);
    CHECK(weight_for(acc, 0) == 1.0);
    acc = record_outcome(acc, true, 100);
    CHECK(weight_for(acc, 100) == 0.5);
    CHECK(weight_for(acc, 1000) == doctest::Approx(10.0 / 11.0));
    CHECK_THROWS_CODE(weight_for(acc, 0), ErrorCode::non_positive_reward);
    // history of zero rewards averages to 0, so the weight is 1
    auto zero = record_outcome(fresh(0.98), true, 0);
    CHECK(weight_for(zero, 5) == 1.0);
}

TEST_CASE("update examples")
{
    auto acc = update(fresh(0.9), true, 1.0);
    CHECK(acc.r == 1.0);
    CHECK(acc.s == 0.0);
    acc = update(acc, false, 0.5);
    CHECK(acc.r == doctest::Approx(0.9));
    CHECK(acc.s == 0.5);
    CHECK_THROWS_CODE(update(acc, true, 0.0), ErrorCode::weight_out_of_range);
    CHECK_THROWS_CODE(update(acc, true, 1.5), ErrorCode::weight_out_of_range);
}

TEST_CASE("score of an empty accumulator")
{
    CHECK(score(fresh(0.98)) == doctest::Approx(26.0 / 51.0).epsilon(1e-15));
}

TEST_CASE("first favorable outcome has weight 1")
{
    const auto acc = record_outcome(fresh(0.98), true, 100);
    CHECK(acc.r == 1.0);
    CHECK(acc.n == 1);
    CHECK(acc.reward_sum == 100);
}

TEST_CASE("incremental updates equal the batch recomputation")
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (double lambda : {0.5, 0.9, 0.98, 0.999}) {
        for (int trial = 0; trial < 50; ++trial) {
            auto acc = fresh(lambda);
            std::vector<oracle::Outcome> history;
            std::vector<double> rewards;
            const int n = 1 + static_cast<int>(rng() % 10);
            for (int i = 0; i < n; ++i) {
                const bool fav = u(rng) < 0.7;
                const TokenAmount reward = 1 + rng() % 1000;
                const double w = oracle::weight(rewards, static_cast<double>(reward));
                CHECK(weight_for(acc, reward) == doctest::Approx(w).epsilon(1e-12));
                history.push_back({fav, w});
                rewards.push_back(static_cast<double>(reward));
                acc = record_outcome(acc, fav, reward);
            }
            const auto [r, s] = oracle::batch_sums(history, lambda);
            CHECK(acc.r == doctest::Approx(r).epsilon(1e-12));
            CHECK(acc.s == doctest::Approx(s).epsilon(1e-12));
            CHECK(score(acc) == doctest::Approx(oracle::batch_score(history, lambda)).epsilon(1e-12));
        }
    }
}

TEST_CASE("alternating outcomes converge to the geometric fixed points")
{
    // Equal rewards give w = 1 once and 0.5 afterwards. With alternation the
    // favorable sum after an even number of steps is 0.5 * lambda / (1 - lambda^2)
    // in the limit, and the unfavorable sum 0.5 / (1 - lambda^2).
    const double lambda = 0.9;
    auto acc = fresh(lambda);
    std::vector<oracle::Outcome> history;
    std::vector<double> rewards;
    for (int i = 0; i < 400; ++i) {
        const bool fav = i % 2 == 0;
        history.push_back({fav, oracle::weight(rewards, 100.0)});
        rewards.push_back(100.0);
        acc = record_outcome(acc, fav, 100);
    }
    CHECK(acc.r == doctest::Approx(0.5 * lambda / (1 - lambda * lambda)).epsilon(1e-9));
    CHECK(acc.s == doctest::Approx(0.5 / (1 - lambda * lambda)).epsilon(1e-9));
    const auto [r, s] = oracle::batch_sums(history, lambda);
    CHECK(acc.r == doctest::Approx(r).epsilon(1e-12));
    CHECK(acc.s == doctest::Approx(s).epsilon(1e-12));
}

TEST_CASE("all-favorable w=1 run approaches the favorable-sum bound and a score of 1 from below")
{
    const double lambda = 0.9;
    auto acc = fresh(lambda);
    double previous = score(acc);
    const int steps = static_cast<int>(std::ceil(std::log(1e-6) / std::log(lambda))) + 1;
    for (int i = 0; i < 500; ++i) {
        acc = update(acc, true, 1.0);
        const double sc = score(acc);
        CHECK(sc >= previous);
        CHECK(sc <= 1.0);
        previous = sc;
        if (i + 1 == steps)
            CHECK(std::fabs(acc.r - 10.0) <= 1e-6 * 10.0);
    }
    CHECK(acc.r == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(score(acc) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("an outcome moves the score in its direction relative to decay alone")
{
    std::mt19937_64 rng(99);
    auto acc = fresh(0.98);
    for (int i = 0; i < 3000; ++i) {
        const bool fav = rng() % 3 != 0;
        const auto next = record_outcome(acc, fav, 1 + rng() % 500);
        auto decayed = acc;
        decayed.r *= acc.params.lambda();
        decayed.s *= acc.params.lambda();
        const auto other = update(acc, !fav, weight_for(acc, next.reward_sum - acc.reward_sum));
        if (fav) {
            CHECK(score(next) >= score(decayed));
            CHECK(score(next) >= score(other));
        } else {
            CHECK(score(next) <= score(decayed));
            CHECK(score(next) <= score(other));
        }
        CHECK(score(next) > 0.0);
        CHECK(score(next) <= 1.0);
        CHECK(next.r <= next.params.max_sum() * (1 + 1e-12));
        CHECK(next.s <= next.params.max_sum() * (1 + 1e-12));
        acc = next;
    }
}

TEST_CASE("a light favorable outcome can lower a strong score through decay")
{
    ReputationAccumulator acc;
    acc.r = 40.0;
    const auto next = update(acc, true, 0.1);
    CHECK(score(acc) == doctest::Approx((41.0 / 42.0) / acc.params.mu()));
    CHECK(score(next) == doctest::Approx((40.3 / 41.3) / acc.params.mu()));
    CHECK(score(next) < score(acc));
}

TEST_CASE("recent failures weigh more than old ones")
{
    auto late = fresh(0.9);
    auto early = fresh(0.9);
    // [F, F, F, U] vs [U, F, F, F] with F favorable, U unfavorable
    for (bool fav : {true, true, true, false})
        late = update(late, fav, 1.0);
    for (bool fav : {false, true, true, true})
        early = update(early, fav, 1.0);
    CHECK(score(late) < score(early));
}

TEST_CASE("the accumulator holds no history")
{
    CHECK(sizeof(ReputationAccumulator) <= 6 * sizeof(double));
}
