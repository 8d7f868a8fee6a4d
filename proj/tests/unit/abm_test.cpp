#include <cmath>
#include <random>

#include "check.hpp"
#include "cmx/abm.hpp"
#include "oracles.hpp"

using namespace cmx;

namespace {

SimConfig small(bool reputation, std::uint64_t seed = 1)
{
    SimConfig c;
    c.n_processors = 30;
    c.n_consumers = 60;
    c.steps = 30;
    c.iterations = 1;
    c.reputation_enabled = reputation;
    c.seed = seed;
    return c;
}

} // namespace

TEST_CASE("gini matches the pairwise oracle")
{
    const std::vector<double> a{1, 2, 3, 4};
    CHECK(gini(a) == doctest::Approx(0.25));
    CHECK(gini(a) == doctest::Approx(oracle::gini(a)));
    const std::vector<double> one{0, 0, 0, 0, 7};
    CHECK(gini(one) == doctest::Approx(0.8));
    const std::vector<double> flat{3, 3, 3};
    CHECK(gini(flat) == 0.0);
    const std::vector<double> zeros{0, 0};
    CHECK(gini(zeros) == 0.0);
    CHECK_THROWS_CODE(gini(std::span<const double>{}), ErrorCode::empty_input);
    const std::vector<double> bad{1, -1};
    CHECK_THROWS_CODE(gini(bad), ErrorCode::invalid_input);

    std::mt19937_64 rng(5);
    for (int i = 0; i < 200; ++i) {
        std::vector<double> x(1 + rng() % 50);
        for (auto &v : x)
            v = static_cast<double>(rng() % 1000);
        CHECK(gini(x) == doctest::Approx(oracle::gini(x)).epsilon(1e-9));
    }
}

TEST_CASE("groups are interleaved")
{
    CHECK(group_of(0, 3) == 0);
    CHECK(group_of(4, 3) == 1);
    CHECK(group_of(8, 3) == 2);
}

TEST_CASE("zero steps produce an empty run")
{
    auto c = small(true);
    c.steps = 0;
    const auto run = run_iteration(c, 0);
    CHECK(run.metrics.allocated == 0);
    CHECK(run.metrics.failure_rate == 0.0);
    CHECK(run.metrics.trajectory.empty());
}

TEST_CASE("perfect processors never fail")
{
    auto c = small(true);
    c.group_success_rates = {1.0, 1.0, 1.0};
    const auto m = run_iteration(c, 0).metrics;
    CHECK(m.allocated > 0);
    CHECK(m.failed == 0);
    CHECK(m.failure_rate == 0.0);
}

TEST_CASE("without reputation the groups share the work evenly")
{
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const auto m = run_iteration(small(false, seed), 0).metrics;
        for (const auto &g : m.groups)
            CHECK(std::fabs(g.share - 1.0 / 3.0) <= 0.05);
    }
}

TEST_CASE("event log reproduces the metrics")
{
    const auto c = small(true, 3);
    const auto run = run_iteration(c, 0, true);
    CHECK_FALSE(run.events.empty());
    CHECK(metrics_from_events(c, 0, run.events) == run.metrics);
}

TEST_CASE("runs are deterministic and seeds matter")
{
    const auto c = small(true, 11);
    CHECK(run_iteration(c, 0).metrics == run_iteration(c, 0).metrics);
    CHECK_FALSE(run_iteration(c, 0).metrics == run_iteration(c, 1).metrics);
    CHECK(iteration_seed(1, 0) != iteration_seed(1, 1));
}

TEST_CASE("experiment aggregates its iterations")
{
    auto c = small(true);
    c.iterations = 2;
    const auto r = run_experiment(c);
    REQUIRE(r.iterations.size() == 2);
    CHECK(r.aggregate.allocated == r.iterations[0].allocated + r.iterations[1].allocated);
    CHECK(r.aggregate.processors.size() == 2 * c.n_processors);
    CHECK(r.aggregate.gini == doctest::Approx((r.iterations[0].gini + r.iterations[1].gini) / 2));
}

TEST_CASE("config validation")
{
    auto c = small(true);
    c.group_success_rates = {};
    CHECK_THROWS_CODE(validate(c), ErrorCode::config_invalid);
    c = small(true);
    c.group_success_rates = {1.2};
    CHECK_THROWS_CODE(validate(c), ErrorCode::config_invalid);
    c = small(true);
    c.n_processors = 0;
    CHECK_THROWS_CODE(validate(c), ErrorCode::config_invalid);
    c = small(true);
    c.ask_range = {50, 10};
    CHECK_THROWS_CODE(validate(c), ErrorCode::config_invalid);
    c = small(true);
    c.p_min_rep_consumer = -0.1;
    CHECK_THROWS_CODE(validate(c), ErrorCode::config_invalid);
    c = small(true);
    c.execution_ms = c.step_ms + 1;
    CHECK_THROWS_CODE(validate(c), ErrorCode::config_invalid);
}
