#include <random>

#include "check.hpp"
#include "cmx/domain.hpp"

using namespace cmx;

namespace {

Schedule good_schedule()
{
    return {.start = 0, .end = 100, .interval = 10, .duration = 3, .max_start_delay = 5};
}

} // namespace

TEST_CASE("lifecycle follows the four-state chain")
{
    DeploymentState s = state::Open{};
    s = transition(s, event::Matched{});
    CHECK(state_name(s) == "MATCHED");
    s = transition(s, event::AcknowledgedAllSlots{});
    CHECK(state_name(s) == "ASSIGNED");
    s = transition(s, event::AllExecutionsReported{{3, 1}});
    REQUIRE(std::holds_alternative<state::Done>(s));
    CHECK(std::get<state::Done>(s).outcome == OutcomeTally{3, 1});
}

TEST_CASE("illegal transitions throw")
{
    CHECK_THROWS_CODE(transition(state::Done{}, event::Matched{}), ErrorCode::illegal_transition);
    CHECK_THROWS_CODE(transition(state::Open{}, event::AcknowledgedAllSlots{}), ErrorCode::illegal_transition);
    CHECK_THROWS_CODE(transition(state::Open{}, event::AllExecutionsReported{}), ErrorCode::illegal_transition);
    CHECK_THROWS_CODE(transition(state::Matched{}, event::Matched{}), ErrorCode::illegal_transition);
    CHECK_THROWS_CODE(transition(state::Assigned{}, event::AcknowledgedAllSlots{}), ErrorCode::illegal_transition);
}

TEST_CASE("random event sequences stay inside the state set and only move forward")
{
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 2000; ++trial) {
        DeploymentState s = state::Open{};
        std::size_t last = s.index();
        for (int i = 0; i < 8; ++i) {
            LifecycleEvent ev;
            switch (rng() % 3) {
                case 0: ev = event::Matched{}; break;
                case 1: ev = event::AcknowledgedAllSlots{}; break;
                default: ev = event::AllExecutionsReported{}; break;
            }
            // exactly one event type is accepted in each non-terminal state
            const bool legal = s.index() < 3 && ev.index() == s.index();
            if (legal) {
                s = transition(s, ev);
                CHECK(s.index() == last + 1);
                last = s.index();
            } else {
                CHECK_THROWS_CODE(transition(s, ev), ErrorCode::illegal_transition);
            }
        }
    }
}

TEST_CASE("schedule validation")
{
    CHECK_NOTHROW(validate(good_schedule()));
    auto s = good_schedule();
    s.end = s.start;
    CHECK_THROWS_CODE(validate(s), ErrorCode::invalid_schedule);
    s = good_schedule();
    s.duration = 0;
    CHECK_THROWS_CODE(validate(s), ErrorCode::invalid_schedule);
    s = good_schedule();
    s.duration = 11;
    CHECK_THROWS_CODE(validate(s), ErrorCode::invalid_schedule);
    s = good_schedule();
    s.max_start_delay = -1;
    CHECK_THROWS_CODE(validate(s), ErrorCode::invalid_schedule);
    s = {.start = 0, .end = 5, .interval = 10, .duration = 6, .max_start_delay = 0};
    CHECK_THROWS_CODE(validate(s), ErrorCode::invalid_schedule);
}

TEST_CASE("deployment validation")
{
    DeploymentSpec d{.id = DeploymentId{1}, .consumer = AccountId{"c"}, .schedule = good_schedule(),
                     .reward_per_execution = 10};
    CHECK_NOTHROW(validate(d));
    d.min_reputation = 0.0;
    CHECK_NOTHROW(validate(d));
    d.min_reputation = 1.0;
    CHECK_THROWS_CODE(validate(d), ErrorCode::invalid_input);
    d.min_reputation = -0.1;
    CHECK_THROWS_CODE(validate(d), ErrorCode::invalid_input);
}

TEST_CASE("execution report outcome")
{
    ExecutionReport ok{.deployment = DeploymentId{1}, .outcome = ExecutionSuccess{"0xabc"}};
    ExecutionReport bad{.deployment = DeploymentId{1}, .outcome = ExecutionFailure{"timeout"}};
    CHECK(ok.succeeded());
    CHECK_FALSE(bad.succeeded());
}
