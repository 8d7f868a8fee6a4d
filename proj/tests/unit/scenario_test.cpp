#include <string>

#include "check.hpp"
#include "cmx/scenario.hpp"

using namespace cmx;

namespace {

std::string error_text(const std::string &text)
{
    try {
        parse_scenario(text);
    } catch (const Error &e) {
        CHECK(e.code() == ErrorCode::config_invalid);
        return e.what();
    }
    return {};
}

} // namespace

TEST_CASE("empty scenario takes every default and round trips")
{
    const auto s = parse_scenario("{}");
    CHECK(s.sim == SimConfig{});
    CHECK(s.economy.inflation == InflationConfig{});
    CHECK(parse_scenario(to_json(s).dump(2)) == s);
    CHECK(canonical_text(parse_scenario(canonical_text(s))) == canonical_text(s));
}

TEST_CASE("config hash is stable across formatting and key order")
{
    const auto a = parse_scenario(R"({"sim": {"seed": 5, "steps": 20}})");
    const auto b = parse_scenario("{\n  \"sim\": {\n    \"steps\": 20,\n    \"seed\": 5\n  }\n}");
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a) != config_hash(parse_scenario("{}")));
    CHECK(config_hash(a).size() == 64);
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("errors name the offending field")
{
    CHECK(error_text(R"({"sim": {"steps": -1}})").find("sim.steps") != std::string::npos);
    CHECK(error_text(R"({"sim": {"stepz": 1}})").find("stepz") != std::string::npos);
    CHECK(error_text(R"({"reputation": {"lambda": 1.5}})").find("lambda") != std::string::npos);
    CHECK(error_text(R"({"economy": {"split": {"treasury": 0.5}}})").find("economy") != std::string::npos);
    CHECK(error_text("{\n  \"sim\": ,\n}").find("line 2") != std::string::npos);
    CHECK_FALSE(error_text(R"({"bogus": {}})").empty());
}

TEST_CASE("a commitment needs a listed provider")
{
    const auto text = R"({"economy": {"accounts": {"x": 10},
        "commitments": [{"committer": "x", "own_stake": 1, "cooldown": 5,
                         "committed": {"cpu_single": 0, "cpu_multi": 0, "ram": 0, "storage": 0}}]}})";
    CHECK(error_text(text).find("x") != std::string::npos);
}

TEST_CASE("sample economy scenario conserves and slashes the outage")
{
    const auto s = load_scenario(CMX_SOURCE_DIR "/scenarios/economy_shortfall.json");
    const auto run = run_economy(s.economy);
    CHECK(run.epochs.size() == s.economy.epochs);
    CHECK_NOTHROW(run.economy.audit());
    TokenAmount slashed = 0;
    for (const auto &e : run.epochs)
        slashed += e.slash_total();
    CHECK(slashed > 0);
    const auto quiet = epoch_state(s.economy, 0);
    const auto outage = epoch_state(s.economy, 3);
    CHECK(outage.current_compute.at(AccountId{"alice"}) == BenchmarkVector{});
    CHECK_FALSE(quiet.current_compute.at(AccountId{"alice"}) == BenchmarkVector{});
}
