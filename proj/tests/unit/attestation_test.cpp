#include "check.hpp"
#include "cmx/attestation.hpp"

using namespace cmx;

namespace {

AttestationRecord record(const char *id, TimestampMs issued = 100, TimestampMs expires = 200)
{
    return {AccountId{id}, "pixel", 1, issued, expires, false};
}

} // namespace

TEST_CASE("registered record is valid on its half-open window")
{
    AttestationRegistry reg;
    reg.register_record(record("p"));
    CHECK(reg.is_valid(AccountId{"p"}, 100));
    CHECK(reg.is_valid(AccountId{"p"}, 199));
    CHECK_FALSE(reg.is_valid(AccountId{"p"}, 200));
    CHECK_FALSE(reg.is_valid(AccountId{"p"}, 99));
    CHECK_FALSE(reg.is_valid(AccountId{"q"}, 150));
}

TEST_CASE("duplicates and malformed records are rejected")
{
    AttestationRegistry reg;
    reg.register_record(record("p"));
    CHECK_THROWS_CODE(reg.register_record(record("p")), ErrorCode::duplicate_attestation);
    CHECK_THROWS_CODE(reg.register_record(record("q", 200, 200)), ErrorCode::invalid_input);
    CHECK_THROWS_CODE(reg.register_record(record("q", 300, 200)), ErrorCode::invalid_input);
    CHECK(reg.size() == 1);
}

TEST_CASE("revocation is permanent and idempotent")
{
    AttestationRegistry reg;
    reg.register_record(record("p"));
    reg.revoke(AccountId{"p"});
    CHECK_FALSE(reg.is_valid(AccountId{"p"}, 150));
    CHECK_NOTHROW(reg.revoke(AccountId{"p"}));
    CHECK(reg.find(AccountId{"p"})->revoked);
    CHECK_THROWS_CODE(reg.revoke(AccountId{"nobody"}), ErrorCode::unknown_processor);
}

TEST_CASE("a revoked record may be replaced by a fresh attestation")
{
    AttestationRegistry reg;
    reg.register_record(record("p"));
    reg.revoke(AccountId{"p"});
    reg.register_record(record("p", 300, 400));
    CHECK(reg.is_valid(AccountId{"p"}, 350));
    CHECK_FALSE(reg.is_valid(AccountId{"p"}, 150));
}

TEST_CASE("records are listed in processor order")
{
    AttestationRegistry reg;
    for (const char *id : {"c", "a", "b"})
        reg.register_record(record(id));
    const auto all = reg.records();
    REQUIRE(all.size() == 3);
    CHECK(all[0].processor.value == "a");
    CHECK(all[2].processor.value == "c");
}
