#include "cmx/attestation.hpp"

#include <algorithm>

#include "cmx/error.hpp"

namespace cmx {

void AttestationRegistry::register_record(AttestationRecord record)
{
    if (record.issued_at >= record.expires_at)
        fail(ErrorCode::invalid_input, "attestation for " + record.processor.value + " must be issued before it expires");
    auto it = _records.find(record.processor);
    if (it != _records.end() && !it->second.revoked)
        fail(ErrorCode::duplicate_attestation, record.processor.value);
    if (it != _records.end())
        it->second = std::move(record);
    else
        _records.emplace(record.processor, std::move(record));
}

void AttestationRegistry::revoke(const AccountId &processor)
{
    auto it = _records.find(processor);
    if (it == _records.end())
        fail(ErrorCode::unknown_processor, processor.value);
    it->second.revoked = true;
}

bool AttestationRegistry::is_valid(const AccountId &processor, TimestampMs at) const
{
    const auto *rec = find(processor);
    return rec && !rec->revoked && rec->issued_at <= at && at < rec->expires_at;
}

const AttestationRecord *AttestationRegistry::find(const AccountId &processor) const
{
    auto it = _records.find(processor);
    return it == _records.end() ? nullptr : &it->second;
}

std::vector<AttestationRecord> AttestationRegistry::records() const
{
    std::vector<AttestationRecord> out;
    out.reserve(_records.size());
    for (const auto &[_, rec] : _records)
        out.push_back(rec);
    std::sort(out.begin(), out.end(), [](const auto &a, const auto &b) { return a.processor < b.processor; });
    return out;
}

} // namespace cmx
