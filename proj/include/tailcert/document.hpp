#pragma once

// Structured-text (JSON) documents for certificates and related records.

#include <cstdint>
#include <string>

#include "tailcert/certificate.hpp"

namespace tailcert {

/// FNV-1a 64 of the canonical (sorted-key, compact) dump, as 16 hex digits.
std::string digest(const json& doc);
std::uint64_t fnv1a64(std::string_view bytes);

json to_json(const TailCertificate& cert);
TailCertificate certificate_from_json(const json& j);

json to_json(const LowerTailCertificate& cert);
LowerTailCertificate lower_certificate_from_json(const json& j);

json to_json(const UniformCertificate& u);
UniformCertificate uniform_certificate_from_json(const json& j);

json to_json(const DominationEvidence& d);
DominationEvidence domination_from_json(const json& j);

json to_json(const ThetaCertificate& t);

/// "concrete" or {"unknown_positive": [names]}.
json constants_status(const TailCertificate& cert);

/// Digest of a certificate document without its provenance notes, used as the
/// child reference in provenance trees.
std::string certificate_digest(const TailCertificate& cert);

}  // namespace tailcert
