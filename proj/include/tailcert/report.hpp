#pragma once

// Report documents and the flat files derived from them.

#include <filesystem>
#include <string>

#include "tailcert/scenarios.hpp"

namespace tailcert {

inline constexpr const char* kToolVersion = "0.1.0";

/// Full report document, including run metadata (wall clock, workers) and
/// the content digest.
json report_to_json(const ExperimentReport& report);

/// Digest of the report document without its "run" and "content_digest"
/// members, so it depends only on the configuration and seed.
std::string content_digest(const json& report_doc);

/// Probe table: tail,n,t,m,k,ucb,bound,slack; one row per probe.
std::string report_csv(const json& report_doc);

/// x,y,series triples.
std::string report_plotdata(const json& report_doc);

enum class EmitFormat { Json, Csv, Plotdata };
EmitFormat emit_format_from_string(const std::string& s);

/// Writes one file; throws IoFailure.
void emit(const json& report_doc, EmitFormat format, const std::filesystem::path& path);

json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

EmpiricalTail tail_from_json(const json& j);

}  // namespace tailcert
