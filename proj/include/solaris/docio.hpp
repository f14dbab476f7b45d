#pragma once

#include "solaris/dataio.hpp"

#include <string>
#include <vector>

#include <json.hpp>

namespace solaris::docio {

/// Decimal serialization with 17 significant digits; round-trips any double
/// exactly. Used for every number in a model document.
std::string format_g17(double v);

/// JSON array text of doubles in 17-significant-digit form.
std::string json_array_g17(const std::vector<double>& values);

/// JSON string literal with escaping.
std::string json_string(const std::string& s);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

/// Parse a model document and check schema_version / model_type. Throws
/// ParseError on malformed JSON, missing fields, or mismatches.
nlohmann::json parse_document(const std::string& text, const std::string& expected_type,
                              int expected_version);

/// Read the model_type field without validating anything else.
std::string peek_model_type(const std::string& text);

std::string string_array_json(const std::vector<std::string>& values);

/// Standardizer block shared by every model document that carries one.
std::string standardizer_json(const dataio::Standardizer& s);
dataio::Standardizer standardizer_from_json(const nlohmann::json& j);

} // namespace solaris::docio
