#include "solaris/docio.hpp"

#include "solaris/errors.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace solaris::docio {

std::string format_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string json_array_g17(const std::vector<double>& values) {
    std::string out = "[";
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ",";
        out += format_g17(values[i]);
    }
    out += "]";
    return out;
}

std::string json_string(const std::string& s) {
    return nlohmann::json(s).dump();
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << content;
    if (!out) throw IoError("write to '" + path + "' failed");
}

nlohmann::json parse_document(const std::string& text, const std::string& expected_type,
                              int expected_version) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed model document: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("schema_version") || !doc.contains("model_type"))
        throw ParseError("model document missing schema_version/model_type");
    if (doc["schema_version"].get<int>() != expected_version)
        throw ParseError("model document schema_version " +
                         doc["schema_version"].dump() + ", expected " +
                         std::to_string(expected_version));
    if (doc["model_type"].get<std::string>() != expected_type)
        throw ParseError("model document type '" + doc["model_type"].get<std::string>() +
                         "', expected '" + expected_type + "'");
    return doc;
}

std::string string_array_json(const std::vector<std::string>& values) {
    std::string out = "[";
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ",";
        out += json_string(values[i]);
    }
    return out + "]";
}

std::string standardizer_json(const dataio::Standardizer& s) {
    std::string out = "{\"feature_names\":" + string_array_json(s.feature_names);
    out += ",\"means\":" + json_array_g17(s.means);
    out += ",\"stddevs\":" + json_array_g17(s.stddevs);
    out += ",\"target_mean\":" + format_g17(s.target_mean) + "}";
    return out;
}

dataio::Standardizer standardizer_from_json(const nlohmann::json& j) {
    dataio::Standardizer s;
    s.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    s.means = j.at("means").get<std::vector<double>>();
    s.stddevs = j.at("stddevs").get<std::vector<double>>();
    s.target_mean = j.at("target_mean").get<double>();
    if (s.means.size() != s.feature_names.size() || s.stddevs.size() != s.feature_names.size())
        throw ParseError("standardizer: field lengths disagree");
    for (double sd : s.stddevs)
        if (!(sd > 0.0)) throw ParseError("standardizer: non-positive stddev");
    return s;
}

std::string peek_model_type(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed model document: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("model_type"))
        throw ParseError("model document missing model_type");
    return doc["model_type"].get<std::string>();
}

} // namespace solaris::docio
