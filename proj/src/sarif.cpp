#include "stublint/sarif.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>

namespace stublint {

using nlohmann::ordered_json;

namespace {

std::string_view level_of(Severity s) {
    switch (s) {
        case Severity::Error: return "error";
        case Severity::Warning: return "warning";
        case Severity::Note: return "note";
    }
    return "none";
}

Severity default_severity(RuleId rule) {
    switch (rule) {
        case RuleId::MissingCamlparam:
        case RuleId::CamlparamArity:
            return Severity::Warning;
        case RuleId::Note:
            return Severity::Note;
        default:
            return Severity::Error;
    }
}

ordered_json location_json(const SourceLoc& loc) {
    ordered_json region;
    region["startLine"] = std::max(1, loc.line);
    region["startColumn"] = std::max(1, loc.column);
    ordered_json phys;
    phys["artifactLocation"] = {{"uri", path_to_uri(loc.file)}};
    phys["region"] = std::move(region);
    return ordered_json{{"physicalLocation", std::move(phys)}};
}

} // namespace

std::string path_to_uri(std::string_view path) {
    static const char hex[] = "0123456789ABCDEF";
    std::string out;
    for (char c : path) {
        auto b = static_cast<unsigned char>(c);
        if (std::isalnum(b) != 0 || c == '-' || c == '.' || c == '_' || c == '~' || c == '/') {
            out += c;
        } else {
            out += '%';
            out += hex[b >> 4];
            out += hex[b & 0xF];
        }
    }
    return out;
}

std::string emit_sarif(const std::vector<Diagnostic>& diags) {
    ordered_json rules = ordered_json::array();
    for (RuleId r : all_rules) {
        ordered_json rule;
        rule["id"] = std::string(to_string(r));
        rule["shortDescription"] = {{"text", std::string(rule_description(r))}};
        rule["defaultConfiguration"] = {{"level", std::string(level_of(default_severity(r)))}};
        rules.push_back(std::move(rule));
    }

    ordered_json results = ordered_json::array();
    for (const auto& d : diags) {
        ordered_json res;
        res["ruleId"] = std::string(to_string(d.rule));
        res["ruleIndex"] = static_cast<int>(d.rule);
        res["level"] = std::string(level_of(d.severity));
        res["message"] = {{"text", d.message}};
        res["locations"] = ordered_json::array({location_json(d.loc)});
        if (d.related) {
            ordered_json rel = location_json(*d.related);
            rel["id"] = 0;
            rel["message"] = {{"text", "related declaration"}};
            res["relatedLocations"] = ordered_json::array({std::move(rel)});
        }
        results.push_back(std::move(res));
    }

    ordered_json driver;
    driver["name"] = "stublint";
    driver["version"] = std::string(tool_version);
    driver["rules"] = std::move(rules);

    ordered_json run;
    run["tool"] = {{"driver", std::move(driver)}};
    run["columnKind"] = "unicodeCodePoints";
    run["results"] = std::move(results);

    ordered_json log;
    log["$schema"] = "https://json.schemastore.org/sarif-2.1.0.json";
    log["version"] = "2.1.0";
    log["runs"] = ordered_json::array({std::move(run)});
    return log.dump(2) + "\n";
}

} // namespace stublint
