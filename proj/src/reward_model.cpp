#include "urdp/reward_model.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <limits>
#include <regex>
#include <set>

#include <nlohmann/json.hpp>

namespace urdp {
namespace {

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// Cut a '#' comment, respecting single/double quoted strings.
std::string strip_line_comment(const std::string& line) {
    char quote = 0;
    for (size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quote) {
            if (c == '\\') {
                ++i;
            } else if (c == quote) {
                quote = 0;
            }
        } else if (c == '"' || c == '\'') {
            quote = c;
        } else if (c == '#') {
            return line.substr(0, i);
        }
    }
    return line;
}

std::string collapse_ws(const std::string& s) {
    std::string out;
    bool in_ws = false;
    for (char c : s) {
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            in_ws = true;
        } else {
            if (in_ws && !out.empty()) out.push_back(' ');
            in_ws = false;
            out.push_back(c);
        }
    }
    return out;
}

size_t indent_of(const std::string& line) {
    size_t i = 0;
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    return i;
}

bool is_blank(const std::string& line) {
    return trim(strip_line_comment(line)).empty();
}

// Net bracket depth delta of a line, string-aware.
int bracket_delta(const std::string& line) {
    int depth = 0;
    char quote = 0;
    for (size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quote) {
            if (c == '\\') ++i;
            else if (c == quote) quote = 0;
        } else if (c == '"' || c == '\'') {
            quote = c;
        } else if (c == '#') {
            break;
        } else if (c == '(' || c == '[' || c == '{') {
            ++depth;
        } else if (c == ')' || c == ']' || c == '}') {
            --depth;
        }
    }
    return depth;
}

// Split on commas at bracket depth zero, string-aware.
std::vector<std::string> split_top_level(const std::string& text, char sep) {
    std::vector<std::string> parts;
    int depth = 0;
    char quote = 0;
    std::string cur;
    for (size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (quote) {
            cur.push_back(c);
            if (c == '\\' && i + 1 < text.size()) cur.push_back(text[++i]);
            else if (c == quote) quote = 0;
            continue;
        }
        if (c == '"' || c == '\'') {
            quote = c;
            cur.push_back(c);
        } else if (c == '(' || c == '[' || c == '{') {
            ++depth;
            cur.push_back(c);
        } else if (c == ')' || c == ']' || c == '}') {
            --depth;
            cur.push_back(c);
        } else if (c == sep && depth == 0) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    parts.push_back(cur);
    return parts;
}

bool is_numeric_literal(const std::string& s) {
    static const std::regex re(R"(^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$)");
    return std::regex_match(s, re);
}

bool is_identifier(const std::string& s) {
    if (s.empty() || !is_ident_start(s[0])) return false;
    return std::all_of(s.begin(), s.end(), [](char c) { return is_ident_char(c); });
}

// Bare identifiers in an expression, skipping attribute accesses (x in a.x).
std::vector<std::string> extract_identifiers(const std::string& expr) {
    std::vector<std::string> ids;
    char quote = 0;
    for (size_t i = 0; i < expr.size();) {
        char c = expr[i];
        if (quote) {
            if (c == '\\') ++i;
            else if (c == quote) quote = 0;
            ++i;
            continue;
        }
        if (c == '"' || c == '\'') {
            quote = c;
            ++i;
            continue;
        }
        if (is_ident_start(c)) {
            size_t j = i;
            while (j < expr.size() && is_ident_char(expr[j])) ++j;
            bool after_dot = (i > 0 && expr[i - 1] == '.');
            if (!after_dot) ids.push_back(expr.substr(i, j - i));
            i = j;
        } else {
            ++i;
        }
    }
    return ids;
}

struct Assignment {
    std::string name;
    std::string rhs;   // comment-stripped, single line
    size_t line_idx;
    std::string full_line;  // trimmed, comment-stripped
};

// `name = rhs` or `name: annotation = rhs`; rejects comparisons and
// augmented assignments.
std::optional<Assignment> match_assignment(const std::string& raw, size_t line_idx) {
    const std::string line = strip_line_comment(raw);
    size_t i = indent_of(line);
    if (i >= line.size() || !is_ident_start(line[i])) return std::nullopt;
    size_t j = i;
    while (j < line.size() && is_ident_char(line[j])) ++j;
    std::string name = line.substr(i, j - i);
    size_t k = j;
    while (k < line.size() && line[k] == ' ') ++k;
    if (k < line.size() && line[k] == ':') {
        // Skip the annotation up to '='.
        size_t eq = line.find('=', k);
        if (eq == std::string::npos) return std::nullopt;
        if (eq + 1 < line.size() && line[eq + 1] == '=') return std::nullopt;
        k = eq;
    }
    if (k >= line.size() || line[k] != '=') return std::nullopt;
    if (k + 1 < line.size() && line[k + 1] == '=') return std::nullopt;
    std::string rhs = trim(line.substr(k + 1));
    if (rhs.empty()) return std::nullopt;
    return Assignment{name, rhs, line_idx, trim(line)};
}

// Extract the {...} literal starting at text[open_brace]; returns the inner
// content, or nullopt if unbalanced.
std::optional<std::string> brace_content(const std::string& text, size_t open_brace) {
    int depth = 0;
    char quote = 0;
    for (size_t i = open_brace; i < text.size(); ++i) {
        char c = text[i];
        if (quote) {
            if (c == '\\') ++i;
            else if (c == quote) quote = 0;
            continue;
        }
        if (c == '"' || c == '\'') {
            quote = c;
        } else if (c == '#') {
            while (i < text.size() && text[i] != '\n') ++i;
        } else if (c == '{' || c == '(' || c == '[') {
            ++depth;
        } else if (c == '}' || c == ')' || c == ']') {
            --depth;
            if (depth == 0) return text.substr(open_brace + 1, i - open_brace - 1);
        }
    }
    return std::nullopt;
}

std::string strip_comments_multiline(const std::string& text) {
    std::string out;
    size_t start = 0;
    while (start <= text.size()) {
        size_t nl = text.find('\n', start);
        std::string line = text.substr(start, nl == std::string::npos ? std::string::npos : nl - start);
        out += strip_line_comment(line);
        if (nl == std::string::npos) break;
        out.push_back('\n');
        start = nl + 1;
    }
    return out;
}

}  // namespace

std::string to_string(BoundScale scale) {
    return scale == BoundScale::Log ? "log" : "linear";
}

BoundScale bound_scale_from_string(const std::string& s) {
    if (s == "log") return BoundScale::Log;
    if (s == "linear") return BoundScale::Linear;
    throw ConfigError("unknown bound scale: " + s);
}

std::string to_string(ParseErrorCode code) {
    switch (code) {
        case ParseErrorCode::None: return "None";
        case ParseErrorCode::NoFunction: return "NoFunction";
        case ParseErrorCode::NoComponentDict: return "NoComponentDict";
        case ParseErrorCode::DuplicateName: return "DuplicateName";
        case ParseErrorCode::ZeroInitial: return "ZeroInitial";
    }
    return "Unknown";
}

Bounds default_bounds(double initial_value) {
    if (initial_value == 0.0) {
        throw ZeroInitialError("default_bounds requires a nonzero initial value");
    }
    if (initial_value > 0.0) {
        return Bounds{initial_value / 10.0, initial_value * 10.0, BoundScale::Log};
    }
    return Bounds{initial_value * 10.0, initial_value / 10.0, BoundScale::Linear};
}

std::string normalize_text(const std::string& text) {
    std::string lowered = collapse_ws(strip_comments_multiline(text));
    std::transform(lowered.begin(), lowered.end(), lowered.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return lowered;
}

ParseOutcome parse_reward_sample(const std::string& code_text, const ParseConfig& config) {
    auto fail = [](ParseErrorCode code, std::string detail) {
        ParseOutcome out;
        out.error = code;
        out.detail = std::move(detail);
        return out;
    };

    std::vector<std::string> lines;
    {
        size_t start = 0;
        while (start <= code_text.size()) {
            size_t nl = code_text.find('\n', start);
            if (nl == std::string::npos) {
                lines.push_back(code_text.substr(start));
                break;
            }
            lines.push_back(code_text.substr(start, nl - start));
            start = nl + 1;
        }
    }

    // Locate the first function definition.
    static const std::regex def_re(R"(^\s*def\s+[A-Za-z_]\w*\s*\()");
    size_t def_idx = lines.size();
    for (size_t i = 0; i < lines.size(); ++i) {
        if (std::regex_search(lines[i], def_re)) {
            def_idx = i;
            break;
        }
    }
    if (def_idx == lines.size()) {
        return fail(ParseErrorCode::NoFunction, "no function definition found");
    }
    const size_t def_indent = indent_of(lines[def_idx]);

    // Signature may span lines; it ends when brackets balance out.
    size_t sig_end = def_idx;
    int depth = bracket_delta(lines[def_idx]);
    while (depth > 0 && sig_end + 1 < lines.size()) {
        ++sig_end;
        depth += bracket_delta(lines[sig_end]);
    }

    // Body: lines strictly more indented than the def, blanks included.
    size_t body_begin = sig_end + 1;
    size_t body_end = body_begin;
    while (body_end < lines.size()) {
        const std::string& l = lines[body_end];
        if (!is_blank(l) && indent_of(l) <= def_indent) break;
        ++body_end;
    }
    if (body_begin >= body_end) {
        return fail(ParseErrorCode::NoComponentDict, "empty function body");
    }

    std::string body_text;
    for (size_t i = body_begin; i < body_end; ++i) {
        body_text += lines[i];
        body_text.push_back('\n');
    }

    // Single-line assignments in the body (multi-line RHS handled via
    // brace matching when resolving the component dictionary).
    std::vector<Assignment> assigns;
    std::map<std::string, size_t> first_assign;  // name -> index into assigns
    {
        int depth_in_body = 0;
        for (size_t i = body_begin; i < body_end; ++i) {
            if (depth_in_body == 0) {
                if (auto a = match_assignment(lines[i], i)) {
                    if (!first_assign.count(a->name)) first_assign[a->name] = assigns.size();
                    assigns.push_back(*a);
                }
            }
            depth_in_body += bracket_delta(lines[i]);
            if (depth_in_body < 0) depth_in_body = 0;
        }
    }

    // Last return statement; gather continuation lines until brackets balance.
    static const std::regex return_re(R"(^\s*return\b)");
    size_t ret_idx = body_end;
    for (size_t i = body_begin; i < body_end; ++i) {
        if (std::regex_search(lines[i], return_re)) ret_idx = i;
    }
    if (ret_idx == body_end) {
        return fail(ParseErrorCode::NoComponentDict, "no return statement");
    }
    std::string ret_stmt = strip_line_comment(lines[ret_idx]);
    {
        int d = bracket_delta(lines[ret_idx]);
        size_t i = ret_idx;
        while (d > 0 && i + 1 < body_end) {
            ++i;
            ret_stmt += "\n" + strip_line_comment(lines[i]);
            d += bracket_delta(lines[i]);
        }
    }
    {
        size_t pos = ret_stmt.find("return");
        ret_stmt = trim(ret_stmt.substr(pos + 6));
    }

    auto ret_parts = split_top_level(ret_stmt, ',');
    if (ret_parts.size() < 2) {
        return fail(ParseErrorCode::NoComponentDict, "return does not yield (reward, components)");
    }
    std::string dict_expr = trim(ret_parts[1]);

    // Resolve the component dictionary text.
    std::string dict_content;
    if (!dict_expr.empty() && dict_expr[0] == '{') {
        auto content = brace_content(dict_expr, 0);
        if (!content) return fail(ParseErrorCode::NoComponentDict, "unbalanced dictionary literal");
        dict_content = *content;
    } else if (is_identifier(dict_expr)) {
        auto it = first_assign.find(dict_expr);
        if (it == first_assign.end()) {
            return fail(ParseErrorCode::NoComponentDict,
                        "returned name '" + dict_expr + "' is not assigned a dictionary");
        }
        const Assignment& a = assigns[it->second];
        // Find the '{' following the '=' on the assignment line, then
        // brace-match over the remaining body text.
        std::string tail;
        for (size_t i = a.line_idx; i < body_end; ++i) {
            tail += lines[i];
            tail.push_back('\n');
        }
        size_t eq = tail.find('=');
        size_t open = tail.find('{', eq == std::string::npos ? 0 : eq);
        if (open == std::string::npos) {
            return fail(ParseErrorCode::NoComponentDict,
                        "returned name '" + dict_expr + "' is not assigned a dictionary");
        }
        auto content = brace_content(tail, open);
        if (!content) return fail(ParseErrorCode::NoComponentDict, "unbalanced dictionary literal");
        dict_content = *content;
    } else {
        return fail(ParseErrorCode::NoComponentDict, "second return value is not a dictionary");
    }

    dict_content = strip_comments_multiline(dict_content);
    if (trim(dict_content).empty()) {
        return fail(ParseErrorCode::NoComponentDict, "component dictionary is empty");
    }

    // Dictionary entries -> components.
    RewardFunctionSample sample;
    sample.code_text = code_text;
    std::set<std::string> seen_names;
    for (const std::string& raw_entry : split_top_level(dict_content, ',')) {
        std::string entry = trim(raw_entry);
        if (entry.empty()) continue;  // trailing comma
        auto kv = split_top_level(entry, ':');
        if (kv.size() != 2) {
            return fail(ParseErrorCode::NoComponentDict, "malformed dictionary entry: " + entry);
        }
        std::string key = trim(kv[0]);
        if (key.size() >= 2 && (key.front() == '"' || key.front() == '\'') && key.back() == key.front()) {
            key = key.substr(1, key.size() - 2);
        } else if (!is_identifier(key)) {
            return fail(ParseErrorCode::NoComponentDict, "unsupported dictionary key: " + key);
        }
        if (key.empty()) {
            return fail(ParseErrorCode::NoComponentDict, "empty component name");
        }
        if (!seen_names.insert(key).second) {
            return fail(ParseErrorCode::DuplicateName, "duplicate component name: " + key);
        }

        std::string value = collapse_ws(trim(kv[1]));

        // Defining expression: the RHS of the assignment feeding this entry,
        // plus the assignment lines it references (one pass, no fixpoint).
        std::string base = value;
        std::string base_owner;
        if (is_identifier(value)) {
            auto it = first_assign.find(value);
            if (it != first_assign.end()) {
                base = assigns[it->second].rhs;
                base_owner = value;
            }
        }
        std::vector<size_t> ref_lines;
        for (const std::string& ident : extract_identifiers(base)) {
            if (ident == base_owner) continue;
            auto it = first_assign.find(ident);
            if (it == first_assign.end()) continue;
            size_t idx = it->second;
            if (std::find(ref_lines.begin(), ref_lines.end(), idx) == ref_lines.end()) {
                ref_lines.push_back(idx);
            }
        }
        std::sort(ref_lines.begin(), ref_lines.end(),
                  [&](size_t a, size_t b) { return assigns[a].line_idx < assigns[b].line_idx; });
        std::string body = base;
        for (size_t idx : ref_lines) {
            body += "\n" + assigns[idx].full_line;
        }

        RewardComponent comp;
        comp.name = key;
        comp.body_text = body;
        comp.normalized_text = normalize_text(body);
        sample.components.push_back(std::move(comp));
    }
    if (sample.components.empty()) {
        return fail(ParseErrorCode::NoComponentDict, "component dictionary is empty");
    }

    // Tunable hyperparameters: numeric named constants matching the pattern.
    std::regex hp_re;
    try {
        hp_re = std::regex(config.hyperparameter_pattern);
    } catch (const std::regex_error&) {
        return fail(ParseErrorCode::NoFunction, "invalid hyperparameter pattern");
    }
    std::set<std::string> hp_seen;
    for (const Assignment& a : assigns) {
        if (!std::regex_match(a.name, hp_re)) continue;
        std::string rhs = trim(a.rhs);
        if (!is_numeric_literal(rhs)) continue;
        if (!hp_seen.insert(a.name).second) {
            return fail(ParseErrorCode::DuplicateName, "duplicate hyperparameter: " + a.name);
        }
        HyperparameterSpec spec;
        spec.name = a.name;
        spec.initial_value = std::stod(rhs);
        auto eb = config.explicit_bounds.find(a.name);
        if (eb != config.explicit_bounds.end()) {
            spec.lower_bound = eb->second.lower;
            spec.upper_bound = eb->second.upper;
            spec.scale = eb->second.scale;
        } else if (spec.initial_value == 0.0) {
            return fail(ParseErrorCode::ZeroInitial,
                        "hyperparameter '" + a.name + "' initialized to zero needs explicit bounds");
        } else {
            Bounds b = default_bounds(spec.initial_value);
            spec.lower_bound = b.lower;
            spec.upper_bound = b.upper;
            spec.scale = b.scale;
        }
        sample.hyperparameters.push_back(std::move(spec));
    }

    ParseOutcome out;
    out.sample = std::move(sample);
    return out;
}

namespace {

std::string format_round_trip(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    (void)ec;
    return std::string(buf, ptr);
}

}  // namespace

std::string substitute_hyperparameters(const RewardFunctionSample& sample,
                                       const std::vector<double>& theta) {
    if (theta.size() != sample.hyperparameters.size()) {
        throw DimensionMismatchError("substitute_hyperparameters: theta length mismatch");
    }
    std::string code = sample.code_text;
    for (size_t h = 0; h < sample.hyperparameters.size(); ++h) {
        const std::string& name = sample.hyperparameters[h].name;
        // `name [: annotation] = <numeric literal>`, identifier-boundary on the left.
        const std::regex assign_re("(^|[^A-Za-z0-9_])(" + name +
                                   R"(\s*(?::[^=\n#]*)?=\s*)([+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?))");
        std::smatch m;
        if (!std::regex_search(code, m, assign_re)) {
            throw SubstitutionMissError("no assignment found for hyperparameter '" + name + "'");
        }
        const std::string replacement = format_round_trip(theta[h]);
        code = code.substr(0, m.position(3)) + replacement +
               code.substr(m.position(3) + m.length(3));
    }
    return code;
}

void to_json(nlohmann::json& j, const RewardComponent& c) {
    j = nlohmann::json{{"name", c.name},
                       {"body_text", c.body_text},
                       {"normalized_text", c.normalized_text}};
}

void from_json(const nlohmann::json& j, RewardComponent& c) {
    j.at("name").get_to(c.name);
    j.at("body_text").get_to(c.body_text);
    j.at("normalized_text").get_to(c.normalized_text);
}

void to_json(nlohmann::json& j, const HyperparameterSpec& h) {
    j = nlohmann::json{{"name", h.name},
                       {"initial_value", h.initial_value},
                       {"lower_bound", h.lower_bound},
                       {"upper_bound", h.upper_bound},
                       {"scale", to_string(h.scale)}};
}

void from_json(const nlohmann::json& j, HyperparameterSpec& h) {
    j.at("name").get_to(h.name);
    j.at("initial_value").get_to(h.initial_value);
    j.at("lower_bound").get_to(h.lower_bound);
    j.at("upper_bound").get_to(h.upper_bound);
    h.scale = bound_scale_from_string(j.at("scale").get<std::string>());
}

void to_json(nlohmann::json& j, const RewardFunctionSample& s) {
    j = nlohmann::json{{"sample_id", s.sample_id},
                       {"code_text", s.code_text},
                       {"components", s.components},
                       {"hyperparameters", s.hyperparameters},
                       {"iteration", s.iteration}};
}

void from_json(const nlohmann::json& j, RewardFunctionSample& s) {
    j.at("sample_id").get_to(s.sample_id);
    j.at("code_text").get_to(s.code_text);
    j.at("components").get_to(s.components);
    j.at("hyperparameters").get_to(s.hyperparameters);
    j.at("iteration").get_to(s.iteration);
}

void to_json(nlohmann::json& j, const ComponentStats& s) {
    j = nlohmann::json{{"max", s.max}, {"mean", s.mean}, {"min", s.min}};
}

void from_json(const nlohmann::json& j, ComponentStats& s) {
    j.at("max").get_to(s.max);
    j.at("mean").get_to(s.mean);
    j.at("min").get_to(s.min);
}

void to_json(nlohmann::json& j, const EvaluationRecord& r) {
    j = nlohmann::json{{"sample_id", r.sample_id},
                       {"theta", r.theta},
                       {"fitness", r.fitness},
                       {"component_stats", r.component_stats},
                       {"wall_time", r.wall_time},
                       {"failed", r.failed},
                       {"failure", r.failure}};
    if (r.failed) j["fitness"] = nullptr;  // NaN is not representable in JSON
}

void from_json(const nlohmann::json& j, EvaluationRecord& r) {
    j.at("sample_id").get_to(r.sample_id);
    j.at("theta").get_to(r.theta);
    r.fitness = j.at("fitness").is_null() ? std::numeric_limits<double>::quiet_NaN()
                                          : j.at("fitness").get<double>();
    j.at("component_stats").get_to(r.component_stats);
    j.at("wall_time").get_to(r.wall_time);
    j.at("failed").get_to(r.failed);
    j.at("failure").get_to(r.failure);
}

}  // namespace urdp
