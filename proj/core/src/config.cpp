#include "hierseq/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <stdexcept>

namespace hierseq {

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == sep) {
            out.push_back(trim(s.substr(start, i - start)));
            start = i + 1;
        }
    }
    return out;
}

double parse_plain_real(const std::string& t) {
    std::size_t pos = 0;
    double v = std::stod(t, &pos);
    if (pos != t.size()) throw std::invalid_argument("parse_real: trailing characters in '" + t + "'");
    return v;
}

}  // namespace

KvConfig KvConfig::parse(std::string_view text) {
    KvConfig cfg;
    std::string section;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= text.size(); ++i) {
        if (i != text.size() && text[i] != '\n') continue;
        std::string line = trim(text.substr(start, i - start));
        start = i + 1;
        if (line.empty() || line[0] == '#' || line[0] == ';') continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::invalid_argument("config: malformed section header '" + line + "'");
            section = trim(std::string_view(line).substr(1, line.size() - 2));
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config: expected 'key = value', got '" + line + "'");
        std::string key = trim(std::string_view(line).substr(0, eq));
        std::string value = trim(std::string_view(line).substr(eq + 1));
        if (key.empty()) throw std::invalid_argument("config: empty key in '" + line + "'");
        cfg.set(section.empty() ? key : section + "." + key, value);
    }
    return cfg;
}

std::optional<std::string> KvConfig::get(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
}

std::string KvConfig::require(const std::string& key) const {
    auto v = get(key);
    if (!v) throw std::invalid_argument("config: missing required key '" + key + "'");
    return *v;
}

double parse_real(std::string_view text) {
    std::string t = trim(text);
    if (t.empty()) throw std::invalid_argument("parse_real: empty value");
    auto slash = t.find('/');
    if (slash != std::string::npos) {
        double num = parse_plain_real(trim(std::string_view(t).substr(0, slash)));
        double den = parse_plain_real(trim(std::string_view(t).substr(slash + 1)));
        if (den == 0.0) throw std::invalid_argument("parse_real: zero denominator in '" + t + "'");
        return num / den;
    }
    return parse_plain_real(t);
}

std::vector<double> parse_real_list(std::string_view text) {
    std::vector<double> out;
    for (const auto& piece : split(text, ','))
        if (!piece.empty()) out.push_back(parse_real(piece));
    if (out.empty()) throw std::invalid_argument("parse_real_list: no values in '" + std::string(text) + "'");
    return out;
}

namespace {

std::string join_key(const std::string& prefix, const std::string& key) {
    return prefix.empty() ? key : prefix + "." + key;
}

Combiner compose_from_config(const KvConfig& cfg, const std::string& prefix) {
    Combiner outer = combiner_from_config(cfg, join_key(prefix, "outer"));
    std::vector<Combiner> inner;
    for (int i = 1; i <= outer.arity(); ++i)
        inner.push_back(combiner_from_config(cfg, join_key(prefix, "inner." + std::to_string(i))));

    std::vector<std::vector<int>> index_sets;
    for (const auto& part : split(cfg.require(join_key(prefix, "index_sets")), ';')) {
        std::vector<int> set;
        for (const auto& tok : split(part, ',')) {
            if (tok.empty()) continue;
            int idx = static_cast<int>(parse_real(tok));
            if (idx < 1) throw std::invalid_argument("config: index sets are 1-based");
            set.push_back(idx - 1);
        }
        index_sets.push_back(std::move(set));
    }

    std::optional<std::vector<double>> scale;
    if (auto sv = cfg.get(join_key(prefix, "scale")); sv && *sv != "auto")
        scale = parse_real_list(*sv);

    return compose(CompositionSpec{std::move(outer), std::move(inner), std::move(index_sets),
                                   std::move(scale)});
}

}  // namespace

Combiner combiner_from_config(const KvConfig& cfg, const std::string& prefix) {
    std::string kind = cfg.require(join_key(prefix, "combiner"));
    if (kind == "diamond") {
        auto w = parse_real_list(cfg.get(join_key(prefix, "weights")).value_or("1,1,1,1"));
        return diamond(WeightVector(std::move(w)));
    }
    if (kind == "lp") {
        double p = parse_real(cfg.require(join_key(prefix, "p")));
        auto w = parse_real_list(cfg.require(join_key(prefix, "weights")));
        return lp_combiner(WeightVector(std::move(w)), p);
    }
    if (kind == "mean") {
        int k = static_cast<int>(parse_real(cfg.get(join_key(prefix, "arity")).value_or("2")));
        return arithmetic_mean(k);
    }
    if (kind == "min") {
        int k = static_cast<int>(parse_real(cfg.get(join_key(prefix, "arity")).value_or("2")));
        return coordinate_min(k);
    }
    if (kind == "identity") return identity_combiner();
    if (kind == "compose") return compose_from_config(cfg, prefix);
    throw std::invalid_argument("config: unknown combiner kind '" + kind + "'");
}

}  // namespace hierseq
