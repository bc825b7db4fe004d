#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hierseq/combiner.hpp"

namespace hierseq {

/// Flat key = value store with INI-style [section] prefixes. Section paths
/// nest with dots, so arbitrarily deep compositions stay expressible:
///
///   combiner = compose
///   index_sets = 1,2 ; 3,4
///   [outer]
///   combiner = lp
///   p = 1
///   weights = 1,1
///   [inner.1]
///   combiner = lp
///   p = -1
///   weights = 1,1
///   ...
class KvConfig {
  public:
    static KvConfig parse(std::string_view text);

    void set(const std::string& key, const std::string& value) { values_[key] = value; }
    bool has(const std::string& key) const { return values_.count(key) > 0; }
    std::optional<std::string> get(const std::string& key) const;
    std::string require(const std::string& key) const;
    const std::map<std::string, std::string>& values() const { return values_; }

  private:
    std::map<std::string, std::string> values_;
};

/// Real-number parsing that accepts plain literals and exact fractions
/// ("2/3"), so closed-form weights round-trip without decimal truncation.
double parse_real(std::string_view text);
std::vector<double> parse_real_list(std::string_view text);

/// Builds a combiner from config keys under `prefix` ("" for the root):
/// combiner = diamond | lp | mean | min | compose, with weights / p / arity
/// as the chosen kind requires, and nested [outer] / [inner.N] sections for
/// compositions. Index sets are 1-based in the text form.
Combiner combiner_from_config(const KvConfig& cfg, const std::string& prefix = "");

}  // namespace hierseq
