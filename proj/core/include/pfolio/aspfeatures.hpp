#ifndef PFOLIO_ASPFEATURES_HPP
#define PFOLIO_ASPFEATURES_HPP

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace pfolio {

// Ground logic program in the numeric smodels format. Rule types follow the
// lparse numbering; anything else is rejected.
enum class RuleType : int {
  normal = 1,
  cardinality = 2,
  choice = 3,
  weight = 5,
};

struct GroundRule {
  RuleType type = RuleType::normal;
  std::vector<int> heads;
  long long bound = 0;  // cardinality and weight rules
  std::vector<int> negative_body;
  std::vector<int> positive_body;
  // Weight rules carry one weight per body literal, negative literals first.
  std::vector<long long> negative_weights;
  std::vector<long long> positive_weights;

  std::size_t body_size() const {
    return negative_body.size() + positive_body.size();
  }
};

struct GroundProgram {
  std::vector<GroundRule> rules;
  std::vector<std::pair<int, std::string>> symbols;
  std::vector<int> compute_positive;  // B+
  std::vector<int> compute_negative;  // B-
  long long model_count = 1;
};

// Parses the numeric format: rule lines terminated by 0, symbol table,
// B+/B- blocks and the model count. Diagnostics carry the line number.
GroundProgram parse_smodels(std::istream& input,
                            const std::string& source_name = "<smodels>");
GroundProgram parse_smodels(std::string_view text,
                            const std::string& source_name = "<smodels>");

// Canonical numeric form: one rule per line, single spaces; parsing it
// back reproduces the same program.
std::string serialize_smodels(const GroundProgram& program);

// ---------------------------------------------------------------------------
// Static features

struct FeatureValue {
  double value = 0.0;
  bool computed = false;
};

// The static feature vector. Values that depend on solver preprocessing are
// never computed here and serialize as '?'.
struct StaticFeatures {
  std::vector<FeatureValue> values;  // aligned with static_feature_names()

  const FeatureValue& at(std::string_view name) const;
};

const std::vector<std::string>& static_feature_names();

StaticFeatures compute_static_features(const GroundProgram& program);

// features.csv fragments (missing token '?'); stable column order.
std::string feature_header_row();
std::string feature_value_row(const StaticFeatures& features,
                              std::string_view instance_id);

}  // namespace pfolio

#endif
