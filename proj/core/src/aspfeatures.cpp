#include "pfolio/aspfeatures.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <istream>
#include <map>
#include <set>
#include <sstream>

#include "pfolio/errors.hpp"
#include "pfolio/text.hpp"

namespace pfolio {

namespace {

class Lexer {
 public:
  Lexer(std::string_view text, std::string source)
      : text_(text), source_(std::move(source)) {}

  long long read_int(const char* what) {
    skip_space();
    if (at_end()) {
      throw input_error(source_, line_, std::string("unexpected end of input, expected ") + what);
    }
    std::size_t start = pos_;
    if (text_[pos_] == '-') ++pos_;
    std::size_t digits = pos_;
    while (pos_ < text_.size() && text_[pos_] >= '0' && text_[pos_] <= '9') {
      ++pos_;
    }
    if (pos_ == digits) {
      throw input_error(source_, line_, std::string("expected ") + what);
    }
    return *parse_int(text_.substr(start, pos_ - start));
  }

  int read_atom(const char* what) {
    long long id = read_int(what);
    if (id < 1) {
      throw input_error(source_, line_, std::string("atom id must be positive in ") + what);
    }
    return static_cast<int>(id);
  }

  // Rest of the current line, trimmed; used for symbol names.
  std::string read_rest_of_line() {
    while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t')) {
      ++pos_;
    }
    std::size_t start = pos_;
    while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
    return std::string(trim(text_.substr(start, pos_ - start)));
  }

  std::string read_token(const char* what) {
    skip_space();
    if (at_end()) {
      throw input_error(source_, line_, std::string("unexpected end of input, expected ") + what);
    }
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           !std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      ++pos_;
    }
    return std::string(text_.substr(start, pos_ - start));
  }

  bool at_end() {
    skip_space();
    return pos_ >= text_.size();
  }

  std::size_t line() const { return line_; }
  const std::string& source() const { return source_; }

 private:
  void skip_space() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_]))) {
      if (text_[pos_] == '\n') ++line_;
      ++pos_;
    }
  }

  std::string_view text_;
  std::string source_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

GroundRule parse_rule(Lexer& lexer, long long type_code) {
  GroundRule rule;
  switch (type_code) {
    case 1:
      rule.type = RuleType::normal;
      break;
    case 2:
      rule.type = RuleType::cardinality;
      break;
    case 3:
      rule.type = RuleType::choice;
      break;
    case 5:
      rule.type = RuleType::weight;
      break;
    default:
      throw input_error(lexer.source(), lexer.line(),
                        "unknown rule type " + std::to_string(type_code));
  }

  if (rule.type == RuleType::choice) {
    long long n_heads = lexer.read_int("head count");
    if (n_heads < 1) {
      throw input_error(lexer.source(), lexer.line(),
                        "choice rule needs at least one head");
    }
    for (long long i = 0; i < n_heads; ++i) {
      rule.heads.push_back(lexer.read_atom("choice head"));
    }
  } else {
    rule.heads.push_back(lexer.read_atom("rule head"));
  }
  if (rule.type == RuleType::weight) {
    rule.bound = lexer.read_int("weight bound");
    if (rule.bound < 0) {
      throw input_error(lexer.source(), lexer.line(),
                        "weight bound must be non-negative");
    }
  }
  long long n_literals = lexer.read_int("body size");
  if (n_literals < 0) {
    throw input_error(lexer.source(), lexer.line(),
                      "body size must be non-negative");
  }
  long long n_negative = lexer.read_int("negative body size");
  if (n_negative < 0 || n_negative > n_literals) {
    throw input_error(lexer.source(), lexer.line(),
                      "negative body size inconsistent with body size");
  }
  if (rule.type == RuleType::cardinality) {
    rule.bound = lexer.read_int("cardinality bound");
    if (rule.bound < 0) {
      throw input_error(lexer.source(), lexer.line(),
                        "cardinality bound must be non-negative");
    }
  }
  for (long long i = 0; i < n_negative; ++i) {
    rule.negative_body.push_back(lexer.read_atom("body literal"));
  }
  for (long long i = n_negative; i < n_literals; ++i) {
    rule.positive_body.push_back(lexer.read_atom("body literal"));
  }
  if (rule.type == RuleType::weight) {
    for (long long i = 0; i < n_literals; ++i) {
      long long w = lexer.read_int("literal weight");
      if (w < 0) {
        throw input_error(lexer.source(), lexer.line(),
                          "literal weight must be non-negative");
      }
      if (i < n_negative) {
        rule.negative_weights.push_back(w);
      } else {
        rule.positive_weights.push_back(w);
      }
    }
  }
  return rule;
}

}  // namespace

GroundProgram parse_smodels(std::istream& input,
                            const std::string& source_name) {
  std::ostringstream buffer;
  buffer << input.rdbuf();
  std::string text = buffer.str();
  return parse_smodels(std::string_view(text), source_name);
}

GroundProgram parse_smodels(std::string_view text,
                            const std::string& source_name) {
  Lexer lexer(text, source_name);
  GroundProgram program;

  for (;;) {
    long long type_code = lexer.read_int("rule type or terminator");
    if (type_code == 0) break;
    program.rules.push_back(parse_rule(lexer, type_code));
  }

  for (;;) {
    long long id = lexer.read_int("symbol table entry or terminator");
    if (id == 0) break;
    if (id < 1) {
      throw input_error(lexer.source(), lexer.line(),
                        "atom id must be positive in symbol table");
    }
    std::string name = lexer.read_rest_of_line();
    if (name.empty()) {
      throw input_error(lexer.source(), lexer.line(),
                        "symbol table entry without a name");
    }
    program.symbols.emplace_back(static_cast<int>(id), std::move(name));
  }

  for (int block = 0; block < 2; ++block) {
    const char* expected = block == 0 ? "B+" : "B-";
    std::string marker = lexer.read_token(expected);
    if (marker != expected) {
      throw input_error(lexer.source(), lexer.line(),
                        std::string("expected ") + expected + ", got " +
                            marker);
    }
    auto& atoms =
        block == 0 ? program.compute_positive : program.compute_negative;
    for (;;) {
      long long id = lexer.read_int("compute atom or terminator");
      if (id == 0) break;
      if (id < 1) {
        throw input_error(lexer.source(), lexer.line(),
                          "atom id must be positive in compute statement");
      }
      atoms.push_back(static_cast<int>(id));
    }
  }

  program.model_count = lexer.read_int("model count");
  if (program.model_count < 0) {
    throw input_error(lexer.source(), lexer.line(),
                      "model count must be non-negative");
  }
  if (!lexer.at_end()) {
    throw input_error(lexer.source(), lexer.line(),
                      "trailing input after model count");
  }
  return program;
}

std::string serialize_smodels(const GroundProgram& program) {
  std::ostringstream out;
  for (const GroundRule& rule : program.rules) {
    out << static_cast<int>(rule.type);
    if (rule.type == RuleType::choice) {
      out << ' ' << rule.heads.size();
      for (int h : rule.heads) out << ' ' << h;
    } else {
      out << ' ' << rule.heads.front();
    }
    if (rule.type == RuleType::weight) out << ' ' << rule.bound;
    out << ' ' << rule.body_size() << ' ' << rule.negative_body.size();
    if (rule.type == RuleType::cardinality) out << ' ' << rule.bound;
    for (int a : rule.negative_body) out << ' ' << a;
    for (int a : rule.positive_body) out << ' ' << a;
    if (rule.type == RuleType::weight) {
      for (long long w : rule.negative_weights) out << ' ' << w;
      for (long long w : rule.positive_weights) out << ' ' << w;
    }
    out << '\n';
  }
  out << "0\n";
  for (const auto& [id, name] : program.symbols) {
    out << id << ' ' << name << '\n';
  }
  out << "0\n";
  out << "B+\n";
  for (int a : program.compute_positive) out << a << '\n';
  out << "0\n";
  out << "B-\n";
  for (int a : program.compute_negative) out << a << '\n';
  out << "0\n";
  out << program.model_count << '\n';
  return out.str();
}

// ---------------------------------------------------------------------------
// Static features

namespace {

const std::vector<std::string> kFeatureNames = {
    "tight",
    "problem_variables",
    "free_problem_variables",
    "assigned_problem_variables",
    "constraints",
    "constraints_per_variable",
    "created_bodies",
    "program_atoms",
    "sccs",
    "badg_nodes",
    "rules",
    "normal_rules",
    "frac_normal_rules",
    "cardinality_rules",
    "frac_cardinality_rules",
    "choice_rules",
    "frac_choice_rules",
    "weight_rules",
    "frac_weight_rules",
    "frac_negative_body_rules",
    "frac_positive_body_rules",
    "frac_unary_rules",
    "frac_binary_rules",
    "frac_ternary_rules",
    "frac_integrity_constraints",
    "equivalences",
    "atom_atom_equivalences",
    "frac_atom_atom_equivalences",
    "body_body_equivalences",
    "frac_body_body_equivalences",
    "other_equivalences",
    "frac_other_equivalences",
    "binary_constraints",
    "frac_binary_constraints",
    "ternary_constraints",
    "frac_ternary_constraints",
    "other_constraints",
    "frac_other_constraints",
};

// The designated false atom of integrity constraints.
constexpr int kFalseAtom = 1;

struct SccAnalysis {
  std::size_t n_nodes = 0;
  std::size_t n_sccs = 0;
  std::size_t max_scc_size = 0;
  bool self_loop = false;
};

// Iterative Tarjan over the positive body-atom dependency graph.
SccAnalysis analyze_badg(const GroundProgram& program) {
  std::map<int, int> node_of;
  auto node = [&](int atom) {
    return node_of.try_emplace(atom, static_cast<int>(node_of.size()))
        .first->second;
  };
  std::vector<std::vector<int>> edges;
  SccAnalysis analysis;
  for (const GroundRule& rule : program.rules) {
    for (int body_atom : rule.positive_body) {
      for (int head : rule.heads) {
        int from = node(body_atom);
        int to = node(head);
        if (edges.size() < node_of.size()) edges.resize(node_of.size());
        edges[static_cast<std::size_t>(from)].push_back(to);
        if (from == to) analysis.self_loop = true;
      }
    }
  }
  edges.resize(node_of.size());
  const int n = static_cast<int>(node_of.size());
  analysis.n_nodes = node_of.size();

  std::vector<int> index(static_cast<std::size_t>(n), -1);
  std::vector<int> lowlink(static_cast<std::size_t>(n), 0);
  std::vector<std::uint8_t> on_stack(static_cast<std::size_t>(n), 0);
  std::vector<int> stack;
  int next_index = 0;

  struct Frame {
    int node;
    std::size_t child;
  };
  std::vector<Frame> frames;
  for (int root = 0; root < n; ++root) {
    if (index[static_cast<std::size_t>(root)] != -1) continue;
    frames.push_back({root, 0});
    index[static_cast<std::size_t>(root)] =
        lowlink[static_cast<std::size_t>(root)] = next_index++;
    stack.push_back(root);
    on_stack[static_cast<std::size_t>(root)] = 1;
    while (!frames.empty()) {
      Frame& frame = frames.back();
      auto u = static_cast<std::size_t>(frame.node);
      if (frame.child < edges[u].size()) {
        int v = edges[u][frame.child++];
        auto vi = static_cast<std::size_t>(v);
        if (index[vi] == -1) {
          index[vi] = lowlink[vi] = next_index++;
          stack.push_back(v);
          on_stack[vi] = 1;
          frames.push_back({v, 0});
        } else if (on_stack[vi]) {
          lowlink[u] = std::min(lowlink[u], index[vi]);
        }
      } else {
        if (lowlink[u] == index[u]) {
          std::size_t size = 0;
          for (;;) {
            int w = stack.back();
            stack.pop_back();
            on_stack[static_cast<std::size_t>(w)] = 0;
            ++size;
            if (w == frame.node) break;
          }
          ++analysis.n_sccs;
          analysis.max_scc_size = std::max(analysis.max_scc_size, size);
        }
        frames.pop_back();
        if (!frames.empty()) {
          auto p = static_cast<std::size_t>(frames.back().node);
          lowlink[p] = std::min(lowlink[p], lowlink[u]);
        }
      }
    }
  }
  return analysis;
}

}  // namespace

const std::vector<std::string>& static_feature_names() {
  return kFeatureNames;
}

const FeatureValue& StaticFeatures::at(std::string_view name) const {
  for (std::size_t i = 0; i < kFeatureNames.size(); ++i) {
    if (kFeatureNames[i] == name) return values[i];
  }
  throw ValidationError("unknown static feature: " + std::string(name));
}

StaticFeatures compute_static_features(const GroundProgram& program) {
  StaticFeatures features;
  features.values.assign(kFeatureNames.size(), FeatureValue{});
  auto set = [&](std::string_view name, double value) {
    for (std::size_t i = 0; i < kFeatureNames.size(); ++i) {
      if (kFeatureNames[i] == name) {
        features.values[i] = {value, true};
        return;
      }
    }
  };

  const auto n_rules = program.rules.size();
  std::size_t by_type[4] = {0, 0, 0, 0};  // normal, cardinality, choice, weight
  std::size_t with_negative = 0, with_positive = 0;
  std::size_t unary = 0, binary = 0, ternary = 0, integrity = 0;
  std::set<int> rule_atoms;
  for (const GroundRule& rule : program.rules) {
    switch (rule.type) {
      case RuleType::normal:
        ++by_type[0];
        break;
      case RuleType::cardinality:
        ++by_type[1];
        break;
      case RuleType::choice:
        ++by_type[2];
        break;
      case RuleType::weight:
        ++by_type[3];
        break;
    }
    if (!rule.negative_body.empty()) ++with_negative;
    if (!rule.positive_body.empty()) ++with_positive;
    switch (rule.body_size()) {
      case 1:
        ++unary;
        break;
      case 2:
        ++binary;
        break;
      case 3:
        ++ternary;
        break;
      default:
        break;
    }
    if (rule.type == RuleType::normal && rule.heads.size() == 1 &&
        rule.heads.front() == kFalseAtom) {
      ++integrity;
    }
    rule_atoms.insert(rule.heads.begin(), rule.heads.end());
    rule_atoms.insert(rule.negative_body.begin(), rule.negative_body.end());
    rule_atoms.insert(rule.positive_body.begin(), rule.positive_body.end());
  }

  std::set<int> all_atoms = rule_atoms;
  for (const auto& [id, name] : program.symbols) all_atoms.insert(id);
  all_atoms.insert(program.compute_positive.begin(),
                   program.compute_positive.end());
  all_atoms.insert(program.compute_negative.begin(),
                   program.compute_negative.end());

  SccAnalysis badg = analyze_badg(program);
  bool tight = badg.max_scc_size < 2 && !badg.self_loop;

  auto frac = [&](std::size_t count) {
    return n_rules == 0 ? 0.0
                        : static_cast<double>(count) /
                              static_cast<double>(n_rules);
  };

  set("tight", tight ? 1.0 : 0.0);
  set("problem_variables", static_cast<double>(all_atoms.size()));
  set("program_atoms", static_cast<double>(rule_atoms.size()));
  set("sccs", static_cast<double>(badg.n_sccs));
  set("badg_nodes", static_cast<double>(badg.n_nodes));
  set("rules", static_cast<double>(n_rules));
  set("normal_rules", static_cast<double>(by_type[0]));
  set("frac_normal_rules", frac(by_type[0]));
  set("cardinality_rules", static_cast<double>(by_type[1]));
  set("frac_cardinality_rules", frac(by_type[1]));
  set("choice_rules", static_cast<double>(by_type[2]));
  set("frac_choice_rules", frac(by_type[2]));
  set("weight_rules", static_cast<double>(by_type[3]));
  set("frac_weight_rules", frac(by_type[3]));
  set("frac_negative_body_rules", frac(with_negative));
  set("frac_positive_body_rules", frac(with_positive));
  set("frac_unary_rules", frac(unary));
  set("frac_binary_rules", frac(binary));
  set("frac_ternary_rules", frac(ternary));
  set("frac_integrity_constraints", frac(integrity));
  // Everything else (equivalences, created bodies, constraint counts, free
  // and assigned variables) comes out of solver preprocessing and stays
  // not-computed.
  return features;
}

std::string feature_header_row() {
  std::string header = "instance";
  for (const auto& name : kFeatureNames) {
    header += ',';
    header += name;
  }
  return header;
}

std::string feature_value_row(const StaticFeatures& features,
                              std::string_view instance_id) {
  std::string row(instance_id);
  for (const FeatureValue& value : features.values) {
    row += ',';
    row += value.computed ? format_double(value.value) : "?";
  }
  return row;
}

}  // namespace pfolio
