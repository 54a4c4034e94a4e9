#include "driftbench/utterance.hpp"

#include <regex>
#include <sstream>

namespace driftbench {

namespace {

std::string s_arg(const Constraint& c, std::size_t i) { return arg_to_string(c.args.at(i)); }

struct Template {
  ConstraintType type;
  std::regex pattern;
  // how each capture group maps onto args: 's' string, 'i' integer
  std::string kinds;
};

const std::vector<Template>& templates() {
  static const std::string name = R"(([A-Za-z][A-Za-z0-9_\-]*))";
  static const std::string num = R"((\d+))";
  static const std::vector<Template> table = [] {
    std::vector<Template> t;
    auto add = [&t](ConstraintType type, const std::string& re, std::string kinds) {
      t.push_back({type, std::regex("^" + re + "$"), std::move(kinds)});
    };
    add(ConstraintType::NeqValue, name + "'s " + name + " is not " + name + R"(\.)", "sss");
    add(ConstraintType::EqValue, name + "'s " + name + " is " + name + R"(\.)", "sss");
    // captures: A, category, B (category repeated via backreference)
    add(ConstraintType::NeqAttr, name + "'s " + name + " differs from " + name + R"('s\.)", "sss");
    add(ConstraintType::LtAttr, name + "'s " + name + " comes before " + name + R"('s \2 in the listed order\.)",
        "sss");
    add(ConstraintType::AtSlot, name + " must start at slot " + num + R"(\.)", "si");
    add(ConstraintType::NotAtSlot, name + " is not available at slot " + num + R"(\.)", "si");
    add(ConstraintType::SameSlot, name + " and " + name + R"( must start at the same slot\.)", "ss");
    add(ConstraintType::NotSimultaneous, name + " and " + name + R"( cannot start at the same slot\.)", "ss");
    add(ConstraintType::DurationEq, name + " lasts exactly " + num + R"( slots?\.)", "si");
    add(ConstraintType::StartBetween, name + " must start between slots " + num + " and " + num + R"(\.)", "sii");
    add(ConstraintType::AtPosition, name + " must sit at position " + num + R"(\.)", "si");
    add(ConstraintType::NotAtPosition, name + " cannot sit at position " + num + R"(\.)", "si");
    add(ConstraintType::NotAdjacent, name + " must not sit next to " + name + R"(\.)", "ss");
    add(ConstraintType::Adjacent, name + " must sit next to " + name + R"(\.)", "ss");
    add(ConstraintType::MinSeparation, name + " and " + name + " must be at least " + num + R"( seats apart\.)",
        "ssi");
    add(ConstraintType::Opposite, name + " must sit directly opposite " + name + R"(\.)", "ss");
    add(ConstraintType::LeftOf, name + " must sit immediately to the left of " + name + R"(\.)", "ss");
    return t;
  }();
  return table;
}

}  // namespace

std::string render_constraint(const Constraint& c) {
  switch (c.type) {
    case ConstraintType::EqValue: return s_arg(c, 0) + "'s " + s_arg(c, 1) + " is " + s_arg(c, 2) + ".";
    case ConstraintType::NeqValue: return s_arg(c, 0) + "'s " + s_arg(c, 1) + " is not " + s_arg(c, 2) + ".";
    case ConstraintType::NeqAttr: return s_arg(c, 0) + "'s " + s_arg(c, 2) + " differs from " + s_arg(c, 1) + "'s.";
    case ConstraintType::LtAttr:
      return s_arg(c, 0) + "'s " + s_arg(c, 2) + " comes before " + s_arg(c, 1) + "'s " + s_arg(c, 2) +
             " in the listed order.";
    case ConstraintType::AtSlot: return s_arg(c, 0) + " must start at slot " + s_arg(c, 1) + ".";
    case ConstraintType::NotAtSlot: return s_arg(c, 0) + " is not available at slot " + s_arg(c, 1) + ".";
    case ConstraintType::SameSlot: return s_arg(c, 0) + " and " + s_arg(c, 1) + " must start at the same slot.";
    case ConstraintType::NotSimultaneous:
      return s_arg(c, 0) + " and " + s_arg(c, 1) + " cannot start at the same slot.";
    case ConstraintType::DurationEq:
      return s_arg(c, 0) + " lasts exactly " + s_arg(c, 1) + (s_arg(c, 1) == "1" ? " slot." : " slots.");
    case ConstraintType::StartBetween:
      return s_arg(c, 0) + " must start between slots " + s_arg(c, 1) + " and " + s_arg(c, 2) + ".";
    case ConstraintType::AtPosition: return s_arg(c, 0) + " must sit at position " + s_arg(c, 1) + ".";
    case ConstraintType::NotAtPosition: return s_arg(c, 0) + " cannot sit at position " + s_arg(c, 1) + ".";
    case ConstraintType::Adjacent: return s_arg(c, 0) + " must sit next to " + s_arg(c, 1) + ".";
    case ConstraintType::NotAdjacent: return s_arg(c, 0) + " must not sit next to " + s_arg(c, 1) + ".";
    case ConstraintType::MinSeparation:
      return s_arg(c, 0) + " and " + s_arg(c, 1) + " must be at least " + s_arg(c, 2) + " seats apart.";
    case ConstraintType::Opposite: return s_arg(c, 0) + " must sit directly opposite " + s_arg(c, 1) + ".";
    case ConstraintType::LeftOf: return s_arg(c, 0) + " must sit immediately to the left of " + s_arg(c, 1) + ".";
  }
  return {};
}

std::string setup_block(const DomainSchema& s) {
  std::string out = "Domain: " + std::string(to_string(s.kind)) + "\nEntities: ";
  for (std::size_t i = 0; i < s.entities.size(); ++i) out += (i ? ", " : "") + s.entities[i];
  out += "\nContext: " + describe_context(s);
  return out;
}

std::string render_utterance(std::span<const Constraint> fresh, const DomainSchema& s, int turn) {
  std::string out = turn == 1 ? setup_block(s) + "\n" : std::string();
  for (std::size_t i = 0; i < fresh.size(); ++i) out += (i ? "\n" : "") + render_constraint(fresh[i]);
  return out;
}

std::vector<Constraint> extract_from_utterance(const std::string& text, int turn) {
  std::vector<Constraint> out;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    std::smatch m;
    for (const auto& t : templates()) {
      if (!std::regex_match(line, m, t.pattern)) continue;
      std::vector<Arg> args;
      for (std::size_t g = 0; g < t.kinds.size(); ++g) {
        const std::string piece = m[g + 1].str();
        if (t.kinds[g] == 'i') {
          args.emplace_back(std::stoi(piece));
        } else {
          args.emplace_back(piece);
        }
      }
      // neq_attr / lt_attr capture (A, category, B); stored order is (A, B, category)
      if (t.type == ConstraintType::NeqAttr || t.type == ConstraintType::LtAttr) std::swap(args[1], args[2]);
      out.push_back(make_constraint(t.type, std::move(args), turn));
      break;
    }
  }
  return out;
}

}  // namespace driftbench
