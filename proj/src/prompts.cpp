#include "driftbench/prompts.hpp"

#include <algorithm>

#include "driftbench/errors.hpp"
#include "driftbench/utterance.hpp"

namespace driftbench {

namespace {

constexpr std::string_view kMethodNames[] = {"direct", "cot", "ledger_only", "mus_repair"};

std::vector<std::string> integer_arg_names(ConstraintType t) {
  switch (t) {
    case ConstraintType::AtSlot:
    case ConstraintType::NotAtSlot: return {"slot"};
    case ConstraintType::DurationEq: return {"duration"};
    case ConstraintType::StartBetween: return {"lo", "hi"};
    case ConstraintType::AtPosition:
    case ConstraintType::NotAtPosition: return {"seat"};
    case ConstraintType::MinSeparation: return {"k"};
    default: return {};
  }
}

std::string signature_text(ConstraintType t, DomainKind d) {
  const std::string entity = d == DomainKind::Scheduling ? "event" : "person";
  const auto ints = integer_arg_names(t);
  std::size_t next_int = 0;
  int entity_no = 0;
  const bool pair = std::count(signature(t).begin(), signature(t).end(), ArgKind::Entity) == 2;
  std::string out = std::string(type_name(t)) + "(";
  bool first = true;
  for (ArgKind k : signature(t)) {
    if (!first) out += ", ";
    first = false;
    switch (k) {
      case ArgKind::Entity: out += entity + (pair ? (entity_no++ == 0 ? "A" : "B") : ""); break;
      case ArgKind::Category: out += "category"; break;
      case ArgKind::Value: out += "value"; break;
      case ArgKind::Integer: out += ints.at(next_int++); break;
    }
  }
  return out + ")";
}

std::string trim(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  return text.substr(first, text.find_last_not_of(" \t\r\n") - first + 1);
}

}  // namespace

std::string_view to_string(MethodKind method) { return kMethodNames[static_cast<int>(method)]; }

MethodKind method_from_string(std::string_view name) {
  for (int i = 0; i < 4; ++i) {
    if (kMethodNames[i] == name) return static_cast<MethodKind>(i);
  }
  throw ValidationError("unknown method '" + std::string(name) + "'");
}

bool uses_ledger(MethodKind method) { return method == MethodKind::LedgerOnly || method == MethodKind::MusRepair; }

const std::string& prompt_template(const std::string& name) {
  const auto& table = embedded_prompts();
  const auto it = table.find(name);
  if (it == table.end()) throw ContractError("no embedded prompt named '" + name + "'");
  return it->second;
}

const std::string& system_prompt(MethodKind method) {
  return prompt_template("system_" + std::string(to_string(method)));
}

std::string render_repair_signal(const RepairPacket& packet, const DomainSchema& s) {
  std::string out = "REPAIR REQUIRED";
  for (const auto& [code, detail] : packet.issues) out += "\n" + std::string(to_string(code)) + " : " + detail;
  if (packet.mus) {
    out += "\nMUS subset:";
    for (const auto& c : *packet.mus) {
      out += "\n" + canonicalize(c, s).text + " : \"" + render_constraint(c) + "\" (turn " +
             std::to_string(c.source_turn) + ")";
    }
  }
  out += "\nReturn a revised JSON solution that resolves all listed issues.";
  return out;
}

std::string answer_schema_hint(const DomainSchema& s) {
  switch (s.kind) {
    case DomainKind::LogicGrid: {
      std::string inner;
      for (std::size_t c = 0; c < s.categories.size(); ++c) {
        inner += (c ? ", " : "") + ("\"" + s.categories[c].name + "\": \"<value>\"");
      }
      return "Answer JSON: {\"<person>\": {" + inner + "}} for every person.";
    }
    case DomainKind::Scheduling:
      return "Answer JSON: {\"<event>\": {\"start\": <slot 1-" + std::to_string(s.slot_count) +
             ">, \"duration\": <1-" + std::to_string(s.max_duration) + ">}} for every event.";
    case DomainKind::Seating:
      return "Answer JSON: {\"<person>\": <seat 1-" + std::to_string(s.seat_count()) + ">} for every person.";
  }
  return {};
}

std::string build_turn_message(const DomainSchema& s, const std::string& utterance,
                               const std::optional<std::string>& ledger_text,
                               const std::optional<std::string>& repair_signal) {
  std::string out;
  if (ledger_text) out += "Current ledger:\n" + (ledger_text->empty() ? std::string("(empty)") : *ledger_text) + "\n\n";
  out += "New constraints from user:\n" + utterance + "\n\n";
  if (repair_signal) out += "Repair signal:\n" + *repair_signal + "\n\n";
  out += answer_schema_hint(s);
  return out;
}

std::vector<Message> build_chat(MethodKind method, const std::vector<std::pair<std::string, std::string>>& history,
                                const std::string& turn_message) {
  std::vector<Message> out{{"system", system_prompt(method)}};
  for (const auto& [user, assistant] : history) {
    out.push_back({"user", user});
    out.push_back({"assistant", assistant});
  }
  out.push_back({"user", turn_message});
  return out;
}

std::vector<Message> build_extraction_chat(const DomainSchema& s, int turn, const std::string& utterance,
                                           const std::string& answer) {
  std::string user = "Domain: " + std::string(to_string(s.kind)) + "\nSource turn: " + std::to_string(turn) +
                     "\nEntities: ";
  for (std::size_t i = 0; i < s.entities.size(); ++i) user += (i ? ", " : "") + s.entities[i];
  user += "\n\nLatest user message:\n" + utterance + "\n\nAssistant response:\n" + answer +
          "\n\nAllowed constraint types:";
  for (ConstraintType t : vocabulary(s.kind)) user += "\n- " + signature_text(t, s.kind);
  user +=
      "\n\nRules: use the type names exactly as listed; give arguments in the listed order; entity, category and "
      "value names as written in the problem; integers as JSON numbers; include only constraints stated in the "
      "latest user message.\n"
      "Respond with JSON only: {\"constraints\": [{\"type\": \"<type>\", \"args\": [...]}]}";
  return {{"system", prompt_template("system_extraction")}, {"user", user}};
}

ExtractionResult parse_extraction_reply(const std::string& text, const DomainSchema& s, int turn) {
  ExtractionResult out;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(trim(strip_code_fence(text)));
  } catch (const nlohmann::json::parse_error&) {
    return out;
  }
  if (!j.is_object() || !j.contains("constraints") || !j["constraints"].is_array()) return out;
  for (const auto& item : j["constraints"]) {
    try {
      Constraint c = constraint_from_json(item);
      if (domain_of(c.type) != s.kind) continue;
      c = make_constraint(c.type, c.args, turn);
      validate_constraint(c, s);
      out.constraints.push_back(std::move(c));
    } catch (const ValidationError&) {
      // unknown variant or arguments outside the schema: dropped
    }
  }
  out.empty_flag = out.constraints.empty();
  return out;
}

}  // namespace driftbench
