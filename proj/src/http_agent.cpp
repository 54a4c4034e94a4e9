#include <cstdlib>

#include "driftbench/agents.hpp"
#include "driftbench/errors.hpp"
#include "httplib.h"

namespace driftbench {

namespace {

// RAII slot in the in-flight limit.
class Slot {
 public:
  explicit Slot(std::counting_semaphore<>& sem) : sem_(sem) { sem_.acquire(); }
  ~Slot() { sem_.release(); }
  Slot(const Slot&) = delete;
  Slot& operator=(const Slot&) = delete;

 private:
  std::counting_semaphore<>& sem_;
};

std::optional<int> parse_retry_after(const httplib::Response& res) {
  if (!res.has_header("Retry-After")) return std::nullopt;
  try {
    return std::stoi(res.get_header_value("Retry-After"));
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace

HttpAgent::HttpAgent(HttpAgentConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.model.empty()) throw ValidationError("http agent needs a model name");
  if (cfg_.max_in_flight < 1) throw ValidationError("max_in_flight must be at least 1");
  if (cfg_.truncation_retries < 0) throw ValidationError("truncation_retries must be non-negative");
  const auto scheme = cfg_.endpoint.find("://");
  if (scheme == std::string::npos) throw ValidationError("endpoint must look like http://host:port");
  const auto slash = cfg_.endpoint.find('/', scheme + 3);
  host_ = cfg_.endpoint.substr(0, slash);
  std::string prefix = slash == std::string::npos ? "" : cfg_.endpoint.substr(slash);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  path_ = prefix + "/v1/chat/completions";
  in_flight_ = std::make_unique<std::counting_semaphore<>>(cfg_.max_in_flight);
}

HttpAgent::~HttpAgent() = default;

HttpAgent::Completion HttpAgent::complete(const std::vector<Message>& messages, int max_tokens) {
  nlohmann::ordered_json body;
  body["model"] = cfg_.model;
  auto msgs = nlohmann::ordered_json::array();
  for (const auto& m : messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
  body["messages"] = msgs;
  body["temperature"] = 0;
  body["max_tokens"] = max_tokens;

  httplib::Headers headers;
  if (const char* key = std::getenv(cfg_.api_key_env.c_str()); key && *key) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  httplib::Result res;
  {
    Slot slot(*in_flight_);
    httplib::Client client(host_);
    client.set_connection_timeout(cfg_.timeout_seconds);
    client.set_read_timeout(cfg_.timeout_seconds);
    client.set_write_timeout(cfg_.timeout_seconds);
    res = client.Post(path_, headers, body.dump(), "application/json");
  }
  if (!res) throw AgentError("request to " + host_ + path_ + " failed: " + httplib::to_string(res.error()));
  if (res->status != 200) {
    throw AgentError("chat completion returned HTTP " + std::to_string(res->status), res->status,
                     parse_retry_after(*res));
  }
  try {
    const auto j = nlohmann::json::parse(res->body);
    const auto& choice = j.at("choices").at(0);
    Completion out;
    const auto& content = choice.at("message").at("content");
    out.content = content.is_string() ? content.get<std::string>() : std::string();
    if (choice.contains("finish_reason") && choice["finish_reason"].is_string()) {
      out.finish_reason = choice["finish_reason"].get<std::string>();
    }
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw AgentError(std::string("malformed chat completion: ") + e.what(), res->status);
  }
}

AgentReply HttpAgent::complete_with_retries(std::vector<Message> messages) {
  AgentReply reply;
  Completion c = complete(messages, cfg_.max_tokens);
  while (c.finish_reason == "length" && reply.truncation_retries < cfg_.truncation_retries) {
    ++reply.truncation_retries;
    messages.push_back({"assistant", c.content});
    messages.push_back({"user", prompt_template("truncation_retry")});
    c = complete(messages, cfg_.max_tokens);
  }
  reply.text = c.content;
  reply.truncated = c.finish_reason == "length";
  return reply;
}

AgentReply HttpAgent::generate(const TurnInput& in) {
  const DomainSchema& s = in.problem->schema;
  return complete_with_retries(
      build_chat(in.method, in.history, build_turn_message(s, in.utterance, in.ledger_text, std::nullopt)));
}

ExtractionResult HttpAgent::extract(const TurnInput& in, const std::string& answer, int /*attempt*/) {
  const DomainSchema& s = in.problem->schema;
  const Completion c = complete(build_extraction_chat(s, in.turn, in.utterance, answer), cfg_.max_tokens);
  return parse_extraction_reply(c.content, s, in.turn);
}

AgentReply HttpAgent::repair(const TurnInput& in, const std::string& /*previous_answer*/, const RepairPacket& packet,
                             int /*attempt*/) {
  const DomainSchema& s = in.problem->schema;
  return complete_with_retries(build_chat(
      in.method, in.history, build_turn_message(s, in.utterance, in.ledger_text, render_repair_signal(packet, s))));
}

}  // namespace driftbench
