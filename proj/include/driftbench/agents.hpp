#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <semaphore>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "driftbench/generator.hpp"
#include "driftbench/ledger.hpp"
#include "driftbench/prompts.hpp"

namespace driftbench {

/// Everything an agent may look at for one turn. Mock agents read the gold
/// trajectory through `problem`; model-backed agents only see the text.
struct TurnInput {
  const Problem* problem = nullptr;
  MethodKind method = MethodKind::Direct;
  int turn = 1;
  std::string utterance;
  std::vector<std::pair<std::string, std::string>> history;  // earlier (user, final answer)
  std::optional<std::string> ledger_text;                    // serialized L_{t-1}, ledger methods only
  const Ledger* prior_ledger = nullptr;                      // L_{t-1}
};

struct AgentReply {
  std::string text;
  bool truncated = false;  // still clipped after every truncation retry
  int truncation_retries = 0;
};

/// Transport or HTTP status failure. `retry_after` echoes the server's
/// Retry-After header in seconds when one was sent.
class AgentError : public std::runtime_error {
 public:
  AgentError(const std::string& what, int status = 0, std::optional<int> retry_after = std::nullopt)
      : std::runtime_error(what), status_(status), retry_after_(retry_after) {}
  int status() const { return status_; }
  std::optional<int> retry_after() const { return retry_after_; }

 private:
  int status_;
  std::optional<int> retry_after_;
};

/// G, E and R behind one synchronous interface. Implementations must be
/// callable from several threads at once.
class Agent {
 public:
  virtual ~Agent() = default;
  virtual std::string id() const = 0;
  virtual AgentReply generate(const TurnInput& in) = 0;
  virtual ExtractionResult extract(const TurnInput& in, const std::string& answer, int attempt) = 0;
  virtual AgentReply repair(const TurnInput& in, const std::string& previous_answer, const RepairPacket& packet,
                            int attempt) = 0;
};

struct MockPolicy {
  double p_drift = 0;
  double p_contra = 0;
  double p_parse = 0;
  double p_incomplete = 0;
  double repair_competence = 0;

  static MockPolicy oracle() { return {}; }
};

void validate_policy(const MockPolicy& p);
nlohmann::ordered_json policy_to_json(const MockPolicy& p);
MockPolicy policy_from_json(const nlohmann::json& j);

/// Scripted stand-in for a model. Solves the gold prefix and perturbs the
/// answer per policy; every draw comes from a substream keyed by
/// (seed, agent, method, problem, turn, attempt, role), so output does not
/// depend on call order or threading.
///
/// Answer faults are tried in order parse, incomplete, drift. Contradiction
/// injection is keyed by turn only, so every re-extraction of a turn injects
/// the same constraint.
class MockAgent final : public Agent {
 public:
  MockAgent(MockPolicy policy, std::uint64_t seed, std::string id = "mock");

  std::string id() const override { return id_; }
  AgentReply generate(const TurnInput& in) override;
  ExtractionResult extract(const TurnInput& in, const std::string& answer, int attempt) override;
  AgentReply repair(const TurnInput& in, const std::string& previous_answer, const RepairPacket& packet,
                    int attempt) override;

  const MockPolicy& policy() const { return policy_; }

 private:
  std::uint64_t stream(const TurnInput& in, int attempt, std::string_view role) const;

  MockPolicy policy_;
  std::uint64_t seed_;
  std::string id_;
};

/// Answer text in the method's output style: bullets plus a fenced block
/// for cot, bare JSON otherwise.
std::string format_answer(const nlohmann::ordered_json& answer, MethodKind method, int turn);

struct HttpAgentConfig {
  std::string endpoint = "http://127.0.0.1:8000";  // scheme://host[:port][/prefix]
  std::string model;
  std::string api_key_env = "DRIFTBENCH_API_KEY";
  std::string id;  // defaults to the model name
  int max_tokens = 2048;
  int truncation_retries = 2;
  int max_in_flight = 4;
  int timeout_seconds = 120;
};

/// Client for an OpenAI-compatible /v1/chat/completions endpoint,
/// temperature 0.
class HttpAgent final : public Agent {
 public:
  explicit HttpAgent(HttpAgentConfig cfg);
  ~HttpAgent() override;

  std::string id() const override { return cfg_.id.empty() ? cfg_.model : cfg_.id; }
  AgentReply generate(const TurnInput& in) override;
  ExtractionResult extract(const TurnInput& in, const std::string& answer, int attempt) override;
  AgentReply repair(const TurnInput& in, const std::string& previous_answer, const RepairPacket& packet,
                    int attempt) override;

  struct Completion {
    std::string content;
    std::string finish_reason;
  };
  /// One round trip; throws AgentError.
  Completion complete(const std::vector<Message>& messages, int max_tokens);

 private:
  AgentReply complete_with_retries(std::vector<Message> messages);

  HttpAgentConfig cfg_;
  std::string host_;
  std::string path_;
  std::unique_ptr<std::counting_semaphore<>> in_flight_;
};

}  // namespace driftbench
