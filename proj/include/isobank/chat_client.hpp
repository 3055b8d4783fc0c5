#pragma once

// OpenAI-compatible chat-completions client and the endpoint manifest.

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "isobank/error.hpp"

namespace isobank {

enum class ModelFamily { Qwen3, Llama3, Phi4, GPToss, other };
enum class ModelVariant { base, instruct, thinking };

std::string_view to_string(ModelFamily f);
std::string_view to_string(ModelVariant v);
ModelFamily model_family_from_string(std::string_view s);
ModelVariant model_variant_from_string(std::string_view s);

struct ModelEndpoint {
  std::string model_name;
  std::string base_url;    // e.g. "http://127.0.0.1:8000/v1"
  std::string api_key_env; // empty: send no credential
  nlohmann::json sampling = nlohmann::json::object(); // passed through to the request body
  ModelFamily family = ModelFamily::other;
  double scale_b = 0.0;
  ModelVariant variant = ModelVariant::instruct;
};

// Manifest: either a JSON array of endpoints or {"models": [...]}.
std::vector<ModelEndpoint> parse_manifest(std::string_view text);
std::vector<ModelEndpoint> load_manifest(const std::filesystem::path& path);

struct ChatMessage {
  std::string role;
  std::string content;
};

struct ChatReply {
  bool ok = false;
  int http_status = 0;  // 0 when the transport failed before a status line
  std::string content;  // assistant message text when ok
  std::string error;
  bool retryable = false; // transport failure or 5xx
};

nlohmann::json build_chat_request(const ModelEndpoint& ep, const std::vector<ChatMessage>& messages);

// choices[0].message.content of a chat-completions response body.
std::string parse_chat_response(std::string_view body);

class ChatClient {
public:
  virtual ~ChatClient() = default;

  // Throws ConfigError when the endpoint cannot be used at all (missing credential, unreachable).
  virtual void preflight(const ModelEndpoint& ep) = 0;

  // Never throws for transport problems; those come back as !ok.
  virtual ChatReply complete(const ModelEndpoint& ep, const std::vector<ChatMessage>& messages) = 0;
};

// Talks HTTP(S) to `{base_url}/chat/completions`, bearer token from the named environment variable.
class HttpChatClient : public ChatClient {
public:
  explicit HttpChatClient(int timeout_s = 600) : timeout_s_(timeout_s) {}

  void preflight(const ModelEndpoint& ep) override;
  ChatReply complete(const ModelEndpoint& ep, const std::vector<ChatMessage>& messages) override;

private:
  int timeout_s_;
};

} // namespace isobank
