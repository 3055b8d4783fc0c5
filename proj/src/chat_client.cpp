#include "isobank/chat_client.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <httplib.h>

namespace isobank {

using json = nlohmann::json;

std::string_view to_string(ModelFamily f) {
  switch (f) {
  case ModelFamily::Qwen3: return "Qwen3";
  case ModelFamily::Llama3: return "Llama3";
  case ModelFamily::Phi4: return "Phi4";
  case ModelFamily::GPToss: return "GPToss";
  case ModelFamily::other: return "other";
  }
  return "other";
}

std::string_view to_string(ModelVariant v) {
  switch (v) {
  case ModelVariant::base: return "base";
  case ModelVariant::instruct: return "instruct";
  case ModelVariant::thinking: return "thinking";
  }
  return "instruct";
}

ModelFamily model_family_from_string(std::string_view s) {
  for (auto f : {ModelFamily::Qwen3, ModelFamily::Llama3, ModelFamily::Phi4, ModelFamily::GPToss, ModelFamily::other})
    if (to_string(f) == s)
      return f;
  throw ParseError(fmt::format("unknown model family '{}'", s));
}

ModelVariant model_variant_from_string(std::string_view s) {
  for (auto v : {ModelVariant::base, ModelVariant::instruct, ModelVariant::thinking})
    if (to_string(v) == s)
      return v;
  throw ParseError(fmt::format("unknown model variant '{}'", s));
}

std::vector<ModelEndpoint> parse_manifest(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("manifest: {}", e.what()));
  }
  const json& arr = doc.is_object() && doc.contains("models") ? doc["models"] : doc;
  if (!arr.is_array())
    throw ParseError("manifest: expected an array of endpoints or {\"models\": [...]}");

  std::vector<ModelEndpoint> out;
  std::set<std::string> names;
  std::vector<std::string> violations;
  for (size_t i = 0; i < arr.size(); ++i) {
    const json& j = arr[i];
    const std::string path = fmt::format("manifest[{}]", i);
    try {
      ModelEndpoint ep;
      ep.model_name = j.at("model_name").get<std::string>();
      ep.base_url = j.at("base_url").get<std::string>();
      ep.api_key_env = j.value("api_key_env", "");
      if (j.contains("sampling")) {
        if (!j["sampling"].is_object())
          throw ParseError(fmt::format("{}.sampling: expected object", path));
        ep.sampling = j["sampling"];
      }
      ep.family = model_family_from_string(j.value("family", "other"));
      ep.scale_b = j.at("scale_b").get<double>();
      ep.variant = model_variant_from_string(j.value("variant", "instruct"));
      if (!(ep.scale_b > 0.0))
        violations.push_back(fmt::format("{}: scale_b must be positive", path));
      if (!names.insert(ep.model_name).second)
        violations.push_back(fmt::format("{}: duplicate model_name '{}'", path, ep.model_name));
      out.push_back(std::move(ep));
    } catch (const json::exception& e) {
      throw ParseError(fmt::format("{}: {}", path, e.what()));
    }
  }
  if (!violations.empty())
    throw InvariantError(std::move(violations));
  return out;
}

std::vector<ModelEndpoint> load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError(fmt::format("cannot read manifest '{}'", path.string()));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str());
}

json build_chat_request(const ModelEndpoint& ep, const std::vector<ChatMessage>& messages) {
  json body;
  body["model"] = ep.model_name;
  json msgs = json::array();
  for (const auto& m : messages)
    msgs.push_back({{"role", m.role}, {"content", m.content}});
  body["messages"] = std::move(msgs);
  for (auto it = ep.sampling.begin(); it != ep.sampling.end(); ++it)
    body[it.key()] = it.value();
  return body;
}

std::string parse_chat_response(std::string_view body) {
  const json doc = json::parse(body.begin(), body.end(), nullptr, false);
  if (doc.is_discarded())
    throw ParseError("chat response is not JSON");
  try {
    const json& content = doc.at("choices").at(0).at("message").at("content");
    return content.is_null() ? std::string() : content.get<std::string>();
  } catch (const json::exception& e) {
    throw ParseError(fmt::format("chat response missing choices[0].message.content: {}", e.what()));
  }
}

namespace {

struct SplitUrl {
  std::string origin; // scheme://host[:port]
  std::string path;   // without trailing slash
};

SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos)
    throw ConfigError(fmt::format("base_url '{}' has no scheme", url));
  const std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https")
    throw ConfigError(fmt::format("base_url '{}': unsupported scheme '{}'", url, scheme));
  const auto path_start = url.find('/', scheme_end + 3);
  SplitUrl out;
  out.origin = url.substr(0, path_start);
  out.path = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!out.path.empty() && out.path.back() == '/')
    out.path.pop_back();
  if (out.origin.size() <= scheme_end + 3)
    throw ConfigError(fmt::format("base_url '{}' has no host", url));
  return out;
}

std::string credential(const ModelEndpoint& ep) {
  if (ep.api_key_env.empty())
    return {};
  const char* v = std::getenv(ep.api_key_env.c_str());
  if (!v || !*v)
    throw ConfigError(
        fmt::format("model '{}': credential variable {} is not set", ep.model_name, ep.api_key_env));
  return v;
}

httplib::Client make_client(const SplitUrl& url, const std::string& key, int timeout_s) {
  httplib::Client cli(url.origin);
  cli.set_connection_timeout(10, 0);
  cli.set_read_timeout(timeout_s, 0);
  cli.set_write_timeout(timeout_s, 0);
  if (!key.empty())
    cli.set_bearer_token_auth(key);
  return cli;
}

} // namespace

void HttpChatClient::preflight(const ModelEndpoint& ep) {
  const auto url = split_url(ep.base_url);
  const auto key = credential(ep);
  auto cli = make_client(url, key, 10);
  // Any HTTP status proves the server is reachable; only a transport failure is fatal here.
  auto res = cli.Get(url.path + "/models");
  if (!res)
    throw ConfigError(fmt::format("model '{}': base_url {} unreachable ({})", ep.model_name, ep.base_url,
                                  httplib::to_string(res.error())));
}

ChatReply HttpChatClient::complete(const ModelEndpoint& ep, const std::vector<ChatMessage>& messages) {
  ChatReply reply;
  SplitUrl url;
  std::string key;
  try {
    url = split_url(ep.base_url);
    key = credential(ep);
  } catch (const ConfigError& e) {
    reply.error = e.what();
    return reply;
  }
  auto cli = make_client(url, key, timeout_s_);
  const std::string body = build_chat_request(ep, messages).dump();
  auto res = cli.Post(url.path + "/chat/completions", body, "application/json");
  if (!res) {
    reply.error = fmt::format("transport: {}", httplib::to_string(res.error()));
    reply.retryable = true;
    return reply;
  }
  reply.http_status = res->status;
  if (res->status >= 500) {
    reply.error = fmt::format("HTTP {}", res->status);
    reply.retryable = true;
    return reply;
  }
  if (res->status != 200) {
    reply.error = fmt::format("HTTP {}: {}", res->status, res->body.substr(0, 200));
    return reply;
  }
  try {
    reply.content = parse_chat_response(res->body);
    reply.ok = true;
  } catch (const ParseError& e) {
    reply.error = e.what();
  }
  return reply;
}

} // namespace isobank
