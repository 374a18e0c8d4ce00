#include "pmif/remote_lm.hpp"

#include <stdexcept>

#include <httplib.h>
#include <json.hpp>

namespace pmif {

namespace {

using nlohmann::json;

httplib::Client make_client(const std::string& base_url, std::chrono::milliseconds timeout) {
  httplib::Client client(base_url);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  return client;
}

[[noreturn]] void throw_transport_error(const httplib::Result& result,
                                        const std::string& endpoint) {
  const httplib::Error error = result.error();
  std::string reason = httplib::to_string(error);
  if (error == httplib::Error::ConnectionTimeout || error == httplib::Error::Read ||
      error == httplib::Error::Write) {
    throw std::runtime_error("timeout contacting " + endpoint + " (" + reason + ")");
  }
  throw std::runtime_error("connection error contacting " + endpoint + " (" + reason + ")");
}

json expect_json_body(const httplib::Result& result, const std::string& endpoint) {
  if (!result) {
    throw_transport_error(result, endpoint);
  }
  json body = json::parse(result->body, nullptr, /*allow_exceptions=*/false);
  if (result->status != 200) {
    std::string message = "HTTP " + std::to_string(result->status) + " from " + endpoint;
    if (body.is_object() && body.contains("error") && body["error"].is_string()) {
      message += ": " + body["error"].get<std::string>();
    }
    throw std::runtime_error(message);
  }
  if (body.is_discarded() || !body.is_object()) {
    throw std::runtime_error("malformed response body from " + endpoint);
  }
  return body;
}

}  // namespace

RemoteLmClient::RemoteLmClient(std::string base_url, std::chrono::milliseconds timeout)
    : base_url_(std::move(base_url)), timeout_(timeout) {}

std::size_t RemoteLmClient::handshake() {
  httplib::Client client = make_client(base_url_, timeout_);
  const httplib::Result result = client.Get("/v1/info");
  const json body = expect_json_body(result, base_url_ + "/v1/info");
  if (!body.contains("vocab_size") || !body["vocab_size"].is_number_unsigned()) {
    throw std::runtime_error("handshake response missing vocab_size");
  }
  vocab_size_ = body["vocab_size"].get<std::size_t>();
  model_name_ = body.value("model", std::string{});
  if (vocab_size_ == 0) {
    throw std::runtime_error("handshake returned vocab_size 0");
  }
  return vocab_size_;
}

std::size_t RemoteLmClient::vocab_size() const {
  if (vocab_size_ == 0) {
    throw std::logic_error("handshake required before queries");
  }
  return vocab_size_;
}

LogProbVector RemoteLmClient::next_logprobs(std::span<const TokenId> context) const {
  const std::size_t expected = vocab_size();
  json request;
  request["context_ids"] = std::vector<TokenId>(context.begin(), context.end());

  httplib::Client client = make_client(base_url_, timeout_);
  const httplib::Result result =
      client.Post("/v1/next_logprobs", request.dump(), "application/json");
  const json body = expect_json_body(result, base_url_ + "/v1/next_logprobs");
  if (!body.contains("logprobs") || !body["logprobs"].is_array()) {
    throw std::runtime_error("response missing logprobs array");
  }
  LogProbVector logprobs = body["logprobs"].get<LogProbVector>();
  if (logprobs.size() != expected) {
    throw std::runtime_error("length mismatch: expected " + std::to_string(expected) +
                             ", got " + std::to_string(logprobs.size()));
  }
  return logprobs;
}

std::string RemoteLmClient::detokenize_tokens(std::span<const TokenId> ids) const {
  vocab_size();
  json request;
  request["ids"] = std::vector<TokenId>(ids.begin(), ids.end());

  httplib::Client client = make_client(base_url_, timeout_);
  const httplib::Result result =
      client.Post("/v1/detokenize", request.dump(), "application/json");
  const json body = expect_json_body(result, base_url_ + "/v1/detokenize");
  if (!body.contains("text") || !body["text"].is_string()) {
    throw std::runtime_error("response missing text field");
  }
  return body["text"].get<std::string>();
}

std::vector<TokenId> RemoteLmClient::tokenize_text(std::string_view text) const {
  const std::size_t expected = vocab_size();
  json request;
  request["text"] = std::string(text);

  httplib::Client client = make_client(base_url_, timeout_);
  const httplib::Result result =
      client.Post("/v1/tokenize", request.dump(), "application/json");
  const json body = expect_json_body(result, base_url_ + "/v1/tokenize");
  if (!body.contains("ids") || !body["ids"].is_array()) {
    throw std::runtime_error("response missing ids array");
  }
  std::vector<TokenId> ids = body["ids"].get<std::vector<TokenId>>();
  for (TokenId id : ids) {
    if (id >= expected) {
      throw std::runtime_error("server returned token id out of range: " +
                               std::to_string(id));
    }
  }
  return ids;
}

}  // namespace pmif
