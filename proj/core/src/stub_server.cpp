#include "pmif/stub_server.hpp"

#include <atomic>
#include <stdexcept>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace pmif {

namespace {
using nlohmann::json;

void reply_error(httplib::Response& res, int status, const std::string& message) {
  res.status = status;
  res.set_content(json{{"error", message}}.dump(), "application/json");
}
}  // namespace

struct StubServer::Impl {
  std::shared_ptr<const NGramLm> model;
  std::string model_name;
  httplib::Server server;
  std::thread serve_thread;
  std::atomic<int> bound_port{0};
  std::atomic<long> delay_ms{0};

  void apply_delay() const {
    const long ms = delay_ms.load();
    if (ms > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(ms));
    }
  }

  void register_routes() {
    server.Get("/v1/info", [this](const httplib::Request&, httplib::Response& res) {
      apply_delay();
      res.set_content(
          json{{"vocab_size", model->vocab_size()}, {"model", model_name}}.dump(),
          "application/json");
    });

    server.Post("/v1/tokenize", [this](const httplib::Request& req, httplib::Response& res) {
      apply_delay();
      const json body = json::parse(req.body, nullptr, /*allow_exceptions=*/false);
      if (body.is_discarded() || !body.is_object()) {
        return reply_error(res, 400, "malformed JSON body");
      }
      if (!body.contains("text") || !body["text"].is_string()) {
        return reply_error(res, 400, "missing field 'text'");
      }
      res.set_content(
          json{{"ids", model->tokenize_text(body["text"].get<std::string>())}}.dump(),
          "application/json");
    });

    server.Post("/v1/detokenize", [this](const httplib::Request& req, httplib::Response& res) {
      apply_delay();
      const json body = json::parse(req.body, nullptr, /*allow_exceptions=*/false);
      if (body.is_discarded() || !body.is_object()) {
        return reply_error(res, 400, "malformed JSON body");
      }
      if (!body.contains("ids") || !body["ids"].is_array()) {
        return reply_error(res, 400, "missing field 'ids'");
      }
      std::vector<TokenId> ids;
      for (const json& id : body["ids"]) {
        if (!id.is_number_unsigned() || id.get<std::uint64_t>() >= model->vocab_size()) {
          return reply_error(res, 400, "token id out of range");
        }
        ids.push_back(id.get<TokenId>());
      }
      res.set_content(json{{"text", model->detokenize_tokens(ids)}}.dump(),
                      "application/json");
    });

    server.Post("/v1/next_logprobs",
                [this](const httplib::Request& req, httplib::Response& res) {
      apply_delay();
      const json body = json::parse(req.body, nullptr, /*allow_exceptions=*/false);
      if (body.is_discarded() || !body.is_object()) {
        return reply_error(res, 400, "malformed JSON body");
      }
      if (!body.contains("context_ids") || !body["context_ids"].is_array()) {
        return reply_error(res, 400, "missing field 'context_ids'");
      }
      std::vector<TokenId> context;
      for (const json& id : body["context_ids"]) {
        if (!id.is_number_unsigned()) {
          return reply_error(res, 400, "context_ids must be nonnegative integers");
        }
        const std::uint64_t value = id.get<std::uint64_t>();
        if (value >= model->vocab_size()) {
          return reply_error(res, 400, "token id out of range: " + std::to_string(value));
        }
        context.push_back(static_cast<TokenId>(value));
      }
      res.set_content(json{{"logprobs", model->next_logprobs(context)}}.dump(),
                      "application/json");
    });

    server.set_exception_handler(
        [](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
          std::string message = "internal error";
          try {
            if (ep) std::rethrow_exception(ep);
          } catch (const std::exception& e) {
            message = e.what();
          } catch (...) {
          }
          reply_error(res, 500, message);
        });
  }
};

StubServer::StubServer(std::shared_ptr<const NGramLm> model, std::string model_name)
    : impl_(std::make_unique<Impl>()) {
  if (!model) {
    throw std::invalid_argument("stub server requires a model");
  }
  impl_->model = std::move(model);
  impl_->model_name = std::move(model_name);
  impl_->register_routes();
}

StubServer::~StubServer() {
  stop();
}

void StubServer::set_response_delay(std::chrono::milliseconds delay) {
  impl_->delay_ms.store(delay.count());
}

int StubServer::start(int port, const std::string& host) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
    if (bound < 0) {
      throw std::runtime_error("cannot bind stub server to an ephemeral port");
    }
  } else {
    if (!impl_->server.bind_to_port(host, port)) {
      throw std::runtime_error("cannot bind stub server to port " + std::to_string(port));
    }
  }
  impl_->bound_port.store(bound);
  impl_->serve_thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void StubServer::wait() {
  if (impl_->serve_thread.joinable()) {
    impl_->serve_thread.join();
  }
}

void StubServer::stop() {
  if (impl_->server.is_running()) {
    impl_->server.stop();
  }
  if (impl_->serve_thread.joinable()) {
    impl_->serve_thread.join();
  }
}

int StubServer::port() const {
  return impl_->bound_port.load();
}

}  // namespace pmif
