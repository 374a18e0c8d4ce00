#pragma once

#include <chrono>
#include <memory>
#include <string>

#include "pmif/ngram_lm.hpp"

namespace pmif {

/// Wire-protocol server backed by an n-gram model; serves /v1/info,
/// /v1/tokenize and /v1/next_logprobs. Used by tests, demos and the
/// serve-stub subcommand.
class StubServer {
 public:
  explicit StubServer(std::shared_ptr<const NGramLm> model,
                      std::string model_name = "ngram-stub");
  ~StubServer();
  StubServer(const StubServer&) = delete;
  StubServer& operator=(const StubServer&) = delete;

  /// Test hook: sleeps before answering each request.
  void set_response_delay(std::chrono::milliseconds delay);

  /// Binds (port 0 picks an ephemeral port), starts serving on a background
  /// thread and returns the bound port.
  int start(int port = 0, const std::string& host = "127.0.0.1");

  /// Blocks until stop() is called from another thread or a signal handler.
  void wait();

  void stop();

  int port() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace pmif
