#pragma once

// Minimal subprocess helpers for CLI-level tests.

#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <stdexcept>
#include <string>
#include <vector>

namespace pmif::testing {

struct CommandResult {
  int exit_code = -1;
  std::string output;  // stdout only
};

/// Runs a shell command, capturing stdout; stderr goes to /dev/null.
inline CommandResult run_command(const std::string& command) {
  const std::string wrapped = command + " 2>/dev/null";
  FILE* pipe = popen(wrapped.c_str(), "r");
  if (pipe == nullptr) {
    throw std::runtime_error("popen failed for: " + command);
  }
  CommandResult result;
  std::array<char, 4096> buffer{};
  std::size_t n = 0;
  while ((n = fread(buffer.data(), 1, buffer.size(), pipe)) > 0) {
    result.output.append(buffer.data(), n);
  }
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open " + path);
  }
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

/// Starts a child process without a shell; returns its pid.
inline pid_t spawn_process(const std::vector<std::string>& argv) {
  const pid_t pid = fork();
  if (pid < 0) {
    throw std::runtime_error("fork failed");
  }
  if (pid == 0) {
    std::vector<char*> args;
    args.reserve(argv.size() + 1);
    for (const std::string& arg : argv) {
      args.push_back(const_cast<char*>(arg.c_str()));
    }
    args.push_back(nullptr);
    // Quiet child: drop stderr.
    FILE* devnull = fopen("/dev/null", "w");
    if (devnull != nullptr) {
      dup2(fileno(devnull), 2);
    }
    execv(args[0], args.data());
    _exit(127);
  }
  return pid;
}

inline void stop_process(pid_t pid) {
  if (pid <= 0) return;
  kill(pid, SIGTERM);
  int status = 0;
  waitpid(pid, &status, 0);
}

}  // namespace pmif::testing
