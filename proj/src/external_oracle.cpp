#include "chromafool/external_oracle.hpp"

#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <iostream>
#include <thread>

#include <httplib.h>

#include "chromafool/errors.hpp"
#include "chromafool/wire.hpp"

extern char** environ;

namespace chromafool {
namespace {

template <typename Attempt>
PipelineVerdict with_retries(const TransportOptions& options, const std::string& what, Attempt&& attempt) {
  int backoff = options.initial_backoff_ms;
  std::string last_error;
  for (int i = 0; i <= options.max_retries; ++i) {
    try {
      return attempt();
    } catch (const TransportError& e) {
      last_error = e.what();
      if (i == options.max_retries) break;
      std::this_thread::sleep_for(std::chrono::milliseconds(backoff));
      backoff *= 2;
    }
  }
  throw TransportError(what + ": giving up after " + std::to_string(options.max_retries) +
                       " retries: " + last_error);
}

}  // namespace

ExecOracle::ExecOracle(std::string command, TransportOptions options)
    : command_(std::move(command)), options_(options) {
  // A dead child must surface as EPIPE, not kill the attacker.
  ::signal(SIGPIPE, SIG_IGN);
}

ExecOracle::~ExecOracle() { shutdown(); }

void ExecOracle::spawn() {
  int in_pipe[2];
  int out_pipe[2];
  if (::pipe(in_pipe) != 0) throw TransportError(std::string("pipe: ") + std::strerror(errno));
  if (::pipe(out_pipe) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw TransportError(std::string("pipe: ") + std::strerror(errno));
  }
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, in_pipe[0], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);
  posix_spawn_file_actions_addclose(&actions, in_pipe[1]);
  posix_spawn_file_actions_addclose(&actions, out_pipe[0]);
  std::string sh = "/bin/sh";
  std::string dash_c = "-c";
  // exec keeps the oracle itself as our child so a kill reaches it.
  std::string script = "exec " + command_;
  char* argv[] = {sh.data(), dash_c.data(), script.data(), nullptr};
  const int rc = posix_spawn(&pid_, "/bin/sh", &actions, nullptr, argv, environ);
  posix_spawn_file_actions_destroy(&actions);
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  if (rc != 0) {
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    pid_ = -1;
    throw TransportError("cannot start oracle process '" + command_ + "': " + std::strerror(rc));
  }
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  buffer_.clear();
}

void ExecOracle::shutdown() {
  if (to_child_ >= 0) ::close(to_child_);
  if (from_child_ >= 0) ::close(from_child_);
  to_child_ = from_child_ = -1;
  if (pid_ > 0) {
    int status = 0;
    // Closing stdin asks the child to exit; give it a moment before killing.
    for (int i = 0; i < 50; ++i) {
      if (::waitpid(pid_, &status, WNOHANG) == pid_) {
        pid_ = -1;
        return;
      }
      std::this_thread::sleep_for(std::chrono::milliseconds(10));
    }
    ::kill(pid_, SIGKILL);
    ::waitpid(pid_, &status, 0);
    pid_ = -1;
  }
}

void ExecOracle::write_line(const std::string& line) {
  std::size_t off = 0;
  while (off < line.size()) {
    const ssize_t n = ::write(to_child_, line.data() + off, line.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw TransportError(std::string("write to oracle process failed: ") + std::strerror(errno));
    }
    off += static_cast<std::size_t>(n);
  }
}

std::string ExecOracle::read_line() {
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::milliseconds(options_.timeout_ms);
  for (;;) {
    const auto nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    if (left.count() <= 0) throw TransportError("timed out waiting for oracle response");
    pollfd pfd{from_child_, POLLIN, 0};
    const int pr = ::poll(&pfd, 1, static_cast<int>(left.count()));
    if (pr < 0) {
      if (errno == EINTR) continue;
      throw TransportError(std::string("poll failed: ") + std::strerror(errno));
    }
    if (pr == 0) continue;
    char chunk[65536];
    const ssize_t n = ::read(from_child_, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw TransportError(std::string("read from oracle process failed: ") + std::strerror(errno));
    }
    if (n == 0) throw TransportError("oracle process closed its output");
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

PipelineVerdict ExecOracle::query(const Image& img) {
  std::lock_guard lock(mutex_);
  const std::string id = "q" + std::to_string(next_id_++);
  const std::string request = wire::encode_request(id, img) + "\n";
  return with_retries(options_, describe(), [&] {
    try {
      if (pid_ < 0) spawn();
      write_line(request);
      const std::string line = read_line();
      try {
        return wire::decode_response(line, id);
      } catch (const MalformedResponse& e) {
        std::cerr << "oracle " << describe() << " returned a malformed response: " << e.what() << '\n';
        throw;
      }
    } catch (const TransportError&) {
      shutdown();
      throw;
    }
  });
}

struct HttpOracle::Client {
  explicit Client(const std::string& url) : cli(url) {}
  httplib::Client cli;
};

HttpOracle::HttpOracle(std::string base_url, TransportOptions options)
    : base_url_(std::move(base_url)), options_(options), client_(std::make_unique<Client>(base_url_)) {
  const auto timeout = std::chrono::milliseconds(options_.timeout_ms);
  client_->cli.set_connection_timeout(timeout);
  client_->cli.set_read_timeout(timeout);
  client_->cli.set_write_timeout(timeout);
}

HttpOracle::~HttpOracle() = default;

PipelineVerdict HttpOracle::query(const Image& img) {
  std::lock_guard lock(mutex_);
  const std::string id = "q" + std::to_string(next_id_++);
  const std::string body = wire::encode_request(id, img);
  return with_retries(options_, describe(), [&] {
    auto res = client_->cli.Post("/v1/classify", body, "application/json");
    if (!res) throw TransportError("HTTP request failed: " + httplib::to_string(res.error()));
    if (res->status != 200) throw TransportError("HTTP status " + std::to_string(res->status));
    try {
      return wire::decode_response(res->body, id);
    } catch (const MalformedResponse& e) {
      std::cerr << "oracle " << describe() << " returned a malformed response: " << e.what() << '\n';
      throw;
    }
  });
}

}  // namespace chromafool
