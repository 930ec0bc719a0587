#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <sys/types.h>

#include "chromafool/oracle.hpp"

namespace chromafool {

// Child process speaking the line-delimited protocol on stdin/stdout. The
// child is started lazily and restarted after a transport failure.
class ExecOracle final : public Oracle {
 public:
  ExecOracle(std::string command, TransportOptions options = {});
  ~ExecOracle() override;
  ExecOracle(const ExecOracle&) = delete;
  ExecOracle& operator=(const ExecOracle&) = delete;

  PipelineVerdict query(const Image& img) override;
  std::string describe() const override { return "exec:" + command_; }

 private:
  void spawn();
  void shutdown();
  void write_line(const std::string& line);
  std::string read_line();

  std::string command_;
  TransportOptions options_;
  std::mutex mutex_;
  pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
  std::uint64_t next_id_ = 0;
};

// POST <base>/v1/classify with the request document; HTTP 200 carries the
// response document, any other status is a transport error.
class HttpOracle final : public Oracle {
 public:
  HttpOracle(std::string base_url, TransportOptions options = {});
  ~HttpOracle() override;

  PipelineVerdict query(const Image& img) override;
  std::string describe() const override { return "http:" + base_url_; }

 private:
  struct Client;
  std::string base_url_;
  TransportOptions options_;
  std::mutex mutex_;
  std::unique_ptr<Client> client_;
  std::uint64_t next_id_ = 0;
};

}  // namespace chromafool
