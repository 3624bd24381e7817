#pragma once

#include <chrono>
#include <functional>
#include <string>
#include <string_view>
#include <sys/types.h>
#include <vector>

namespace tspbmc {

/// A child process with piped stdin/stdout/stderr. The destructor kills and
/// reaps a child that is still running.
class Subprocess {
 public:
  using Clock = std::chrono::steady_clock;

  enum class Status { ok, eof, timeout };

  /// Throws SolverError if the executable cannot be started.
  explicit Subprocess(const std::vector<std::string>& argv);
  ~Subprocess();

  Subprocess(const Subprocess&) = delete;
  Subprocess& operator=(const Subprocess&) = delete;

  /// Writes `input` to the child while collecting its output, until `ready`
  /// holds on the collected stdout, stdout reaches EOF, or `deadline` passes.
  Status exchange(std::string_view input, const std::function<bool(std::string_view)>& ready,
                  Clock::time_point deadline);

  void close_stdin();
  /// Closes stdin and waits for exit; kills the child at `deadline`.
  int finish(Clock::time_point deadline);
  void kill();

  std::string& out() { return out_; }
  const std::string& err() const { return err_; }

 private:
  void drain(int fd, std::string& sink, bool& open);

  pid_t pid_ = -1;
  int in_fd_ = -1;
  int out_fd_ = -1;
  int err_fd_ = -1;
  bool out_open_ = true;
  bool err_open_ = true;
  std::string out_;
  std::string err_;
};

/// Splits a command line on whitespace; single and double quotes group words.
std::vector<std::string> split_command(std::string_view command);

}  // namespace tspbmc
