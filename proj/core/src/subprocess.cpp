#include "tspbmc/subprocess.hpp"

#include <cerrno>
#include <cstring>
#include <csignal>

#include <fcntl.h>
#include <poll.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include "tspbmc/error.hpp"

extern char** environ;

namespace tspbmc {

namespace {

void close_fd(int& fd) {
  if (fd >= 0) ::close(fd);
  fd = -1;
}

int remaining_ms(Subprocess::Clock::time_point deadline) {
  auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Subprocess::Clock::now());
  return left.count() < 0 ? 0 : static_cast<int>(std::min<long long>(left.count(), 1 << 30));
}

}  // namespace

Subprocess::Subprocess(const std::vector<std::string>& argv) {
  if (argv.empty()) throw SolverError("empty solver command");
  // A solver that dies mid-write must not take the verifier down with SIGPIPE.
  std::signal(SIGPIPE, SIG_IGN);

  int in_pipe[2], out_pipe[2], err_pipe[2];
  if (::pipe(in_pipe) || ::pipe(out_pipe) || ::pipe(err_pipe))
    throw SolverError(std::string("pipe: ") + std::strerror(errno));

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, in_pipe[0], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);
  posix_spawn_file_actions_adddup2(&actions, err_pipe[1], STDERR_FILENO);
  for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1], err_pipe[0], err_pipe[1]})
    posix_spawn_file_actions_addclose(&actions, fd);

  std::vector<char*> args;
  for (const std::string& a : argv) args.push_back(const_cast<char*>(a.c_str()));
  args.push_back(nullptr);

  int rc = ::posix_spawnp(&pid_, args[0], &actions, nullptr, args.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  ::close(err_pipe[1]);
  in_fd_ = in_pipe[1];
  out_fd_ = out_pipe[0];
  err_fd_ = err_pipe[0];
  if (rc != 0) {
    pid_ = -1;
    close_fd(in_fd_);
    close_fd(out_fd_);
    close_fd(err_fd_);
    throw SolverError("cannot start '" + argv[0] + "': " + std::strerror(rc));
  }
  for (int fd : {in_fd_, out_fd_, err_fd_}) ::fcntl(fd, F_SETFL, ::fcntl(fd, F_GETFL) | O_NONBLOCK);
}

Subprocess::~Subprocess() {
  kill();
  close_fd(in_fd_);
  close_fd(out_fd_);
  close_fd(err_fd_);
}

void Subprocess::drain(int fd, std::string& sink, bool& open) {
  char buf[65536];
  for (;;) {
    ssize_t n = ::read(fd, buf, sizeof buf);
    if (n > 0) {
      sink.append(buf, static_cast<std::size_t>(n));
      continue;
    }
    if (n == 0) open = false;
    return;
  }
}

Subprocess::Status Subprocess::exchange(std::string_view input,
                                        const std::function<bool(std::string_view)>& ready,
                                        Clock::time_point deadline) {
  std::size_t written = 0;
  for (;;) {
    if (written == input.size() && ready && ready(out_)) return Status::ok;
    if (!out_open_) return written == input.size() && !ready ? Status::ok : Status::eof;
    if (written == input.size() && !ready) return Status::ok;

    pollfd fds[3];
    nfds_t count = 0;
    fds[count++] = {out_fd_, POLLIN, 0};
    int err_slot = -1, in_slot = -1;
    if (err_open_) {
      err_slot = static_cast<int>(count);
      fds[count++] = {err_fd_, POLLIN, 0};
    }
    if (written < input.size() && in_fd_ >= 0) {
      in_slot = static_cast<int>(count);
      fds[count++] = {in_fd_, POLLOUT, 0};
    }
    int timeout = remaining_ms(deadline);
    if (timeout == 0) return Status::timeout;
    int rc = ::poll(fds, count, timeout);
    if (rc < 0) {
      if (errno == EINTR) continue;
      throw SolverError(std::string("poll: ") + std::strerror(errno));
    }
    if (rc == 0) return Status::timeout;
    if (fds[0].revents) drain(out_fd_, out_, out_open_);
    if (err_slot >= 0 && fds[err_slot].revents) drain(err_fd_, err_, err_open_);
    if (in_slot >= 0 && fds[in_slot].revents) {
      if (fds[in_slot].revents & (POLLERR | POLLHUP)) {
        close_fd(in_fd_);
        return Status::eof;
      }
      ssize_t n = ::write(in_fd_, input.data() + written, input.size() - written);
      if (n > 0) written += static_cast<std::size_t>(n);
      else if (n < 0 && errno != EAGAIN && errno != EINTR) {
        close_fd(in_fd_);
        return Status::eof;
      }
    }
  }
}

void Subprocess::close_stdin() { close_fd(in_fd_); }

int Subprocess::finish(Clock::time_point deadline) {
  close_stdin();
  while (pid_ > 0) {
    int status = 0;
    pid_t r = ::waitpid(pid_, &status, WNOHANG);
    if (r == pid_) {
      pid_ = -1;
      if (out_open_) drain(out_fd_, out_, out_open_);
      if (err_open_) drain(err_fd_, err_, err_open_);
      return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }
    if (Clock::now() >= deadline) {
      kill();
      return -1;
    }
    if (out_open_) drain(out_fd_, out_, out_open_);
    if (err_open_) drain(err_fd_, err_, err_open_);
    ::usleep(2000);
  }
  return -1;
}

void Subprocess::kill() {
  if (pid_ <= 0) return;
  ::kill(pid_, SIGKILL);
  int status = 0;
  ::waitpid(pid_, &status, 0);
  pid_ = -1;
}

std::vector<std::string> split_command(std::string_view command) {
  std::vector<std::string> out;
  std::string cur;
  bool have = false;
  char quote = 0;
  for (char c : command) {
    if (quote) {
      if (c == quote) quote = 0;
      else cur += c;
    } else if (c == '\'' || c == '"') {
      quote = c;
      have = true;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      if (have) out.push_back(std::move(cur));
      cur.clear();
      have = false;
    } else {
      cur += c;
      have = true;
    }
  }
  if (have) out.push_back(std::move(cur));
  return out;
}

}  // namespace tspbmc
