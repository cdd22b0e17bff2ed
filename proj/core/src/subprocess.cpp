#include "codelink/subprocess.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstdlib>
#include <cstring>
#include <thread>

#include "codelink/error.hpp"

extern char** environ;

namespace codelink {
namespace {

using Clock = std::chrono::steady_clock;

int open_sink(StdioMode mode, const std::filesystem::path& file, int pipe_write_fd) {
  switch (mode) {
    case StdioMode::devnull:
      return ::open("/dev/null", O_WRONLY);
    case StdioMode::to_file: {
      if (file.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(file.parent_path(), ec);
      }
      const int fd = ::open(file.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
      if (fd < 0) {
        throw Error(errc::io_error,
                    "cannot open log file " + file.string() + ": " + std::strerror(errno));
      }
      return fd;
    }
    case StdioMode::to_string:
      return pipe_write_fd;
  }
  return -1;
}

struct Pipe {
  int read_fd = -1;
  int write_fd = -1;

  void open() {
    int fds[2];
    if (::pipe(fds) != 0) {
      throw Error(errc::io_error, std::string("pipe: ") + std::strerror(errno));
    }
    read_fd = fds[0];
    write_fd = fds[1];
    ::fcntl(read_fd, F_SETFL, O_NONBLOCK);
  }
  void close_read() {
    if (read_fd >= 0) ::close(read_fd);
    read_fd = -1;
  }
  void close_write() {
    if (write_fd >= 0) ::close(write_fd);
    write_fd = -1;
  }
  ~Pipe() {
    close_read();
    close_write();
  }
};

// Drains whatever is available right now into `sink`; returns false on EOF.
bool drain(int fd, std::string& sink) {
  char buf[4096];
  for (;;) {
    const ssize_t n = ::read(fd, buf, sizeof buf);
    if (n > 0) {
      sink.append(buf, static_cast<std::size_t>(n));
      continue;
    }
    if (n == 0) return false;
    if (errno == EAGAIN || errno == EWOULDBLOCK) return true;
    if (errno == EINTR) continue;
    return false;
  }
}

// environ plus the given KEY=VALUE overrides (replacing matching keys).
std::vector<std::string> merged_environment(const std::vector<std::string>& overrides) {
  std::vector<std::string> env;
  for (char** e = environ; e && *e; ++e) {
    env.emplace_back(*e);
  }
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) continue;
    const std::string prefix = kv.substr(0, eq + 1);
    bool replaced = false;
    for (auto& existing : env) {
      if (existing.compare(0, prefix.size(), prefix) == 0) {
        existing = kv;
        replaced = true;
        break;
      }
    }
    if (!replaced) env.push_back(kv);
  }
  return env;
}

RunResult run_impl(const std::vector<std::string>& argv, const RunOptions& options) {
  Pipe out_pipe;
  Pipe err_pipe;
  if (options.stdout_mode == StdioMode::to_string) out_pipe.open();
  if (options.stderr_mode == StdioMode::to_string) err_pipe.open();

  const int out_fd =
      open_sink(options.stdout_mode, options.stdout_file, out_pipe.write_fd);
  const int err_fd =
      open_sink(options.stderr_mode, options.stderr_file, err_pipe.write_fd);
  auto close_sinks = [&] {
    if (out_fd >= 0 && options.stdout_mode != StdioMode::to_string) ::close(out_fd);
    if (err_fd >= 0 && options.stderr_mode != StdioMode::to_string) ::close(err_fd);
  };

  // posix_spawn keeps process creation cheap even from a large parent.
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  // Batch children never get a terminal: anything prompting on stdin sees
  // EOF instead of stalling the pipeline.
  posix_spawn_file_actions_addopen(&actions, STDIN_FILENO, "/dev/null", O_RDONLY, 0);
  if (out_fd >= 0) posix_spawn_file_actions_adddup2(&actions, out_fd, STDOUT_FILENO);
  if (err_fd >= 0) posix_spawn_file_actions_adddup2(&actions, err_fd, STDERR_FILENO);
  if (!options.cwd.empty()) {
    posix_spawn_file_actions_addchdir_np(&actions, options.cwd.c_str());
  }

  posix_spawnattr_t attr;
  posix_spawnattr_init(&attr);
  // Own process group so a timeout can kill the whole tree.
  posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP);
  posix_spawnattr_setpgroup(&attr, 0);

  std::vector<char*> cargv;
  cargv.reserve(argv.size() + 1);
  for (const auto& a : argv) cargv.push_back(const_cast<char*>(a.c_str()));
  cargv.push_back(nullptr);

  std::vector<std::string> env_storage;
  std::vector<char*> cenv;
  char** envp = environ;
  if (!options.env.empty()) {
    env_storage = merged_environment(options.env);
    cenv.reserve(env_storage.size() + 1);
    for (const auto& e : env_storage) cenv.push_back(const_cast<char*>(e.c_str()));
    cenv.push_back(nullptr);
    envp = cenv.data();
  }

  const auto start = Clock::now();
  pid_t pid = -1;
  const int spawn_rc = ::posix_spawnp(&pid, cargv[0], &actions, &attr,
                                      cargv.data(), envp);
  posix_spawn_file_actions_destroy(&actions);
  posix_spawnattr_destroy(&attr);
  close_sinks();
  out_pipe.close_write();
  err_pipe.close_write();

  RunResult result;
  if (spawn_rc != 0) {
    // Shell convention: command-not-found style failures report 127.
    result.exit_code = 127;
    result.duration_seconds = 0;
    return result;
  }

  bool out_open = out_pipe.read_fd >= 0;
  bool err_open = err_pipe.read_fd >= 0;
  bool child_done = false;
  int wait_status = 0;

  const auto deadline =
      options.timeout_seconds > 0
          ? start + std::chrono::duration_cast<Clock::duration>(
                        std::chrono::duration<double>(options.timeout_seconds))
          : Clock::time_point::max();

  while (!child_done || out_open || err_open) {
    if (!result.timed_out && Clock::now() >= deadline) {
      result.timed_out = true;
      ::kill(-pid, SIGKILL);
      ::kill(pid, SIGKILL);
    }

    if (out_open || err_open) {
      struct pollfd fds[2];
      nfds_t nfds = 0;
      int out_idx = -1, err_idx = -1;
      if (out_open) {
        out_idx = static_cast<int>(nfds);
        fds[nfds++] = {out_pipe.read_fd, POLLIN, 0};
      }
      if (err_open) {
        err_idx = static_cast<int>(nfds);
        fds[nfds++] = {err_pipe.read_fd, POLLIN, 0};
      }
      const int rv = ::poll(fds, nfds, 25);
      if (rv > 0) {
        if (out_idx >= 0 && (fds[out_idx].revents & (POLLIN | POLLHUP))) {
          if (!drain(out_pipe.read_fd, result.stdout_text)) {
            out_pipe.close_read();
            out_open = false;
          }
        }
        if (err_idx >= 0 && (fds[err_idx].revents & (POLLIN | POLLHUP))) {
          if (!drain(err_pipe.read_fd, result.stderr_text)) {
            err_pipe.close_read();
            err_open = false;
          }
        }
      }
    }

    if (!child_done) {
      const pid_t rv = ::waitpid(pid, &wait_status, WNOHANG);
      if (rv == pid) {
        child_done = true;
      } else if (rv < 0 && errno != EINTR) {
        child_done = true;
      }
      if (!child_done && !out_open && !err_open) {
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
      }
    }
  }

  result.duration_seconds =
      std::chrono::duration<double>(Clock::now() - start).count();
  if (WIFEXITED(wait_status)) {
    result.exit_code = WEXITSTATUS(wait_status);
  } else if (WIFSIGNALED(wait_status)) {
    result.exit_code = 128 + WTERMSIG(wait_status);
  }
  return result;
}

}  // namespace

RunResult run_shell(const std::string& command, const RunOptions& options) {
  return run_impl({"/bin/sh", "-c", command}, options);
}

RunResult run_argv(const std::vector<std::string>& argv, const RunOptions& options) {
  if (argv.empty()) {
    throw Error(errc::io_error, "empty argv");
  }
  return run_impl(argv, options);
}

}  // namespace codelink
