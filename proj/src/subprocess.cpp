#include "d4c/subprocess.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>

#include "d4c/error.hpp"

namespace d4c {

namespace {

class Fd {
public:
    explicit Fd(int fd = -1) : fd_(fd) {}
    Fd(const Fd&) = delete;
    Fd& operator=(const Fd&) = delete;
    ~Fd() { reset(); }

    int get() const { return fd_; }
    void reset() {
        if (fd_ >= 0) ::close(fd_);
        fd_ = -1;
    }

private:
    int fd_;
};

}  // namespace

ProcessResult run_shell(const std::string& command, const std::filesystem::path& cwd, double timeout_seconds,
                        std::size_t max_output_bytes) {
    using clock = std::chrono::steady_clock;
    int pipe_fds[2];
    if (::pipe2(pipe_fds, O_CLOEXEC) != 0) {
        throw Error(ErrorCode::SandboxSetupFailed, std::string("pipe: ") + std::strerror(errno));
    }
    Fd read_end(pipe_fds[0]);
    Fd write_end(pipe_fds[1]);

    const auto started = clock::now();
    pid_t pid = ::fork();
    if (pid < 0) throw Error(ErrorCode::SandboxSetupFailed, std::string("fork: ") + std::strerror(errno));
    if (pid == 0) {
        ::setpgid(0, 0);
        ::dup2(write_end.get(), STDOUT_FILENO);
        ::dup2(write_end.get(), STDERR_FILENO);
        int devnull = ::open("/dev/null", O_RDONLY);
        if (devnull >= 0) ::dup2(devnull, STDIN_FILENO);
        if (::chdir(cwd.c_str()) != 0) _exit(126);
        ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }
    ::setpgid(pid, pid);  // also done in the child; whichever runs first wins
    write_end.reset();
    ::fcntl(read_end.get(), F_SETFL, ::fcntl(read_end.get(), F_GETFL) | O_NONBLOCK);

    ProcessResult result;
    const auto deadline = started + std::chrono::duration_cast<clock::duration>(
                                        std::chrono::duration<double>(timeout_seconds));
    int status = 0;
    bool exited = false;
    bool pipe_open = true;
    char buffer[8192];
    while (!exited) {
        auto now = clock::now();
        if (now >= deadline) {
            ::kill(-pid, SIGKILL);
            ::waitpid(pid, &status, 0);
            result.timed_out = true;
            break;
        }
        if (pipe_open) {
            auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
            pollfd pfd{read_end.get(), POLLIN, 0};
            ::poll(&pfd, 1, static_cast<int>(std::min<long long>(remaining + 1, 20)));
            for (;;) {
                ssize_t n = ::read(read_end.get(), buffer, sizeof buffer);
                if (n > 0) {
                    std::size_t room = max_output_bytes - std::min(max_output_bytes, result.output.size());
                    result.output.append(buffer, std::min<std::size_t>(room, static_cast<std::size_t>(n)));
                    continue;
                }
                if (n == 0) pipe_open = false;
                break;
            }
        } else {
            ::usleep(5000);
        }
        pid_t waited = ::waitpid(pid, &status, WNOHANG);
        if (waited == pid) exited = true;
    }
    // Reap stragglers that inherited the group, then drain what they wrote.
    ::kill(-pid, SIGKILL);
    for (;;) {
        ssize_t n = ::read(read_end.get(), buffer, sizeof buffer);
        if (n <= 0) break;
        std::size_t room = max_output_bytes - std::min(max_output_bytes, result.output.size());
        result.output.append(buffer, std::min<std::size_t>(room, static_cast<std::size_t>(n)));
    }
    result.wall_seconds = std::chrono::duration<double>(clock::now() - started).count();
    if (!result.timed_out) {
        if (WIFEXITED(status)) {
            result.exit_code = WEXITSTATUS(status);
        } else if (WIFSIGNALED(status)) {
            result.term_signal = WTERMSIG(status);
        }
    }
    return result;
}

}  // namespace d4c
