#include "abom/process.hpp"

#include <fcntl.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cerrno>
#include <cstring>

#include "abom/error.hpp"

extern char** environ;

namespace abom {
namespace {

std::vector<char*> c_argv(const std::vector<std::string>& argv) {
    std::vector<char*> out;
    out.reserve(argv.size() + 1);
    for (const std::string& a : argv) {
        out.push_back(const_cast<char*>(a.c_str()));
    }
    out.push_back(nullptr);
    return out;
}

int wait_for(pid_t pid) {
    int status = 0;
    while (waitpid(pid, &status, 0) < 0) {
        if (errno != EINTR) {
            throw Error(ErrorKind::Io, std::string("waitpid failed: ") + std::strerror(errno));
        }
    }
    if (WIFEXITED(status)) {
        return WEXITSTATUS(status);
    }
    if (WIFSIGNALED(status)) {
        return 128 + WTERMSIG(status);
    }
    return 1;
}

class FileActions {
public:
    FileActions() { posix_spawn_file_actions_init(&actions_); }
    ~FileActions() { posix_spawn_file_actions_destroy(&actions_); }
    FileActions(const FileActions&) = delete;
    FileActions& operator=(const FileActions&) = delete;

    posix_spawn_file_actions_t* get() { return &actions_; }

private:
    posix_spawn_file_actions_t actions_;
};

}  // namespace

int run_process(const std::vector<std::string>& argv) {
    if (argv.empty()) {
        throw Error(ErrorKind::InvalidArgument, "empty command line");
    }
    auto args = c_argv(argv);
    pid_t pid = 0;
    const int rc = posix_spawnp(&pid, args[0], nullptr, nullptr, args.data(), environ);
    if (rc != 0) {
        return 127;
    }
    return wait_for(pid);
}

CapturedOutput run_capture(const std::vector<std::string>& argv, bool quiet_stderr) {
    if (argv.empty()) {
        throw Error(ErrorKind::InvalidArgument, "empty command line");
    }
    int fds[2];
    if (pipe2(fds, O_CLOEXEC) != 0) {
        throw Error(ErrorKind::Io, std::string("pipe failed: ") + std::strerror(errno));
    }

    FileActions actions;
    posix_spawn_file_actions_adddup2(actions.get(), fds[1], STDOUT_FILENO);
    if (quiet_stderr) {
        posix_spawn_file_actions_addopen(actions.get(), STDERR_FILENO, "/dev/null", O_WRONLY, 0);
    }

    auto args = c_argv(argv);
    pid_t pid = 0;
    const int rc = posix_spawnp(&pid, args[0], actions.get(), nullptr, args.data(), environ);
    close(fds[1]);
    if (rc != 0) {
        close(fds[0]);
        return {127, {}};
    }

    CapturedOutput result;
    std::array<char, 8192> buffer;
    for (;;) {
        const ssize_t got = read(fds[0], buffer.data(), buffer.size());
        if (got > 0) {
            result.out.append(buffer.data(), static_cast<std::size_t>(got));
        } else if (got == 0 || errno != EINTR) {
            break;
        }
    }
    close(fds[0]);
    result.exit_code = wait_for(pid);
    return result;
}

}  // namespace abom
