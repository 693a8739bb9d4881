#include "tsweave/subprocess.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace tsweave {

namespace {

struct Pipe {
    int read = -1;
    int write = -1;

    Pipe() {
        int fds[2];
        if (pipe(fds) != 0) throw SpawnError(std::string("pipe: ") + std::strerror(errno));
        read = fds[0];
        write = fds[1];
    }
    ~Pipe() {
        close_read();
        close_write();
    }
    void close_read() {
        if (read >= 0) ::close(read);
        read = -1;
    }
    void close_write() {
        if (write >= 0) ::close(write);
        write = -1;
    }
};

bool drain(int fd, std::string& into) {
    char buf[4096];
    ssize_t n = ::read(fd, buf, sizeof buf);
    if (n > 0) {
        into.append(buf, static_cast<size_t>(n));
        return true;
    }
    return false;
}

}  // namespace

ProcessResult run_process(const std::vector<std::string>& argv,
                          const std::filesystem::path& workingDir,
                          std::chrono::seconds timeout) {
    if (argv.empty()) throw SpawnError("empty argv");

    Pipe out, err, status;
    if (fcntl(status.write, F_SETFD, FD_CLOEXEC) != 0)
        throw SpawnError(std::string("fcntl: ") + std::strerror(errno));

    std::vector<char*> cargv;
    cargv.reserve(argv.size() + 1);
    for (const auto& arg : argv) cargv.push_back(const_cast<char*>(arg.c_str()));
    cargv.push_back(nullptr);

    pid_t pid = fork();
    if (pid < 0) throw SpawnError(std::string("fork: ") + std::strerror(errno));

    if (pid == 0) {
        if (!workingDir.empty() && chdir(workingDir.c_str()) != 0) {
            int code = errno;
            (void)!::write(status.write, &code, sizeof code);
            _exit(127);
        }
        dup2(out.write, STDOUT_FILENO);
        dup2(err.write, STDERR_FILENO);
        out.close_read();
        out.close_write();
        err.close_read();
        err.close_write();
        status.close_read();
        execvp(cargv[0], cargv.data());
        int code = errno;
        (void)!::write(status.write, &code, sizeof code);
        _exit(127);
    }

    out.close_write();
    err.close_write();
    status.close_write();

    // The status pipe reports exec/chdir failure; it closes silently on
    // success thanks to CLOEXEC.
    int execErrno = 0;
    ProcessResult result;

    auto deadline = std::chrono::steady_clock::now() + timeout;
    bool outOpen = true, errOpen = true, statusOpen = true;
    while (outOpen || errOpen || statusOpen) {
        pollfd fds[3];
        nfds_t n = 0;
        if (outOpen) fds[n++] = {out.read, POLLIN, 0};
        if (errOpen) fds[n++] = {err.read, POLLIN, 0};
        if (statusOpen) fds[n++] = {status.read, POLLIN, 0};

        int waitMs = -1;
        if (timeout.count() > 0) {
            auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                deadline - std::chrono::steady_clock::now());
            waitMs = static_cast<int>(std::max<int64_t>(left.count(), 0));
        }
        int ready = poll(fds, n, waitMs);
        if (ready < 0) {
            if (errno == EINTR) continue;
            break;
        }
        if (ready == 0) {
            kill(pid, SIGKILL);
            result.timedOut = true;
            timeout = std::chrono::seconds(0);
            continue;
        }
        for (nfds_t i = 0; i < n; ++i) {
            if (!(fds[i].revents & (POLLIN | POLLHUP | POLLERR))) continue;
            if (fds[i].fd == out.read) {
                if (!drain(out.read, result.output)) outOpen = false;
            } else if (fds[i].fd == err.read) {
                if (!drain(err.read, result.error)) errOpen = false;
            } else {
                ssize_t got = ::read(status.read, &execErrno, sizeof execErrno);
                if (got <= 0) statusOpen = false;
            }
        }
    }

    int waitStatus = 0;
    waitpid(pid, &waitStatus, 0);

    if (execErrno != 0) {
        throw SpawnError("cannot run " + argv[0] + ": " + std::strerror(execErrno));
    }

    if (WIFEXITED(waitStatus)) {
        result.exitCode = WEXITSTATUS(waitStatus);
    } else if (WIFSIGNALED(waitStatus)) {
        result.exitCode = 128 + WTERMSIG(waitStatus);
    }
    return result;
}

}  // namespace tsweave
