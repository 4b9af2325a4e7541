#include "nrbo/cli/external.hpp"

#include <cerrno>
#include <cmath>
#include <csignal>
#include <cstring>
#include <sstream>

#include <fcntl.h>
#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

namespace nrbo::cli {

namespace {

class Fd {
public:
    Fd() = default;
    explicit Fd(int fd) : fd_(fd) {}
    Fd(const Fd&) = delete;
    Fd& operator=(const Fd&) = delete;
    Fd(Fd&& o) noexcept : fd_(o.release()) {}
    Fd& operator=(Fd&& o) noexcept {
        reset(o.release());
        return *this;
    }
    ~Fd() { reset(); }

    int get() const { return fd_; }
    int release() {
        int f = fd_;
        fd_ = -1;
        return f;
    }
    void reset(int f = -1) {
        if (fd_ >= 0) ::close(fd_);
        fd_ = f;
    }

private:
    int fd_ = -1;
};

std::pair<Fd, Fd> make_pipe() {
    int fds[2];
    if (::pipe2(fds, O_CLOEXEC) != 0) throw EvalError(EvalErrorKind::spawn, std::string("pipe: ") + std::strerror(errno));
    return {Fd(fds[0]), Fd(fds[1])};
}

const nlohmann::json* find_path(const nlohmann::json& doc, std::string_view path) {
    const nlohmann::json* node = &doc;
    while (!path.empty()) {
        const auto dot = path.find('.');
        const std::string key(path.substr(0, dot));
        if (!node->is_object() || !node->contains(key)) return nullptr;
        node = &node->at(key);
        path = dot == std::string_view::npos ? std::string_view{} : path.substr(dot + 1);
    }
    return node;
}

double parse_objective(const std::string& output, std::string_view key) {
    std::istringstream lines(output);
    std::string line;
    const nlohmann::json* found = nullptr;
    nlohmann::json doc;
    nlohmann::json last;
    while (std::getline(lines, line)) {
        auto parsed = nlohmann::json::parse(line, nullptr, false);
        if (parsed.is_discarded() || !parsed.is_object() || !find_path(parsed, key)) continue;
        last = std::move(parsed);
        found = &last;
    }
    if (!found)
        throw EvalError(EvalErrorKind::unparseable,
                        "no JSON object line with field '" + std::string(key) + "' in command output");
    const auto* v = find_path(*found, key);
    double value = 0.0;
    if (v->is_number()) {
        value = v->get<double>();
    } else if (v->is_string()) {
        // "NaN" / "inf" spellings are accepted here and rejected below as non-finite
        const auto& s = v->get_ref<const std::string&>();
        char* end = nullptr;
        value = std::strtod(s.c_str(), &end);
        if (end == s.c_str() || *end != '\0')
            throw EvalError(EvalErrorKind::unparseable, "field '" + std::string(key) + "' is not a number: " + s);
    } else {
        throw EvalError(EvalErrorKind::unparseable, "field '" + std::string(key) + "' is not a number: " + v->dump());
    }
    if (!std::isfinite(value))
        throw EvalError(EvalErrorKind::non_finite, "objective is not finite: " + v->dump());
    return value;
}

}  // namespace

std::string_view to_string(EvalErrorKind k) {
    switch (k) {
        case EvalErrorKind::spawn: return "spawn";
        case EvalErrorKind::timeout: return "timeout";
        case EvalErrorKind::exit_status: return "exit_status";
        case EvalErrorKind::unparseable: return "unparseable";
        case EvalErrorKind::non_finite: return "non_finite";
    }
    return "unknown";
}

double evaluate_external(const std::vector<std::string>& command, const nlohmann::json& params,
                         std::chrono::duration<double> timeout, std::string_view objective_key,
                         const std::filesystem::path& working_dir) {
    if (command.empty()) throw EvalError(EvalErrorKind::spawn, "empty command");

    auto [in_read, in_write] = make_pipe();
    auto [out_read, out_write] = make_pipe();

    std::vector<char*> argv;
    for (const auto& a : command) argv.push_back(const_cast<char*>(a.c_str()));
    argv.push_back(nullptr);

    const pid_t pid = ::fork();
    if (pid < 0) throw EvalError(EvalErrorKind::spawn, std::string("fork: ") + std::strerror(errno));
    if (pid == 0) {
        // own process group, so a timeout also reaches grandchildren
        ::setpgid(0, 0);
        ::dup2(in_read.get(), STDIN_FILENO);
        ::dup2(out_write.get(), STDOUT_FILENO);
        if (!working_dir.empty() && ::chdir(working_dir.c_str()) != 0) ::_exit(127);
        ::execvp(argv[0], argv.data());
        ::_exit(127);
    }
    ::setpgid(pid, pid);
    in_read.reset();
    out_write.reset();

    const auto deadline = std::chrono::steady_clock::now() + timeout;
    auto kill_child = [&] {
        ::kill(-pid, SIGKILL);
        ::waitpid(pid, nullptr, 0);
    };

    // the request is one short line; a child that never reads stdin must not block us
    {
        const std::string line = params.dump() + "\n";
        std::signal(SIGPIPE, SIG_IGN);
        std::size_t written = 0;
        while (written < line.size()) {
            const ssize_t n = ::write(in_write.get(), line.data() + written, line.size() - written);
            if (n < 0) {
                if (errno == EINTR) continue;
                break;  // child closed stdin; its exit status decides the outcome
            }
            written += static_cast<std::size_t>(n);
        }
        in_write.reset();
    }

    std::string output;
    char buf[4096];
    for (;;) {
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (left.count() <= 0) {
            kill_child();
            throw EvalError(EvalErrorKind::timeout, "command timed out after " + std::to_string(timeout.count()) + " s");
        }
        pollfd pfd{out_read.get(), POLLIN, 0};
        const int ready = ::poll(&pfd, 1, static_cast<int>(std::min<long long>(left.count(), 1000)));
        if (ready < 0) {
            if (errno == EINTR) continue;
            kill_child();
            throw EvalError(EvalErrorKind::spawn, std::string("poll: ") + std::strerror(errno));
        }
        if (ready == 0) continue;
        const ssize_t n = ::read(out_read.get(), buf, sizeof buf);
        if (n < 0) {
            if (errno == EINTR) continue;
            kill_child();
            throw EvalError(EvalErrorKind::spawn, std::string("read: ") + std::strerror(errno));
        }
        if (n == 0) break;
        output.append(buf, static_cast<std::size_t>(n));
    }

    int status = 0;
    for (;;) {
        const pid_t r = ::waitpid(pid, &status, WNOHANG);
        if (r == pid) break;
        if (r < 0 && errno != EINTR) throw EvalError(EvalErrorKind::spawn, std::string("waitpid: ") + std::strerror(errno));
        if (std::chrono::steady_clock::now() >= deadline) {
            kill_child();
            throw EvalError(EvalErrorKind::timeout, "command timed out after " + std::to_string(timeout.count()) + " s");
        }
        ::usleep(1000);
    }
    if (WIFEXITED(status) && WEXITSTATUS(status) == 127 && output.empty())
        throw EvalError(EvalErrorKind::spawn, "could not execute '" + command.front() + "'");
    if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
        std::ostringstream msg;
        if (WIFEXITED(status))
            msg << "command exited with status " << WEXITSTATUS(status);
        else
            msg << "command terminated by signal " << WTERMSIG(status);
        throw EvalError(EvalErrorKind::exit_status, msg.str());
    }
    return parse_objective(output, objective_key);
}

}  // namespace nrbo::cli
