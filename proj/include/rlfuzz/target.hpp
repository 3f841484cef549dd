#pragma once

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <string>

#include <csignal>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include "rlfuzz/errors.hpp"
#include "rlfuzz/input.hpp"
#include "rlfuzz/miniparser.hpp"
#include "rlfuzz/trace.hpp"

namespace rlfuzz {

// Executes candidate inputs and reports traces. Crashes, early rejections
// and timeouts are outcomes; only a broken environment raises.
class Target {
public:
    virtual ~Target() = default;
    virtual ExecutionTrace execute(const Input& input, double timeout_seconds) = 0;
    virtual std::string describe() const = 0;
};

// In-process instrumented parser. With virtual_clock the reported time is a
// deterministic function of the work performed, which makes whole runs
// bit-replayable; real elapsed time is the default.
class BuiltinParserTarget : public Target {
public:
    explicit BuiltinParserTarget(bool virtual_clock = false) : virtual_clock_(virtual_clock) {}

    ExecutionTrace execute(const Input& input, double timeout_seconds) override {
        auto t0 = std::chrono::steady_clock::now();
        ParseResult pr = parse_document(input.bytes());
        auto t1 = std::chrono::steady_clock::now();

        ExecutionTrace trace;
        trace.blocks = std::move(pr.blocks);
        trace.outcome = pr.accepted ? Outcome::completed : Outcome::rejected_early;
        double elapsed =
            virtual_clock_
                ? 1e-9 * (100.0 + 3.0 * static_cast<double>(pr.consumed) +
                          120.0 * static_cast<double>(trace.blocks.size()))
                : std::chrono::duration<double>(t1 - t0).count();
        if (elapsed > timeout_seconds) {
            trace.outcome = Outcome::timed_out;
            elapsed = timeout_seconds;
        }
        trace.wall_time = elapsed;
        return trace;
    }

    std::string describe() const override {
        return virtual_clock_ ? "builtin (virtual clock)" : "builtin";
    }

private:
    bool virtual_clock_;
};

// Discards the input and reports an empty trace. Gives experiments a target
// whose reward comes entirely from the configured action bonus G(a).
class NullTarget : public Target {
public:
    ExecutionTrace execute(const Input&, double) override {
        ExecutionTrace trace;
        trace.outcome = Outcome::completed;
        trace.wall_time = 0.0;
        return trace;
    }

    std::string describe() const override { return "null"; }
};

// Name of the environment variable through which an external target may
// self-report coverage: newline-delimited decimal block ids written to the
// path stored in the variable.
inline constexpr const char* kCoverageFileEnv = "RLFUZZ_COVERAGE_FILE";

// Runs `command_template` through /bin/sh with {input} replaced by a file
// holding the candidate bytes. Exit 0 maps to completed, termination by
// signal to crashed, 126/127 to an environment error, any other exit code
// to rejected_early.
class ExternalCommandTarget : public Target {
public:
    explicit ExternalCommandTarget(std::string command_template,
                                   std::string work_dir = "")
        : template_(std::move(command_template)),
          work_dir_(work_dir.empty() ? std::filesystem::temp_directory_path().string() : work_dir) {
        if (template_.find("{input}") == std::string::npos)
            throw ContractViolation("external target: command template lacks the {input} placeholder");
    }

    ExecutionTrace execute(const Input& input, double timeout_seconds) override {
        std::string input_path = unique_path("in");
        std::string cov_path = unique_path("cov");
        input.write_file(input_path);

        std::string command = template_;
        command.replace(command.find("{input}"), 7, input_path);

        ExecutionTrace trace;
        int status = 0;
        double elapsed = run_with_timeout(command, cov_path, timeout_seconds, &status);

        if (elapsed < 0.0) {  // timed out, child killed
            trace.outcome = Outcome::timed_out;
            trace.wall_time = timeout_seconds;
        } else {
            trace.wall_time = elapsed;
            if (WIFSIGNALED(status)) {
                trace.outcome = Outcome::crashed;
            } else {
                int code = WEXITSTATUS(status);
                if (code == 126 || code == 127) {
                    std::remove(input_path.c_str());
                    std::remove(cov_path.c_str());
                    throw EnvironmentError("external target unavailable (shell exit " +
                                           std::to_string(code) + "): " + command);
                }
                trace.outcome = code == 0 ? Outcome::completed : Outcome::rejected_early;
            }
        }

        read_coverage_map(cov_path, trace.blocks);
        std::remove(input_path.c_str());
        std::remove(cov_path.c_str());
        return trace;
    }

    std::string describe() const override { return "command: " + template_; }

private:
    std::string unique_path(const char* tag) {
        return (std::filesystem::path(work_dir_) /
                ("rlfuzz_" + std::to_string(::getpid()) + "_" + std::to_string(counter_++) + "_" + tag))
            .string();
    }

    // Returns elapsed seconds, or a negative value on timeout. `status` is
    // the raw waitpid status.
    double run_with_timeout(const std::string& command, const std::string& cov_path,
                            double timeout_seconds, int* status) {
        auto t0 = std::chrono::steady_clock::now();
        pid_t pid = ::fork();
        if (pid < 0) throw EnvironmentError("fork failed for external target");
        if (pid == 0) {
            ::setenv(kCoverageFileEnv, cov_path.c_str(), 1);
            ::setpgid(0, 0);
            ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
            ::_exit(127);
        }
        for (;;) {
            int st = 0;
            pid_t r = ::waitpid(pid, &st, WNOHANG);
            if (r == pid) {
                *status = st;
                auto t1 = std::chrono::steady_clock::now();
                return std::chrono::duration<double>(t1 - t0).count();
            }
            if (r < 0) throw EnvironmentError("waitpid failed for external target");
            auto now = std::chrono::steady_clock::now();
            if (std::chrono::duration<double>(now - t0).count() > timeout_seconds) {
                ::kill(-pid, SIGKILL);
                ::kill(pid, SIGKILL);
                ::waitpid(pid, &st, 0);
                *status = st;
                return -1.0;
            }
            ::usleep(200);
        }
    }

    static void read_coverage_map(const std::string& path, BlockSet& blocks) {
        std::ifstream in(path);
        if (!in) return;  // target did not self-report
        std::uint64_t id = 0;
        while (in >> id) blocks.insert(static_cast<std::uint32_t>(id));
    }

    std::string template_;
    std::string work_dir_;
    std::uint64_t counter_ = 0;
};

}  // namespace rlfuzz
