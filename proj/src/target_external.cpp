#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>

#include <json.hpp>

#include "bonsai/target.hpp"

namespace bonsai {

namespace {

using nlohmann::json;

// One target process per instance, fed an input file path per line on stdin;
// one JSON feedback object per line on stdout. Any protocol or process
// failure yields valid=false with the reserved crash branch id.
class ExternalTarget final : public Target {
 public:
  ExternalTarget(std::string command, std::string grammar_source, int declared_branches)
      : name_("external"),
        command_(std::move(command)),
        grammar_source_(std::move(grammar_source)),
        declared_branches_(declared_branches) {}

  ~ExternalTarget() override { stop(); }

  const std::string& name() const override { return name_; }
  const std::string& grammar_source() const override { return grammar_source_; }
  int total_branches() const override { return declared_branches_ + 1; }
  int crash_branch() const { return declared_branches_; }

  ExecutionFeedback execute(const std::string& input) const override {
    std::scoped_lock lock(mu_);
    ExecutionFeedback fb;
    try {
      ensure_running();
      std::filesystem::path file = tmp_dir_ / "input.txt";
      {
        std::ofstream out(file, std::ios::binary | std::ios::trunc);
        out << input;
      }
      std::string line = roundtrip(file.string() + "\n");
      json j = json::parse(line);
      fb.valid = j.at("valid").get<bool>();
      for (const json& id : j.at("coverage")) {
        int v = id.get<int>();
        if (v >= 0 && v < declared_branches_) fb.coverage.insert(v);
      }
      if (j.contains("note")) fb.note = j["note"].get<std::string>();
    } catch (const std::exception& e) {
      stop();
      fb.valid = false;
      fb.coverage.insert(crash_branch());
      fb.note = std::string("crash: ") + e.what();
    }
    return fb;
  }

 private:
  void ensure_running() const {
    if (pid_ > 0) return;
    tmp_dir_ = std::filesystem::temp_directory_path() /
               ("bonsai-ext-" + std::to_string(::getpid()));
    std::filesystem::create_directories(tmp_dir_);

    int to_child[2], from_child[2];
    if (pipe(to_child) != 0 || pipe(from_child) != 0)
      throw TargetError("external target: pipe() failed");
    pid_t pid = fork();
    if (pid < 0) throw TargetError("external target: fork() failed");
    if (pid == 0) {
      dup2(to_child[0], STDIN_FILENO);
      dup2(from_child[1], STDOUT_FILENO);
      close(to_child[0]);
      close(to_child[1]);
      close(from_child[0]);
      close(from_child[1]);
      execl("/bin/sh", "sh", "-c", command_.c_str(), (char*)nullptr);
      _exit(127);
    }
    close(to_child[0]);
    close(from_child[1]);
    pid_ = pid;
    in_fd_ = to_child[1];
    out_fd_ = from_child[0];
  }

  std::string roundtrip(const std::string& request) const {
    size_t off = 0;
    while (off < request.size()) {
      ssize_t n = write(in_fd_, request.data() + off, request.size() - off);
      if (n <= 0) throw TargetError("external target: write failed");
      off += static_cast<size_t>(n);
    }
    std::string line;
    char c;
    while (true) {
      ssize_t n = read(out_fd_, &c, 1);
      if (n <= 0) throw TargetError("external target: process closed its output");
      if (c == '\n') break;
      line.push_back(c);
      if (line.size() > 1 << 20) throw TargetError("external target: oversized response");
    }
    return line;
  }

  void stop() const {
    if (pid_ > 0) {
      close(in_fd_);
      close(out_fd_);
      int status = 0;
      waitpid(pid_, &status, 0);
      pid_ = -1;
    }
  }

  std::string name_;
  std::string command_;
  std::string grammar_source_;
  int declared_branches_;

  mutable std::mutex mu_;
  mutable pid_t pid_ = -1;
  mutable int in_fd_ = -1;
  mutable int out_fd_ = -1;
  mutable std::filesystem::path tmp_dir_;
};

}  // namespace

std::unique_ptr<Target> make_external_target(const std::string& command,
                                             const std::string& grammar_source,
                                             int declared_branches) {
  return std::make_unique<ExternalTarget>(command, grammar_source, declared_branches);
}

}  // namespace bonsai
