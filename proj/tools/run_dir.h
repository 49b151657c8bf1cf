#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace kge::cli {

// One experiment directory. Files are written through a temporary name and
// renamed into place; the manifest is written last.
class RunDir {
 public:
  RunDir(std::filesystem::path dir, std::string command);

  const std::filesystem::path& path() const { return dir_; }
  std::filesystem::path file(const std::string& name) const { return dir_ / name; }

  // Writes `name` atomically and records it as an output.
  void write(const std::string& name, const std::function<void(std::ostream&)>& fn,
             bool binary = false);
  void record_output(const std::string& name) { outputs_.push_back(name); }
  void record_input(const std::string& role, const std::string& path);
  void set_config(const std::string& path, std::uint64_t hash);
  void add_seed(const std::string& name, std::uint64_t seed);
  void set_deterministic(bool v) { deterministic_ = v; }

  void write_manifest();

 private:
  std::filesystem::path dir_;
  std::string command_;
  std::string config_path_;
  std::uint64_t config_hash_ = 0;
  bool deterministic_ = false;
  std::vector<std::pair<std::string, std::string>> inputs_;
  std::vector<std::pair<std::string, std::uint64_t>> seeds_;
  std::vector<std::string> outputs_;
  std::chrono::steady_clock::time_point start_;
};

void write_atomic(const std::filesystem::path& path,
                  const std::function<void(std::ostream&)>& fn, bool binary = false);

}  // namespace kge::cli
