#include "run_dir.h"

#include <fstream>

#include "json.hpp"
#include "kge/error.h"

namespace kge::cli {

namespace fs = std::filesystem;

void write_atomic(const fs::path& path, const std::function<void(std::ostream&)>& fn,
                  bool binary) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
    if (!out) throw IoError("cannot write '" + tmp.string() + "'");
    fn(out);
    out.flush();
    if (!out) throw IoError("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot rename into '" + path.string() + "': " + ec.message());
}

RunDir::RunDir(fs::path dir, std::string command)
    : dir_(std::move(dir)), command_(std::move(command)),
      start_(std::chrono::steady_clock::now()) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec || !fs::is_directory(dir_)) {
    throw IoError("cannot create output directory '" + dir_.string() + "'" +
                  (ec ? ": " + ec.message() : ""));
  }
  // Probe writability up front so failures happen before any work.
  const fs::path probe = dir_ / ".write_probe";
  {
    std::ofstream out(probe);
    if (!out) throw IoError("output directory '" + dir_.string() + "' is not writable");
  }
  fs::remove(probe, ec);
}

void RunDir::write(const std::string& name,
                   const std::function<void(std::ostream&)>& fn, bool binary) {
  write_atomic(file(name), fn, binary);
  record_output(name);
}

void RunDir::record_input(const std::string& role, const std::string& path) {
  inputs_.emplace_back(role, path);
}

void RunDir::set_config(const std::string& path, std::uint64_t hash) {
  config_path_ = path;
  config_hash_ = hash;
}

void RunDir::add_seed(const std::string& name, std::uint64_t seed) {
  seeds_.emplace_back(name, seed);
}

void RunDir::write_manifest() {
  nlohmann::ordered_json j;
  char hash[17];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(config_hash_));
  j["command"] = command_;
  j["engine_version"] = ANCHORKGE_VERSION;
  j["config"] = {{"path", config_path_}, {"fnv1a64", hash}};
  j["deterministic"] = deterministic_;
  nlohmann::ordered_json seeds = nlohmann::ordered_json::object();
  for (const auto& [k, v] : seeds_) seeds[k] = v;
  j["seeds"] = seeds;
  nlohmann::ordered_json inputs = nlohmann::ordered_json::object();
  for (const auto& [k, v] : inputs_) inputs[k] = v;
  j["inputs"] = inputs;
  j["outputs"] = outputs_;
  j["wall_clock_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  write_atomic(file("manifest.json"), [&](std::ostream& out) { out << j.dump(2) << '\n'; });
}

}  // namespace kge::cli
