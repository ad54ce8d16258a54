#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace matnet {

inline constexpr const char* kVersion = "1.0.0";

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Provenance record written as `manifest.json` in every output directory.
class RunManifest {
public:
  RunManifest(std::string command, const std::filesystem::path& config, std::uint64_t seed);

  void add_input(const std::filesystem::path& path);
  void stage(const std::string& name, const std::string& status, const std::string& message = {});
  /// Hashes every regular file in `dir` except the manifest and writes it.
  void write(const std::filesystem::path& dir);

private:
  struct Stage {
    std::string name, status, message;
  };
  std::string command_;
  std::string config_path_, config_hash_;
  std::uint64_t seed_;
  std::string started_;
  std::map<std::string, std::string> inputs_;
  std::vector<Stage> stages_;
};

}  // namespace matnet
