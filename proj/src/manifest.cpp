#include "matnet/manifest.hpp"

#include <openssl/evp.h>

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"
#include "matnet/error.hpp"

namespace matnet {

namespace {

std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  std::ostringstream ss;
  ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return ss.str();
}

}  // namespace

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 digest failed");
  std::ostringstream ss;
  for (unsigned int k = 0; k < len; ++k) ss << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[k]);
  return ss.str();
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

RunManifest::RunManifest(std::string command, const std::filesystem::path& config, std::uint64_t seed)
    : command_(std::move(command)), config_path_(config.string()), seed_(seed), started_(utc_now()) {
  config_hash_ = sha256_file(config);
}

void RunManifest::add_input(const std::filesystem::path& path) { inputs_[path.string()] = sha256_file(path); }

void RunManifest::stage(const std::string& name, const std::string& status, const std::string& message) {
  stages_.push_back({name, status, message});
}

void RunManifest::write(const std::filesystem::path& dir) {
  nlohmann::ordered_json j;
  j["tool"] = "matnet";
  j["version"] = kVersion;
  j["command"] = command_;
  j["config"] = {{"path", config_path_}, {"sha256", config_hash_}};
  j["seed"] = seed_;
  j["inputs"] = nlohmann::ordered_json::object();
  for (const auto& [p, h] : inputs_) j["inputs"][p] = h;
  j["stages"] = nlohmann::ordered_json::array();
  for (const auto& s : stages_) j["stages"].push_back({{"name", s.name}, {"status", s.status}, {"message", s.message}});
  std::map<std::string, std::string> outputs;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file() && e.path().filename() != "manifest.json")
      outputs[e.path().filename().string()] = sha256_file(e.path());
  j["outputs"] = nlohmann::ordered_json::object();
  for (const auto& [p, h] : outputs) j["outputs"][p] = h;
  j["started"] = started_;
  j["finished"] = utc_now();
  std::ofstream out(dir / "manifest.json");
  if (!out) throw ConfigError("cannot write manifest in " + dir.string());
  out << j.dump(2) << "\n";
}

}  // namespace matnet
