#include <charconv>
#include <cstdio>

#include "commands.hpp"
#include "fpt/container.hpp"

namespace fpt::cli {

Command& new_command(CLI::App& root, CommandList& list, const std::string& name,
                     const std::string& description) {
  auto cmd = std::make_unique<Command>();
  cmd->app = root.add_subcommand(name, description);
  cmd->params = std::make_unique<Params>(cmd->app);
  cmd->app->add_option("--config", cmd->config_path,
                       "TOML file; top-level keys and the [" + name + "] table set defaults")
      ->check(CLI::ExistingFile);
  list.push_back(std::move(cmd));
  return *list.back();
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string format_double(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

nlohmann::json file_entry(const std::filesystem::path& path, const std::filesystem::path& base) {
  const std::string shown =
      base.empty() ? path.generic_string() : path.lexically_relative(base).generic_string();
  return {{"path", shown}, {"fnv1a64", hex64(fnv1a64(read_bytes(path)))}};
}

}  // namespace fpt::cli
