#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "params.hpp"

namespace fpt::cli {

struct Command {
  CLI::App* app = nullptr;
  std::unique_ptr<Params> params;
  std::string config_path;
  // Returns the "result" object of the summary. A result carrying
  // "passed": false makes the run exit with status 1.
  std::function<nlohmann::json()> run;
};

using CommandList = std::vector<std::unique_ptr<Command>>;

Command& new_command(CLI::App& root, CommandList& list, const std::string& name,
                     const std::string& description);

void add_scene_commands(CLI::App& root, CommandList& list);  // gen-scene project superpoints align-views aggregate
void add_train_commands(CLI::App& root, CommandList& list);  // pretrain loss-check
void add_vote_commands(CLI::App& root, CommandList& list);   // vote eval

/// {"path": ..., "fnv1a64": "<16 hex digits>"} with the path relative to `base`.
nlohmann::json file_entry(const std::filesystem::path& path, const std::filesystem::path& base = {});
std::string hex64(std::uint64_t v);
/// Shortest round-trip decimal form.
std::string format_double(double v);

}  // namespace fpt::cli
