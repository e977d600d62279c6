#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <iostream>

#include "commands.hpp"
#include "fpt/error.hpp"

namespace {

using nlohmann::json;
using fpt::cli::Command;

constexpr int kModuleError = 1;
constexpr int kUsageError = 2;

void setup_logging() {
  auto logger = spdlog::stderr_color_st("fpt");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* level = std::getenv("FPT_LOG_LEVEL")) {
    spdlog::set_level(spdlog::level::from_str(level));
  }
}

void load_config(Command& cmd) {
  if (cmd.config_path.empty()) return;
  toml::table table;
  try {
    table = toml::parse_file(cmd.config_path);
  } catch (const toml::parse_error& e) {
    throw fpt::cli::UsageError("config " + cmd.config_path + ": " + std::string(e.description()));
  }
  // Shared top-level keys first, then the subcommand's own table.
  toml::table shared;
  for (const auto& [k, v] : table)
    if (!v.is_table()) shared.insert(k, v);
  cmd.params->apply(shared, false);
  if (const toml::table* own = table[cmd.app->get_name()].as_table()) cmd.params->apply(*own, true);
}

int emit(const json& summary, int code) {
  std::cout << summary.dump(2) << std::endl;
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Spatiotemporal image-to-LiDAR pretraining toolkit"};
  app.require_subcommand(1);
  fpt::cli::CommandList commands;
  fpt::cli::add_scene_commands(app, commands);
  fpt::cli::add_train_commands(app, commands);
  fpt::cli::add_vote_commands(app, commands);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  Command* cmd = nullptr;
  for (auto& c : commands)
    if (c->app->parsed()) cmd = c.get();
  const std::string name = cmd->app->get_name();
  json summary = {{"command", name}};
  try {
    load_config(*cmd);
    summary["config"] = cmd->params->resolved();
    json result = cmd->run();
    const bool passed = result.value("passed", true);
    summary["status"] = passed ? "ok" : "failed";
    summary["result"] = std::move(result);
    return emit(summary, passed ? 0 : kModuleError);
  } catch (const fpt::cli::UsageError& e) {
    spdlog::error("{}", e.what());
    summary["status"] = "error";
    summary["error"] = {{"kind", "usage"}, {"message", e.what()}};
    emit(summary, kUsageError);
    return kUsageError;
  } catch (const fpt::Error& e) {
    spdlog::error("{}", e.what());
    summary["status"] = "error";
    summary["error"] = {{"kind", e.kind()}, {"message", e.what()}};
    return emit(summary, kModuleError);
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    summary["status"] = "error";
    summary["error"] = {{"kind", "io_error"}, {"message", e.what()}};
    return emit(summary, kModuleError);
  }
}
