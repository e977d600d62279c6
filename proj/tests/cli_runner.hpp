#pragma once

// Runs the fpt executable and captures its JSON summary.

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <nlohmann/json.hpp>
#include <string>

namespace fpt::testing {

struct CliRun {
  int code = -1;
  std::string out;
  nlohmann::json summary() const { return nlohmann::json::parse(out); }
};

inline CliRun run_cli(const std::string& args) {
  const std::string cmd = std::string(FPT_CLI_PATH) + " " + args + " 2>/dev/null";
  CliRun r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

}  // namespace fpt::testing
