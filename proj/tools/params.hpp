#pragma once

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <functional>
#include <nlohmann/json.hpp>
#include <stdexcept>
#include <string>
#include <toml.hpp>
#include <vector>

namespace fpt::cli {

template <class T>
inline constexpr bool is_vector = false;
template <class T>
inline constexpr bool is_vector<std::vector<T>> = true;

/// Bad flags or config file contents; reported with exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Options of one subcommand. Each value starts at its default, is
/// overwritten by the TOML config file and then by an explicit flag.
class Params {
 public:
  explicit Params(CLI::App* app) : app_(app) {}

  template <class T>
  CLI::Option* add(const std::string& key, T& field, const std::string& help) {
    CLI::Option* opt = app_->add_option("--" + key, field, help);
    if constexpr (!is_vector<T>) opt->capture_default_str();
    entries_.push_back({key, opt, [&field, key](const toml::node& n) { assign(field, n, key); },
                        [&field] { return nlohmann::json(field); }});
    return opt;
  }

  CLI::Option* add_flag(const std::string& key, bool& field, const std::string& help) {
    CLI::Option* opt = app_->add_flag("--" + key, field, help);
    entries_.push_back({key, opt, [&field, key](const toml::node& n) { assign(field, n, key); },
                        [&field] { return nlohmann::json(field); }});
    return opt;
  }

  /// Applies `table` entries to options not given on the command line.
  /// Unknown keys are rejected when `strict`.
  void apply(const toml::table& table, bool strict) {
    for (const auto& [k, node] : table) {
      const std::string key(k.str());
      auto it = std::find_if(entries_.begin(), entries_.end(),
                             [&](const Entry& e) { return e.key == key; });
      if (it == entries_.end()) {
        if (strict) throw UsageError("config: unknown key '" + key + "' for " + app_->get_name());
        continue;
      }
      if (it->option->count() == 0) it->from_toml(node);
    }
  }

  nlohmann::json resolved() const {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& e : entries_) out[e.key] = e.to_json();
    return out;
  }

 private:
  struct Entry {
    std::string key;
    CLI::Option* option;
    std::function<void(const toml::node&)> from_toml;
    std::function<nlohmann::json()> to_json;
  };

  template <class T>
  static void assign(T& field, const toml::node& node, const std::string& key) {
    if constexpr (is_vector<T>) {
      const toml::array* arr = node.as_array();
      if (!arr) throw UsageError("config: '" + key + "' must be an array");
      T out;
      for (const auto& item : *arr) {
        typename T::value_type v{};
        assign(v, item, key);
        out.push_back(std::move(v));
      }
      field = std::move(out);
    } else if constexpr (std::is_same_v<T, bool>) {
      auto v = node.value<bool>();
      if (!v) throw UsageError("config: '" + key + "' must be a boolean");
      field = *v;
    } else if constexpr (std::is_integral_v<T>) {
      auto v = node.value<std::int64_t>();
      if (!v || (std::is_unsigned_v<T> && *v < 0))
        throw UsageError("config: '" + key + "' must be an integer in range");
      field = static_cast<T>(*v);
    } else if constexpr (std::is_floating_point_v<T>) {
      auto v = node.value<double>();
      if (!v) throw UsageError("config: '" + key + "' must be a number");
      field = *v;
    } else {
      auto v = node.value<std::string>();
      if (!v) throw UsageError("config: '" + key + "' must be a string");
      field = *v;
    }
  }

  CLI::App* app_;
  std::vector<Entry> entries_;
};

}  // namespace fpt::cli
