#pragma once

// JSON config files for CLI11. Objects nest by subcommand name:
//   {"seed": 3, "bench": {"reps": 2, "methods": ["gcca", "gcca-prior"]}}

#include <CLI11.hpp>
#include <json.hpp>

#include <istream>
#include <string>
#include <vector>

namespace ccafuse::cli {

class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App* app, bool default_also, bool, std::string) const override {
    return collect(app, default_also).dump(2) + "\n";
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(input);
    } catch (const nlohmann::json::exception& e) {
      throw CLI::ConversionError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("config must be a JSON object");
    std::vector<CLI::ConfigItem> items;
    flatten(j, {}, items);
    return items;
  }

 private:
  static std::string scalar(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    return v.dump();
  }

  static void flatten(const nlohmann::json& j, const std::vector<std::string>& parents,
                      std::vector<CLI::ConfigItem>& out) {
    for (const auto& [key, value] : j.items()) {
      if (value.is_object()) {
        auto next = parents;
        next.push_back(key);
        flatten(value, next, out);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (value.is_array()) {
        for (const auto& v : value) item.inputs.push_back(scalar(v));
      } else {
        item.inputs.push_back(scalar(value));
      }
      out.push_back(std::move(item));
    }
  }

  static nlohmann::json collect(const CLI::App* app, bool default_also) {
    nlohmann::json j = nlohmann::json::object();
    for (const CLI::Option* opt : app->get_options()) {
      if (!opt->get_configurable() || opt->get_lnames().empty()) continue;
      std::vector<std::string> values = opt->results();
      if (values.empty() && default_also && !opt->get_default_str().empty()) values = {opt->get_default_str()};
      if (values.empty()) continue;
      const std::string& name = opt->get_lnames().front();
      if (values.size() == 1 && opt->get_items_expected_max() <= 1) j[name] = values.front();
      else j[name] = values;
    }
    for (const CLI::App* sub : app->get_subcommands({})) {
      nlohmann::json s = collect(sub, default_also);
      if (!s.empty()) j[sub->get_name()] = std::move(s);
    }
    return j;
  }
};

}  // namespace ccafuse::cli
