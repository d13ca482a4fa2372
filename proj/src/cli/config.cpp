#include "hpe/cli/config.hpp"

#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "hpe/trainsearch/search.hpp"

namespace hpe::cli {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) throw ConfigError(where + " must be a JSON object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items()) {
    if (!keys.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read(const json& obj, const char* key, T& target) {
  if (obj.contains(key)) target = obj.at(key).get<T>();
}

arch::ArchitectureSpec parse_spec(const json& j, const std::string& where) {
  check_keys(j, where, {"family", "conv_blocks", "first_filters", "dense_layers", "dense_size"});
  arch::ArchitectureSpec spec = arch::realhepo_net_spec();
  if (j.contains("family")) spec.family = arch::parse_family(j.at("family").get<std::string>());
  read(j, "conv_blocks", spec.conv_blocks);
  read(j, "first_filters", spec.first_filters);
  read(j, "dense_layers", spec.dense_layers);
  read(j, "dense_size", spec.dense_size);
  arch::validate(spec);
  return spec;
}

augment::AugmentConfig parse_augment(const json& j, const std::string& where) {
  check_keys(j, where, {"shift_range", "brightness_min", "brightness_max", "zoom_min", "zoom_max"});
  augment::AugmentConfig a;
  read(j, "shift_range", a.shift_range);
  read(j, "brightness_min", a.brightness_min);
  read(j, "brightness_max", a.brightness_max);
  read(j, "zoom_min", a.zoom_min);
  read(j, "zoom_max", a.zoom_max);
  a.validate();
  return a;
}

std::vector<arch::ArchitectureSpec> parse_arch_grid(json j, bool desk) {
  if (j.is_null()) {
    if (desk) return trainsearch::desk_subgrid();
    j = "full";
  }
  if (j.is_string()) {
    const auto name = j.get<std::string>();
    if (name == "desk") return trainsearch::desk_subgrid();
    if (name == "full") {
      std::vector<arch::ArchitectureSpec> all;
      for (auto f : {arch::Family::A, arch::Family::B, arch::Family::C}) {
        const auto g = arch::search_grid(f);
        all.insert(all.end(), g.begin(), g.end());
      }
      return all;
    }
    return arch::search_grid(arch::parse_family(name));
  }
  if (!j.is_array() || j.empty()) throw ConfigError("search.arch_grid must be \"desk\", \"full\", a family letter or a non-empty list");
  std::vector<arch::ArchitectureSpec> specs;
  for (std::size_t i = 0; i < j.size(); ++i) specs.push_back(parse_spec(j[i], "search.arch_grid[" + std::to_string(i) + "]"));
  return specs;
}

std::vector<augment::AugmentConfig> parse_augment_grid(const json& j) {
  if (j.is_null() || (j.is_string() && j.get<std::string>() == "full")) return augment::augment_grid();
  if (!j.is_array() || j.empty()) throw ConfigError("search.augment_grid must be \"full\" or a non-empty list");
  std::vector<augment::AugmentConfig> grid;
  for (std::size_t i = 0; i < j.size(); ++i) {
    grid.push_back(parse_augment(j[i], "search.augment_grid[" + std::to_string(i) + "]"));
  }
  return grid;
}

json spec_json(const arch::ArchitectureSpec& s) {
  return {{"family", std::string(1, arch::family_letter(s.family))},
          {"conv_blocks", s.conv_blocks},
          {"first_filters", s.first_filters},
          {"dense_layers", s.dense_layers},
          {"dense_size", s.dense_size}};
}

json augment_json(const augment::AugmentConfig& a) {
  return {{"shift_range", a.shift_range},
          {"brightness_min", a.brightness_min},
          {"brightness_max", a.brightness_max},
          {"zoom_min", a.zoom_min},
          {"zoom_max", a.zoom_max}};
}

}  // namespace

RunConfig parse_run_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig cfg;
  try {
    check_keys(root, "config", {"seed", "out", "desk_scale", "architecture", "train", "augment", "split", "pipeline", "search"});
    if (root.contains("seed")) cfg.seed = root.at("seed").get<std::uint64_t>();
    if (root.contains("out")) cfg.out = root.at("out").get<std::string>();
    read(root, "desk_scale", cfg.desk_scale);
    if (root.contains("architecture")) cfg.architecture = parse_spec(root.at("architecture"), "architecture");

    auto& t = cfg.train;
    if (cfg.desk_scale) t = trainsearch::desk_scale(t);
    if (root.contains("train")) {
      const json& j = root.at("train");
      check_keys(j, "train", {"batch_size", "max_epochs", "patience", "initial_lr", "lr_factor", "min_delta",
                              "stop_min_delta", "eval_batch_size"});
      if (cfg.desk_scale && j.contains("max_epochs")) {
        throw ConfigError("train.max_epochs conflicts with desk_scale, which fixes it at 30");
      }
      read(j, "batch_size", t.batch_size);
      read(j, "max_epochs", t.schedule.max_epochs);
      read(j, "patience", t.schedule.patience);
      read(j, "initial_lr", t.schedule.initial_lr);
      read(j, "lr_factor", t.schedule.lr_factor);
      read(j, "min_delta", t.schedule.min_delta);
      read(j, "stop_min_delta", t.schedule.stop_min_delta);
      read(j, "eval_batch_size", t.eval_batch_size);
    }
    if (root.contains("augment")) t.augment = parse_augment(root.at("augment"), "augment");
    t.validate();

    if (root.contains("split")) {
      const json& j = root.at("split");
      check_keys(j, "split", {"test_frac", "val_frac"});
      read(j, "test_frac", cfg.test_frac);
      read(j, "val_frac", cfg.val_frac);
    }
    if (!(cfg.test_frac > 0 && cfg.test_frac < 1 && cfg.val_frac > 0 && cfg.val_frac < 1)) {
      throw ConfigError("split fractions must lie in (0, 1)");
    }

    if (root.contains("pipeline")) {
      const json& j = root.at("pipeline");
      check_keys(j, "pipeline", {"confidence_threshold", "min_match_iou", "resize_method"});
      read(j, "confidence_threshold", cfg.pipeline.confidence_threshold);
      read(j, "min_match_iou", cfg.pipeline.min_match_iou);
      if (j.contains("resize_method")) cfg.pipeline.resize_method = datapipe::parse_resize_method(j.at("resize_method").get<std::string>());
    }
    const auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!in_unit(cfg.pipeline.confidence_threshold) || !in_unit(cfg.pipeline.min_match_iou)) {
      throw ConfigError("pipeline thresholds must lie in [0, 1]");
    }

    json arch_grid, augment_grid;
    if (root.contains("search")) {
      const json& j = root.at("search");
      check_keys(j, "search", {"arch_grid", "augment_grid"});
      if (j.contains("arch_grid")) arch_grid = j.at("arch_grid");
      if (j.contains("augment_grid")) augment_grid = j.at("augment_grid");
    }
    cfg.arch_grid = parse_arch_grid(arch_grid, cfg.desk_scale);
    cfg.augment_grid = parse_augment_grid(augment_grid);
    for (const auto& [key, value] : root.items()) {
      cfg.keys.insert(key);
      if (value.is_object()) {
        for (const auto& [sub, unused] : value.items()) cfg.keys.insert(key + "." + sub);
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return parse_run_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::string dump_run_config(const RunConfig& cfg) {
  json root;
  if (cfg.seed) root["seed"] = *cfg.seed;
  if (cfg.out) root["out"] = *cfg.out;
  root["desk_scale"] = cfg.desk_scale;
  root["architecture"] = spec_json(cfg.architecture);
  const auto& t = cfg.train;
  root["train"] = {{"batch_size", t.batch_size},
                   {"patience", t.schedule.patience},
                   {"initial_lr", t.schedule.initial_lr},
                   {"lr_factor", t.schedule.lr_factor},
                   {"min_delta", t.schedule.min_delta},
                   {"stop_min_delta", t.schedule.stop_min_delta},
                   {"eval_batch_size", t.eval_batch_size}};
  if (!cfg.desk_scale) root["train"]["max_epochs"] = t.schedule.max_epochs;
  root["augment"] = augment_json(t.augment);
  root["split"] = {{"test_frac", cfg.test_frac}, {"val_frac", cfg.val_frac}};
  root["pipeline"] = {{"confidence_threshold", cfg.pipeline.confidence_threshold},
                      {"min_match_iou", cfg.pipeline.min_match_iou},
                      {"resize_method", cfg.pipeline.resize_method == datapipe::ResizeMethod::bilinear ? "bilinear" : "pixel_area"}};
  json arch_grid = json::array(), augment_grid = json::array();
  for (const auto& s : cfg.arch_grid) arch_grid.push_back(spec_json(s));
  for (const auto& a : cfg.augment_grid) augment_grid.push_back(augment_json(a));
  root["search"] = {{"arch_grid", arch_grid}, {"augment_grid", augment_grid}};
  return root.dump(2);
}

}  // namespace hpe::cli
