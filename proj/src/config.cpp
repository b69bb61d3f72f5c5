#include "hogs/config.hpp"

#include <fstream>
#include <functional>
#include <map>

namespace hogs {

using nlohmann::json;

namespace {

struct Field {
  std::function<json(const TrainConfig&)> get;
  std::function<void(TrainConfig&, const json&)> set;
};

template <typename T>
Field member(T TrainConfig::*ptr) {
  return {[ptr](const TrainConfig& c) { return json(c.*ptr); },
          [ptr](TrainConfig& c, const json& v) { c.*ptr = v.get<T>(); }};
}

Field vec3_member(Vec3 TrainConfig::*ptr) {
  return {[ptr](const TrainConfig& c) {
            const Vec3& v = c.*ptr;
            return json::array({v[0], v[1], v[2]});
          },
          [ptr](TrainConfig& c, const json& v) {
            if (!v.is_array() || v.size() != 3) throw std::invalid_argument("expected 3 numbers");
            c.*ptr = Vec3(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
          }};
}

const std::map<std::string, Field>& fields() {
  static const std::map<std::string, Field> f = {
      {"parametrization",
       {[](const TrainConfig& c) { return json(std::string(to_string(c.parametrization))); },
        [](TrainConfig& c, const json& v) {
          c.parametrization = parse_parametrization(v.get<std::string>());
        }}},
      {"iterations", member(&TrainConfig::iterations)},
      {"seed", member(&TrainConfig::seed)},
      {"max_sh_degree", member(&TrainConfig::max_sh_degree)},
      {"sh_degree_interval", member(&TrainConfig::sh_degree_interval)},
      {"initial_opacity", member(&TrainConfig::initial_opacity)},
      {"w_init",
       {[](const TrainConfig& c) { return json(c.w_init); },
        [](TrainConfig& c, const json& v) {
          c.w_init = v.is_number() ? v.dump() : v.get<std::string>();
        }}},
      {"skybox_count", member(&TrainConfig::skybox_count)},
      {"skybox_radius", member(&TrainConfig::skybox_radius)},
      {"skybox_up", vec3_member(&TrainConfig::skybox_up)},
      {"lr_mu_init", member(&TrainConfig::lr_mu_init)},
      {"lr_mu_final", member(&TrainConfig::lr_mu_final)},
      {"position_lr_max_steps", member(&TrainConfig::position_lr_max_steps)},
      {"lr_rho_init", member(&TrainConfig::lr_rho_init)},
      {"lr_rho_final", member(&TrainConfig::lr_rho_final)},
      {"lr_w_multiplier", member(&TrainConfig::lr_w_multiplier)},
      {"lr_scale", member(&TrainConfig::lr_scale)},
      {"lr_rot", member(&TrainConfig::lr_rot)},
      {"lr_opacity", member(&TrainConfig::lr_opacity)},
      {"lr_sh", member(&TrainConfig::lr_sh)},
      {"lambda_dssim", member(&TrainConfig::lambda_dssim)},
      {"densify_interval", member(&TrainConfig::densify_interval)},
      {"densify_start", member(&TrainConfig::densify_start)},
      {"densify_stop", member(&TrainConfig::densify_stop)},
      {"densify_grad_threshold", member(&TrainConfig::densify_grad_threshold)},
      {"split_scale_fraction", member(&TrainConfig::split_scale_fraction)},
      {"opacity_reset_interval", member(&TrainConfig::opacity_reset_interval)},
      {"prune_opacity", member(&TrainConfig::prune_opacity)},
      {"prune_screen_px", member(&TrainConfig::prune_screen_px)},
      {"prune_world_extent_fraction", member(&TrainConfig::prune_world_extent_fraction)},
      {"world_prune_enabled", member(&TrainConfig::world_prune_enabled)},
      {"near_clip", member(&TrainConfig::near_clip)},
      {"background", vec3_member(&TrainConfig::background)},
      {"random_background", member(&TrainConfig::random_background)},
      {"checkpoint_interval", member(&TrainConfig::checkpoint_interval)},
      {"telemetry_interval", member(&TrainConfig::telemetry_interval)},
  };
  return f;
}

std::string key_list() {
  std::string out;
  for (const auto& [k, _] : fields()) {
    if (!out.empty()) out += ", ";
    out += k;
  }
  return out;
}

void set_field(TrainConfig& cfg, const std::string& key, const json& value) {
  const auto it = fields().find(key);
  if (it == fields().end()) {
    throw std::invalid_argument("unknown config key '" + key + "'; valid keys: " + key_list());
  }
  try {
    it->second.set(cfg, value);
  } catch (const json::exception& e) {
    throw std::invalid_argument("bad value for '" + key + "': " + e.what());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument("bad value for '" + key + "': " + e.what());
  }
}

}  // namespace

json config_to_json(const TrainConfig& cfg) {
  json j = json::object();
  for (const auto& [k, f] : fields()) j[k] = f.get(cfg);
  return j;
}

TrainConfig config_from_json(const json& j, TrainConfig base) {
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");
  if (j.contains("parametrization")) {
    set_field(base, "parametrization", j.at("parametrization"));
    if (!j.contains("world_prune_enabled")) {
      base.world_prune_enabled = base.parametrization == Parametrization::Cartesian;
    }
  }
  for (const auto& [k, v] : j.items()) {
    if (k != "parametrization") set_field(base, k, v);
  }
  return base;
}

void apply_override(TrainConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw std::invalid_argument("override must look like key=value, got '" + assignment + "'");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  cfg = config_from_json(json{{key, value}}, cfg);
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, _] : fields()) keys.push_back(k);
  return keys;
}

TrainConfig load_config_file(const std::string& path, TrainConfig base) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file " + path);
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) throw DataError("config file " + path + " is not valid JSON");
  return config_from_json(j, std::move(base));
}

}  // namespace hogs
