#include "wsr/config.hpp"

#include <functional>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "wsr/io.hpp"

namespace wsr {

namespace {

using json = nlohmann::json;

struct Field {
    std::string key;
    std::function<json(const RunConfig&)> get;  // null json = omitted
    std::function<void(RunConfig&, const json&)> set;
};

double as_double(const std::string& key, const json& v) {
    if (!v.is_number()) throw std::invalid_argument("config key '" + key + "' expects a number");
    return v.get<double>();
}

std::size_t as_count(const std::string& key, const json& v) {
    if (!v.is_number_unsigned()) throw std::invalid_argument("config key '" + key + "' expects a non-negative integer");
    return v.get<std::size_t>();
}

int as_int(const std::string& key, const json& v) {
    if (!v.is_number_integer()) throw std::invalid_argument("config key '" + key + "' expects an integer");
    return v.get<int>();
}

std::string as_string(const std::string& key, const json& v) {
    if (!v.is_string()) throw std::invalid_argument("config key '" + key + "' expects a string");
    return v.get<std::string>();
}

bool as_bool(const std::string& key, const json& v) {
    if (!v.is_boolean()) throw std::invalid_argument("config key '" + key + "' expects true or false");
    return v.get<bool>();
}

Vec3 as_vec3(const std::string& key, const json& v) {
    if (!v.is_array() || v.size() != 3 || !v[0].is_number() || !v[1].is_number() || !v[2].is_number())
        throw std::invalid_argument("config key '" + key + "' expects an array of 3 numbers");
    return {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
}

json vec3_json(const Vec3& v) { return json::array({v.x, v.y, v.z}); }

#define WSR_DOUBLE(name, member)                                                              \
    Field{name, [](const RunConfig& c) { return json(c.member); },                            \
          [](RunConfig& c, const json& v) { c.member = as_double(name, v); }}
#define WSR_COUNT(name, member)                                                               \
    Field{name, [](const RunConfig& c) { return json(c.member); },                            \
          [](RunConfig& c, const json& v) { c.member = as_count(name, v); }}
#define WSR_INT(name, member)                                                                 \
    Field{name, [](const RunConfig& c) { return json(c.member); },                            \
          [](RunConfig& c, const json& v) { c.member = as_int(name, v); }}
#define WSR_STRING(name, member)                                                              \
    Field{name, [](const RunConfig& c) { return json(c.member); },                            \
          [](RunConfig& c, const json& v) { c.member = as_string(name, v); }}
#define WSR_BOOL(name, member)                                                                \
    Field{name, [](const RunConfig& c) { return json(c.member); },                            \
          [](RunConfig& c, const json& v) { c.member = as_bool(name, v); }}
#define WSR_VEC3(name, member)                                                                \
    Field{name, [](const RunConfig& c) { return vec3_json(c.member); },                       \
          [](RunConfig& c, const json& v) { c.member = as_vec3(name, v); }}

const std::vector<Field>& fields() {
    static const std::vector<Field> table = {
        WSR_COUNT("seed", train.seed),
        Field{"weight_model", [](const RunConfig& c) { return json(std::string(to_string(c.train.weight_kind))); },
              [](RunConfig& c, const json& v) { c.train.weight_kind = parse_weight_kind(as_string("weight_model", v)); }},
        Field{"sigma_init", [](const RunConfig& c) { return c.train.sigma_init ? json(*c.train.sigma_init) : json(); },
              [](RunConfig& c, const json& v) { c.train.sigma_init = as_double("sigma_init", v); }},
        Field{"beta_init", [](const RunConfig& c) { return c.train.beta_init ? json(*c.train.beta_init) : json(); },
              [](RunConfig& c, const json& v) { c.train.beta_init = as_double("beta_init", v); }},
        WSR_INT("sh_degree_color", train.sh_degree_color),
        WSR_INT("sh_degree_opacity", train.sh_degree_opacity),
        WSR_COUNT("iterations", train.iterations),
        WSR_COUNT("initial_points", train.initial_points),
        WSR_DOUBLE("initial_opacity", train.initial_opacity),
        WSR_DOUBLE("background_weight", train.initial_background_weight),
        WSR_VEC3("background_color", train.background_color),
        WSR_DOUBLE("scale_fraction", train.initial_scale_fraction),
        WSR_VEC3("init_bounds_min", train.init_bounds.min),
        WSR_VEC3("init_bounds_max", train.init_bounds.max),
        WSR_DOUBLE("lr_position", train.lr.position),
        WSR_DOUBLE("lr_position_final", train.lr.position_final),
        WSR_COUNT("lr_position_decay_steps", train.lr.position_decay_steps),
        WSR_DOUBLE("lr_color_sh", train.lr.color_sh),
        WSR_DOUBLE("lr_opacity_sh", train.lr.opacity_sh),
        WSR_DOUBLE("lr_scale", train.lr.scale),
        WSR_DOUBLE("lr_rotation", train.lr.rotation),
        WSR_DOUBLE("lr_lc_weight", train.lr.lc_weight),
        WSR_DOUBLE("lr_globals", train.lr.globals),
        WSR_BOOL("densify", train.densify_enabled),
        WSR_COUNT("densify_interval", train.densify.interval),
        WSR_COUNT("densify_start", train.densify.start),
        WSR_COUNT("densify_stop", train.densify.stop),
        WSR_DOUBLE("densify_grad_threshold", train.densify.grad_threshold),
        WSR_DOUBLE("densify_percent_dense", train.densify.percent_dense),
        WSR_DOUBLE("densify_max_screen_radius", train.densify.max_screen_radius),
        WSR_COUNT("eval_interval", train.eval_interval),
        WSR_DOUBLE("ssim_lambda", train.ssim_lambda),
        Field{"precision", [](const RunConfig& c) { return json(c.train.render.precision == Precision::F64 ? "f64" : "f32"); },
              [](RunConfig& c, const json& v) {
                  const std::string p = as_string("precision", v);
                  if (p == "f32") c.train.render.precision = Precision::F32;
                  else if (p == "f64") c.train.render.precision = Precision::F64;
                  else throw std::invalid_argument("config key 'precision' expects \"f32\" or \"f64\"");
              }},
        WSR_DOUBLE("alpha_floor", train.render.alpha_floor),
        WSR_INT("workers", train.render.workers),
        WSR_STRING("checkpoint_path", train.checkpoint_path),
        WSR_COUNT("checkpoint_interval", train.checkpoint_interval),
        WSR_STRING("scene", scene),
        WSR_STRING("cameras", cameras),
        WSR_STRING("images", images),
        WSR_STRING("out", out),
    };
    return table;
}

#undef WSR_DOUBLE
#undef WSR_COUNT
#undef WSR_INT
#undef WSR_STRING
#undef WSR_BOOL
#undef WSR_VEC3

const Field& find_field(const std::string& key) {
    for (const Field& f : fields())
        if (f.key == key) return f;
    throw std::invalid_argument("unknown config key '" + key + "'");
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

// Drops a trailing '#' comment that is not inside a string.
std::string strip_comment(const std::string& s) {
    bool quoted = false;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '\\' && quoted) {
            ++i;
            continue;
        }
        if (s[i] == '"') quoted = !quoted;
        if (s[i] == '#' && !quoted) return s.substr(0, i);
    }
    return s;
}

json parse_toml(const std::string& text) {
    json obj = json::object();
    std::istringstream in(text);
    std::string line;
    for (int n = 1; std::getline(in, line); ++n) {
        line = trim(strip_comment(line));
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("config line " + std::to_string(n) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw std::invalid_argument("config line " + std::to_string(n) + ": empty key");
        if (obj.contains(key)) throw std::invalid_argument("config line " + std::to_string(n) + ": duplicate key '" + key + "'");
        try {
            obj[key] = json::parse(value);
        } catch (const json::exception&) {
            throw std::invalid_argument("config line " + std::to_string(n) + ": cannot parse value for '" + key + "'");
        }
    }
    return obj;
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
    const auto first = text.find_first_not_of(" \t\r\n");
    json obj;
    if (first != std::string::npos && text[first] == '{') {
        try {
            obj = json::parse(text);
        } catch (const json::exception& ex) {
            throw std::invalid_argument(std::string("config json: ") + ex.what());
        }
    } else {
        obj = parse_toml(text);
    }
    RunConfig config;
    for (const auto& [key, value] : obj.items()) find_field(key).set(config, value);
    return config;
}

RunConfig load_run_config(const std::filesystem::path& path) { return parse_run_config(read_text_file(path)); }

void apply_config_overrides(RunConfig& config, const std::vector<std::string>& assignments) {
    for (const std::string& a : assignments) {
        const auto eq = a.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("override '" + a + "' is not key=value");
        const std::string key = trim(a.substr(0, eq));
        const std::string value = trim(a.substr(eq + 1));
        json v;
        try {
            v = json::parse(value);
        } catch (const json::exception&) {
            v = value;
        }
        find_field(key).set(config, v);
    }
}

std::string to_toml(const RunConfig& config) {
    std::ostringstream out;
    for (const Field& f : fields()) {
        const json v = f.get(config);
        if (!v.is_null()) out << f.key << " = " << v.dump() << "\n";
    }
    return out.str();
}

std::string to_json(const RunConfig& config) {
    json obj = json::object();
    for (const Field& f : fields()) {
        const json v = f.get(config);
        if (!v.is_null()) obj[f.key] = v;
    }
    return obj.dump(2) + "\n";
}

}  // namespace wsr
