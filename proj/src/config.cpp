#include "hybridfv/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace hybridfv {

namespace {

struct KeyValue {
    std::string value;
    int line = 0;
    mutable bool used = false;
};

using KvMap = std::map<std::string, KeyValue>;

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    if (b == std::string::npos) return {};
    return s.substr(b, e - b + 1);
}

[[noreturn]] void fail_line(const std::string& path, int line, const std::string& msg) {
    throw std::runtime_error(path + ":" + std::to_string(line) + ": " + msg);
}

[[noreturn]] void fail_key(const std::string& key, const std::string& msg) {
    throw std::runtime_error("config: " + key + ": " + msg);
}

KvMap parse_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("config: cannot open " + path);
    KvMap kv;
    std::string section, line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') fail_line(path, lineno, "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section.empty()) fail_line(path, lineno, "empty section name");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail_line(path, lineno, "expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) fail_line(path, lineno, "empty key");
        const std::string full = section.empty() ? key : section + "." + key;
        if (kv.count(full)) fail_line(path, lineno, "duplicate key " + full);
        kv[full] = {value, lineno, false};
    }
    return kv;
}

const KeyValue* find(const KvMap& kv, const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) return nullptr;
    it->second.used = true;
    return &it->second;
}

double to_double(const std::string& key, const KeyValue& v) {
    char* end = nullptr;
    const double x = std::strtod(v.value.c_str(), &end);
    if (end == v.value.c_str() || *end != '\0')
        fail_key(key, "expected a number, got '" + v.value + "'");
    return x;
}

long to_long(const std::string& key, const KeyValue& v) {
    char* end = nullptr;
    const long x = std::strtol(v.value.c_str(), &end, 10);
    if (end == v.value.c_str() || *end != '\0')
        fail_key(key, "expected an integer, got '" + v.value + "'");
    return x;
}

bool to_bool(const std::string& key, const KeyValue& v) {
    std::string s = v.value;
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (s == "true" || s == "on" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "off" || s == "0" || s == "no") return false;
    fail_key(key, "expected a boolean, got '" + v.value + "'");
}

template <typename T, typename Conv>
std::vector<T> to_list(const std::string& key, const KeyValue& v, Conv conv) {
    std::vector<T> out;
    std::istringstream iss(v.value);
    std::string tok;
    while (iss >> tok) out.push_back(conv(key, KeyValue{tok, v.line, true}));
    if (out.empty()) fail_key(key, "expected a list of values");
    return out;
}

}  // namespace

void CaseConfig::validate() const {
    if (extents.size() != 2 && extents.size() != 3)
        fail_key("grid.extents", "need 2 or 3 entries");
    if (lengths.size() != extents.size())
        fail_key("grid.lengths", "must match extents in length");
    for (int e : extents)
        if (e < 3) fail_key("grid.extents", "every extent must be >= 3");
    for (double l : lengths)
        if (l <= 0) fail_key("grid.lengths", "lengths must be positive");
    if (!(t_hot > t_cold))
        fail_key("physics.t_hot", "case temperatures must satisfy t_hot > t_cold");
    if (t_cold <= 0) fail_key("physics.t_cold", "must be positive (kelvin)");
    if (dt <= 0) fail_key("physics.dt", "must be positive");
    if (rayleigh <= 0) fail_key("physics.rayleigh", "must be positive");
    if (prandtl <= 0) fail_key("physics.prandtl", "must be positive");
    if (pcg_tol <= 0 || pcg_tol >= 1) fail_key("pcg.tol", "must be in (0,1)");
    if (pcg_max_iter < 1) fail_key("pcg.max_iter", "must be >= 1");
    if (threads != 1) fail_key("output.threads", "only single-threaded runs are supported");
    try {
        hybrid.validate();
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error(std::string("config: ") + e.what());
    }
}

CaseConfig load_config(const std::string& path) {
    const KvMap kv = parse_file(path);
    CaseConfig c;

    auto require = [&](const std::string& key) -> const KeyValue& {
        const KeyValue* v = find(kv, key);
        if (!v) fail_key(key, "required key is missing");
        return *v;
    };
    auto opt_double = [&](const std::string& key, double& dst) {
        if (const KeyValue* v = find(kv, key)) dst = to_double(key, *v);
    };
    auto opt_long = [&](const std::string& key, auto& dst) {
        if (const KeyValue* v = find(kv, key))
            dst = static_cast<std::remove_reference_t<decltype(dst)>>(to_long(key, *v));
    };
    auto opt_bool = [&](const std::string& key, bool& dst) {
        if (const KeyValue* v = find(kv, key)) dst = to_bool(key, *v);
    };

    if (const KeyValue* v = find(kv, "case.name")) c.name = v->value;

    c.extents = to_list<int>("grid.extents", require("grid.extents"),
                             [](const std::string& k, const KeyValue& v) {
                                 return static_cast<int>(to_long(k, v));
                             });
    c.lengths = to_list<double>("grid.lengths", require("grid.lengths"),
                                [](const std::string& k, const KeyValue& v) {
                                    return to_double(k, v);
                                });

    c.t_hot = to_double("physics.t_hot", require("physics.t_hot"));
    c.t_cold = to_double("physics.t_cold", require("physics.t_cold"));
    c.dt = to_double("physics.dt", require("physics.dt"));
    opt_double("physics.rayleigh", c.rayleigh);
    opt_double("physics.prandtl", c.prandtl);
    opt_double("physics.gravity", c.gravity);
    opt_double("physics.beta", c.beta);

    c.hybrid.total_steps = to_long("hybrid.total_steps",
                                   require("hybrid.total_steps"));
    c.hybrid.residual_threshold =
        to_double("hybrid.residual_threshold", require("hybrid.residual_threshold"));
    opt_long("hybrid.tl_epochs", c.hybrid.tl_epochs);
    opt_long("hybrid.burst_len", c.hybrid.burst_len);
    opt_long("hybrid.tl_buffer", c.hybrid.tl_buffer);
    opt_long("hybrid.initial_cfd_steps", c.hybrid.initial_cfd_steps);
    opt_long("hybrid.initial_epochs", c.hybrid.initial_epochs);
    opt_long("hybrid.snapshot_cadence", c.hybrid.snapshot_cadence);
    opt_bool("hybrid.flux_correction", c.hybrid.flux_correction);
    if (const KeyValue* v = find(kv, "hybrid.reference_mode")) {
        if (v->value == "fixed_at_first_handoff" || v->value == "fixed")
            c.hybrid.reference_mode = ReferenceMode::FixedAtFirstHandoff;
        else if (v->value == "per_rollout")
            c.hybrid.reference_mode = ReferenceMode::PerRollout;
        else
            fail_key("hybrid.reference_mode",
                     "expected fixed_at_first_handoff or per_rollout");
    }

    if (const KeyValue* v = find(kv, "model.kind")) {
        std::string s = v->value;
        std::transform(s.begin(), s.end(), s.begin(),
                       [](unsigned char ch) { return std::tolower(ch); });
        if (s == "fvmn" || s == "dense")
            c.model_kind = ModelKind::Dense;
        else if (s == "fvfno" || s == "spectral")
            c.model_kind = ModelKind::Spectral;
        else
            fail_key("model.kind", "expected fvmn or fvfno");
    } else {
        fail_key("model.kind", "required key is missing");
    }
    opt_long("model.hidden_width", c.hidden_width);
    opt_long("model.modes", c.modes);
    opt_long("model.fourier_layers", c.fourier_layers);
    opt_double("model.dropout", c.dropout);
    opt_long("model.seed", c.seed);

    opt_double("pcg.tol", c.pcg_tol);
    opt_long("pcg.max_iter", c.pcg_max_iter);

    if (const KeyValue* v = find(kv, "output.directory")) c.output_dir = v->value;
    opt_long("output.threads", c.threads);

    for (const auto& [key, v] : kv)
        if (!v.used) fail_key(key, "unknown key (line " + std::to_string(v.line) + ")");

    c.validate();
    return c;
}

StructuredGrid build_grid(const CaseConfig& config) {
    return make_grid(config.extents, config.lengths);
}

PhysicsParams build_physics(const CaseConfig& config) {
    const double height = config.lengths[1];
    PhysicsParams p = physics_from_rayleigh(config.rayleigh, config.prandtl,
                                            config.t_hot, config.t_cold, height,
                                            config.dt, config.gravity, config.beta);
    return p;
}

BoundarySpec build_boundaries(const CaseConfig& config) {
    return cavity_boundaries(config.t_hot, config.t_cold,
                             static_cast<int>(config.extents.size()));
}

ModelShape build_model_shape(const CaseConfig& config) {
    ModelShape shape;
    shape.kind = config.model_kind;
    shape.axes = static_cast<int>(config.extents.size());
    shape.hidden_width = config.hidden_width > 0
                             ? config.hidden_width
                             : (config.model_kind == ModelKind::Dense ? 398 : 64);
    shape.modes = config.modes;
    shape.fourier_layers = config.fourier_layers;
    shape.dropout = config.dropout;
    return shape;
}

CaseSetup make_setup(const CaseConfig& config) {
    CaseSetup setup;
    setup.grid = build_grid(config);
    setup.physics = build_physics(config);
    setup.boundaries = build_boundaries(config);
    setup.hybrid = config.hybrid;
    setup.model_shape = build_model_shape(config);
    setup.pcg = PcgSettings{config.pcg_tol, config.pcg_max_iter,
                            Preconditioner::IncompleteCholesky};
    setup.seed = config.seed;
    return setup;
}

std::string resolve_output_dir(const CaseConfig& config) {
    if (const char* root = std::getenv("HYBRIDFV_OUTPUT_ROOT")) {
        return (std::filesystem::path(root) / config.name).string();
    }
    return config.output_dir;
}

}  // namespace hybridfv
