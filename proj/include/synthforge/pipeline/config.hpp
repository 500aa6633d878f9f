#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "synthforge/blueprint/blueprint.hpp"
#include "synthforge/cohort/cohort.hpp"
#include "synthforge/container/container.hpp"
#include "synthforge/core/error.hpp"
#include "synthforge/core/range.hpp"
#include "synthforge/intensity/intensity.hpp"
#include "synthforge/io/volume_io.hpp"
#include "synthforge/shapepool/shape_pool.hpp"

namespace synthforge::pipeline {

namespace fs = std::filesystem;

struct PoolSource {
    std::string directory; ///< empty selects the procedural fallback pool
    int classes = 20;
    int instances = 4;
    std::optional<std::uint64_t> seed; ///< defaults to a child of the master seed
    FallbackPoolParams fallback;
};

struct OutputOptions {
    fs::path dir = "synthforge_out";
    io::VolumeFormat format = io::VolumeFormat::nifti;
    bool gzip = true;
    bool store_prewarp = false; ///< pre-final-warp canvases, enables containment checks
    bool store_preaug = false;  ///< raw GMM renders, enables intensity statistics checks
    bool normalize = true;      ///< [0, 1] images instead of [0, 255]
};

struct PipelineConfig {
    Dims dims = Dims::cube(reference_size);
    int n_blueprints = 40;
    int subjects_per_blueprint = 500;
    std::uint64_t seed = 0;
    int workers = 0; ///< 0 picks SYNTH_FORGE_WORKERS or the core count
    PoolSource pool;
    OutputOptions output;
    ContainerRanges container;
    BlueprintRanges blueprint;
    SubjectRanges cohort;
    GmmRanges gmm;
    AugmentationRanges augment;

    [[nodiscard]] std::uint64_t volume_count() const noexcept
    {
        return static_cast<std::uint64_t>(n_blueprints) * static_cast<std::uint64_t>(subjects_per_blueprint);
    }

    [[nodiscard]] std::uint64_t pool_seed() const noexcept
    {
        return pool.seed ? *pool.seed : derive_seed(seed, streams::pool);
    }

    void validate() const
    {
        if (dims.nx < 32 || dims.ny < 32 || dims.nz < 32)
            throw ConfigError("dims: every axis must be >= 32, got " + to_string(dims));
        if (dims.nx > 32767 || dims.ny > 32767 || dims.nz > 32767)
            throw ConfigError("dims: axis too large for NIfTI-1");
        if (n_blueprints < 1)
            throw ConfigError("n_blueprints: must be >= 1");
        if (subjects_per_blueprint < 1)
            throw ConfigError("subjects_per_blueprint: must be >= 1");
        if (workers < 0)
            throw ConfigError("workers: must be >= 0");
        if (pool.directory.empty()) {
            if (pool.classes < 1 || pool.instances < 1)
                throw ConfigError("pool.classes and pool.instances must be >= 1");
            if (pool.fallback.grid < 8)
                throw ConfigError("pool.grid: must be >= 8");
            Range{pool.fallback.sigma_min, pool.fallback.sigma_max}.validate("pool.sigma");
            Range{pool.fallback.percentile_min, pool.fallback.percentile_max}.validate("pool.percentile");
            if (!(pool.fallback.sigma_min > 0.0) || pool.fallback.percentile_min < 0.0 || pool.fallback.percentile_max >= 100.0)
                throw ConfigError("pool: sigma must be > 0 and percentiles within [0, 100)");
            if (pool.fallback.shared_fraction < 0.0 || pool.fallback.shared_fraction > 1.0)
                throw ConfigError("pool.shared_fraction: must lie in [0, 1]");
        }
        container.validate();
        blueprint.validate();
        cohort.validate();
        gmm.validate();
        augment.validate();
    }
};

/// Default ranges for `dims`: the 128^3 reference values rescaled.
inline PipelineConfig default_config(const Dims& dims = Dims::cube(reference_size))
{
    PipelineConfig cfg;
    cfg.dims = dims;
    const double f = length_scale_factor(dims);
    cfg.container = ContainerRanges{}.scaled(f);
    cfg.cohort = SubjectRanges{}.scaled(f);
    cfg.pool.fallback.grid = std::max(8, static_cast<int>(std::lround(cfg.pool.fallback.grid * f)));
    cfg.pool.fallback.sigma_min *= f;
    cfg.pool.fallback.sigma_max *= f;
    return cfg;
}

namespace detail {

inline std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline std::string format_double(double v)
{
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, end);
}

inline double parse_double(const std::string& key, const std::string& s)
{
    double v = 0.0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || end != s.data() + s.size() || !std::isfinite(v))
        throw ConfigError(key + ": expected a number, got '" + s + "'");
    return v;
}

template <typename Int>
Int parse_int(const std::string& key, const std::string& s)
{
    Int v = 0;
    const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || end != s.data() + s.size())
        throw ConfigError(key + ": expected an integer, got '" + s + "'");
    return v;
}

inline bool parse_bool(const std::string& key, const std::string& s)
{
    if (s == "true" || s == "1" || s == "yes" || s == "on")
        return true;
    if (s == "false" || s == "0" || s == "no" || s == "off")
        return false;
    throw ConfigError(key + ": expected true or false, got '" + s + "'");
}

inline Dims parse_dims(const std::string& key, const std::string& s)
{
    std::vector<int> parts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, s.find(',') != std::string::npos ? ',' : 'x'))
        parts.push_back(parse_int<int>(key, trim(item)));
    if (parts.size() == 1)
        return Dims::cube(parts[0]);
    if (parts.size() == 3)
        return {parts[0], parts[1], parts[2]};
    throw ConfigError(key + ": expected N or NX,NY,NZ, got '" + s + "'");
}

inline std::string format_dims(const Dims& d)
{
    if (d.nx == d.ny && d.ny == d.nz)
        return std::to_string(d.nx);
    return std::to_string(d.nx) + "," + std::to_string(d.ny) + "," + std::to_string(d.nz);
}

} // namespace detail

/// One documented configuration key.
struct ConfigKey {
    std::string name;
    std::string help;
    std::function<std::string(const PipelineConfig&)> get;
    std::function<void(PipelineConfig&, const std::string&)> set;
    double spatial = 0.0; ///< power of the length factor the value scales with (0: dimensionless)
    bool run_local = false; ///< affects where/how the run executes, not what it generates
};

namespace detail {

template <typename Get>
ConfigKey make_real(std::string name, std::string help, Get ref, double spatial = 0.0)
{
    ConfigKey k;
    k.name = name;
    k.help = std::move(help);
    k.get = [ref](const PipelineConfig& c) { return format_double(ref(const_cast<PipelineConfig&>(c))); };
    k.set = [ref, name](PipelineConfig& c, const std::string& v) { ref(c) = parse_double(name, v); };
    k.spatial = spatial;
    return k;
}

template <typename Get>
ConfigKey make_int(std::string name, std::string help, Get ref, double spatial = 0.0)
{
    ConfigKey k;
    k.name = name;
    k.help = std::move(help);
    k.get = [ref](const PipelineConfig& c) { return std::to_string(ref(const_cast<PipelineConfig&>(c))); };
    k.set = [ref, name](PipelineConfig& c, const std::string& v) { ref(c) = parse_int<int>(name, v); };
    k.spatial = spatial;
    return k;
}

template <typename Get>
ConfigKey make_bool(std::string name, std::string help, Get ref, bool run_local = false)
{
    ConfigKey k;
    k.name = name;
    k.help = std::move(help);
    k.get = [ref](const PipelineConfig& c) { return std::string(ref(const_cast<PipelineConfig&>(c)) ? "true" : "false"); };
    k.set = [ref, name](PipelineConfig& c, const std::string& v) { ref(c) = parse_bool(name, v); };
    k.run_local = run_local;
    return k;
}

template <typename Get>
void add_range(std::vector<ConfigKey>& keys, const std::string& name, const std::string& help, Get range, double spatial)
{
    keys.push_back(make_real(name + "_min", "lower bound: " + help, [range](PipelineConfig& c) -> double& { return range(c).lo; }, spatial));
    keys.push_back(make_real(name + "_max", "upper bound: " + help, [range](PipelineConfig& c) -> double& { return range(c).hi; }, spatial));
}

} // namespace detail

/// All accepted keys in canonical order.
inline const std::vector<ConfigKey>& config_keys()
{
    using namespace detail;
    static const std::vector<ConfigKey> keys = [] {
        std::vector<ConfigKey> k;
        k.push_back({"dims", "volume size, N or NX,NY,NZ (>= 32 per axis)",
                     [](const PipelineConfig& c) { return format_dims(c.dims); },
                     [](PipelineConfig& c, const std::string& v) { c.dims = parse_dims("dims", v); }});
        k.push_back(make_int("n_blueprints", "number of cohorts", [](PipelineConfig& c) -> int& { return c.n_blueprints; }));
        k.push_back(make_int("subjects_per_blueprint", "subjects N per cohort",
                             [](PipelineConfig& c) -> int& { return c.subjects_per_blueprint; }));
        k.push_back({"seed", "master seed",
                     [](const PipelineConfig& c) { return std::to_string(c.seed); },
                     [](PipelineConfig& c, const std::string& v) { c.seed = parse_int<std::uint64_t>("seed", v); }});
        {
            ConfigKey w = make_int("workers", "worker threads (0: SYNTH_FORGE_WORKERS or core count)",
                                   [](PipelineConfig& c) -> int& { return c.workers; });
            w.run_local = true;
            k.push_back(w);
        }

        k.push_back({"pool.source", "'fallback' or a pool directory",
                     [](const PipelineConfig& c) { return c.pool.directory.empty() ? std::string("fallback") : c.pool.directory; },
                     [](PipelineConfig& c, const std::string& v) { c.pool.directory = v == "fallback" ? std::string() : v; }});
        k.push_back(make_int("pool.classes", "fallback pool class count", [](PipelineConfig& c) -> int& { return c.pool.classes; }));
        k.push_back(make_int("pool.instances", "fallback pool instances per class", [](PipelineConfig& c) -> int& { return c.pool.instances; }));
        k.push_back({"pool.seed", "fallback pool seed ('auto' derives it from the master seed)",
                     [](const PipelineConfig& c) { return c.pool.seed ? std::to_string(*c.pool.seed) : std::string("auto"); },
                     [](PipelineConfig& c, const std::string& v) {
                         if (v == "auto")
                             c.pool.seed.reset();
                         else
                             c.pool.seed = parse_int<std::uint64_t>("pool.seed", v);
                     }});
        k.push_back(make_int("pool.grid", "fallback blob grid size (voxels)",
                             [](PipelineConfig& c) -> int& { return c.pool.fallback.grid; }, 1.0));
        k.push_back(make_real("pool.sigma_min", "lower bound: fallback blob smoothing (voxels)",
                              [](PipelineConfig& c) -> double& { return c.pool.fallback.sigma_min; }, 1.0));
        k.push_back(make_real("pool.sigma_max", "upper bound: fallback blob smoothing (voxels)",
                              [](PipelineConfig& c) -> double& { return c.pool.fallback.sigma_max; }, 1.0));
        k.push_back(make_real("pool.percentile_min", "lower bound: fallback threshold percentile",
                              [](PipelineConfig& c) -> double& { return c.pool.fallback.percentile_min; }));
        k.push_back(make_real("pool.percentile_max", "upper bound: fallback threshold percentile",
                              [](PipelineConfig& c) -> double& { return c.pool.fallback.percentile_max; }));
        k.push_back(make_real("pool.shared_fraction", "weight of the class base noise in fallback instances",
                              [](PipelineConfig& c) -> double& { return c.pool.fallback.shared_fraction; }));

        {
            ConfigKey d{"output.dir", "output directory",
                        [](const PipelineConfig& c) { return c.output.dir.string(); },
                        [](PipelineConfig& c, const std::string& v) { c.output.dir = v; }};
            d.run_local = true;
            k.push_back(d);
        }
        k.push_back({"output.format", "nifti or raw",
                     [](const PipelineConfig& c) { return std::string(io::to_string(c.output.format)); },
                     [](PipelineConfig& c, const std::string& v) {
                         try {
                             c.output.format = io::volume_format_from_string(v);
                         } catch (const ConfigError& e) {
                             throw ConfigError(std::string("output.format: ") + e.what());
                         }
                     }});
        k.push_back(make_bool("output.gzip", "gzip NIfTI output", [](PipelineConfig& c) -> bool& { return c.output.gzip; }));
        k.push_back(make_bool("output.store_prewarp", "also write pre-final-warp label maps",
                              [](PipelineConfig& c) -> bool& { return c.output.store_prewarp; }));
        k.push_back(make_bool("output.store_preaug", "also write raw GMM renders",
                              [](PipelineConfig& c) -> bool& { return c.output.store_preaug; }));
        k.push_back(make_bool("output.normalize", "rescale images to [0, 1]",
                              [](PipelineConfig& c) -> bool& { return c.output.normalize; }));

        add_range(k, "container.radius", "container radius (voxels)", [](PipelineConfig& c) -> Range& { return c.container.radius; }, 1.0);
        add_range(k, "container.height", "container height (voxels)", [](PipelineConfig& c) -> Range& { return c.container.height; }, 1.0);
        add_range(k, "container.rotation", "container rotation per axis (radians)", [](PipelineConfig& c) -> Range& { return c.container.rotation; }, 0.0);
        add_range(k, "container.scale", "container anisotropic scale", [](PipelineConfig& c) -> Range& { return c.container.scale; }, 0.0);
        add_range(k, "container.elastic_sigma", "container elastic smoothing (voxels)", [](PipelineConfig& c) -> Range& { return c.container.elastic_sigma; }, 1.0);
        add_range(k, "container.elastic_alpha", "container elastic magnitude (voxels)", [](PipelineConfig& c) -> Range& { return c.container.elastic_alpha; }, 1.0);

        k.push_back(make_int("blueprint.k_min", "lower bound: organ rules per blueprint", [](PipelineConfig& c) -> int& { return c.blueprint.k_min; }));
        k.push_back(make_int("blueprint.k_max", "upper bound: organ rules per blueprint", [](PipelineConfig& c) -> int& { return c.blueprint.k_max; }));
        add_range(k, "blueprint.rotation", "base rotation per axis (radians)", [](PipelineConfig& c) -> Range& { return c.blueprint.rotation; }, 0.0);
        add_range(k, "blueprint.scale", "base anisotropic scale", [](PipelineConfig& c) -> Range& { return c.blueprint.scale; }, 0.0);
        k.push_back(make_int("blueprint.morph_iterations_min", "lower bound: morphology iterations",
                             [](PipelineConfig& c) -> int& { return c.blueprint.iterations_min; }));
        k.push_back(make_int("blueprint.morph_iterations_max", "upper bound: morphology iterations",
                             [](PipelineConfig& c) -> int& { return c.blueprint.iterations_max; }));

        add_range(k, "cohort.translation", "micro translation per axis (voxels)", [](PipelineConfig& c) -> Range& { return c.cohort.translation; }, 1.0);
        add_range(k, "cohort.rotation", "micro rotation per axis (radians)", [](PipelineConfig& c) -> Range& { return c.cohort.rotation; }, 0.0);
        add_range(k, "cohort.scale", "micro anisotropic scale", [](PipelineConfig& c) -> Range& { return c.cohort.scale; }, 0.0);
        add_range(k, "cohort.elastic_sigma", "final warp smoothing (voxels)", [](PipelineConfig& c) -> Range& { return c.cohort.elastic_sigma; }, 1.0);
        add_range(k, "cohort.elastic_alpha", "final warp magnitude (voxels)", [](PipelineConfig& c) -> Range& { return c.cohort.elastic_alpha; }, 1.0);

        add_range(k, "gmm.mean", "component mean", [](PipelineConfig& c) -> Range& { return c.gmm.mean; }, 0.0);
        add_range(k, "gmm.variance", "component variance", [](PipelineConfig& c) -> Range& { return c.gmm.variance; }, 0.0);

        k.push_back(make_bool("augment.enabled", "apply bias/gamma/resolution/noise augmentation",
                              [](PipelineConfig& c) -> bool& { return c.augment.enabled; }));
        k.push_back(make_int("augment.bias_grid_min", "lower bound: bias control points per axis",
                             [](PipelineConfig& c) -> int& { return c.augment.bias_grid_min; }));
        k.push_back(make_int("augment.bias_grid_max", "upper bound: bias control points per axis",
                             [](PipelineConfig& c) -> int& { return c.augment.bias_grid_max; }));
        add_range(k, "augment.bias_amplitude", "bias log-amplitude", [](PipelineConfig& c) -> Range& { return c.augment.bias_amplitude; }, 0.0);
        add_range(k, "augment.log_gamma", "log of the gamma exponent", [](PipelineConfig& c) -> Range& { return c.augment.log_gamma; }, 0.0);
        add_range(k, "augment.resolution", "resolution degradation factor per axis", [](PipelineConfig& c) -> Range& { return c.augment.resolution; }, 0.0);
        add_range(k, "augment.noise_std", "additive noise std (0-255 units)", [](PipelineConfig& c) -> Range& { return c.augment.noise_std; }, 0.0);
        return k;
    }();
    return keys;
}

inline const ConfigKey* find_config_key(std::string_view name)
{
    for (const auto& k : config_keys())
        if (k.name == name)
            return &k;
    return nullptr;
}

/// Parse `key = value` lines ('#' starts a comment). Unknown keys, repeated
/// keys and malformed lines are errors that carry `origin:line`. Defaults
/// for unspecified ranges are scaled to the configured dims.
inline PipelineConfig parse_config(std::string_view text, const std::string& origin = "<config>")
{
    struct Entry {
        std::string value;
        int line;
    };
    std::map<std::string, Entry> entries;
    std::vector<std::string> order;
    std::stringstream ss{std::string(text)};
    std::string raw;
    int line_no = 0;
    while (std::getline(ss, raw)) {
        ++line_no;
        const auto hash = raw.find('#');
        const std::string line = detail::trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        const std::string where = origin + ":" + std::to_string(line_no) + ": ";
        if (eq == std::string::npos)
            throw ConfigError(where + "expected 'key = value'");
        const std::string key = detail::trim(line.substr(0, eq));
        std::string value = detail::trim(line.substr(eq + 1));
        if (value.size() >= 2 && value.front() == '"' && value.back() == '"')
            value = value.substr(1, value.size() - 2);
        if (key.empty())
            throw ConfigError(where + "missing key");
        if (!find_config_key(key))
            throw ConfigError(where + "unknown key '" + key + "'");
        if (entries.count(key))
            throw ConfigError(where + "duplicate key '" + key + "'");
        entries[key] = {value, line_no};
        order.push_back(key);
    }

    Dims dims = Dims::cube(reference_size);
    if (auto it = entries.find("dims"); it != entries.end()) {
        try {
            dims = detail::parse_dims("dims", it->second.value);
        } catch (const ConfigError& e) {
            throw ConfigError(origin + ":" + std::to_string(it->second.line) + ": " + e.what());
        }
    }
    PipelineConfig cfg = default_config(dims.valid() ? dims : Dims::cube(reference_size));
    for (const auto& key : order) {
        const Entry& e = entries[key];
        try {
            find_config_key(key)->set(cfg, e.value);
        } catch (const ConfigError& err) {
            throw ConfigError(origin + ":" + std::to_string(e.line) + ": " + err.what());
        }
    }
    cfg.validate();
    return cfg;
}

inline PipelineConfig load_config(const fs::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open config file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path.string());
}

/// Every key with its current value, in canonical order.
inline std::string format_config(const PipelineConfig& cfg, bool with_help = false)
{
    std::string out;
    for (const auto& k : config_keys()) {
        if (with_help)
            out += "# " + k.help + "\n";
        out += k.name + " = " + k.get(cfg) + "\n";
    }
    return out;
}

inline void save_config(const PipelineConfig& cfg, const fs::path& path)
{
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw IoError("cannot write config file " + path.string());
    out << format_config(cfg, true);
    if (!out)
        throw IoError("write error in " + path.string());
}

/// Rescale every spatial quantity by the change in length factor between
/// the config's dims and `target`; dimensionless values stay put.
inline PipelineConfig scale_config(const PipelineConfig& cfg, const Dims& target)
{
    if (target.nx < 32 || target.ny < 32 || target.nz < 32)
        throw ConfigError("scale target must be at least 32 per axis, got " + to_string(target));
    const double f = length_scale_factor(target) / length_scale_factor(cfg.dims);
    PipelineConfig out = cfg;
    out.dims = target;
    if (f == 1.0)
        return out;
    for (const auto& k : config_keys()) {
        if (k.spatial == 0.0)
            continue;
        const double v = detail::parse_double(k.name, k.get(cfg)) * std::pow(f, k.spatial);
        if (k.name == "pool.grid")
            k.set(out, std::to_string(std::max(8L, std::lround(v))));
        else
            k.set(out, detail::format_double(v));
    }
    return out;
}

/// Key/value map of everything that influences generated bytes (run-local
/// keys such as output.dir and workers excluded).
inline std::map<std::string, std::string> config_snapshot(const PipelineConfig& cfg)
{
    std::map<std::string, std::string> snap;
    for (const auto& k : config_keys())
        if (!k.run_local)
            snap[k.name] = k.get(cfg);
    return snap;
}

} // namespace synthforge::pipeline
