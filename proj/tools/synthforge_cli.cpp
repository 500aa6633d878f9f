// synthforge command line: generate, validate, inspect, scale-config, pool.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "synthforge/pipeline/config.hpp"
#include "synthforge/pipeline/generate.hpp"
#include "synthforge/pipeline/inspect.hpp"
#include "synthforge/pipeline/validate.hpp"
#include "synthforge/shapepool/shape_pool.hpp"

namespace fs = std::filesystem;
namespace sf = synthforge;
namespace pl = synthforge::pipeline;

namespace {

enum Exit : int { ok = 0, validation_failure = 1, usage_error = 2, io_error = 3 };

sf::Dims parse_dims_arg(const std::string& s)
{
    return pl::detail::parse_dims("--dims", s);
}

int cmd_generate(const std::string& config_path, std::optional<std::uint64_t> seed, std::optional<int> workers,
                 const std::string& dims, const std::string& out, bool quiet)
{
    pl::PipelineConfig cfg = pl::load_config(config_path);
    if (!dims.empty())
        cfg = pl::scale_config(cfg, parse_dims_arg(dims));
    if (seed)
        cfg.seed = *seed;
    if (workers)
        cfg.workers = *workers;
    if (!out.empty())
        cfg.output.dir = out;
    cfg.validate();

    const auto summary = pl::run_generate(cfg, [&](const std::string& line) {
        if (!quiet)
            std::cerr << line << '\n';
    });
    std::cout << "cohorts: " << summary.cohorts_completed << "/" << summary.cohorts_requested << "\n"
              << "volumes: " << summary.volume_count << "\n"
              << "failures: " << summary.failures.size() << "\n"
              << "wall time: " << summary.wall_seconds << " s\n"
              << "output: " << cfg.output.dir.string() << "\n";
    for (const auto& f : summary.failures)
        std::cout << "  cohort " << f.cohort << ": " << f.error << "\n";
    return summary.ok() ? ok : validation_failure;
}

int cmd_validate(const std::string& dir, bool verbose)
{
    const auto report = pl::validate_dataset(dir);
    for (const auto& n : report.notices)
        std::cout << "notice: " << n << "\n";
    std::size_t passed = 0;
    for (const auto& c : report.checks) {
        if (c.ok)
            ++passed;
        if (!c.ok || verbose)
            std::cout << (c.ok ? "ok   " : "FAIL ") << c.cohort << " " << c.check << ": " << c.message << "\n";
    }
    std::cout << passed << "/" << report.checks.size() << " checks passed\n";
    return report.ok() ? ok : validation_failure;
}

int cmd_inspect(const std::string& target, bool estimate, bool as_json)
{
    if (fs::is_directory(target)) {
        std::cout << pl::describe_dataset(target);
        return ok;
    }
    const pl::PipelineConfig cfg = pl::load_config(target);
    if (!estimate) {
        std::cout << pl::format_config(cfg);
        return ok;
    }
    const pl::Estimate e = pl::estimate(cfg);
    if (as_json)
        std::cout << pl::estimate_json(e).dump(2) << "\n";
    else
        std::cout << pl::format_estimate(cfg, e);
    return ok;
}

int cmd_scale_config(const std::string& in, const std::string& dims, const std::string& out)
{
    const pl::PipelineConfig cfg = pl::load_config(in);
    pl::save_config(pl::scale_config(cfg, parse_dims_arg(dims)), out);
    std::cout << "wrote " << out << "\n";
    return ok;
}

int cmd_pool_import(const std::vector<std::string>& files, const std::string& out, const std::string& format)
{
    std::set<std::string> names;
    std::vector<sf::ShapeInstance> all;
    for (std::size_t i = 0; i < files.size(); ++i) {
        const std::string name = fs::path(files[i]).filename().string();
        if (!names.insert(name).second)
            throw sf::ConfigError("duplicate source file name: " + name);
        auto inst = sf::import_label_volume(fs::path(files[i]), static_cast<int>(i));
        all.insert(all.end(), std::make_move_iterator(inst.begin()), std::make_move_iterator(inst.end()));
    }
    const sf::ShapePool pool = sf::ShapePool::build(std::move(all));
    sf::save_pool(pool, out, sf::io::volume_format_from_string(format));
    std::cout << "pool: " << pool.class_count() << " classes, " << pool.total_instances() << " instances -> " << out << "\n"
              << "fingerprint: " << pool.fingerprint() << "\n";
    return ok;
}

int cmd_pool_synth(int classes, int instances, std::uint64_t seed, const std::string& out, const std::string& format)
{
    const sf::ShapePool pool = sf::synth_fallback_pool(classes, instances, sf::RngStream(seed));
    sf::save_pool(pool, out, sf::io::volume_format_from_string(format));
    std::cout << "pool: " << pool.class_count() << " classes, " << pool.total_instances() << " instances -> " << out << "\n"
              << "fingerprint: " << pool.fingerprint() << "\n";
    return ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"synthforge: procedural 3D label map and intensity volume generator"};
    app.require_subcommand(1);

    std::string config_path, dims, out, target, in_path, format = "nifti";
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    bool quiet = false, verbose = false, estimate = false, as_json = false;

    auto* gen = app.add_subcommand("generate", "generate a dataset from a config file");
    gen->add_option("--config", config_path, "config file (flat key = value)")->required();
    gen->add_option("--seed", seed, "override the master seed");
    gen->add_option("--workers", workers, "worker threads (default: SYNTH_FORGE_WORKERS or core count)")->check(CLI::PositiveNumber);
    gen->add_option("--dims", dims, "rescale the config to N or NX,NY,NZ");
    gen->add_option("--out", out, "override output.dir");
    gen->add_flag("-q,--quiet", quiet, "no per-cohort progress");

    auto* val = app.add_subcommand("validate", "check a generated dataset against its manifests");
    val->add_option("dir", target, "dataset directory")->required();
    val->add_flag("-v,--verbose", verbose, "list passing checks too");

    auto* ins = app.add_subcommand("inspect", "describe a dataset or a config");
    ins->add_option("target", target, "dataset directory or config file")->required();
    ins->add_flag("--estimate", estimate, "dry-run volume count, memory and disk plan for a config");
    ins->add_flag("--json", as_json, "estimate as JSON");

    auto* sc = app.add_subcommand("scale-config", "rescale spatial parameters of a config to new dims");
    sc->add_option("--in", in_path, "input config")->required();
    sc->add_option("--dims", dims, "target N or NX,NY,NZ")->required();
    sc->add_option("--out", out, "output config")->required();

    auto* pool = app.add_subcommand("pool", "build shape pools");
    pool->require_subcommand(1);
    std::vector<std::string> files;
    auto* imp = pool->add_subcommand("import", "import labelled volumes as a shape pool");
    imp->add_option("files", files, "label volumes (.nii, .nii.gz, .raw)")->required();
    imp->add_option("--out", out, "pool directory")->required();
    imp->add_option("--format", format, "nifti or raw");
    int classes = 0, instances = 0;
    std::uint64_t pool_seed = 0;
    auto* syn = pool->add_subcommand("synth", "synthesize a procedural fallback pool");
    syn->add_option("--classes", classes, "class count")->required()->check(CLI::PositiveNumber);
    syn->add_option("--instances", instances, "instances per class")->required()->check(CLI::PositiveNumber);
    syn->add_option("--seed", pool_seed, "pool seed");
    syn->add_option("--out", out, "pool directory")->required();
    syn->add_option("--format", format, "nifti or raw");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? ok : usage_error;
    }

    try {
        if (*gen)
            return cmd_generate(config_path, seed, workers, dims, out, quiet);
        if (*val)
            return cmd_validate(target, verbose);
        if (*ins)
            return cmd_inspect(target, estimate, as_json);
        if (*sc)
            return cmd_scale_config(in_path, dims, out);
        if (*imp)
            return cmd_pool_import(files, out, format);
        if (*syn)
            return cmd_pool_synth(classes, instances, pool_seed, out, format);
    } catch (const sf::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return usage_error;
    } catch (const sf::IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return io_error;
    } catch (const fs::filesystem_error& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return io_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return validation_failure;
    }
    return usage_error;
}
