#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

#include "synthforge/blueprint/blueprint.hpp"
#include "synthforge/cohort/cohort.hpp"
#include "synthforge/container/container.hpp"
#include "synthforge/core/parallel.hpp"
#include "synthforge/core/rng.hpp"
#include "synthforge/intensity/intensity.hpp"
#include "synthforge/pipeline/config.hpp"
#include "synthforge/pipeline/manifest.hpp"
#include "synthforge/shapepool/shape_pool.hpp"

namespace synthforge::pipeline {

struct CohortFailure {
    int cohort = 0;
    std::string error;
};

struct GenerateSummary {
    int cohorts_requested = 0;
    int cohorts_completed = 0;
    std::uint64_t volume_count = 0; ///< images written
    std::vector<CohortFailure> failures;
    std::string pool_fingerprint;
    double wall_seconds = 0.0; ///< reported, never written into the tree

    [[nodiscard]] bool ok() const noexcept { return failures.empty(); }
};

inline ShapePool resolve_pool(const PipelineConfig& cfg)
{
    if (!cfg.pool.directory.empty())
        return load_pool(cfg.pool.directory);
    return synth_fallback_pool(cfg.pool.classes, cfg.pool.instances, RngStream(cfg.pool_seed()), cfg.pool.fallback);
}

using ProgressFn = std::function<void(const std::string&)>;

namespace detail {

inline void remove_stale_tmp(const fs::path& out)
{
    if (!fs::exists(out))
        return;
    for (const auto& e : fs::directory_iterator(out)) {
        const std::string name = e.path().filename().string();
        if (e.is_directory() && name.size() > 4 && name.front() == '.' && name.ends_with(".tmp"))
            fs::remove_all(e.path());
    }
}

} // namespace detail

/// Generate cohort b into `cohort_dir` (which must exist and be empty).
inline json generate_cohort(const PipelineConfig& cfg, const ShapePool& pool, int b, const fs::path& cohort_dir, int workers)
{
    const RngStream cohort_rng = RngStream(cfg.seed).child(static_cast<std::uint64_t>(b));
    const std::string suffix = io::volume_suffix(cfg.output.format, cfg.output.gzip);
    const auto fmt = cfg.output.format;

    const ContainerMask container = generate_container_with_retry(cfg.container, cfg.dims, cohort_rng.child(streams::container));
    const Blueprint bp = sample_blueprint(pool, container, cfg.blueprint, cohort_rng.child(streams::blueprint));
    const GmmSpec gmm = sample_gmm_spec(bp, cfg.gmm, cohort_rng.child(streams::gmm));
    LabelVolume container_labels(cfg.dims);
    for (std::size_t i = 0; i < container_labels.size(); ++i)
        container_labels[i] = container.mask[i] ? 1 : 0;
    const FileRecord container_file = store_volume_file(cohort_dir, "container" + suffix, container_labels, fmt);

    const RngStream subjects_rng = cohort_rng.child(streams::subjects);
    std::vector<SubjectRecord> records(static_cast<std::size_t>(cfg.subjects_per_blueprint));
    const SynthesisOptions opts{cfg.output.normalize};
    parallel_for(records.size(), workers, [&](std::size_t i) {
        const int n = static_cast<int>(i);
        const RngStream srng = subjects_rng.child(i);
        SubjectLabelMap s = instantiate_subject(bp, pool, container, n, cfg.cohort, srng);
        const RngStream irng = srng.child(streams::image);
        const SynthesisResult img = synthesize_image(s.labels, gmm, cfg.augment, irng, opts);

        SubjectRecord& r = records[i];
        r.subject = n;
        r.stream_seed = srng.seed();
        r.image_seed = irng.seed();
        r.rules = std::move(s.rules);
        r.final_elastic = s.final_elastic;
        r.augmentation = img.params;
        r.clip_report = std::move(s.clip_report);
        r.warp_lost = std::move(s.warp_lost);
        r.gmm = gmm;
        r.expected_labels = organ_labels_present(s.labels);
        r.files["labels"] = store_volume_file(cohort_dir, subject_file_name(n, "labels", suffix), s.labels, fmt);
        r.files["image"] = store_volume_file(cohort_dir, subject_file_name(n, "image", suffix), img.image, fmt);
        if (cfg.output.store_prewarp)
            r.files["prewarp"] = store_volume_file(cohort_dir, subject_file_name(n, "prewarp", suffix), s.prewarp, fmt);
        if (cfg.output.store_preaug)
            r.files["preaug"] = store_volume_file(cohort_dir, subject_file_name(n, "preaug", suffix), img.preaug, fmt);
    });

    json subjects = json::array();
    for (const auto& r : records)
        subjects.push_back(subject_record_json(r));
    json manifest = {{"schema_version", manifest_schema_version},
                     {"cohort", b},
                     {"master_seed", cfg.seed},
                     {"cohort_seed", cohort_rng.seed()},
                     {"dims", {cfg.dims.nx, cfg.dims.ny, cfg.dims.nz}},
                     {"config", config_snapshot(cfg)},
                     {"pool_fingerprint", pool.fingerprint()},
                     {"container", {{"spec", container.spec}, {"attempt", container.attempt}, {"file", container_file}}},
                     {"blueprint", bp},
                     {"gmm", gmm},
                     {"subjects", subjects}};
    write_json_file(cohort_dir / manifest_name, manifest);
    return manifest;
}

/// Generate the whole dataset under cfg.output.dir. Cohorts run one after
/// another with subjects spread over the workers; each cohort is built in a
/// hidden temporary directory and renamed into place once complete.
inline GenerateSummary run_generate(const PipelineConfig& cfg, const ProgressFn& progress = {})
{
    cfg.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const int workers = cfg.workers > 0 ? cfg.workers : default_worker_count();
    const fs::path out = cfg.output.dir;
    try {
        fs::create_directories(out);
        detail::remove_stale_tmp(out);
    } catch (const fs::filesystem_error& e) {
        throw IoError(std::string("cannot prepare output directory: ") + e.what());
    }

    const ShapePool pool = resolve_pool(cfg);
    GenerateSummary summary;
    summary.cohorts_requested = cfg.n_blueprints;
    summary.pool_fingerprint = pool.fingerprint();

    for (int b = 0; b < cfg.n_blueprints; ++b) {
        const fs::path final_dir = out / cohort_dir_name(b);
        const fs::path tmp_dir = out / ("." + cohort_dir_name(b) + ".tmp");
        try {
            fs::remove_all(tmp_dir);
            fs::create_directories(tmp_dir);
        } catch (const fs::filesystem_error& e) {
            throw IoError(e.what());
        }
        try {
            generate_cohort(cfg, pool, b, tmp_dir, workers);
        } catch (const IoError&) {
            fs::remove_all(tmp_dir);
            throw;
        } catch (const fs::filesystem_error& e) {
            fs::remove_all(tmp_dir);
            throw IoError(e.what());
        } catch (const std::exception& e) {
            // a cohort that cannot be built (e.g. container retries exhausted) is skipped
            fs::remove_all(tmp_dir);
            fs::remove_all(final_dir);
            summary.failures.push_back({b, e.what()});
            if (progress)
                progress(cohort_dir_name(b) + ": failed: " + e.what());
            continue;
        }
        try {
            fs::remove_all(final_dir);
            fs::rename(tmp_dir, final_dir);
        } catch (const fs::filesystem_error& e) {
            throw IoError(e.what());
        }
        ++summary.cohorts_completed;
        summary.volume_count += static_cast<std::uint64_t>(cfg.subjects_per_blueprint);
        if (progress)
            progress(cohort_dir_name(b) + ": " + std::to_string(cfg.subjects_per_blueprint) + " subjects");
    }

    json failures = json::array();
    for (const auto& f : summary.failures)
        failures.push_back({{"cohort", f.cohort}, {"error", f.error}});
    write_json_file(out / summary_name, {{"schema_version", manifest_schema_version},
                                         {"n_blueprints", cfg.n_blueprints},
                                         {"subjects_per_blueprint", cfg.subjects_per_blueprint},
                                         {"cohorts_completed", summary.cohorts_completed},
                                         {"volume_count", summary.volume_count},
                                         {"failures", failures},
                                         {"dims", {cfg.dims.nx, cfg.dims.ny, cfg.dims.nz}},
                                         {"master_seed", cfg.seed},
                                         {"pool_fingerprint", summary.pool_fingerprint}});
    summary.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return summary;
}

} // namespace synthforge::pipeline
