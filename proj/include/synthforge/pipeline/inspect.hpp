#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <string>

#include "json.hpp"

#include "synthforge/core/parallel.hpp"
#include "synthforge/pipeline/config.hpp"
#include "synthforge/pipeline/manifest.hpp"

namespace synthforge::pipeline {

/// Dry-run resource plan for a config. Pure arithmetic, nothing allocated.
struct Estimate {
    std::uint64_t cohorts = 0;
    std::uint64_t subjects_per_cohort = 0;
    std::uint64_t volume_count = 0;
    std::uint64_t files_written = 0;
    std::uint64_t voxels_per_volume = 0;
    int workers = 1;
    std::uint64_t bytes_per_subject_peak = 0; ///< working set of one subject task
    std::uint64_t bytes_shared = 0;           ///< pool + container + blueprint buffers
    std::uint64_t bytes_peak = 0;
    std::uint64_t bytes_disk_uncompressed = 0;
};

inline Estimate estimate(const PipelineConfig& cfg)
{
    Estimate e;
    e.cohorts = static_cast<std::uint64_t>(cfg.n_blueprints);
    e.subjects_per_cohort = static_cast<std::uint64_t>(cfg.subjects_per_blueprint);
    e.volume_count = cfg.volume_count();
    e.voxels_per_volume = cfg.dims.count();
    e.workers = cfg.workers > 0 ? cfg.workers : default_worker_count();
    const std::uint64_t v = e.voxels_per_volume;

    // canvas + warped labels (u16), displacement field (3 x f32) plus its
    // blur scratch, image pipeline (render, working copy, scratch as f32)
    e.bytes_per_subject_peak = v * (2 * 2 + 3 * 4 + 4 + 3 * 4);
    const std::uint64_t g = static_cast<std::uint64_t>(cfg.pool.fallback.grid);
    const std::uint64_t pool_bytes = cfg.pool.directory.empty()
                                         ? static_cast<std::uint64_t>(cfg.pool.classes) * cfg.pool.instances * g * g * g
                                         : 0;
    e.bytes_shared = pool_bytes + v * (1 + 2) + v * 8 / 4; // container mask, its label copy, anchor list (upper bound)
    const auto concurrent = std::min<std::uint64_t>(static_cast<std::uint64_t>(e.workers), e.subjects_per_cohort);
    e.bytes_peak = e.bytes_shared + concurrent * e.bytes_per_subject_peak;

    std::uint64_t per_subject_disk = v * (2 + 4);
    int files = 2;
    if (cfg.output.store_prewarp) {
        per_subject_disk += v * 2;
        ++files;
    }
    if (cfg.output.store_preaug) {
        per_subject_disk += v * 4;
        ++files;
    }
    const std::uint64_t header = cfg.output.format == io::VolumeFormat::nifti ? 352 : 0;
    e.files_written = e.volume_count * static_cast<std::uint64_t>(files) + e.cohorts * 2 + 1;
    e.bytes_disk_uncompressed = e.volume_count * (per_subject_disk + header * files) + e.cohorts * (v * 2 + header);
    return e;
}

inline std::string human_bytes(std::uint64_t b)
{
    const char* units[] = {"B", "KiB", "MiB", "GiB", "TiB", "PiB"};
    double x = static_cast<double>(b);
    int u = 0;
    while (x >= 1024.0 && u < 5) {
        x /= 1024.0;
        ++u;
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), u == 0 ? "%.0f %s" : "%.2f %s", x, units[u]);
    return buf;
}

inline std::string format_estimate(const PipelineConfig& cfg, const Estimate& e)
{
    std::string s;
    s += "dims: " + to_string(cfg.dims) + "\n";
    s += "cohorts: " + std::to_string(e.cohorts) + "\n";
    s += "subjects per cohort: " + std::to_string(e.subjects_per_cohort) + "\n";
    s += "volume count: " + std::to_string(e.volume_count) + "\n";
    s += "files written: " + std::to_string(e.files_written) + "\n";
    s += "workers: " + std::to_string(e.workers) + "\n";
    s += "memory plan:\n";
    s += "  per subject task: " + human_bytes(e.bytes_per_subject_peak) + "\n";
    s += "  shared (pool, container): " + human_bytes(e.bytes_shared) + "\n";
    s += "  peak: " + human_bytes(e.bytes_peak) + "\n";
    s += "disk (uncompressed upper bound): " + human_bytes(e.bytes_disk_uncompressed) + "\n";
    return s;
}

inline nlohmann::json estimate_json(const Estimate& e)
{
    return {{"cohorts", e.cohorts},
            {"subjects_per_cohort", e.subjects_per_cohort},
            {"volume_count", e.volume_count},
            {"files_written", e.files_written},
            {"voxels_per_volume", e.voxels_per_volume},
            {"workers", e.workers},
            {"bytes_per_subject_peak", e.bytes_per_subject_peak},
            {"bytes_shared", e.bytes_shared},
            {"bytes_peak", e.bytes_peak},
            {"bytes_disk_uncompressed", e.bytes_disk_uncompressed}};
}

/// Human-readable listing of a generated dataset.
inline std::string describe_dataset(const fs::path& root)
{
    if (!fs::is_directory(root))
        throw IoError("not a directory: " + root.string());
    std::vector<fs::path> cohorts;
    for (const auto& e : fs::directory_iterator(root))
        if (e.is_directory() && e.path().filename().string().starts_with("cohort_"))
            cohorts.push_back(e.path());
    std::sort(cohorts.begin(), cohorts.end());
    if (cohorts.empty())
        throw IoError("no cohorts found under " + root.string());

    std::string s;
    std::uint64_t volumes = 0;
    if (fs::exists(root / summary_name)) {
        const auto sum = read_json_file(root / summary_name);
        s += "summary: " + std::to_string(sum.value("cohorts_completed", 0)) + "/" + std::to_string(sum.value("n_blueprints", 0)) +
             " cohorts, " + std::to_string(sum.at("failures").size()) + " failures\n";
    }
    for (const auto& dir : cohorts) {
        const fs::path mpath = dir / manifest_name;
        if (!fs::exists(mpath)) {
            s += dir.filename().string() + ": no manifest\n";
            continue;
        }
        const auto m = read_json_file(mpath);
        const auto& subjects = m.at("subjects");
        std::size_t clipped = 0, vanished = 0;
        for (const auto& sj : subjects)
            for (const auto& c : sj.at("clip_report")) {
                ++clipped;
                vanished += c.at("surviving_voxels").get<std::uint64_t>() == 0;
            }
        volumes += subjects.size();
        const auto& d = m.at("dims");
        s += dir.filename().string() + ": " + std::to_string(subjects.size()) + " subjects, K=" +
             std::to_string(m.at("blueprint").at("k").get<int>()) + ", container " +
             m.at("container").at("spec").at("kind").get<std::string>() + ", dims " + std::to_string(d[0].get<int>()) + "x" +
             std::to_string(d[1].get<int>()) + "x" + std::to_string(d[2].get<int>()) + ", clip entries " + std::to_string(clipped) +
             " (" + std::to_string(vanished) + " vanished), cohort seed " + std::to_string(m.at("cohort_seed").get<std::uint64_t>()) +
             "\n";
    }
    s += "volume count: " + std::to_string(volumes) + "\n";
    return s;
}

} // namespace synthforge::pipeline
