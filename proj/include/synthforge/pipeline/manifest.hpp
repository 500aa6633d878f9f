#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "synthforge/blueprint/blueprint.hpp"
#include "synthforge/cohort/cohort.hpp"
#include "synthforge/core/error.hpp"
#include "synthforge/intensity/intensity.hpp"
#include "synthforge/io/volume_io.hpp"

namespace synthforge::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

inline constexpr int manifest_schema_version = 1;
inline constexpr const char* manifest_name = "manifest.json";
inline constexpr const char* summary_name = "summary.json";

inline std::string cohort_dir_name(int b)
{
    char buf[32];
    std::snprintf(buf, sizeof(buf), "cohort_%04d", b);
    return buf;
}

inline std::string subject_file_name(int n, const char* role, const std::string& suffix)
{
    char buf[48];
    std::snprintf(buf, sizeof(buf), "subject_%04d_%s", n, role);
    return buf + suffix;
}

/// One stored volume: relative file name and SHA-256 of its bytes.
struct FileRecord {
    std::string file;
    std::string digest;

    friend bool operator==(const FileRecord&, const FileRecord&) = default;
};

inline void to_json(json& j, const FileRecord& f) { j = {{"file", f.file}, {"sha256", f.digest}}; }
inline void from_json(const json& j, FileRecord& f)
{
    f.file = j.at("file").get<std::string>();
    f.digest = j.at("sha256").get<std::string>();
}

inline FileRecord store_volume_file(const fs::path& dir, const std::string& file, const auto& vol, io::VolumeFormat format)
{
    io::write_volume(vol, dir / file, format);
    return {file, io::file_digest(dir / file)};
}

inline void write_json_file(const fs::path& path, const json& doc)
{
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    if (!out)
        throw IoError("cannot write " + path.string());
    out << doc.dump(2) << '\n';
    if (!out)
        throw IoError("write error in " + path.string());
}

inline json read_json_file(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw IoError("malformed JSON in " + path.string() + ": " + e.what());
    }
}

inline json rule_record_json(const RuleRecord& r)
{
    return {{"rule", r.rule},
            {"class_id", r.class_id},
            {"instance_index", r.instance_index},
            {"instance_subject_id", r.instance_subject_id},
            {"micro", r.micro},
            {"organ_voxels", r.organ_voxels},
            {"placed_voxels", r.placed_voxels},
            {"surviving_voxels", r.surviving_voxels}};
}

/// Everything recorded about one subject.
struct SubjectRecord {
    int subject = 0;
    std::uint64_t stream_seed = 0;
    std::uint64_t image_seed = 0;
    std::vector<RuleRecord> rules;
    ElasticParams final_elastic;
    AugmentationParams augmentation;
    std::vector<ClipEntry> clip_report;
    std::vector<int> warp_lost;
    GmmSpec gmm;
    std::vector<Label> expected_labels;
    std::map<std::string, FileRecord> files; ///< role -> stored volume
};

inline json subject_record_json(const SubjectRecord& s)
{
    json rules = json::array();
    for (const auto& r : s.rules)
        rules.push_back(rule_record_json(r));
    json files = json::object();
    for (const auto& [role, f] : s.files)
        files[role] = f;
    return {{"subject", s.subject},
            {"stream_seed", s.stream_seed},
            {"image_stream_seed", s.image_seed},
            {"rules", rules},
            {"final_elastic", {{"sigma", s.final_elastic.sigma}, {"alpha", s.final_elastic.alpha}}},
            {"augmentation", s.augmentation},
            {"clip_report", s.clip_report},
            {"warp_lost", s.warp_lost},
            {"gmm", s.gmm},
            {"expected_labels", s.expected_labels},
            {"files", files}};
}

} // namespace synthforge::pipeline
