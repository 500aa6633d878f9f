#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "synthforge/blueprint/blueprint.hpp"
#include "synthforge/cohort/cohort.hpp"
#include "synthforge/core/error.hpp"
#include "synthforge/intensity/intensity.hpp"
#include "synthforge/io/volume_io.hpp"
#include "synthforge/pipeline/manifest.hpp"

namespace synthforge::pipeline {

struct CheckResult {
    std::string cohort;
    std::string check; ///< digest, gmm_shared, label_set, containment, intensity_stats
    bool ok = true;
    std::string message;
};

struct ValidationReport {
    std::vector<CheckResult> checks;
    std::vector<std::string> notices;

    [[nodiscard]] bool ok() const noexcept
    {
        return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.ok; });
    }
    [[nodiscard]] std::vector<CheckResult> failures() const
    {
        std::vector<CheckResult> out;
        for (const auto& c : checks)
            if (!c.ok)
                out.push_back(c);
        return out;
    }
};

/// Sample statistics of one label region.
struct LabelStats {
    Label label = 0;
    std::size_t n = 0;
    double mean = 0.0;
    double variance = 0.0;
};

inline std::vector<LabelStats> label_statistics(const LabelVolume& labels, const IntensityVolume& img)
{
    if (labels.dims() != img.dims())
        throw Error("label and intensity volumes differ in dims");
    std::vector<double> sum(65536, 0.0), sum2(65536, 0.0);
    std::vector<std::size_t> cnt(65536, 0);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const Label l = labels[i];
        const double v = img[i];
        ++cnt[l];
        sum[l] += v;
        sum2[l] += v * v;
    }
    std::vector<LabelStats> out;
    for (std::size_t l = 1; l < cnt.size(); ++l) {
        if (cnt[l] == 0)
            continue;
        LabelStats s;
        s.label = static_cast<Label>(l);
        s.n = cnt[l];
        s.mean = sum[l] / static_cast<double>(s.n);
        // single pass in double is ample for values in [0, 255]
        s.variance = s.n > 1 ? (sum2[l] - s.n * s.mean * s.mean) / static_cast<double>(s.n - 1) : 0.0;
        out.push_back(s);
    }
    return out;
}

inline constexpr std::size_t stats_min_region = 1000;

/// Empty string when the region agrees with its component: mean within
/// 4 sigma/sqrt(n), variance within 20%, both widened by the float32 step at
/// the mean so zero-variance components pass.
inline std::string check_component(const LabelStats& s, const GaussianComponent& c)
{
    const double ulp = std::nextafter(static_cast<float>(std::max(1.0, std::abs(c.mean))), INFINITY) -
                       static_cast<float>(std::max(1.0, std::abs(c.mean)));
    const double sd = std::sqrt(c.variance);
    const double mean_tol = 4.0 * sd / std::sqrt(static_cast<double>(s.n)) + ulp;
    const double var_tol = 0.2 * c.variance + ulp * ulp;
    std::string msg;
    if (std::abs(s.mean - c.mean) > mean_tol)
        msg += "mean " + std::to_string(s.mean) + " vs " + std::to_string(c.mean) + " (tol " + std::to_string(mean_tol) + ")";
    if (std::abs(s.variance - c.variance) > var_tol) {
        if (!msg.empty())
            msg += "; ";
        msg += "variance " + std::to_string(s.variance) + " vs " + std::to_string(c.variance);
    }
    return msg;
}

namespace detail {

inline std::vector<Label> labels_from_blueprint(const Blueprint& bp, const json& subject)
{
    std::set<int> gone;
    for (const auto& c : subject.at("clip_report"))
        if (c.at("surviving_voxels").get<std::size_t>() == 0)
            gone.insert(c.at("rule").get<int>());
    for (const auto& r : subject.at("warp_lost"))
        gone.insert(r.get<int>());
    std::vector<Label> out;
    for (const auto& rule : bp.rules)
        if (!gone.count(rule.index))
            out.push_back(rule.label());
    return out;
}

inline std::string join_labels(const std::vector<Label>& v)
{
    std::string s;
    for (std::size_t i = 0; i < v.size() && i < 12; ++i)
        s += (i ? "," : "") + std::to_string(v[i]);
    if (v.size() > 12)
        s += ",...";
    return "{" + s + "}";
}

} // namespace detail

inline void validate_cohort(const fs::path& dir, ValidationReport& report)
{
    const std::string cname = dir.filename().string();
    auto add = [&](const std::string& check, bool ok, const std::string& msg) { report.checks.push_back({cname, check, ok, msg}); };

    const json m = read_json_file(dir / manifest_name);
    Blueprint bp;
    GmmSpec gmm;
    try {
        if (m.at("schema_version").get<int>() != manifest_schema_version)
            throw IoError("unsupported manifest schema version");
        bp = m.at("blueprint").get<Blueprint>();
        gmm = m.at("gmm").get<GmmSpec>();
    } catch (const json::exception& e) {
        throw IoError("malformed manifest in " + cname + ": " + e.what());
    }

    // digests first; later checks only read files that verified
    std::set<std::string> good;
    auto check_file = [&](const json& rec) {
        const std::string file = rec.at("file").get<std::string>();
        const fs::path p = dir / file;
        if (!fs::exists(p)) {
            add("digest", false, file + ": missing");
            return;
        }
        const std::string d = io::file_digest(p);
        const bool ok = d == rec.at("sha256").get<std::string>();
        add("digest", ok, ok ? file : file + ": digest mismatch");
        if (ok)
            good.insert(file);
    };
    check_file(m.at("container").at("file"));
    for (const auto& s : m.at("subjects"))
        for (const auto& [role, rec] : s.at("files").items())
            check_file(rec);

    // one shared GMM per cohort
    bool shared = true;
    std::string bad;
    for (const auto& s : m.at("subjects"))
        if (s.at("gmm").get<GmmSpec>() != gmm) {
            shared = false;
            bad += (bad.empty() ? "" : ",") + std::to_string(s.at("subject").get<int>());
        }
    add("gmm_shared", shared, shared ? "all subjects share the cohort GMM" : "subjects with a different GMM: " + bad);
    if (gmm.size() != static_cast<std::size_t>(bp.k()) + 1)
        add("gmm_shared", false, "GMM has " + std::to_string(gmm.size()) + " components for K=" + std::to_string(bp.k()));

    const std::string container_file = m.at("container").at("file").at("file").get<std::string>();
    std::optional<LabelVolume> container;
    if (good.count(container_file))
        container = io::read_volume<Label>(dir / container_file);

    bool any_prewarp = false, any_preaug = false;
    for (const auto& s : m.at("subjects")) {
        const int n = s.at("subject").get<int>();
        const std::string tag = "subject " + std::to_string(n);
        const auto& files = s.at("files");
        auto file_of = [&](const char* role) -> std::string {
            return files.contains(role) ? files.at(role).at("file").get<std::string>() : std::string();
        };

        const std::vector<Label> expected = detail::labels_from_blueprint(bp, s);
        const std::string lf = file_of("labels");
        if (good.count(lf)) {
            const LabelVolume labels = io::read_volume<Label>(dir / lf);
            const std::vector<Label> present = organ_labels_present(labels);
            const bool ok = present == expected;
            add("label_set", ok,
                tag + (ok ? ": " + std::to_string(present.size()) + " organ labels"
                          : ": present " + detail::join_labels(present) + " expected " + detail::join_labels(expected)));

            const std::string pf = file_of("preaug");
            if (!pf.empty()) {
                any_preaug = true;
                if (good.count(pf)) {
                    const IntensityVolume pre = io::read_volume<float>(dir / pf);
                    std::string msg;
                    std::size_t tested = 0;
                    for (const auto& st : label_statistics(labels, pre)) {
                        if (st.n < stats_min_region)
                            continue;
                        ++tested;
                        if (!gmm.has(st.label)) {
                            msg += " label " + std::to_string(st.label) + ": no component;";
                            continue;
                        }
                        const std::string e = check_component(st, gmm.at(st.label));
                        if (!e.empty())
                            msg += " label " + std::to_string(st.label) + ": " + e + ";";
                    }
                    add("intensity_stats", msg.empty(),
                        tag + (msg.empty() ? ": " + std::to_string(tested) + " regions within bounds" : ":" + msg));
                }
            }
        }

        const std::string wf = file_of("prewarp");
        if (!wf.empty()) {
            any_prewarp = true;
            if (good.count(wf) && container) {
                const LabelVolume pre = io::read_volume<Label>(dir / wf);
                std::size_t outside = 0, wrong_bg = 0;
                std::vector<std::size_t> hist(static_cast<std::size_t>(bp.k()) + 2, 0);
                for (std::size_t i = 0; i < pre.size(); ++i) {
                    const Label v = pre[i];
                    if (v >= 2 && !(*container)[i])
                        ++outside;
                    if ((v == 0) != ((*container)[i] == 0))
                        ++wrong_bg;
                    if (v < hist.size())
                        ++hist[v];
                }
                bool counts_ok = true;
                for (const auto& r : s.at("rules"))
                    counts_ok = counts_ok && hist[r.at("rule").get<std::size_t>() + 2] == r.at("surviving_voxels").get<std::size_t>();
                const bool ok = outside == 0 && wrong_bg == 0 && counts_ok;
                add("containment", ok,
                    tag + (ok ? ": organs inside container"
                              : ": " + std::to_string(outside) + " organ voxels outside container, " + std::to_string(wrong_bg) +
                                    " container/background mismatches" + (counts_ok ? "" : ", clip report disagrees with canvas")));
            }
        }
    }
    if (!any_prewarp)
        report.notices.push_back(cname + ": no pre-warp canvases stored, containment check skipped");
    if (!any_preaug)
        report.notices.push_back(cname + ": no pre-augmentation renders stored, intensity statistics skipped");
}

/// Check every cohort_* directory under `root`. Throws IoError when there
/// is nothing to validate or a manifest is unreadable.
inline ValidationReport validate_dataset(const fs::path& root)
{
    if (!fs::is_directory(root))
        throw IoError("not a directory: " + root.string());
    std::vector<fs::path> cohorts;
    for (const auto& e : fs::directory_iterator(root))
        if (e.is_directory() && e.path().filename().string().starts_with("cohort_"))
            cohorts.push_back(e.path());
    std::sort(cohorts.begin(), cohorts.end());
    if (cohorts.empty() && fs::exists(root / manifest_name))
        cohorts.push_back(root);
    if (cohorts.empty())
        throw IoError("no cohort manifests found under " + root.string());

    ValidationReport report;
    for (const auto& dir : cohorts) {
        if (!fs::exists(dir / manifest_name))
            throw IoError("missing manifest: " + (dir / manifest_name).string());
        validate_cohort(dir, report);
    }
    return report;
}

} // namespace synthforge::pipeline
