#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"

#include "synthforge/core/components.hpp"
#include "synthforge/core/digest.hpp"
#include "synthforge/core/error.hpp"
#include "synthforge/core/filter.hpp"
#include "synthforge/core/rng.hpp"
#include "synthforge/core/volume.hpp"
#include "synthforge/io/volume_io.hpp"

namespace synthforge {

namespace fs = std::filesystem;

/// One organ mask a_{k,p}: tight-cropped binary mask plus where it came from.
struct ShapeInstance {
    int class_id = -1;       ///< dense id after pool build, -1 before
    int subject_id = 0;
    Label source_label = 0;  ///< label value in the source volume
    std::string source;      ///< key of the source volume the mask was cut from
    Dims source_dims;
    BBox bbox;               ///< in source-volume voxels, inclusive
    BinaryVolume mask;

    /// Bounding box as (x_lo, x_hi, y_lo, y_hi, z_lo, z_hi).
    [[nodiscard]] std::array<int, 6> bbox_array() const
    {
        return {bbox.lo[0], bbox.hi[0], bbox.lo[1], bbox.hi[1], bbox.lo[2], bbox.hi[2]};
    }

    [[nodiscard]] std::string mask_digest() const { return volume_digest(mask); }
};

/// Cut one instance per distinct nonzero label out of a label volume. Masks
/// are tight-cropped; class ids stay unassigned until build_pool.
inline std::vector<ShapeInstance> import_label_volume(const LabelVolume& vol, int subject_id, const std::string& source)
{
    std::map<Label, BBox> boxes;
    const Dims d = vol.dims();
    for (int z = 0; z < d.nz; ++z)
        for (int y = 0; y < d.ny; ++y)
            for (int x = 0; x < d.nx; ++x) {
                const Label v = vol(x, y, z);
                if (v == 0)
                    continue;
                auto [it, fresh] = boxes.try_emplace(v, BBox{{x, y, z}, {x, y, z}});
                if (!fresh) {
                    BBox& b = it->second;
                    b.lo = {std::min(b.lo[0], x), std::min(b.lo[1], y), std::min(b.lo[2], z)};
                    b.hi = {std::max(b.hi[0], x), std::max(b.hi[1], y), std::max(b.hi[2], z)};
                }
            }
    if (boxes.empty())
        throw Error("label volume '" + source + "' has no nonzero labels");

    std::vector<ShapeInstance> out;
    out.reserve(boxes.size());
    for (const auto& [label, box] : boxes) {
        ShapeInstance inst;
        inst.subject_id = subject_id;
        inst.source_label = label;
        inst.source = source;
        inst.source_dims = d;
        inst.bbox = box;
        inst.mask = BinaryVolume(box.extent());
        const Dims e = box.extent();
        for (int z = 0; z < e.nz; ++z)
            for (int y = 0; y < e.ny; ++y)
                for (int x = 0; x < e.nx; ++x)
                    inst.mask(x, y, z) = vol(x + box.lo[0], y + box.lo[1], z + box.lo[2]) == label;
        out.push_back(std::move(inst));
    }
    return out;
}

inline std::vector<ShapeInstance> import_label_volume(const fs::path& path, int subject_id)
{
    LabelVolume vol;
    try {
        vol = io::read_volume<Label>(path);
    } catch (const Error& e) {
        throw IoError("cannot import label volume " + path.string() + ": " + e.what());
    }
    return import_label_volume(vol, subject_id, path.filename().string());
}

/// Anatomical shape pool: instance lists A_k for dense class ids 0..C-1.
class ShapePool {
public:
    ShapePool() = default;

    [[nodiscard]] std::size_t class_count() const noexcept { return classes_.size(); }
    [[nodiscard]] std::size_t instance_count(int k) const { return instances(k).size(); }
    [[nodiscard]] std::size_t total_instances() const noexcept
    {
        std::size_t n = 0;
        for (const auto& c : classes_)
            n += c.size();
        return n;
    }
    [[nodiscard]] const std::vector<ShapeInstance>& instances(int k) const
    {
        if (k < 0 || static_cast<std::size_t>(k) >= classes_.size())
            throw Error("unknown pool class id " + std::to_string(k));
        return classes_[static_cast<std::size_t>(k)];
    }
    [[nodiscard]] Label source_label(int k) const
    {
        (void)instances(k);
        return source_labels_[static_cast<std::size_t>(k)];
    }
    [[nodiscard]] bool empty() const noexcept { return classes_.empty(); }

    /// Content hash over class table, instance metadata and mask digests.
    /// File names do not participate.
    [[nodiscard]] const std::string& fingerprint() const noexcept { return fingerprint_; }

    /// Dense class ids by ascending source label; instances within a class
    /// ordered by (subject id, source). The result does not depend on the
    /// order of `all`.
    static ShapePool build(std::vector<ShapeInstance> all)
    {
        if (all.empty())
            throw Error("cannot build a shape pool without instances");
        std::vector<Label> labels;
        for (const auto& inst : all) {
            if (count_nonzero(inst.mask) == 0)
                throw Error("shape instance from '" + inst.source + "' has an empty mask");
            labels.push_back(inst.source_label);
        }
        std::sort(labels.begin(), labels.end());
        labels.erase(std::unique(labels.begin(), labels.end()), labels.end());

        ShapePool pool;
        pool.source_labels_ = labels;
        pool.classes_.resize(labels.size());
        for (auto& inst : all) {
            const auto k = std::lower_bound(labels.begin(), labels.end(), inst.source_label) - labels.begin();
            inst.class_id = static_cast<int>(k);
            pool.classes_[static_cast<std::size_t>(k)].push_back(std::move(inst));
        }
        for (auto& cls : pool.classes_)
            std::sort(cls.begin(), cls.end(), [](const ShapeInstance& a, const ShapeInstance& b) {
                return std::tie(a.subject_id, a.source) < std::tie(b.subject_id, b.source);
            });
        nlohmann::json j = nlohmann::json::array();
        for (const auto& cls : pool.classes_)
            for (const auto& inst : cls)
                j.push_back({inst.class_id, inst.subject_id, inst.source_label, inst.bbox_array(), inst.mask_digest()});
        pool.fingerprint_ = sha256_hex(j.dump());
        return pool;
    }

private:
    std::vector<std::vector<ShapeInstance>> classes_;
    std::vector<Label> source_labels_;
    std::string fingerprint_;
};

/// Uniform draw over A_k.
inline const ShapeInstance& sample_instance(const ShapePool& pool, int class_id, Sampler& sampler)
{
    const auto& list = pool.instances(class_id);
    return list[sampler.index(list.size())];
}

inline const ShapeInstance& sample_instance(const ShapePool& pool, int class_id, const RngStream& rng)
{
    Sampler sampler(rng);
    return sample_instance(pool, class_id, sampler);
}

/// Knobs of the procedural fallback pool (grid and sigma in voxels).
struct FallbackPoolParams {
    int grid = 48;
    double sigma_min = 3.0;
    double sigma_max = 8.0;
    double percentile_min = 85.0;
    double percentile_max = 97.0;
    double shared_fraction = 0.3; ///< weight of the class base noise in each instance
};

namespace detail {

inline void fill_uniform_noise(Volume<float>& v, const RngStream& rng)
{
    Sampler s(rng);
    for (auto& x : v.storage())
        x = static_cast<float>(s.uniform(-1.0, 1.0));
}

} // namespace detail

/// Blob for one fallback instance on the full grid, before cropping:
/// smoothed mixed noise thresholded at its q-th percentile, largest
/// 6-connected component kept.
inline BinaryVolume fallback_blob(const Volume<float>& base_noise, double sigma, double q, double shared,
                                  const RngStream& rng)
{
    Volume<float> field(base_noise.dims());
    detail::fill_uniform_noise(field, rng);
    for (std::size_t i = 0; i < field.size(); ++i)
        field[i] = static_cast<float>(shared * base_noise[i] + (1.0 - shared) * field[i]);
    gaussian_blur(field, {sigma, sigma, sigma}, Border::zero);

    std::vector<float> sorted = field.storage();
    const auto rank = std::min(sorted.size() - 1, static_cast<std::size_t>(std::floor(q / 100.0 * static_cast<double>(sorted.size()))));
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(rank), sorted.end());
    const float threshold = sorted[rank];

    BinaryVolume mask(field.dims());
    for (std::size_t i = 0; i < field.size(); ++i)
        mask[i] = field[i] > threshold;
    if (count_nonzero(mask) == 0) // flat field; keep the peak voxel
        mask[static_cast<std::size_t>(std::max_element(field.storage().begin(), field.storage().end()) - field.storage().begin())] = 1;
    return largest_component(mask);
}

/// Procedural pool for running without real organ masks. Each class has a
/// base noise field and sigma; its instances mix that base with fresh noise
/// so that they read as one organ seen in different subjects.
inline ShapePool synth_fallback_pool(int n_classes, int n_instances_per_class, const RngStream& rng,
                                     const FallbackPoolParams& params = {})
{
    if (n_classes < 1 || n_instances_per_class < 1)
        throw ConfigError("fallback pool needs at least one class and one instance per class");
    if (params.grid < 4)
        throw ConfigError("fallback pool grid must be at least 4 voxels");
    const Dims grid = Dims::cube(params.grid);
    std::vector<ShapeInstance> all;
    for (int k = 0; k < n_classes; ++k) {
        const RngStream class_rng = rng.child(static_cast<std::uint64_t>(k));
        Sampler class_sampler(class_rng.child(0));
        const double sigma = class_sampler.uniform(params.sigma_min, params.sigma_max);
        Volume<float> base(grid);
        detail::fill_uniform_noise(base, class_rng.child(1));
        for (int p = 0; p < n_instances_per_class; ++p) {
            const RngStream inst_rng = class_rng.child(2).child(static_cast<std::uint64_t>(p));
            Sampler inst_sampler(inst_rng.child(0));
            const double q = inst_sampler.uniform(params.percentile_min, params.percentile_max);
            const BinaryVolume blob = fallback_blob(base, sigma, q, params.shared_fraction, inst_rng.child(1));

            ShapeInstance inst;
            inst.subject_id = p;
            inst.source_label = static_cast<Label>(k + 1);
            inst.source = "synth_c" + std::to_string(k) + "_s" + std::to_string(p);
            inst.source_dims = grid;
            inst.bbox = bounding_box(blob);
            inst.mask = crop(blob, inst.bbox);
            all.push_back(std::move(inst));
        }
    }
    return ShapePool::build(std::move(all));
}

/// Place each instance's mask back at its bbox inside a zero volume of the
/// source dims.
inline BinaryVolume uncrop(const ShapeInstance& inst)
{
    BinaryVolume out(inst.source_dims);
    const Dims e = inst.mask.dims();
    for (int z = 0; z < e.nz; ++z)
        for (int y = 0; y < e.ny; ++y)
            for (int x = 0; x < e.nx; ++x)
                if (inst.mask(x, y, z))
                    out(x + inst.bbox.lo[0], y + inst.bbox.lo[1], z + inst.bbox.lo[2]) = 1;
    return out;
}

inline constexpr int pool_schema_version = 1;

/// Write a pool directory: one label volume per source plus pool.json.
inline void save_pool(const ShapePool& pool, const fs::path& dir, io::VolumeFormat format = io::VolumeFormat::nifti)
{
    fs::create_directories(dir);
    std::map<std::string, std::vector<const ShapeInstance*>> by_source;
    for (std::size_t k = 0; k < pool.class_count(); ++k)
        for (const auto& inst : pool.instances(static_cast<int>(k)))
            by_source[inst.source].push_back(&inst);

    nlohmann::json instances = nlohmann::json::array();
    int file_index = 0;
    for (const auto& [source, list] : by_source) {
        const Dims sd = list.front()->source_dims;
        LabelVolume vol(sd);
        for (const ShapeInstance* inst : list) {
            if (inst->source_dims != sd)
                throw Error("instances of source '" + source + "' disagree on source dims");
            const Dims e = inst->mask.dims();
            for (int z = 0; z < e.nz; ++z)
                for (int y = 0; y < e.ny; ++y)
                    for (int x = 0; x < e.nx; ++x)
                        if (inst->mask(x, y, z))
                            vol(x + inst->bbox.lo[0], y + inst->bbox.lo[1], z + inst->bbox.lo[2]) = inst->source_label;
        }
        char name[32];
        std::snprintf(name, sizeof(name), "source_%04d", file_index++);
        const std::string file = name + io::volume_suffix(format, true);
        io::write_volume(vol, dir / file, format);
        for (const ShapeInstance* inst : list)
            instances.push_back({{"class_id", inst->class_id},
                                 {"subject_id", inst->subject_id},
                                 {"file", file},
                                 {"source", inst->source},
                                 {"label", inst->source_label},
                                 {"bbox", inst->bbox_array()},
                                 {"mask_digest", inst->mask_digest()}});
    }
    nlohmann::json classes = nlohmann::json::array();
    for (std::size_t k = 0; k < pool.class_count(); ++k)
        classes.push_back({{"class_id", k},
                           {"source_label", pool.source_label(static_cast<int>(k))},
                           {"instances", pool.instance_count(static_cast<int>(k))}});
    const nlohmann::json doc = {{"schema_version", pool_schema_version},
                                {"classes", classes},
                                {"instances", instances},
                                {"fingerprint", pool.fingerprint()}};
    std::ofstream out(dir / "pool.json", std::ios::trunc);
    if (!out)
        throw IoError("cannot write " + (dir / "pool.json").string());
    out << doc.dump(2) << '\n';
}

/// Load a pool directory written by save_pool (or by `pool import`).
inline ShapePool load_pool(const fs::path& dir)
{
    const fs::path index = dir / "pool.json";
    std::ifstream in(index);
    if (!in)
        throw IoError("pool index not found: " + index.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed pool index " + index.string() + ": " + e.what());
    }
    std::vector<ShapeInstance> all;
    std::map<std::string, LabelVolume> cache;
    try {
        if (doc.at("schema_version").get<int>() != pool_schema_version)
            throw IoError("unsupported pool schema version in " + index.string());
        for (const auto& e : doc.at("instances")) {
            const std::string file = e.at("file").get<std::string>();
            auto it = cache.find(file);
            if (it == cache.end())
                it = cache.emplace(file, io::read_volume<Label>(dir / file)).first;
            const LabelVolume& vol = it->second;
            const auto b = e.at("bbox").get<std::array<int, 6>>();
            ShapeInstance inst;
            inst.subject_id = e.at("subject_id").get<int>();
            inst.source_label = e.at("label").get<Label>();
            inst.source = e.value("source", file);
            inst.source_dims = vol.dims();
            inst.bbox = BBox{{b[0], b[2], b[4]}, {b[1], b[3], b[5]}};
            if (inst.bbox.empty() || !vol.dims().contains(b[0], b[2], b[4]) || !vol.dims().contains(b[1], b[3], b[5]))
                throw IoError("instance bbox outside source volume " + file);
            const Dims ext = inst.bbox.extent();
            inst.mask = BinaryVolume(ext);
            for (int z = 0; z < ext.nz; ++z)
                for (int y = 0; y < ext.ny; ++y)
                    for (int x = 0; x < ext.nx; ++x)
                        inst.mask(x, y, z) = vol(x + b[0], y + b[2], z + b[4]) == inst.source_label;
            if (e.contains("mask_digest") && e["mask_digest"].get<std::string>() != inst.mask_digest())
                throw IoError("mask digest mismatch for label " + std::to_string(inst.source_label) + " in " + file);
            all.push_back(std::move(inst));
        }
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed pool index " + index.string() + ": " + e.what());
    }
    return ShapePool::build(std::move(all));
}

} // namespace synthforge
