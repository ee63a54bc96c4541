#pragma once

#include <cstdlib>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "lpfno/core/blob_io.hpp"
#include "lpfno/core/rng.hpp"
#include "lpfno/data/boundary.hpp"
#include "lpfno/data/poisson.hpp"

// Supervised pairs (boundary vector -> solution grid) plus the bookkeeping to
// regenerate them bit-for-bit from a seed. On disk a dataset is a directory:
// manifest.json describing everything structured, and one raw little-endian
// float64 blob per array (boundaries, solutions, sources, residuals).

namespace lpfno::data {

inline constexpr const char* kDatasetFormat = "lpfno-dataset/1";

struct FieldSample {
    BoundaryParams params;
    Split split = Split::ID;
    Tensor<double> boundary;  // [n]
    Tensor<double> solution;  // [n, n]
    double source = 0.0;
    double residual_norm = 0.0;

    bool operator==(const FieldSample&) const = default;
};

/// Solves one boundary sample and certifies the result. The residual is
/// recomputed from the stored field with the plain stencil, independent of the
/// solver path.
inline FieldSample make_field_sample(const BoundaryParams& p, Split split, double f,
                                     const GridSpec& grid, const SolveOptions& opts = {}) {
    FieldSample s;
    s.params = p;
    s.split = split;
    s.boundary = discretize(p, grid);
    s.solution = solve_dirichlet(s.boundary, f, grid, opts);
    s.source = f;
    s.residual_norm = relative_residual(s.solution, s.boundary, f, grid);
    if (!(s.residual_norm <= kResidualTol))
        throw NumericalError("solution residual " + std::to_string(s.residual_norm) +
                             " exceeds certificate tolerance");
    return s;
}

struct GenerationConfig {
    GridSpec grid;
    std::size_t count = 0;
    std::vector<BoundaryFamily> families;  // samples are assigned round-robin
    Split split = Split::ID;
    std::uint64_t seed = 0;
    double source = 0.0;

    void validate() const {
        grid.validate();
        if (count > 0 && families.empty())
            throw InvalidArgument("generation config needs at least one boundary family");
    }
};

struct Dataset {
    GridSpec grid;
    Split split = Split::ID;
    std::uint64_t seed = 0;
    std::vector<FieldSample> samples;

    bool operator==(const Dataset&) const = default;
};

namespace detail {

inline std::size_t worker_count() {
    if (const char* env = std::getenv("LPFNO_WORKERS")) {
        const long v = std::atol(env);
        if (v > 1) return static_cast<std::size_t>(v);
    }
    return 1;
}

}  // namespace detail

/// Parameter vectors are drawn sequentially from one PRNG stream, so the
/// dataset is a pure function of the config; the solves afterwards are
/// independent per sample and shard across LPFNO_WORKERS threads without
/// touching the draw order.
inline Dataset generate_dataset(const GenerationConfig& cfg) {
    cfg.validate();
    Dataset d;
    d.grid = cfg.grid;
    d.split = cfg.split;
    d.seed = cfg.seed;

    std::vector<BoundaryParams> params(cfg.count);
    Rng rng = Rng(cfg.seed).split(0x706172616d73ull);  // dedicated draw stream
    for (std::size_t s = 0; s < cfg.count; ++s) {
        const BoundaryFamily fam = cfg.families[s % cfg.families.size()];
        params[s] = sample_params(fam, cfg.split, rng);
    }

    d.samples.resize(cfg.count);
    const std::size_t workers = std::min(detail::worker_count(), std::max<std::size_t>(cfg.count, 1));
    auto solve_range = [&](std::size_t lo, std::size_t hi) {
        for (std::size_t s = lo; s < hi; ++s)
            d.samples[s] = make_field_sample(params[s], cfg.split, cfg.source, cfg.grid);
    };
    if (workers <= 1) {
        solve_range(0, cfg.count);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (cfg.count + workers - 1) / workers;
        for (std::size_t w = 0; w < workers; ++w) {
            const std::size_t lo = w * chunk;
            const std::size_t hi = std::min(cfg.count, lo + chunk);
            if (lo < hi) pool.emplace_back(solve_range, lo, hi);
        }
        for (auto& t : pool) t.join();
    }
    return d;
}

inline void save_dataset(const Dataset& d, const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    const std::size_t count = d.samples.size();
    const std::size_t n = d.grid.n;

    Tensor<double> boundaries(Shape{count, n});
    Tensor<double> solutions(Shape{count, n, n});
    Tensor<double> sources(Shape{count});
    Tensor<double> residuals(Shape{count});
    nlohmann::json sample_meta = nlohmann::json::array();
    for (std::size_t s = 0; s < count; ++s) {
        const FieldSample& fs_ = d.samples[s];
        if (fs_.boundary.shape() != Shape{n} || fs_.solution.shape() != Shape{n, n})
            throw InvalidArgument("sample " + std::to_string(s) + " does not match the grid");
        for (std::size_t j = 0; j < n; ++j) boundaries(s, j) = fs_.boundary(j);
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t i = 0; i < n; ++i) solutions(s, j, i) = fs_.solution(j, i);
        sources(s) = fs_.source;
        residuals(s) = fs_.residual_norm;
        nlohmann::json m = fs_.params.to_json();
        m["split"] = split_name(fs_.split);
        sample_meta.push_back(std::move(m));
    }

    nlohmann::json manifest{
        {"format", kDatasetFormat},
        {"grid", {{"n", n}, {"includes_boundary", d.grid.includes_boundary}}},
        {"split", split_name(d.split)},
        {"seed", d.seed},
        {"count", count},
        {"ranges", ranges_json(d.split)},
        {"samples", std::move(sample_meta)},
        {"blobs",
         {{"boundaries", {{"file", "boundaries.f64"}, {"shape", {count, n}}}},
          {"solutions", {{"file", "solutions.f64"}, {"shape", {count, n, n}}}},
          {"sources", {{"file", "sources.f64"}, {"shape", {count}}}},
          {"residuals", {{"file", "residuals.f64"}, {"shape", {count}}}}}},
    };
    io::write_tensor_f64(dir / "boundaries.f64", boundaries);
    io::write_tensor_f64(dir / "solutions.f64", solutions);
    io::write_tensor_f64(dir / "sources.f64", sources);
    io::write_tensor_f64(dir / "residuals.f64", residuals);
    io::write_json_file(dir / "manifest.json", manifest);
}

inline Dataset load_dataset(const std::filesystem::path& dir) {
    const nlohmann::json manifest = io::read_json_file(dir / "manifest.json");
    const std::string fmt = manifest.at("format").get<std::string>();
    if (fmt != kDatasetFormat)
        throw IoError(dir.string() + ": unsupported dataset format '" + fmt + "', expected '" +
                      kDatasetFormat + "'");

    Dataset d;
    d.grid.n = manifest.at("grid").at("n").get<std::size_t>();
    d.grid.includes_boundary = manifest.at("grid").value("includes_boundary", true);
    d.grid.validate();
    d.split = split_from_name(manifest.at("split").get<std::string>());
    d.seed = manifest.at("seed").get<std::uint64_t>();
    const std::size_t count = manifest.at("count").get<std::size_t>();
    const auto& sample_meta = manifest.at("samples");
    if (sample_meta.size() != count)
        throw IoError(dir.string() + ": manifest count " + std::to_string(count) + " but " +
                      std::to_string(sample_meta.size()) + " sample records");

    const std::size_t n = d.grid.n;
    auto blob_path = [&](const char* name) {
        return dir / manifest.at("blobs").at(name).at("file").get<std::string>();
    };
    auto boundaries = io::read_f64_blob(blob_path("boundaries"), count * n);
    auto solutions = io::read_f64_blob(blob_path("solutions"), count * n * n);
    auto sources = io::read_f64_blob(blob_path("sources"), count);
    auto residuals = io::read_f64_blob(blob_path("residuals"), count);

    d.samples.resize(count);
    for (std::size_t s = 0; s < count; ++s) {
        FieldSample& fs_ = d.samples[s];
        fs_.params = BoundaryParams::from_json(sample_meta[s]);
        fs_.split = split_from_name(sample_meta[s].at("split").get<std::string>());
        fs_.boundary = Tensor<double>(
            Shape{n}, std::vector<double>(boundaries.begin() + s * n, boundaries.begin() + (s + 1) * n));
        fs_.solution = Tensor<double>(
            Shape{n, n},
            std::vector<double>(solutions.begin() + s * n * n, solutions.begin() + (s + 1) * n * n));
        fs_.source = sources[s];
        fs_.residual_norm = residuals[s];
    }
    return d;
}

}  // namespace lpfno::data
