#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>

#include "fracmg/assembly.hpp"
#include "fracmg/errors.hpp"

namespace fracmg {

// Generator cache file:
//   magic "FMG1", u32 format version, u32 level, u32 n_k, u32 l_k,
//   f64 alpha, f64 c, u32 atom count, (f64 angle, f64 weight) per atom,
//   f64 values of the invariant length. All little-endian.
inline constexpr std::uint32_t kCacheFormatVersion = 1;

inline std::filesystem::path cache_path(const std::filesystem::path& dir,
                                        const GeneratorVector& gen) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "gen_k%d_%016llx.bin", gen.level,
                  static_cast<unsigned long long>(gen.digest));
    return dir / buf;
}

namespace detail {

template <class T> void put(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <class T> T get(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!is) throw integrity_error("generator cache: truncated file");
    return v;
}

} // namespace detail

inline void save_generator(const std::filesystem::path& path, const GeneratorVector& gen) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw integrity_error("generator cache: cannot open for writing: " + path.string());
    os.write("FMG1", 4);
    detail::put(os, kCacheFormatVersion);
    detail::put(os, std::uint32_t(gen.level));
    detail::put(os, std::uint32_t(gen.nk));
    detail::put(os, std::uint32_t(gen.lk));
    detail::put(os, gen.alpha);
    detail::put(os, gen.c);
    detail::put(os, std::uint32_t(gen.measure.atoms.size()));
    for (const auto& a : gen.measure.atoms) {
        detail::put(os, a.theta);
        detail::put(os, a.weight);
    }
    os.write(reinterpret_cast<const char*>(gen.values.data()),
             std::streamsize(gen.values.size() * sizeof(double)));
    if (!os) throw integrity_error("generator cache: write failed: " + path.string());
}

/// Load and verify a cached generator. Header fields that do not match the
/// request are a cache miss (nullopt); a malformed file is an integrity error.
inline std::optional<GeneratorVector> load_generator(const std::filesystem::path& path,
                                                     const GeneratorVector& expected_header) {
    std::ifstream is(path, std::ios::binary);
    if (!is) return std::nullopt;
    char magic[4];
    is.read(magic, 4);
    if (!is || std::string_view(magic, 4) != "FMG1")
        throw integrity_error("generator cache: bad magic: " + path.string());
    if (detail::get<std::uint32_t>(is) != kCacheFormatVersion)
        throw integrity_error("generator cache: unsupported format version: " + path.string());

    GeneratorVector gen = expected_header;
    std::uint32_t level = detail::get<std::uint32_t>(is);
    std::uint32_t nk = detail::get<std::uint32_t>(is);
    std::uint32_t lk = detail::get<std::uint32_t>(is);
    double alpha = detail::get<double>(is);
    double c = detail::get<double>(is);
    std::uint32_t natoms = detail::get<std::uint32_t>(is);
    if (int(level) != expected_header.level || int(nk) != expected_header.nk ||
        int(lk) != expected_header.lk || alpha != expected_header.alpha ||
        c != expected_header.c || natoms != expected_header.measure.atoms.size())
        return std::nullopt; // digest/header mismatch: recompute
    for (std::uint32_t i = 0; i < natoms; ++i) {
        double th = detail::get<double>(is);
        double w = detail::get<double>(is);
        const auto& a = expected_header.measure.atoms[i];
        if (th != a.theta || w != a.weight) return std::nullopt;
    }
    std::int64_t len = GeneratorVector::length(int(nk), int(lk));
    gen.values.resize(std::size_t(len));
    is.read(reinterpret_cast<char*>(gen.values.data()), std::streamsize(len * sizeof(double)));
    if (!is) throw integrity_error("generator cache: truncated values: " + path.string());
    return gen;
}

/// Write-then-read helper; the result is bitwise identical to the input.
inline GeneratorVector cache_roundtrip(const GeneratorVector& gen,
                                       const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    auto path = cache_path(dir, gen);
    save_generator(path, gen);
    auto back = load_generator(path, gen);
    if (!back) throw integrity_error("generator cache: roundtrip readback mismatched header");
    return *back;
}

/// Fetch from cache or build and populate it.
inline GeneratorVector cached_generator(const MeshLevel& level, const DirectionalMeasure& measure,
                                        const KernelParams& params,
                                        const std::filesystem::path& dir) {
    GeneratorVector header;
    header.level = level.k;
    header.nk = level.nk;
    header.lk = level.lk;
    header.alpha = params.alpha;
    header.c = params.c;
    header.measure = measure;
    header.domain = level.domain;
    header.digest = params_digest(params.alpha, params.c, measure, level.domain);

    std::filesystem::create_directories(dir);
    auto path = cache_path(dir, header);
    try {
        if (auto gen = load_generator(path, header)) return *gen;
    } catch (const integrity_error&) {
        // corrupt cache entry: rebuild and overwrite
    }
    GeneratorVector gen = build_generator(level, measure, params);
    save_generator(path, gen);
    return gen;
}

} // namespace fracmg
