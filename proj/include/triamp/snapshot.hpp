// Copyright 2026 The triamp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

// Binary snapshot of named matrices.
//
// Layout (little-endian): "TRIAMPSN" magic, u32 version, u32 count, then per
// matrix: u32 name length, name bytes, u64 rows, u64 cols, u8 complex flag,
// rows*cols values in column-major order (complex values as re, im pairs).

#include "triamp/linalg.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace triamp {

static_assert(std::endian::native == std::endian::little, "snapshot I/O assumes a little-endian host");

class SnapshotError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct NamedMatrix {
    std::string name;
    CMatrix values;
    bool is_complex = true;

    static NamedMatrix real(std::string name, const RMatrix& m) { return {std::move(name), m.cast<Complex>(), false}; }
    static NamedMatrix complex(std::string name, const CMatrix& m) { return {std::move(name), m, true}; }
};

inline constexpr char kSnapshotMagic[8] = {'T', 'R', 'I', 'A', 'M', 'P', 'S', 'N'};
inline constexpr std::uint32_t kSnapshotVersion = 1;

namespace detail {

template <typename T>
void put(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
    T v{};
    if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) throw SnapshotError("truncated snapshot");
    return v;
}

}  // namespace detail

inline void write_snapshot(std::ostream& os, const std::vector<NamedMatrix>& mats) {
    os.write(kSnapshotMagic, sizeof(kSnapshotMagic));
    detail::put(os, kSnapshotVersion);
    detail::put(os, static_cast<std::uint32_t>(mats.size()));
    for (const auto& m : mats) {
        detail::put(os, static_cast<std::uint32_t>(m.name.size()));
        os.write(m.name.data(), static_cast<std::streamsize>(m.name.size()));
        detail::put(os, static_cast<std::uint64_t>(m.values.rows()));
        detail::put(os, static_cast<std::uint64_t>(m.values.cols()));
        detail::put(os, static_cast<std::uint8_t>(m.is_complex ? 1 : 0));
        for (Eigen::Index j = 0; j < m.values.cols(); ++j) {
            for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
                detail::put(os, m.values(i, j).real());
                if (m.is_complex) detail::put(os, m.values(i, j).imag());
            }
        }
    }
    if (!os) throw SnapshotError("failed writing snapshot");
}

inline std::vector<NamedMatrix> read_snapshot(std::istream& is) {
    char magic[8];
    if (!is.read(magic, sizeof(magic)) || std::memcmp(magic, kSnapshotMagic, sizeof(magic)) != 0) {
        throw SnapshotError("not a snapshot file (bad magic)");
    }
    const auto version = detail::get<std::uint32_t>(is);
    if (version != kSnapshotVersion) throw SnapshotError("unsupported snapshot version " + std::to_string(version));
    const auto count = detail::get<std::uint32_t>(is);
    std::vector<NamedMatrix> out;
    for (std::uint32_t k = 0; k < count; ++k) {
        NamedMatrix m;
        const auto len = detail::get<std::uint32_t>(is);
        m.name.resize(len);
        if (!is.read(m.name.data(), len)) throw SnapshotError("truncated snapshot");
        const auto rows = detail::get<std::uint64_t>(is);
        const auto cols = detail::get<std::uint64_t>(is);
        m.is_complex = detail::get<std::uint8_t>(is) != 0;
        m.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        for (Eigen::Index j = 0; j < m.values.cols(); ++j) {
            for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
                const double re = detail::get<double>(is);
                const double im = m.is_complex ? detail::get<double>(is) : 0.0;
                m.values(i, j) = {re, im};
            }
        }
        out.push_back(std::move(m));
    }
    return out;
}

inline void write_snapshot(const std::string& path, const std::vector<NamedMatrix>& mats) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw SnapshotError("cannot open " + path + " for writing");
    write_snapshot(os, mats);
}

inline std::vector<NamedMatrix> read_snapshot(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw SnapshotError("cannot open " + path);
    return read_snapshot(is);
}

}  // namespace triamp
