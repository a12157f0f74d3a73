// Copyright 2026 The qmri Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// On-disk formats.
//
// Tensor file (.qmrt), all integers little-endian:
//   offset 0   4 bytes  magic "QMRT"
//          4   u8       version (1)
//          5   u8       dtype: 0 = f32, 1 = f64, 2 = c64 (2 x f32), 3 = c128 (2 x f64)
//          6   u8       ndim (1..8)
//          7   u32[ndim] dims
//          ... payload, row-major, product(dims) elements, complex as (re, im)
//
// Checkpoint (.qmrc):
//   "QMRC", u8 version (1), u64 config hash, u32 text length + resolved config
//   text, i64 optimizer step, u32 entry count, then per entry: u32 name
//   length + name, u64 blob length + an embedded tensor file.

#include <algorithm>
#include <bit>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qmri/errors.hpp"
#include "qmri/image.hpp"

namespace qmri::io {

inline constexpr std::uint8_t kTensorVersion = 1;
inline constexpr std::uint8_t kCheckpointVersion = 1;

enum class DType : std::uint8_t { F32 = 0, F64 = 1, C64 = 2, C128 = 3 };

inline std::size_t dtype_size(DType t) {
    switch (t) {
        case DType::F32: return 4;
        case DType::F64: return 8;
        case DType::C64: return 8;
        case DType::C128: return 16;
    }
    throw FormatError("unknown dtype");
}

inline const char* to_string(DType t) {
    switch (t) {
        case DType::F32: return "f32";
        case DType::F64: return "f64";
        case DType::C64: return "c64";
        case DType::C128: return "c128";
    }
    return "?";
}

inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char ch : bytes) {
        h ^= static_cast<unsigned char>(ch);
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xF];
    return s;
}

// ---------------------------------------------------------------------------
// Little-endian byte streams.

class ByteWriter {
  public:
    template <typename U>
    void put(U value) {
        static_assert(std::is_trivially_copyable_v<U>);
        unsigned char raw[sizeof(U)];
        std::memcpy(raw, &value, sizeof(U));
        if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(U));
        bytes_.append(reinterpret_cast<const char*>(raw), sizeof(U));
    }
    void put_bytes(std::string_view s) { bytes_.append(s); }
    void put_string(std::string_view s) {
        put(static_cast<std::uint32_t>(s.size()));
        put_bytes(s);
    }
    std::string& bytes() { return bytes_; }

  private:
    std::string bytes_;
};

class ByteReader {
  public:
    explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

    template <typename U>
    U get() {
        need(sizeof(U));
        unsigned char raw[sizeof(U)];
        std::memcpy(raw, bytes_.data() + pos_, sizeof(U));
        if constexpr (std::endian::native == std::endian::big) std::reverse(raw, raw + sizeof(U));
        pos_ += sizeof(U);
        U value;
        std::memcpy(&value, raw, sizeof(U));
        return value;
    }
    std::string_view get_bytes(std::size_t n) {
        need(n);
        auto out = bytes_.substr(pos_, n);
        pos_ += n;
        return out;
    }
    std::string get_string() {
        const auto n = get<std::uint32_t>();
        return std::string(get_bytes(n));
    }
    bool done() const { return pos_ == bytes_.size(); }

  private:
    void need(std::size_t n) const {
        if (bytes_.size() - pos_ < n) throw FormatError("unexpected end of data");
    }
    std::string_view bytes_;
    std::size_t pos_ = 0;
};

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Writes through a temporary sibling and renames it into place.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw FormatError("cannot write " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        if (!out) throw FormatError("short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

// ---------------------------------------------------------------------------
// Tensor files.

struct TensorFile {
    DType dtype = DType::F64;
    std::vector<std::uint32_t> dims;
    /// Little-endian payload bytes.
    std::string payload;

    std::size_t element_count() const {
        std::size_t n = 1;
        for (const auto d : dims) n *= d;
        return n;
    }

    bool operator==(const TensorFile&) const = default;
};

namespace detail {

template <typename U>
std::string pack(const U* values, std::size_t count) {
    ByteWriter w;
    for (std::size_t i = 0; i < count; ++i) w.put(values[i]);
    return std::move(w.bytes());
}

template <typename U>
std::vector<U> unpack(std::string_view payload, std::size_t count) {
    ByteReader r(payload);
    std::vector<U> out(count);
    for (auto& v : out) v = r.get<U>();
    return out;
}

}  // namespace detail

inline std::string encode_tensor(const TensorFile& t) {
    if (t.dims.empty() || t.dims.size() > 8) throw FormatError("tensor rank must be 1..8");
    if (t.payload.size() != t.element_count() * dtype_size(t.dtype)) {
        throw FormatError("tensor payload length does not match dims");
    }
    ByteWriter w;
    w.put_bytes("QMRT");
    w.put(kTensorVersion);
    w.put(static_cast<std::uint8_t>(t.dtype));
    w.put(static_cast<std::uint8_t>(t.dims.size()));
    for (const auto d : t.dims) w.put(d);
    w.put_bytes(t.payload);
    return std::move(w.bytes());
}

inline TensorFile decode_tensor(std::string_view bytes) {
    ByteReader r(bytes);
    if (bytes.size() < 4 || r.get_bytes(4) != "QMRT") throw FormatError("bad tensor magic (expected QMRT)");
    const auto version = r.get<std::uint8_t>();
    if (version != kTensorVersion) throw FormatError("unsupported tensor version " + std::to_string(version));
    const auto code = r.get<std::uint8_t>();
    if (code > 3) throw FormatError("unknown tensor dtype code " + std::to_string(code));
    TensorFile t;
    t.dtype = static_cast<DType>(code);
    const auto ndim = r.get<std::uint8_t>();
    if (ndim == 0 || ndim > 8) throw FormatError("tensor rank must be 1..8");
    for (int i = 0; i < ndim; ++i) t.dims.push_back(r.get<std::uint32_t>());
    const std::size_t expected = t.element_count() * dtype_size(t.dtype);
    t.payload = std::string(r.get_bytes(expected));
    if (!r.done()) throw FormatError("trailing bytes after tensor payload");
    return t;
}

inline void write_tensor(const std::filesystem::path& path, const TensorFile& t) {
    write_file_atomic(path, encode_tensor(t));
}

inline TensorFile read_tensor(const std::filesystem::path& path) { return decode_tensor(read_file(path)); }

inline TensorFile make_f64(std::vector<std::uint32_t> dims, const std::vector<double>& values) {
    TensorFile t{DType::F64, std::move(dims), {}};
    if (values.size() != t.element_count()) throw InvalidArgument("value count does not match dims");
    t.payload = detail::pack(values.data(), values.size());
    return t;
}

inline TensorFile make_f32(std::vector<std::uint32_t> dims, const std::vector<float>& values) {
    TensorFile t{DType::F32, std::move(dims), {}};
    if (values.size() != t.element_count()) throw InvalidArgument("value count does not match dims");
    t.payload = detail::pack(values.data(), values.size());
    return t;
}

inline TensorFile make_c128(std::vector<std::uint32_t> dims, const std::vector<Complex>& values) {
    TensorFile t{DType::C128, std::move(dims), {}};
    if (values.size() != t.element_count()) throw InvalidArgument("value count does not match dims");
    ByteWriter w;
    for (const auto& v : values) {
        w.put(v.real());
        w.put(v.imag());
    }
    t.payload = std::move(w.bytes());
    return t;
}

/// Real payload widened to double (f32 or f64).
inline std::vector<double> real_values(const TensorFile& t) {
    const std::size_t n = t.element_count();
    if (t.dtype == DType::F64) return detail::unpack<double>(t.payload, n);
    if (t.dtype == DType::F32) {
        const auto f = detail::unpack<float>(t.payload, n);
        return {f.begin(), f.end()};
    }
    throw FormatError(std::string("expected a real tensor, got ") + to_string(t.dtype));
}

/// Complex payload widened to double (c64 or c128); real tensors get zero imaginary parts.
inline std::vector<Complex> complex_values(const TensorFile& t) {
    const std::size_t n = t.element_count();
    std::vector<Complex> out(n);
    if (t.dtype == DType::C128) {
        const auto raw = detail::unpack<double>(t.payload, 2 * n);
        for (std::size_t i = 0; i < n; ++i) out[i] = {raw[2 * i], raw[2 * i + 1]};
    } else if (t.dtype == DType::C64) {
        const auto raw = detail::unpack<float>(t.payload, 2 * n);
        for (std::size_t i = 0; i < n; ++i) out[i] = {raw[2 * i], raw[2 * i + 1]};
    } else {
        const auto re = real_values(t);
        for (std::size_t i = 0; i < n; ++i) out[i] = {re[i], 0.0};
    }
    return out;
}

inline TensorFile image_tensor(const Image& image) {
    return make_f64({static_cast<std::uint32_t>(image.height), static_cast<std::uint32_t>(image.width)},
                    image.values);
}

/// Accepts H x W, or 1 x H x W.
inline Image tensor_image(const TensorFile& t) {
    std::vector<std::uint32_t> d = t.dims;
    while (d.size() > 2 && d.front() == 1) d.erase(d.begin());
    if (d.size() != 2) throw FormatError("expected a 2-D real tensor");
    return Image(static_cast<int>(d[0]), static_cast<int>(d[1]), real_values(t));
}

/// Coil stack as C x H x W complex128.
inline TensorFile coil_tensor(const std::vector<ComplexImage>& coils) {
    if (coils.empty()) throw InvalidArgument("no coils to write");
    std::vector<Complex> all;
    for (const auto& c : coils) all.insert(all.end(), c.values.begin(), c.values.end());
    return make_c128({static_cast<std::uint32_t>(coils.size()), static_cast<std::uint32_t>(coils[0].height),
                      static_cast<std::uint32_t>(coils[0].width)},
                     all);
}

/// Accepts C x H x W or H x W (single coil).
inline std::vector<ComplexImage> tensor_coils(const TensorFile& t) {
    std::uint32_t c = 1, h, w;
    if (t.dims.size() == 3) {
        c = t.dims[0];
        h = t.dims[1];
        w = t.dims[2];
    } else if (t.dims.size() == 2) {
        h = t.dims[0];
        w = t.dims[1];
    } else {
        throw FormatError("expected a coils x H x W tensor");
    }
    const auto values = complex_values(t);
    std::vector<ComplexImage> out;
    const std::size_t plane = static_cast<std::size_t>(h) * w;
    for (std::uint32_t k = 0; k < c; ++k) {
        out.emplace_back(static_cast<int>(h), static_cast<int>(w),
                         std::vector<Complex>(values.begin() + static_cast<std::ptrdiff_t>(k * plane),
                                              values.begin() + static_cast<std::ptrdiff_t>((k + 1) * plane)));
    }
    return out;
}

// ---------------------------------------------------------------------------
// 8-bit binary PGM, scaled so `peak` maps to 255 (peak <= 0 uses the image maximum).

inline std::string encode_pgm(const Image& image, double peak = 0.0) {
    if (peak <= 0.0) {
        for (const double v : image.values) peak = std::max(peak, v);
    }
    std::string out = "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n255\n";
    for (const double v : image.values) {
        const double s = peak > 0.0 ? v / peak * 255.0 : 0.0;
        out.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(std::clamp(s, 0.0, 255.0)))));
    }
    return out;
}

inline void write_pgm(const std::filesystem::path& path, const Image& image, double peak = 0.0) {
    write_file_atomic(path, encode_pgm(image, peak));
}

// ---------------------------------------------------------------------------
// Plain key=value files. '#' starts a comment; blank lines are ignored.

using KeyValues = std::map<std::string, std::string>;

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline KeyValues parse_key_values(std::string_view text) {
    KeyValues out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw FormatError("line " + std::to_string(line_no) + ": expected key=value");
        }
        const std::string key = trim(std::string_view(stripped).substr(0, eq));
        if (key.empty()) throw FormatError("line " + std::to_string(line_no) + ": empty key");
        if (out.contains(key)) throw FormatError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
        out[key] = trim(std::string_view(stripped).substr(eq + 1));
    }
    return out;
}

inline std::string format_key_values(const KeyValues& kv) {
    std::string out;
    for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
    return out;
}

// ---------------------------------------------------------------------------
// Checkpoints.

struct Checkpoint {
    std::string config_text;
    std::uint64_t config_hash = 0;
    std::int64_t optimizer_step = 0;
    std::vector<std::pair<std::string, TensorFile>> entries;

    const TensorFile* find(std::string_view name) const {
        for (const auto& [n, t] : entries) {
            if (n == name) return &t;
        }
        return nullptr;
    }
};

inline std::string encode_checkpoint(const Checkpoint& ck) {
    ByteWriter w;
    w.put_bytes("QMRC");
    w.put(kCheckpointVersion);
    w.put(ck.config_hash);
    w.put_string(ck.config_text);
    w.put(ck.optimizer_step);
    w.put(static_cast<std::uint32_t>(ck.entries.size()));
    for (const auto& [name, tensor] : ck.entries) {
        w.put_string(name);
        const auto blob = encode_tensor(tensor);
        w.put(static_cast<std::uint64_t>(blob.size()));
        w.put_bytes(blob);
    }
    return std::move(w.bytes());
}

inline Checkpoint decode_checkpoint(std::string_view bytes) {
    ByteReader r(bytes);
    if (bytes.size() < 4 || r.get_bytes(4) != "QMRC") throw FormatError("bad checkpoint magic (expected QMRC)");
    if (r.get<std::uint8_t>() != kCheckpointVersion) throw FormatError("unsupported checkpoint version");
    Checkpoint ck;
    ck.config_hash = r.get<std::uint64_t>();
    ck.config_text = r.get_string();
    ck.optimizer_step = r.get<std::int64_t>();
    const auto count = r.get<std::uint32_t>();
    for (std::uint32_t i = 0; i < count; ++i) {
        auto name = r.get_string();
        const auto len = r.get<std::uint64_t>();
        ck.entries.emplace_back(std::move(name), decode_tensor(r.get_bytes(len)));
    }
    if (!r.done()) throw FormatError("trailing bytes after checkpoint");
    if (fnv1a64(ck.config_text) != ck.config_hash) throw FormatError("checkpoint config hash does not match its text");
    return ck;
}

inline void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
    write_file_atomic(path, encode_checkpoint(ck));
}

inline Checkpoint read_checkpoint(const std::filesystem::path& path) { return decode_checkpoint(read_file(path)); }

}  // namespace qmri::io
