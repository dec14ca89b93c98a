#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "pdeconv/errors.hpp"
#include "pdeconv/image.hpp"

namespace pdeconv {
namespace detail {

inline std::vector<unsigned char> read_all_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path + ": cannot open for reading");
    in.seekg(0, std::ios::end);
    const auto len = in.tellg();
    in.seekg(0, std::ios::beg);
    std::vector<unsigned char> buf(static_cast<std::size_t>(len));
    if (len > 0) in.read(reinterpret_cast<char*>(buf.data()), len);
    if (!in) throw ParseError(path + ": short read");
    return buf;
}

/// Byte cursor over a loaded file; all failures report the byte offset.
struct Cursor {
    const std::vector<unsigned char>& buf;
    std::size_t pos = 0;
    const std::string& path;

    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError(path + ": " + what + " at byte " + std::to_string(pos));
    }
    bool eof() const { return pos >= buf.size(); }
    unsigned char peek() const {
        if (eof()) fail("unexpected end of file");
        return buf[pos];
    }
    void skip_pnm_space() {
        // whitespace and '#' comments, as in the PNM header grammar
        while (!eof()) {
            unsigned char c = buf[pos];
            if (c == '#') {
                while (!eof() && buf[pos] != '\n') ++pos;
            } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v') {
                ++pos;
            } else {
                break;
            }
        }
    }
    long parse_uint(const char* what) {
        skip_pnm_space();
        if (eof() || buf[pos] < '0' || buf[pos] > '9') fail(std::string("expected ") + what);
        long v = 0;
        while (!eof() && buf[pos] >= '0' && buf[pos] <= '9') {
            v = v * 10 + (buf[pos] - '0');
            if (v > 1'000'000'000L) fail(std::string(what) + " out of range");
            ++pos;
        }
        return v;
    }
    double parse_real(const char* what) {
        skip_pnm_space();
        std::size_t start = pos;
        while (!eof()) {
            unsigned char c = buf[pos];
            if ((c >= '0' && c <= '9') || c == '+' || c == '-' || c == '.' || c == 'e' || c == 'E')
                ++pos;
            else
                break;
        }
        if (pos == start) fail(std::string("expected ") + what);
        std::string tok(reinterpret_cast<const char*>(buf.data()) + start, pos - start);
        char* end = nullptr;
        double v = std::strtod(tok.c_str(), &end);
        if (end == tok.c_str()) fail(std::string("malformed ") + what);
        return v;
    }
    void require(std::size_t n, const char* what) {
        if (pos + n > buf.size()) fail(std::string("truncated ") + what);
    }
};

inline bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

inline ImageGrid read_pgm(const std::string& path) {
    const auto buf = read_all_bytes(path);
    Cursor cur{buf, 0, path};
    cur.require(2, "magic");
    const char m0 = static_cast<char>(buf[0]);
    const char m1 = static_cast<char>(buf[1]);
    if (m0 != 'P' || (m1 != '2' && m1 != '5')) cur.fail("not a P2/P5 PGM file");
    const bool binary = m1 == '5';
    cur.pos = 2;

    const long w = cur.parse_uint("width");
    const long h = cur.parse_uint("height");
    const long maxval = cur.parse_uint("maxval");
    if (w <= 0 || h <= 0) cur.fail("non-positive dimensions");
    if (maxval <= 0 || maxval > 65535) cur.fail("maxval outside 1..65535");

    std::vector<double> data(static_cast<std::size_t>(w) * h);
    const double scale = 1.0 / static_cast<double>(maxval);
    if (binary) {
        // single whitespace byte separates the header from the raster
        cur.require(1, "raster");
        ++cur.pos;
        const int bytes_per = maxval < 256 ? 1 : 2;
        cur.require(data.size() * bytes_per, "raster");
        for (std::size_t i = 0; i < data.size(); ++i) {
            long v;
            if (bytes_per == 1) {
                v = buf[cur.pos++];
            } else {
                v = (static_cast<long>(buf[cur.pos]) << 8) | buf[cur.pos + 1];
                cur.pos += 2;
            }
            if (v > maxval) cur.fail("sample exceeds maxval");
            data[i] = static_cast<double>(v) * scale;
        }
    } else {
        for (std::size_t i = 0; i < data.size(); ++i) {
            long v = cur.parse_uint("sample");
            if (v > maxval) cur.fail("sample exceeds maxval");
            data[i] = static_cast<double>(v) * scale;
        }
    }
    return ImageGrid(static_cast<int>(h), static_cast<int>(w), std::move(data));
}

inline void write_pgm(const std::string& path, const ImageGrid& img, int maxval = 65535) {
    if (maxval <= 0 || maxval > 65535) throw DomainError("write_pgm: maxval outside 1..65535");
    for (double v : img.pixels())
        if (v < -1e-9 || v > 1.0 + 1e-9)
            throw DomainError("write_pgm: pixel outside [0,1]; use PFM for unbounded data");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError(path + ": cannot open for writing");
    out << "P5\n" << img.width() << " " << img.height() << "\n" << maxval << "\n";
    const int bytes_per = maxval < 256 ? 1 : 2;
    for (double v : img.pixels()) {
        long q = std::lround(std::min(std::max(v, 0.0), 1.0) * maxval);
        if (bytes_per == 1) {
            unsigned char b = static_cast<unsigned char>(q);
            out.write(reinterpret_cast<const char*>(&b), 1);
        } else {
            unsigned char b[2] = {static_cast<unsigned char>(q >> 8), static_cast<unsigned char>(q & 0xff)};
            out.write(reinterpret_cast<const char*>(b), 2);
        }
    }
    if (!out) throw ParseError(path + ": write failed");
}

inline ImageGrid read_pfm(const std::string& path) {
    const auto buf = read_all_bytes(path);
    Cursor cur{buf, 0, path};
    cur.require(2, "magic");
    if (buf[0] != 'P' || buf[1] != 'f') {
        if (buf[0] == 'P' && buf[1] == 'F') cur.fail("color PFM not supported (grayscale 'Pf' only)");
        cur.fail("not a 'Pf' PFM file");
    }
    cur.pos = 2;
    const long w = cur.parse_uint("width");
    const long h = cur.parse_uint("height");
    const double scale = cur.parse_real("scale");
    if (w <= 0 || h <= 0) cur.fail("non-positive dimensions");
    if (scale == 0.0) cur.fail("zero scale");
    cur.require(1, "raster");
    ++cur.pos; // single whitespace after the scale line
    const bool little_endian = scale < 0.0;
    cur.require(static_cast<std::size_t>(w) * h * 4, "raster");

    // PFM rasters run bottom-to-top
    std::vector<double> data(static_cast<std::size_t>(w) * h);
    for (long row = h - 1; row >= 0; --row) {
        for (long col = 0; col < w; ++col) {
            std::uint32_t bits;
            if (little_endian) {
                bits = static_cast<std::uint32_t>(buf[cur.pos]) |
                       (static_cast<std::uint32_t>(buf[cur.pos + 1]) << 8) |
                       (static_cast<std::uint32_t>(buf[cur.pos + 2]) << 16) |
                       (static_cast<std::uint32_t>(buf[cur.pos + 3]) << 24);
            } else {
                bits = (static_cast<std::uint32_t>(buf[cur.pos]) << 24) |
                       (static_cast<std::uint32_t>(buf[cur.pos + 1]) << 16) |
                       (static_cast<std::uint32_t>(buf[cur.pos + 2]) << 8) |
                       static_cast<std::uint32_t>(buf[cur.pos + 3]);
            }
            cur.pos += 4;
            const float f = std::bit_cast<float>(bits);
            if (!std::isfinite(f)) cur.fail("non-finite sample");
            data[static_cast<std::size_t>(row) * w + col] = static_cast<double>(f);
        }
    }
    return ImageGrid(static_cast<int>(h), static_cast<int>(w), std::move(data));
}

inline void write_pfm(const std::string& path, const ImageGrid& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError(path + ": cannot open for writing");
    out << "Pf\n" << img.width() << " " << img.height() << "\n-1.0\n";
    for (int row = img.height() - 1; row >= 0; --row) {
        for (int col = 0; col < img.width(); ++col) {
            const float f = static_cast<float>(img(row, col));
            const std::uint32_t bits = std::bit_cast<std::uint32_t>(f);
            unsigned char b[4] = {static_cast<unsigned char>(bits & 0xff),
                                  static_cast<unsigned char>((bits >> 8) & 0xff),
                                  static_cast<unsigned char>((bits >> 16) & 0xff),
                                  static_cast<unsigned char>((bits >> 24) & 0xff)};
            out.write(reinterpret_cast<const char*>(b), 4);
        }
    }
    if (!out) throw ParseError(path + ": write failed");
}

} // namespace detail

/// Reads a PGM (P2/P5, scaled to [0,1]) or PFM (32-bit float, native scale)
/// image, dispatching on the file extension.
inline ImageGrid read_image(const std::string& path) {
    if (detail::ends_with(path, ".pgm") || detail::ends_with(path, ".PGM"))
        return detail::read_pgm(path);
    if (detail::ends_with(path, ".pfm") || detail::ends_with(path, ".PFM"))
        return detail::read_pfm(path);
    throw ParseError(path + ": unsupported image extension (expected .pgm or .pfm)");
}

inline void write_image(const std::string& path, const ImageGrid& img) {
    if (detail::ends_with(path, ".pgm") || detail::ends_with(path, ".PGM")) {
        detail::write_pgm(path, img);
        return;
    }
    if (detail::ends_with(path, ".pfm") || detail::ends_with(path, ".PFM")) {
        detail::write_pfm(path, img);
        return;
    }
    throw ParseError(path + ": unsupported image extension (expected .pgm or .pfm)");
}

/// Kernel text format: first line the odd size k, then k lines of k
/// space-separated decimals. Mass is renormalized on read so files written
/// with limited precision still satisfy the unit-sum invariant.
inline BlurKernel read_kernel(const std::string& path) {
    const auto buf = detail::read_all_bytes(path);
    detail::Cursor cur{buf, 0, path};
    const long k = cur.parse_uint("kernel size");
    if (k <= 0 || k % 2 == 0) cur.fail("kernel size must be odd and positive");
    std::vector<double> taps(static_cast<std::size_t>(k) * k);
    for (auto& t : taps) t = cur.parse_real("kernel tap");
    return BlurKernel::normalized(static_cast<int>(k), std::move(taps));
}

inline void write_kernel(const std::string& path, const BlurKernel& kernel) {
    std::ofstream out(path);
    if (!out) throw ParseError(path + ": cannot open for writing");
    out << kernel.size() << "\n";
    char buf[64];
    for (int i = 0; i < kernel.size(); ++i) {
        for (int j = 0; j < kernel.size(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", kernel(i, j));
            out << buf << (j + 1 == kernel.size() ? "" : " ");
        }
        out << "\n";
    }
    if (!out) throw ParseError(path + ": write failed");
}

} // namespace pdeconv
