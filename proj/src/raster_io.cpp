#include "pdeconv/raster_io.hpp"

#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pdeconv/errors.hpp"

namespace pdeconv {

namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::string sidecar_path(const std::string& path) { return path + ".json"; }

// Next whitespace-delimited PGM header token, skipping '#' comments.
std::string header_token(std::istream& in, const std::string& path) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {}
            continue;
        }
        if (std::isspace(c)) {
            if (!tok.empty()) return tok;
            continue;
        }
        tok.push_back(static_cast<char>(c));
    }
    if (tok.empty()) throw Error(path + ": truncated PGM header");
    return tok;
}

long parse_positive(const std::string& tok, const std::string& what, const std::string& path) {
    std::size_t used = 0;
    long v = 0;
    try {
        v = std::stol(tok, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != tok.size() || v < 1) throw Error(path + ": invalid PGM " + what + " '" + tok + "'");
    return v;
}

Image read_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    const std::string magic = header_token(in, path);
    if (magic != "P2" && magic != "P5") throw Error(path + ": not a P2/P5 PGM file");
    const long w = parse_positive(header_token(in, path), "width", path);
    const long h = parse_positive(header_token(in, path), "height", path);
    const long maxval = parse_positive(header_token(in, path), "maxval", path);
    if (maxval > 65535) throw Error(path + ": PGM maxval " + std::to_string(maxval) + " exceeds 65535");
    Image img(static_cast<int>(w), static_cast<int>(h));
    if (magic == "P2") {
        for (std::size_t i = 0; i < img.size(); ++i) {
            long v;
            if (!(in >> v)) throw Error(path + ": truncated PGM data");
            if (v < 0 || v > maxval) throw Error(path + ": PGM sample out of range");
            img[i] = static_cast<double>(v);
        }
        return img;
    }
    const std::size_t bytes = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> buf(img.size() * bytes);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() != static_cast<std::streamsize>(buf.size())) throw Error(path + ": truncated PGM data");
    for (std::size_t i = 0; i < img.size(); ++i) {
        const unsigned v = bytes == 2 ? (buf[2 * i] << 8) | buf[2 * i + 1] : buf[i];
        if (v > static_cast<unsigned>(maxval)) throw Error(path + ": PGM sample out of range");
        img[i] = v;
    }
    return img;
}

void write_pgm(const std::string& path, const Image& img, bool ascii) {
    std::vector<unsigned> q(img.size());
    unsigned maxval = 1;
    for (std::size_t i = 0; i < img.size(); ++i) {
        const double v = std::nearbyint(img[i]);
        if (!(v >= 0.0 && v <= 65535.0))
            throw InvalidArgument(path + ": value " + std::to_string(img[i]) +
                                  " cannot be stored in PGM (range 0..65535); use .f64");
        q[i] = static_cast<unsigned>(v);
        maxval = std::max(maxval, q[i]);
    }
    maxval = maxval > 255 ? 65535 : 255;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << (ascii ? "P2" : "P5") << '\n' << img.width() << ' ' << img.height() << '\n' << maxval << '\n';
    if (ascii) {
        for (int y = 0; y < img.height(); ++y) {
            for (int x = 0; x < img.width(); ++x)
                out << (x ? " " : "") << q[static_cast<std::size_t>(y) * img.width() + x];
            out << '\n';
        }
    } else {
        for (unsigned v : q) {
            if (maxval > 255) out.put(static_cast<char>(v >> 8));
            out.put(static_cast<char>(v & 0xff));
        }
    }
    if (!out) throw Error("write failed: " + path);
}

Image read_f64(const std::string& path) {
    std::ifstream meta(sidecar_path(path));
    if (!meta) throw Error(path + ": missing sidecar " + sidecar_path(path));
    nlohmann::json j;
    try {
        meta >> j;
    } catch (const std::exception& e) {
        throw Error(sidecar_path(path) + ": " + e.what());
    }
    if (!j.contains("width") || !j.contains("height"))
        throw Error(sidecar_path(path) + ": needs width and height");
    if (j.value("dtype", std::string("f64")) != "f64")
        throw Error(sidecar_path(path) + ": unsupported dtype");
    const int w = j["width"].get<int>(), h = j["height"].get<int>();
    if (w < 1 || h < 1) throw Error(sidecar_path(path) + ": invalid dimensions");
    Image img(w, h);
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in) throw Error("cannot open " + path);
    const auto len = static_cast<std::size_t>(in.tellg());
    if (len != 8 * img.size())
        throw Error(path + ": expected " + std::to_string(8 * img.size()) + " bytes, found " +
                    std::to_string(len));
    in.seekg(0);
    std::vector<unsigned char> buf(len);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(len));
    for (std::size_t i = 0; i < img.size(); ++i) {
        std::uint64_t bits = 0;
        for (int b = 7; b >= 0; --b) bits = (bits << 8) | buf[8 * i + static_cast<std::size_t>(b)];
        img[i] = std::bit_cast<double>(bits);
    }
    return img;
}

void write_f64(const std::string& path, const Image& img) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    for (double v : img.data()) {
        auto bits = std::bit_cast<std::uint64_t>(v);
        for (int b = 0; b < 8; ++b) out.put(static_cast<char>((bits >> (8 * b)) & 0xff));
    }
    if (!out) throw Error("write failed: " + path);
    std::ofstream meta(sidecar_path(path));
    meta << nlohmann::json{{"width", img.width()}, {"height", img.height()}, {"dtype", "f64"}}.dump()
         << '\n';
    if (!meta) throw Error("write failed: " + sidecar_path(path));
}

} // namespace

RasterFormat format_from_path(const std::string& path) {
    if (ends_with(path, ".pgm")) return RasterFormat::pgm_binary;
    if (ends_with(path, ".f64") || ends_with(path, ".raw")) return RasterFormat::f64_raw;
    throw InvalidArgument("unknown raster extension for '" + path + "' (use .pgm or .f64)");
}

Image read_raster(const std::string& path) {
    return format_from_path(path) == RasterFormat::f64_raw ? read_f64(path) : read_pgm(path);
}

void write_raster(const std::string& path, const Image& img, RasterFormat format) {
    if (img.empty()) throw InvalidArgument("cannot write an empty image");
    switch (format) {
    case RasterFormat::pgm_ascii: write_pgm(path, img, true); break;
    case RasterFormat::pgm_binary: write_pgm(path, img, false); break;
    case RasterFormat::f64_raw: write_f64(path, img); break;
    }
}

void write_raster(const std::string& path, const Image& img) {
    write_raster(path, img, format_from_path(path));
}

} // namespace pdeconv
