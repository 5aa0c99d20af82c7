#include "pdeconv/dictionary.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <random>

#include "fft.hpp"
#include "pdeconv/errors.hpp"
#include "pdeconv/vector_ops.hpp"

namespace pdeconv {

FrameDictionary::FrameDictionary(std::size_t image_dim, std::size_t coeff_dim,
                                 LinearOperator::Map synthesis, LinearOperator::Map analysis,
                                 FrameBounds bounds, bool tight, std::string name)
    : synthesis_op_(coeff_dim, image_dim, std::move(synthesis), std::move(analysis),
                    std::sqrt(bounds.upper), std::move(name)),
      bounds_(bounds), tight_(tight) {
    if (coeff_dim < image_dim)
        throw InvalidArgument("dictionary needs at least as many coefficients as pixels");
    if (!(bounds.lower > 0.0) || bounds.upper < bounds.lower)
        throw InvalidArgument("frame bounds must satisfy 0 < c1 <= c2");
    if (tight && bounds.lower != bounds.upper)
        throw InvalidArgument("tight dictionary must have c1 == c2");
}

FrameDictionary make_dirac(std::size_t n) {
    if (n == 0) throw InvalidArgument("dirac dictionary needs n >= 1");
    auto copy = [](std::span<const double> x, std::span<double> out) {
        std::copy(x.begin(), x.end(), out.begin());
    };
    return FrameDictionary(n, n, copy, copy, {1.0, 1.0}, true, "dirac");
}

// ---------------------------------------------------------------------------
// Haar

namespace {

struct HaarShape {
    int width;
    int height;
    int levels;
};

void haar_forward(const HaarShape& s, std::span<double> buf) {
    const double r = std::numbers::sqrt2 / 2.0;
    Vector tmp(static_cast<std::size_t>(std::max(s.width, s.height)));
    int cw = s.width, ch = s.height;
    for (int level = 0; level < s.levels; ++level) {
        if (cw > 1) {
            const int half = cw / 2;
            for (int y = 0; y < ch; ++y) {
                double* row = buf.data() + static_cast<std::size_t>(y) * s.width;
                for (int k = 0; k < half; ++k) {
                    tmp[k] = (row[2 * k] + row[2 * k + 1]) * r;
                    tmp[half + k] = (row[2 * k] - row[2 * k + 1]) * r;
                }
                std::copy(tmp.begin(), tmp.begin() + cw, row);
            }
        }
        if (ch > 1) {
            const int half = ch / 2;
            for (int x = 0; x < cw; ++x) {
                auto at = [&](int y) -> double& {
                    return buf[static_cast<std::size_t>(y) * s.width + x];
                };
                for (int k = 0; k < half; ++k) {
                    tmp[k] = (at(2 * k) + at(2 * k + 1)) * r;
                    tmp[half + k] = (at(2 * k) - at(2 * k + 1)) * r;
                }
                for (int y = 0; y < ch; ++y) at(y) = tmp[y];
            }
        }
        if (cw > 1) cw /= 2;
        if (ch > 1) ch /= 2;
    }
}

void haar_inverse(const HaarShape& s, std::span<double> buf) {
    const double r = std::numbers::sqrt2 / 2.0;
    Vector tmp(static_cast<std::size_t>(std::max(s.width, s.height)));
    std::vector<std::pair<int, int>> sizes;
    int cw = s.width, ch = s.height;
    for (int level = 0; level < s.levels; ++level) {
        sizes.emplace_back(cw, ch);
        if (cw > 1) cw /= 2;
        if (ch > 1) ch /= 2;
    }
    for (auto it = sizes.rbegin(); it != sizes.rend(); ++it) {
        const auto [w, h] = *it;
        if (h > 1) {
            const int half = h / 2;
            for (int x = 0; x < w; ++x) {
                auto at = [&](int y) -> double& {
                    return buf[static_cast<std::size_t>(y) * s.width + x];
                };
                for (int k = 0; k < half; ++k) {
                    const double lo = at(k), hi = at(half + k);
                    tmp[2 * k] = (lo + hi) * r;
                    tmp[2 * k + 1] = (lo - hi) * r;
                }
                for (int y = 0; y < h; ++y) at(y) = tmp[y];
            }
        }
        if (w > 1) {
            const int half = w / 2;
            for (int y = 0; y < h; ++y) {
                double* row = buf.data() + static_cast<std::size_t>(y) * s.width;
                for (int k = 0; k < half; ++k) {
                    const double lo = row[k], hi = row[half + k];
                    tmp[2 * k] = (lo + hi) * r;
                    tmp[2 * k + 1] = (lo - hi) * r;
                }
                std::copy(tmp.begin(), tmp.begin() + w, row);
            }
        }
    }
}

} // namespace

FrameDictionary make_haar_dwt(int width, int height, int levels) {
    if (width <= 0 || height <= 0) throw InvalidArgument("haar: dimensions must be positive");
    if (levels < 1) throw InvalidArgument("haar: levels must be >= 1");
    if (width == 1 && height == 1) throw InvalidArgument("haar: image has a single pixel");
    if (levels > 30) throw InvalidArgument("haar: too many levels");
    const int block = 1 << levels;
    for (int d : {width, height})
        if (d > 1 && d % block != 0)
            throw InvalidArgument("haar: dimension " + std::to_string(d) +
                                  " is not divisible by 2^levels = " + std::to_string(block));
    const HaarShape shape{width, height, levels};
    auto synth = [shape](std::span<const double> a, std::span<double> out) {
        std::copy(a.begin(), a.end(), out.begin());
        haar_inverse(shape, out);
    };
    auto anal = [shape](std::span<const double> x, std::span<double> out) {
        std::copy(x.begin(), x.end(), out.begin());
        haar_forward(shape, out);
    };
    const std::size_t n = static_cast<std::size_t>(width) * height;
    return FrameDictionary(n, n, synth, anal, {1.0, 1.0}, true,
                           "haar:levels=" + std::to_string(levels));
}

// ---------------------------------------------------------------------------
// Starlet

namespace {

// B3-spline taps at offsets +-1 and +-2 (the center tap drops out of the
// difference form below).
constexpr double kB3Near = 4.0 / 16.0;
constexpr double kB3Far = 1.0 / 16.0;

int wrap(int i, int n) {
    const int r = i % n;
    return r < 0 ? r + n : r;
}

// S v = v + sum_l h_l (v[i + l d] - v[i]) along rows then columns. The
// difference form keeps constant images exactly constant.
Vector smooth(std::span<const double> v, int width, int height, int dilation) {
    Vector rows(v.size());
    for (int y = 0; y < height; ++y) {
        const double* in = v.data() + static_cast<std::size_t>(y) * width;
        double* out = rows.data() + static_cast<std::size_t>(y) * width;
        for (int x = 0; x < width; ++x) {
            const double c = in[x];
            const double near = (in[wrap(x - dilation, width)] - c) + (in[wrap(x + dilation, width)] - c);
            const double far =
                (in[wrap(x - 2 * dilation, width)] - c) + (in[wrap(x + 2 * dilation, width)] - c);
            out[x] = c + (kB3Near * near + kB3Far * far);
        }
    }
    Vector out(v.size());
    for (int y = 0; y < height; ++y) {
        const std::size_t ym1 = static_cast<std::size_t>(wrap(y - dilation, height)) * width;
        const std::size_t yp1 = static_cast<std::size_t>(wrap(y + dilation, height)) * width;
        const std::size_t ym2 = static_cast<std::size_t>(wrap(y - 2 * dilation, height)) * width;
        const std::size_t yp2 = static_cast<std::size_t>(wrap(y + 2 * dilation, height)) * width;
        const std::size_t row = static_cast<std::size_t>(y) * width;
        for (int x = 0; x < width; ++x) {
            const double c = rows[row + x];
            const double near = (rows[ym1 + x] - c) + (rows[yp1 + x] - c);
            const double far = (rows[ym2 + x] - c) + (rows[yp2 + x] - c);
            out[row + x] = c + (kB3Near * near + kB3Far * far);
        }
    }
    return out;
}

double b3_response(double theta) {
    return (6.0 + 8.0 * std::cos(theta) + 2.0 * std::cos(2.0 * theta)) / 16.0;
}

struct Starlet {
    int width;
    int height;
    int levels;
    detail::RealFft2d fft;
    // (sum_j |g_j|^2)^(-1/2) - 1 on the half spectrum.
    detail::Spectrum correction;

    Starlet(int w, int h, int j) : width(w), height(h), levels(j), fft(w, h) {
        correction.resize(fft.spectrum_size());
        const int half = w / 2 + 1;
        for (int ky = 0; ky < h; ++ky)
            for (int kx = 0; kx < half; ++kx) {
                const double wx = 2.0 * std::numbers::pi * kx / w;
                const double wy = 2.0 * std::numbers::pi * ky / h;
                double pass = 1.0, energy = 0.0;
                for (int k = 0; k < j; ++k) {
                    const double d = static_cast<double>(1 << k);
                    const double hk = b3_response(d * wx) * b3_response(d * wy);
                    const double band = pass * (1.0 - hk);
                    energy += band * band;
                    pass *= hk;
                }
                energy += pass * pass;
                correction[static_cast<std::size_t>(ky) * half + kx] = 1.0 / std::sqrt(energy) - 1.0;
            }
    }

    // Parseval normalization M (symmetric Fourier multiplier with unit DC gain).
    Vector normalize(std::span<const double> x) const {
        Vector centered(x.begin(), x.end());
        const double ref = x[0];
        for (double& v : centered) v -= ref;
        Vector delta = fft.filter(centered, correction);
        Vector out(x.begin(), x.end());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += delta[i];
        return out;
    }

    void analysis(std::span<const double> x, std::span<double> out) const {
        const std::size_t n = x.size();
        Vector c = normalize(x);
        for (int k = 0; k < levels; ++k) {
            Vector next = smooth(c, width, height, 1 << k);
            double* band = out.data() + static_cast<std::size_t>(k) * n;
            for (std::size_t i = 0; i < n; ++i) band[i] = c[i] - next[i];
            c = std::move(next);
        }
        std::copy(c.begin(), c.end(), out.begin() + static_cast<std::ptrdiff_t>(levels * n));
    }

    void synthesis(std::span<const double> a, std::span<double> out) const {
        const std::size_t n = out.size();
        Vector r(a.begin() + static_cast<std::ptrdiff_t>(levels * n), a.end());
        for (int k = levels - 1; k >= 0; --k) {
            const double* band = a.data() + static_cast<std::size_t>(k) * n;
            Vector diff(n);
            for (std::size_t i = 0; i < n; ++i) diff[i] = r[i] - band[i];
            Vector s = smooth(diff, width, height, 1 << k);
            for (std::size_t i = 0; i < n; ++i) r[i] = band[i] + s[i];
        }
        Vector x = normalize(r);
        std::copy(x.begin(), x.end(), out.begin());
    }
};

} // namespace

FrameDictionary make_starlet(int width, int height, int levels) {
    if (width <= 0 || height <= 0) throw InvalidArgument("starlet: dimensions must be positive");
    if (levels < 1 || levels > 20) throw InvalidArgument("starlet: levels must be in [1, 20]");
    const int scale = 1 << levels;
    for (int d : {width, height})
        if (d > 1 && d < scale)
            throw InvalidArgument("starlet: dimension " + std::to_string(d) +
                                  " is smaller than 2^levels = " + std::to_string(scale));
    auto st = std::make_shared<const Starlet>(width, height, levels);
    const std::size_t n = static_cast<std::size_t>(width) * height;
    auto synth = [st](std::span<const double> a, std::span<double> out) { st->synthesis(a, out); };
    auto anal = [st](std::span<const double> x, std::span<double> out) { st->analysis(x, out); };
    return FrameDictionary(n, n * static_cast<std::size_t>(levels + 1), synth, anal, {1.0, 1.0},
                           true, "starlet:levels=" + std::to_string(levels));
}

// ---------------------------------------------------------------------------
// Union

FrameDictionary make_union(const std::vector<FrameDictionary>& dicts) {
    if (dicts.empty()) throw InvalidArgument("union needs at least one dictionary");
    const std::size_t n = dicts.front().image_dim();
    std::size_t total = 0;
    bool tight = true;
    double lower = 0.0, upper = 0.0;
    std::string name = "union(";
    for (std::size_t k = 0; k < dicts.size(); ++k) {
        const auto& d = dicts[k];
        if (d.image_dim() != n) throw DimensionError("union member image size", n, d.image_dim());
        total += d.coeff_dim();
        tight = tight && d.tight();
        lower += d.bounds().lower;
        upper += d.bounds().upper;
        name += (k ? "," : "") + d.name();
    }
    name += ")";
    const double count = static_cast<double>(dicts.size());
    lower /= count;
    upper /= count;

    auto members = std::make_shared<const std::vector<FrameDictionary>>(dicts);
    const double w = 1.0 / std::sqrt(count);
    auto synth = [members, w](std::span<const double> a, std::span<double> out) {
        std::fill(out.begin(), out.end(), 0.0);
        std::size_t offset = 0;
        for (const auto& d : *members) {
            const Vector part = d.synthesis(a.subspan(offset, d.coeff_dim()));
            axpy(w, part, out);
            offset += d.coeff_dim();
        }
    };
    auto anal = [members, w](std::span<const double> x, std::span<double> out) {
        std::size_t offset = 0;
        for (const auto& d : *members) {
            const Vector part = d.analysis(x);
            for (std::size_t i = 0; i < part.size(); ++i) out[offset + i] = w * part[i];
            offset += d.coeff_dim();
        }
    };
    return FrameDictionary(n, total, synth, anal, {lower, upper}, tight, name);
}

FrameBounds frame_bounds(const FrameDictionary& dict, int probes, std::uint64_t seed) {
    if (probes < 1) throw InvalidArgument("frame_bounds needs at least one probe");
    const std::size_t n = dict.image_dim();
    auto gram = [&](std::span<const double> v) { return dict.synthesis(dict.analysis(v)); };

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    Vector start(n);
    for (double& e : start) e = gauss(rng);
    const double ns = norm2(start);
    for (double& e : start) e /= ns;

    // Largest eigenvalue of G = Phi Phi^T.
    Vector v = start;
    double upper = 0.0;
    for (int it = 0; it < probes; ++it) {
        Vector w = gram(v);
        upper = dot(v, w);
        const double nw = norm2(w);
        if (nw == 0.0) break;
        for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / nw;
    }

    // Largest eigenvalue of (upper I - G) gives the smallest of G.
    v = start;
    double shifted = 0.0;
    for (int it = 0; it < probes; ++it) {
        Vector w = gram(v);
        for (std::size_t i = 0; i < n; ++i) w[i] = upper * v[i] - w[i];
        shifted = dot(v, w);
        const double nw = norm2(w);
        if (nw <= 1e-14 * std::max(upper, 1.0)) {
            shifted = std::max(shifted, 0.0);
            break;
        }
        for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / nw;
    }
    return {upper - shifted, upper};
}

// ---------------------------------------------------------------------------
// Spec strings

namespace {

class SpecParser {
public:
    SpecParser(const std::string& text, int width, int height)
        : text_(text), width_(width), height_(height) {}

    FrameDictionary parse() {
        FrameDictionary d = item();
        skip_space();
        if (pos_ != text_.size()) fail("unexpected trailing input");
        return d;
    }

private:
    FrameDictionary item() {
        skip_space();
        const std::string name = identifier();
        if (name == "union") {
            expect('(');
            std::vector<FrameDictionary> members;
            members.push_back(item());
            skip_space();
            while (peek() == ',') {
                ++pos_;
                members.push_back(item());
                skip_space();
            }
            expect(')');
            return make_union(members);
        }
        int levels = 3;
        skip_space();
        if (peek() == ':') {
            ++pos_;
            do {
                if (peek() == ';') ++pos_;
                const std::string key = identifier();
                expect('=');
                const int value = integer();
                if (key != "levels") fail("unknown option '" + key + "'");
                levels = value;
                skip_space();
            } while (peek() == ';');
        }
        const std::size_t n = static_cast<std::size_t>(width_) * height_;
        if (name == "dirac") return make_dirac(n);
        if (name == "haar") return make_haar_dwt(width_, height_, levels);
        if (name == "starlet") return make_starlet(width_, height_, levels);
        fail("unknown dictionary '" + name + "'");
    }

    std::string identifier() {
        skip_space();
        const std::size_t start = pos_;
        while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                                       text_[pos_] == '_'))
            ++pos_;
        if (start == pos_) fail("expected a name");
        return text_.substr(start, pos_ - start);
    }

    int integer() {
        skip_space();
        const std::size_t start = pos_;
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
        if (start == pos_) fail("expected an integer");
        return std::stoi(text_.substr(start, pos_ - start));
    }

    void expect(char c) {
        skip_space();
        if (peek() != c) fail(std::string("expected '") + c + "'");
        ++pos_;
    }

    char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

    void skip_space() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw InvalidArgument("dictionary spec '" + text_ + "': " + msg + " at position " +
                              std::to_string(pos_));
    }

    const std::string& text_;
    int width_;
    int height_;
    std::size_t pos_ = 0;
};

} // namespace

FrameDictionary parse_dictionary(const std::string& spec, int width, int height) {
    return SpecParser(spec, width, height).parse();
}

} // namespace pdeconv
