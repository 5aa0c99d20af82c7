#include "cli_app.hpp"

#include <glob.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "pdeconv/deconv.hpp"
#include "pdeconv/errors.hpp"
#include "pdeconv/raster_io.hpp"

namespace pdeconv::cli {

namespace {

using nlohmann::json;

constexpr int kExitError = 1;
constexpr int kExitCapped = 2;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

bool starts_with(const std::string& s, const std::string& prefix) {
    return s.rfind(prefix, 0) == 0;
}

int parse_int(const std::string& s, const std::string& what) {
    std::size_t used = 0;
    int v = 0;
    try {
        v = std::stoi(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size() || s.empty()) throw UsageError("invalid " + what + " '" + s + "'");
    return v;
}

double parse_double(const std::string& s, const std::string& what) {
    std::size_t used = 0;
    double v = 0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size() || s.empty()) throw UsageError("invalid " + what + " '" + s + "'");
    return v;
}

// `synthetic:WxH` or a raster path.
Image load_scene(const std::string& source) {
    if (starts_with(source, "synthetic:")) {
        const std::string dims = source.substr(10);
        const auto x = dims.find('x');
        if (x == std::string::npos) throw UsageError("expected synthetic:WIDTHxHEIGHT, got '" + source + "'");
        const int w = parse_int(dims.substr(0, x), "synthetic width");
        const int h = parse_int(dims.substr(x + 1), "synthetic height");
        if (w < 1 || h < 1) throw UsageError("synthetic dimensions must be positive");
        return synthetic_scene(w, h);
    }
    return read_raster(source);
}

// `box:N` or a raster path; file kernels are normalized to unit sum and centered.
Kernel load_psf(const std::string& source) {
    if (starts_with(source, "box:")) {
        const int size = parse_int(source.substr(4), "box size");
        if (size < 1) throw UsageError("box PSF size must be >= 1");
        return make_box_kernel(size);
    }
    Image taps = read_raster(source);
    double sum = 0.0;
    for (double v : taps.data()) {
        if (!(v >= 0.0) || !std::isfinite(v)) throw UsageError("PSF " + source + " has negative or non-finite taps");
        sum += v;
    }
    if (!(sum > 0.0)) throw UsageError("PSF " + source + " sums to zero");
    for (double& v : taps.data()) v /= sum;
    return Kernel::centered(std::move(taps));
}

std::uint64_t fnv1a(const Kernel& k) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&h](const void* p, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= b[i];
            h *= 0x100000001b3ULL;
        }
    };
    const int dims[4] = {k.taps.width(), k.taps.height(), k.origin_x, k.origin_y};
    mix(dims, sizeof dims);
    mix(k.taps.data().data(), k.taps.size() * sizeof(double));
    return h;
}

std::string hex(std::uint64_t v) {
    std::ostringstream s;
    s << std::hex << std::setw(16) << std::setfill('0') << v;
    return s.str();
}

// Comma list, or `log:lo:hi:n`.
std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> grid;
    if (starts_with(text, "log:")) {
        std::vector<std::string> parts;
        std::stringstream ss(text.substr(4));
        for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
        if (parts.size() != 3) throw UsageError("expected log:LO:HI:N, got '" + text + "'");
        return log_grid(parse_double(parts[0], "grid low"), parse_double(parts[1], "grid high"),
                        parse_int(parts[2], "grid size"));
    }
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ',');)
        if (!p.empty()) grid.push_back(parse_double(p, "gamma grid value"));
    if (grid.empty()) throw UsageError("--gamma-grid is empty");
    return grid;
}

std::string numbered(const std::string& path, int index, int count) {
    if (count == 1) return path;
    const auto dot = path.find_last_of('.');
    const auto slash = path.find_last_of('/');
    std::ostringstream tag;
    tag << '_' << std::setw(count >= 100 ? 3 : 2) << std::setfill('0') << index;
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return path + tag.str();
    return path.substr(0, dot) + tag.str() + path.substr(dot);
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out << text;
    if (!out) throw Error("write failed: " + path);
}

void write_raster_as(const std::string& path, const Image& img, bool pgm_ascii) {
    RasterFormat f = format_from_path(path);
    if (pgm_ascii && f == RasterFormat::pgm_binary) f = RasterFormat::pgm_ascii;
    write_raster(path, img, f);
}

// Flags shared by every command that configures a deconvolution problem.
struct SolverFlags {
    std::string counts;
    std::string psf;
    std::string dict = "starlet:levels=3";
    std::string prior = "synthesis";
    int iters = 300;
    int inner_iters = 10;
    double theta = 1.0;
    double mu = 1.0;
    double tol = 1e-5;
    int threads = 0;

    void attach(CLI::App& app) {
        app.add_option("--counts", counts, "observed counts raster")->required();
        app.add_option("--psf", psf, "PSF raster or box:N")->required();
        app.add_option("--dict", dict, "dirac | haar:levels=J | starlet:levels=J | union(a,b,...)")
            ->capture_default_str();
        app.add_option("--prior", prior, "analysis | synthesis")
            ->check(CLI::IsMember({"analysis", "synthesis"}))
            ->capture_default_str();
        app.add_option("--iters", iters, "maximum outer iterations")
            ->check(CLI::PositiveNumber)->capture_default_str();
        app.add_option("--inner-iters", inner_iters, "dual forward-backward iterations per prox")
            ->check(CLI::PositiveNumber)->capture_default_str();
        app.add_option("--theta", theta, "relaxation in (0, 2)")
            ->check(CLI::Range(0.0, 2.0))->capture_default_str();
        app.add_option("--mu", mu, "splitting step mu > 0")
            ->check(CLI::PositiveNumber)->capture_default_str();
        app.add_option("--tol", tol, "relative-change stopping tolerance")
            ->check(CLI::NonNegativeNumber)->capture_default_str();
        app.add_option("--threads", threads, "concurrent solves in gamma scans (0: all cores)")
            ->check(CLI::NonNegativeNumber)->capture_default_str();
    }

    DeconvProblem problem() const {
        if (!(theta > 0.0 && theta < 2.0)) throw UsageError("--theta must lie strictly inside (0, 2)");
        Image y = read_raster(counts);
        if (!is_count_image(y)) throw UsageError("--counts " + counts + " must hold non-negative integers");
        const Kernel k = load_psf(psf);
        const int w = y.width(), h = y.height();
        DeconvProblem p{std::move(y), make_circular_convolution(k, w, h), parse_dictionary(dict, w, h)};
        p.prior = parse_prior(prior);
        p.splitting.max_outer = iters;
        p.splitting.mu = mu;
        p.splitting.tol = tol;
        const double t = theta;
        p.splitting.theta = [t](int) { return t; };
        p.compose.inner_iters = inner_iters;
        return p;
    }
};

std::optional<Image> load_truth(const std::string& path, const Image& counts) {
    if (path.empty()) return std::nullopt;
    Image t = read_raster(path);
    if (!t.same_shape(counts))
        throw DimensionError("--truth " + path + " size", counts.size(), t.size());
    return t;
}

std::string trace_csv(const DeconvResult& r) {
    std::ostringstream s;
    s << std::setprecision(17) << "iteration,relative_change,objective\n";
    for (std::size_t i = 0; i < r.relative_change_trace.size(); ++i) {
        s << i + 1 << ',' << r.relative_change_trace[i] << ',';
        if (r.objective_trace[i]) s << *r.objective_trace[i];
        s << '\n';
    }
    return s.str();
}

std::string gcv_csv(const GcvSelection& sel) {
    std::ostringstream s;
    s << std::setprecision(17);
    const bool with_mae = !sel.table.empty() && sel.table.front().mae.has_value();
    s << "gamma,gcv" << (with_mae ? ",mae" : "") << ",iterations,converged\n";
    for (const GcvRow& row : sel.table) {
        s << row.gamma << ',' << row.gcv;
        if (with_mae) s << ',' << *row.mae;
        s << ',' << row.iterations << ',' << (row.converged ? 1 : 0) << '\n';
    }
    return s.str();
}

// ---------------------------------------------------------------- simulate

struct SimulateCmd {
    std::string input, psf, output, truth_out, provenance;
    double peak = 0.0;
    std::uint64_t seed = 0;
    int replicates = 1;
    bool pgm_ascii = false;

    void attach(CLI::App& app) {
        app.add_option("--input", input, "intensity raster or synthetic:WxH")->required();
        app.add_option("--psf", psf, "PSF raster or box:N")->required();
        app.add_option("--peak", peak, "peak intensity of the rescaled scene")
            ->required()->check(CLI::PositiveNumber);
        app.add_option("--seed", seed, "base seed; replicate k uses seed + k")->capture_default_str();
        app.add_option("--replicates", replicates, "number of independent count images")
            ->check(CLI::PositiveNumber)->capture_default_str();
        app.add_option("--output", output, "counts raster (.pgm or .f64); numbered when replicates > 1")
            ->required();
        app.add_option("--truth-out", truth_out, "also write the peak-rescaled scene");
        app.add_option("--provenance", provenance, "provenance JSON (default <output>.provenance.json)");
        app.add_flag("--pgm-ascii", pgm_ascii, "write P2 instead of P5");
    }

    int run(std::ostream& out) const {
        const Image scene = load_scene(input);
        const Kernel k = load_psf(psf);
        const LinearOperator blur = make_circular_convolution(k, scene.width(), scene.height());
        json prov{{"input", input},    {"psf", psf},         {"psf_fnv1a", hex(fnv1a(k))},
                  {"peak", peak},      {"seed", seed},       {"replicates", replicates},
                  {"width", scene.width()}, {"height", scene.height()}, {"files", json::array()}};
        for (int r = 0; r < replicates; ++r) {
            const std::string path = numbered(output, r + 1, replicates);
            const std::uint64_t s = seed + static_cast<std::uint64_t>(r);
            write_raster_as(path, simulate(scene, blur, peak, s), pgm_ascii);
            prov["files"].push_back({{"path", path}, {"seed", s}});
            out << path << '\n';
        }
        if (!truth_out.empty()) {
            write_raster_as(truth_out, rescale_to_peak(scene, peak), pgm_ascii);
            prov["truth"] = truth_out;
        }
        write_text(provenance.empty() ? output + ".provenance.json" : provenance, prov.dump(2) + "\n");
        return 0;
    }
};

// -------------------------------------------------------------- deconvolve

struct DeconvolveCmd {
    SolverFlags solver;
    std::optional<double> gamma;
    std::string gamma_grid, output, metrics, truth, trace;
    bool pgm_ascii = false;

    void attach(CLI::App& app) {
        solver.attach(app);
        app.add_option("--gamma", gamma, "regularization weight")->check(CLI::PositiveNumber);
        app.add_option("--gamma-grid", gamma_grid, "comma list or log:LO:HI:N; gamma chosen by GCV");
        app.add_option("--output", output, "restored raster (.pgm or .f64)")->required();
        app.add_option("--metrics", metrics, "metrics JSON (default: stdout)");
        app.add_option("--truth", truth, "reference image for MAE");
        app.add_option("--trace", trace, "per-iteration CSV trace");
        app.add_flag("--pgm-ascii", pgm_ascii, "write P2 instead of P5");
    }

    int run(std::ostream& out) const {
        if (gamma.has_value() == !gamma_grid.empty())
            throw UsageError("exactly one of --gamma or --gamma-grid is required");
        DeconvProblem p = solver.problem();
        const std::optional<Image> ref = load_truth(truth, p.counts);
        DeconvResult r;
        std::optional<GcvSelection> sel;
        if (gamma) {
            p.gamma = *gamma;
            r = deconvolve(p);
        } else {
            const std::vector<double> grid = parse_grid(gamma_grid);
            sel = select_gamma_gcv(grid, p, ref, solver.threads);
            r = sel->best;
        }
        write_raster_as(output, r.restored, pgm_ascii);
        json m = json::parse(metrics_json(r, ref));
        m["prior"] = solver.prior;
        m["dictionary"] = solver.dict;
        if (sel) {
            m["gcv_table"] = json::array();
            for (const GcvRow& row : sel->table) {
                json j{{"gamma", row.gamma}, {"gcv", row.gcv}, {"iterations", row.iterations},
                       {"converged", row.converged}};
                j["mae"] = row.mae ? json(*row.mae) : json(nullptr);
                m["gcv_table"].push_back(j);
            }
        }
        if (metrics.empty())
            out << m.dump(2) << '\n';
        else
            write_text(metrics, m.dump(2) + "\n");
        if (!trace.empty()) write_text(trace, trace_csv(r));
        return r.converged ? 0 : kExitCapped;
    }
};

// ---------------------------------------------------------------- evaluate

struct EvaluateCmd {
    std::string restored, pattern, truth, out_path;

    void attach(CLI::App& app) {
        app.add_option("--restored", restored, "restored raster");
        app.add_option("--glob", pattern, "average over every raster matching this pattern");
        app.add_option("--truth", truth, "reference raster")->required();
        app.add_option("--out", out_path, "metrics JSON (default: stdout)");
    }

    static std::vector<std::string> expand(const std::string& pattern) {
        glob_t g{};
        const int rc = ::glob(pattern.c_str(), 0, nullptr, &g);
        std::vector<std::string> files;
        if (rc == 0)
            for (std::size_t i = 0; i < g.gl_pathc; ++i) {
                const std::string f = g.gl_pathv[i];
                if (f.size() < 5 || f.compare(f.size() - 5, 5, ".json") != 0) files.push_back(f);
            }
        ::globfree(&g);
        if (files.empty()) throw UsageError("--glob '" + pattern + "' matched no rasters");
        return files;
    }

    int run(std::ostream& out) const {
        if (restored.empty() == pattern.empty())
            throw UsageError("exactly one of --restored or --glob is required");
        const Image ref = read_raster(truth);
        const std::vector<std::string> files = pattern.empty() ? std::vector{restored} : expand(pattern);
        json per_file = json::array();
        double sum_mae = 0.0, sum_rel = 0.0;
        for (const std::string& f : files) {
            const Image img = read_raster(f);
            if (!img.same_shape(ref)) throw DimensionError(f + " vs --truth size", ref.size(), img.size());
            const double m = mae(img, ref), rel = relative_mae(img, ref);
            sum_mae += m;
            sum_rel += rel;
            per_file.push_back({{"path", f}, {"mae", m}, {"relative_mae", std::isfinite(rel) ? json(rel) : json(nullptr)}});
        }
        const double n = static_cast<double>(files.size());
        json j{{"count", files.size()}, {"mae", sum_mae / n}};
        j["relative_mae"] = std::isfinite(sum_rel) ? json(sum_rel / n) : json(nullptr);
        if (files.size() > 1) j["files"] = per_file;
        if (out_path.empty())
            out << j.dump(2) << '\n';
        else
            write_text(out_path, j.dump(2) + "\n");
        return 0;
    }
};

// ---------------------------------------------------------------- gcv-scan

struct GcvScanCmd {
    SolverFlags solver;
    std::string gamma_grid, truth, out_path;

    void attach(CLI::App& app) {
        solver.attach(app);
        app.add_option("--gamma-grid", gamma_grid, "comma list or log:LO:HI:N")->required();
        app.add_option("--truth", truth, "reference image; adds an MAE column");
        app.add_option("--out", out_path, "CSV table (default: stdout)");
    }

    int run(std::ostream& out) const {
        DeconvProblem p = solver.problem();
        const std::optional<Image> ref = load_truth(truth, p.counts);
        const GcvSelection sel = select_gamma_gcv(parse_grid(gamma_grid), p, ref, solver.threads);
        if (out_path.empty()) {
            out << gcv_csv(sel);
        } else {
            write_text(out_path, gcv_csv(sel));
        }
        out << "selected_gamma," << std::setprecision(17) << sel.gamma << '\n';
        return 0;
    }
};

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Poisson deconvolution with sparsity priors", "pdeconv"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "show help for every subcommand");

    SimulateCmd simulate_cmd;
    DeconvolveCmd deconvolve_cmd;
    EvaluateCmd evaluate_cmd;
    GcvScanCmd gcv_cmd;
    CLI::App* sim = app.add_subcommand("simulate", "blur a scene and draw Poisson counts");
    CLI::App* dec = app.add_subcommand("deconvolve", "restore a counts image");
    CLI::App* eva = app.add_subcommand("evaluate", "MAE of restored images against a reference");
    CLI::App* gcv = app.add_subcommand("gcv-scan", "GCV table over a gamma grid");
    simulate_cmd.attach(*sim);
    deconvolve_cmd.attach(*dec);
    evaluate_cmd.attach(*eva);
    gcv_cmd.attach(*gcv);

    std::vector<std::string> rev(args.size() > 1 ? args.begin() + 1 : args.end(), args.end());
    std::reverse(rev.begin(), rev.end());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : kExitError;
    }

    try {
        if (sim->parsed()) return simulate_cmd.run(out);
        if (dec->parsed()) return deconvolve_cmd.run(out);
        if (eva->parsed()) return evaluate_cmd.run(out);
        if (gcv->parsed()) return gcv_cmd.run(out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\nRun with --help for the list of flags.\n";
        return kExitError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}

} // namespace pdeconv::cli
