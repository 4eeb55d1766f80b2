#pragma once

// Work-precision benchmarking: reference solutions, tolerance sweeps, and
// CSV / SVG output.

#include <parex/errors.hpp>
#include <parex/ode.hpp>
#include <parex/problems.hpp>
#include <parex/solvers.hpp>

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace parex {

struct ReferenceSolution {
    std::string problem;
    std::vector<double> final_state;
    std::string generator;
};

struct WorkPrecisionPoint {
    std::string problem;
    std::string algorithm;
    bool threaded = false;
    double reltol = 0.0;
    double abstol = 0.0;
    double error = 0.0;  // NaN for failed solves
    double runtime_s = 0.0;
    Stats stats;

    [[nodiscard]] bool failed() const { return std::isnan(error); }
    friend bool operator==(const WorkPrecisionPoint&, const WorkPrecisionPoint&) = default;
};

inline const char* csv_header =
    "problem,algorithm,threaded,reltol,abstol,error,runtime_s,nf,njac,nlu,nsolve,naccept,nreject";

/// Norm-wise relative l2 error over components with |ref_i| > abstol,
/// combined with the absolute l2 error of the remaining components.
inline double benchmark_error(std::span<const double> u, std::span<const double> ref, double abstol) {
    double num = 0.0, den = 0.0, small = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        const double e = u[i] - ref[i];
        if (std::abs(ref[i]) > abstol) {
            num += e * e;
            den += ref[i] * ref[i];
        } else {
            small += e * e;
        }
    }
    const double rel = den > 0.0 ? num / den : 0.0;
    return std::sqrt(rel + small);
}

namespace detail {

inline SolverOptions reference_options(Family f) {
    SolverOptions o;
    o.min_order = 2;
    o.init_order = 5;
    o.max_order = f == Family::implicit_hairer_wanner ? 10 : 12;
    o.threading = false;
    o.max_steps = 2'000'000;
    return o;
}

}  // namespace detail

inline constexpr double reference_reltol = 1e-12;
inline constexpr double reference_abstol = 1e-14;
inline constexpr double reference_agreement = 1e-8;

/// Smoothed implicit midpoint at tight tolerance, cross-checked against
/// implicit Euler extrapolation at the same tolerance.
inline ReferenceSolution make_reference(const NamedProblem& np) {
    const Tolerances<double> tol{reference_abstol, reference_reltol};
    auto primary = solve(np.problem, Family::implicit_hairer_wanner,
                         detail::reference_options(Family::implicit_hairer_wanner), tol);
    auto check = solve(np.problem, Family::implicit_euler, detail::reference_options(Family::implicit_euler), tol);
    if (!primary.ok() || !check.ok())
        throw ReferenceDisagreement("reference integration for " + np.name + " did not complete");
    const double gap = benchmark_error(check.us.back(), primary.us.back(), reference_abstol);
    if (!(gap <= reference_agreement)) {
        std::ostringstream msg;
        msg << "reference solvers disagree on " << np.name << " (error " << gap << ")";
        throw ReferenceDisagreement(msg.str());
    }
    return {np.name, primary.us.back(), "implicit_hairer_wanner reltol=1e-12 abstol=1e-14; checked by implicit_euler"};
}

struct SweepConfig {
    std::vector<Family> algorithms;
    std::vector<TolerancePair> tol_grid;
    int repeats = 5;
    int warmups = 1;
    std::vector<bool> threading_modes{false, true};
    int num_workers = 4;
    std::size_t max_steps = SolverOptions{}.max_steps;
};

/// Times every (algorithm, threading mode, tolerance) combination and
/// measures the final-time error against `ref`. Solves run one at a time.
inline std::vector<WorkPrecisionPoint> run_sweep(const NamedProblem& np, const ReferenceSolution& ref,
                                                 const SweepConfig& cfg) {
    using clock = std::chrono::steady_clock;
    std::vector<WorkPrecisionPoint> points;
    for (Family f : cfg.algorithms) {
        const OrderWindow w = np.orders_for(f);
        for (bool threaded : cfg.threading_modes) {
            SolverOptions o;
            o.min_order = w.min_order;
            o.init_order = w.init_order;
            o.max_order = w.max_order;
            o.threading = threaded;
            o.num_workers = threaded ? cfg.num_workers : 1;
            o.save_everystep = false;
            o.max_steps = cfg.max_steps;
            for (const auto& tp : cfg.tol_grid) {
                const Tolerances<double> tol{tp.abstol, tp.reltol};
                WorkPrecisionPoint pt{np.name, std::string(to_string(f)), threaded, tp.reltol, tp.abstol, 0.0, 0.0, {}};
                for (int i = 0; i < cfg.warmups; ++i) (void)solve(np.problem, f, o, tol);
                std::vector<double> times;
                Solution<double> sol;
                for (int r = 0; r < std::max(1, cfg.repeats); ++r) {
                    auto start = clock::now();
                    sol = solve(np.problem, f, o, tol);
                    times.push_back(std::chrono::duration<double>(clock::now() - start).count());
                }
                std::sort(times.begin(), times.end());
                pt.runtime_s = std::max(times[times.size() / 2], std::numeric_limits<double>::min());
                pt.stats = sol.stats;
                pt.error = sol.ok() ? benchmark_error(sol.us.back(), ref.final_state, tp.abstol)
                                    : std::numeric_limits<double>::quiet_NaN();
                points.push_back(pt);
            }
        }
    }
    return points;
}

/// Messages for series whose error grows when reltol is tightened.
inline std::vector<std::string> monotonicity_warnings(const std::vector<WorkPrecisionPoint>& points) {
    std::map<std::pair<std::string, bool>, std::vector<const WorkPrecisionPoint*>> series;
    for (const auto& p : points) series[{p.algorithm, p.threaded}].push_back(&p);
    std::vector<std::string> out;
    for (auto& [key, pts] : series) {
        std::sort(pts.begin(), pts.end(), [](auto* a, auto* b) { return a->reltol > b->reltol; });
        for (std::size_t i = 1; i < pts.size(); ++i) {
            if (pts[i]->error > pts[i - 1]->error) {
                std::ostringstream msg;
                msg << key.first << (key.second ? " (threaded)" : "") << ": error rose from " << pts[i - 1]->error
                    << " to " << pts[i]->error << " when reltol went " << pts[i - 1]->reltol << " -> "
                    << pts[i]->reltol;
                out.push_back(msg.str());
            }
        }
    }
    return out;
}

namespace detail {

inline std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw IOFailure("malformed number '" + std::string(s) + "'");
    return v;
}

inline std::size_t parse_count(std::string_view s) {
    std::size_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw IOFailure("malformed counter '" + std::string(s) + "'");
    return v;
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        auto pos = line.find(sep, start);
        out.push_back(line.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&':
                out += "&amp;";
                break;
            case '<':
                out += "&lt;";
                break;
            case '>':
                out += "&gt;";
                break;
            case '"':
                out += "&quot;";
                break;
            default:
                out += c;
        }
    }
    return out;
}

}  // namespace detail

inline std::string to_csv(const std::vector<WorkPrecisionPoint>& points) {
    std::ostringstream os;
    os << csv_header << '\n';
    for (const auto& p : points) {
        using detail::format_double;
        os << p.problem << ',' << p.algorithm << ',' << (p.threaded ? "true" : "false") << ','
           << format_double(p.reltol) << ',' << format_double(p.abstol) << ',' << format_double(p.error) << ','
           << format_double(p.runtime_s) << ',' << p.stats.nf << ',' << p.stats.njac << ',' << p.stats.nlu << ','
           << p.stats.nsolve << ',' << p.stats.naccept << ',' << p.stats.nreject << '\n';
    }
    return os.str();
}

inline std::vector<WorkPrecisionPoint> parse_csv(std::string_view text) {
    std::vector<WorkPrecisionPoint> points;
    std::size_t line_no = 0;
    for (auto line : detail::split(text, '\n')) {
        if (line.empty()) continue;
        if (line_no++ == 0) {
            if (line != csv_header) throw IOFailure("unexpected CSV header");
            continue;
        }
        auto f = detail::split(line, ',');
        if (f.size() != 13) throw IOFailure("CSV row has " + std::to_string(f.size()) + " fields");
        WorkPrecisionPoint p;
        p.problem = f[0];
        p.algorithm = f[1];
        if (f[2] != "true" && f[2] != "false") throw IOFailure("bad threaded flag");
        p.threaded = f[2] == "true";
        p.reltol = detail::parse_double(f[3]);
        p.abstol = detail::parse_double(f[4]);
        p.error = detail::parse_double(f[5]);
        p.runtime_s = detail::parse_double(f[6]);
        p.stats = {detail::parse_count(f[7]),  detail::parse_count(f[8]),  detail::parse_count(f[9]),
                   detail::parse_count(f[10]), detail::parse_count(f[11]), detail::parse_count(f[12])};
        points.push_back(p);
    }
    return points;
}

/// Log-log work-precision diagram: error on x, runtime on y, one line per
/// (algorithm, threading) series. Failed points are omitted.
inline std::string to_svg(const std::vector<WorkPrecisionPoint>& points, std::string_view title) {
    constexpr double width = 720, height = 480, left = 80, right = 230, top = 40, bottom = 60;
    std::map<std::string, std::vector<const WorkPrecisionPoint*>> series;
    double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
    for (const auto& p : points) {
        if (p.failed() || !(p.error > 0.0) || !(p.runtime_s > 0.0)) continue;
        series[p.algorithm + (p.threaded ? " (threaded)" : "")].push_back(&p);
        xmin = std::min(xmin, std::log10(p.error));
        xmax = std::max(xmax, std::log10(p.error));
        ymin = std::min(ymin, std::log10(p.runtime_s));
        ymax = std::max(ymax, std::log10(p.runtime_s));
    }
    if (series.empty()) xmin = -1, xmax = 0, ymin = -1, ymax = 0;
    xmin = std::floor(xmin), xmax = std::max(std::ceil(xmax), xmin + 1);
    ymin = std::floor(ymin), ymax = std::max(std::ceil(ymax), ymin + 1);
    const double pw = width - left - right, ph = height - top - bottom;
    auto sx = [&](double lx) { return left + (lx - xmin) / (xmax - xmin) * pw; };
    auto sy = [&](double ly) { return top + (ymax - ly) / (ymax - ymin) * ph; };

    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#17becf"};
    std::ostringstream os;
    os << std::setprecision(6);
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
       << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n"
       << "<text x=\"" << left + pw / 2
       << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" << detail::xml_escape(title)
       << "</text>\n"
       << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (double e = xmin; e <= xmax + 1e-9; e += 1) {
        os << "<line x1=\"" << sx(e) << "\" y1=\"" << top + ph << "\" x2=\"" << sx(e) << "\" y2=\"" << top
           << "\" stroke=\"#dddddd\"/>\n"
           << "<text x=\"" << sx(e) << "\" y=\"" << top + ph + 18
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">1e" << e << "</text>\n";
    }
    for (double e = ymin; e <= ymax + 1e-9; e += 1) {
        os << "<line x1=\"" << left << "\" y1=\"" << sy(e) << "\" x2=\"" << left + pw << "\" y2=\"" << sy(e)
           << "\" stroke=\"#dddddd\"/>\n"
           << "<text x=\"" << left - 6 << "\" y=\"" << sy(e) + 4
           << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">1e" << e << "</text>\n";
    }
    os << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 16
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">error</text>\n"
       << "<text x=\"18\" y=\"" << top + ph / 2 << "\" transform=\"rotate(-90 18 " << top + ph / 2
       << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">runtime (s)</text>\n";

    std::size_t idx = 0;
    for (auto& [name, pts] : series) {
        const char* color = palette[idx % std::size(palette)];
        std::sort(pts.begin(), pts.end(), [](auto* a, auto* b) { return a->error < b->error; });
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (auto* p : pts) os << sx(std::log10(p->error)) << ',' << sy(std::log10(p->runtime_s)) << ' ';
        os << "\"/>\n";
        for (auto* p : pts)
            os << "<circle cx=\"" << sx(std::log10(p->error)) << "\" cy=\"" << sy(std::log10(p->runtime_s))
               << "\" r=\"3\" fill=\"" << color << "\"/>\n";
        const double ly = top + 14 + 18.0 * static_cast<double>(idx);
        os << "<line x1=\"" << left + pw + 12 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 32 << "\" y2=\"" << ly
           << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
           << "<text x=\"" << left + pw + 36 << "\" y=\"" << ly + 4 << "\" font-family=\"sans-serif\" font-size=\"11\">"
           << detail::xml_escape(name) << "</text>\n";
        ++idx;
    }
    os << "</svg>\n";
    return os.str();
}

enum class OutputFormat { csv, svg };

inline void emit(const std::vector<WorkPrecisionPoint>& points, OutputFormat format, const std::string& path) {
    if (points.empty()) throw IOFailure("no benchmark points to write");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IOFailure("cannot open '" + path + "' for writing");
    out << (format == OutputFormat::csv ? to_csv(points) : to_svg(points, points.front().problem));
    if (!out) throw IOFailure("write to '" + path + "' failed");
}

/// Parses `key = value` lines; '#' starts a comment.
inline std::map<std::string, std::string> parse_config(std::string_view text) {
    std::map<std::string, std::string> kv;
    auto trim = [](std::string_view s) {
        const char* ws = " \t\r";
        auto b = s.find_first_not_of(ws);
        if (b == std::string_view::npos) return std::string_view{};
        return s.substr(b, s.find_last_not_of(ws) - b + 1);
    };
    std::size_t line_no = 0;
    for (auto raw : detail::split(text, '\n')) {
        ++line_no;
        auto line = trim(raw.substr(0, raw.find('#')));
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        kv[std::string(trim(line.substr(0, eq)))] = std::string(trim(line.substr(eq + 1)));
    }
    return kv;
}

inline std::map<std::string, std::string> load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace parex
