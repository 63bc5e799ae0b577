#pragma once

// Command-line front end. Everything lives in this header so the tests can
// drive `run` in process; coboson_cli.cpp only forwards argv.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "coboson/density.hpp"
#include "coboson/observables.hpp"
#include "coboson/oracle.hpp"
#include "coboson/spectrum.hpp"
#include "coboson/symfun.hpp"

namespace coboson::cli {

using json = nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";

enum Exit : int { ok = 0, invalid = 2, solver = 3, capacity = 4 };

// ---------------------------------------------------------------------------
// Formatting and parsing
// ---------------------------------------------------------------------------

inline std::string num(double v)
{
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string num(std::size_t v) { return std::to_string(v); }

/// Short form for file names and column labels.
inline std::string tag(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

/// "start:stop:count", inclusive.
inline std::vector<double> parse_sweep(const std::string& s)
{
    const auto a = s.find(':');
    const auto b = a == std::string::npos ? a : s.find(':', a + 1);
    if (b == std::string::npos) {
        throw DomainError("sweep must be start:stop:count, got '" + s + "'");
    }
    double lo = 0.0, hi = 0.0;
    long count = 0;
    try {
        lo = std::stod(s.substr(0, a));
        hi = std::stod(s.substr(a + 1, b - a - 1));
        count = std::stol(s.substr(b + 1));
    } catch (const std::exception&) {
        throw DomainError("sweep must be start:stop:count, got '" + s + "'");
    }
    if (count < 1) {
        throw DomainError("sweep count must be positive");
    }
    std::vector<double> out(static_cast<std::size_t>(count));
    for (long i = 0; i < count; ++i) {
        out[static_cast<std::size_t>(i)] =
            count == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    }
    if (count > 1) {
        out.back() = hi;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

struct RunConfig {
    std::string subcommand;

    // physical source
    std::optional<double> gamma;
    std::vector<double> g;
    std::vector<double> x0; // alternative to g: separation in oscillator lengths
    std::vector<double> epsilon;
    std::string zx_formula = "gaussian";

    // direct source
    std::vector<double> zx;
    std::string zx_sweep;
    std::vector<double> zy;
    std::optional<double> mu;

    std::vector<std::size_t> N;
    std::vector<std::size_t> t;
    std::vector<std::size_t> modes;
    std::vector<double> alpha;
    double tail_tol = 1e-12;
    std::string kind = "fermionic";
    std::string method = "dp";
    std::string degeneracy = "1d";
    std::vector<std::string> fit;
    std::size_t points = 2048;
    double half_width = 0.0;
    double prominence = kDefaultProminence;
    bool validate_basis = true;
    std::string report = "zx";
    int preset = 0;

    std::string out;
    std::string out_dir;
    std::string format = "csv";
    unsigned threads = 1;

    [[nodiscard]] bool physical() const { return gamma.has_value() || !g.empty() || !x0.empty() || !epsilon.empty(); }
    [[nodiscard]] bool direct() const { return !zx.empty() || !zx_sweep.empty() || !zy.empty() || mu.has_value(); }

    /// Everything that determines the output. Thread count and paths are left out.
    [[nodiscard]] json resolved() const
    {
        json j;
        j["subcommand"] = subcommand;
        if (physical()) {
            j["source"] = "physical";
            if (gamma) {
                j["gamma"] = *gamma;
            }
            if (!g.empty()) {
                j["g"] = g;
            }
            if (!x0.empty()) {
                j["x0"] = x0;
            }
            j["epsilon"] = epsilon;
            j["zx_formula"] = zx_formula;
        } else {
            j["source"] = "direct";
            if (!zx.empty()) {
                j["zx"] = zx;
            }
            if (!zx_sweep.empty()) {
                j["zx_sweep"] = zx_sweep;
            }
            j["zy"] = zy;
            if (mu) {
                j["mu"] = *mu;
                j["x0"] = x0;
            }
        }
        j["N"] = N;
        j["t"] = t;
        j["modes"] = modes;
        j["alpha"] = alpha;
        j["tail_tol"] = tail_tol;
        j["kind"] = kind;
        j["method"] = method;
        j["degeneracy"] = degeneracy;
        j["fit"] = fit;
        j["grid"] = {{"points", points}, {"half_width", half_width}};
        j["prominence"] = prominence;
        j["validate_basis"] = validate_basis;
        if (subcommand == "oracle") {
            j["report"] = report;
        }
        if (subcommand == "figure") {
            j["preset"] = preset;
        }
        j["format"] = format;
        return j;
    }
};

// ---------------------------------------------------------------------------
// Parameter points
// ---------------------------------------------------------------------------

/// One evaluation point: the generating parameters plus the physical inputs
/// they came from, if any.
struct Point {
    std::vector<double> zs;
    std::optional<double> g;
    std::optional<HarmonicApprox> approx;
};

inline double zx_of(const HarmonicApprox& h, const std::string& formula)
{
    if (formula == "gaussian") {
        return z_from_mu_gaussian(h.mu);
    }
    if (formula == "published") {
        return z_from_mu(h.mu);
    }
    throw DomainError("--zx-formula must be gaussian or published");
}

inline std::vector<double> strengths(const RunConfig& c)
{
    if (!c.g.empty() && !c.x0.empty()) {
        throw DomainError("give either --g or --x0, not both");
    }
    if (!c.gamma) {
        throw DomainError("the physical source needs --gamma");
    }
    if (!c.x0.empty()) {
        std::vector<double> out;
        for (double x : c.x0) {
            out.push_back(strength_for_separation(*c.gamma, x));
        }
        return out;
    }
    if (c.g.empty()) {
        throw DomainError("the physical source needs --g or --x0");
    }
    return c.g;
}

inline std::vector<Point> resolve_points(const RunConfig& c)
{
    if (c.physical() && c.direct()) {
        throw DomainError("physical parameters (--gamma/--g/--x0/--epsilon) and direct z values "
                          "(--zx/--zx-sweep/--zy/--mu) are mutually exclusive");
    }
    std::vector<Point> pts;
    if (c.physical()) {
        TrapSpec trap{1 + c.epsilon.size(), c.epsilon};
        trap.validate();
        for (double g : strengths(c)) {
            const auto h = solve_equilibrium(InteractionSpec::inverse_power(*c.gamma, g));
            Point p;
            p.g = g;
            p.approx = h;
            p.zs = generating_parameters(zx_of(h, c.zx_formula), trap);
            pts.push_back(std::move(p));
        }
        return pts;
    }
    if (!c.zx.empty() && !c.zx_sweep.empty()) {
        throw DomainError("give either --zx or --zx-sweep, not both");
    }
    const auto xs = c.zx_sweep.empty() ? c.zx : parse_sweep(c.zx_sweep);
    if (xs.empty()) {
        throw DomainError("no parameter source: give --zx/--zx-sweep or --gamma with --g");
    }
    for (double z : xs) {
        Point p;
        p.zs.push_back(z);
        p.zs.insert(p.zs.end(), c.zy.begin(), c.zy.end());
        pts.push_back(std::move(p));
    }
    return pts;
}

inline std::string key_header(const RunConfig& c) { return c.physical() ? "g,zx" : "zx"; }

inline std::string key(const Point& p)
{
    return p.g ? num(*p.g) + "," + num(p.zs[0]) : num(p.zs[0]);
}

inline std::vector<std::size_t> need_N(const RunConfig& c)
{
    if (c.N.empty()) {
        throw DomainError("--N is required");
    }
    for (auto n : c.N) {
        if (n == 0) {
            throw DomainError("N must be positive");
        }
    }
    return c.N;
}

// ---------------------------------------------------------------------------
// Parallel evaluation
// ---------------------------------------------------------------------------

/// Evaluates f(0..n-1) on up to `threads` workers and returns the results in
/// index order. If several points fail, the lowest index wins so the error is
/// the same for every thread count.
template <class T>
std::vector<T> parallel_map(std::size_t n, unsigned threads, const std::function<T(std::size_t)>& f)
{
    std::vector<std::optional<T>> slots(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                slots[i] = f(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const unsigned k = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n)));
    std::vector<std::thread> pool;
    for (unsigned i = 1; i < k; ++i) {
        pool.emplace_back(work);
    }
    work();
    for (auto& th : pool) {
        th.join();
    }
    for (auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
    std::vector<T> out;
    out.reserve(n);
    for (auto& s : slots) {
        out.push_back(std::move(*s));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Tables and artifacts
// ---------------------------------------------------------------------------

/// Rows from one evaluation point plus whatever it contributes to the manifest.
struct Chunk {
    std::string rows;
    json meta = json::object();
    double tail = 0.0;
};

struct Table {
    std::string name; ///< suffix for secondary tables ("" for the main one)
    std::string header;
    std::string body;
};

struct Artifact {
    std::vector<Table> tables;
    json results = json::object();
    double max_tail = 0.0;
};

inline void gather(Table& t, Artifact& a, std::vector<Chunk>& chunks, const std::string& meta_key = "points")
{
    json list = json::array();
    for (auto& c : chunks) {
        t.body += c.rows;
        a.max_tail = std::max(a.max_tail, c.tail);
        if (!c.meta.empty()) {
            list.push_back(std::move(c.meta));
        }
    }
    if (!list.empty()) {
        a.results[meta_key] = std::move(list);
    }
}

inline std::string table_path(const std::string& out, const std::string& name)
{
    if (name.empty()) {
        return out;
    }
    const std::filesystem::path p(out);
    const std::string ext = p.has_extension() ? p.extension().string() : ".csv";
    return (p.parent_path() / (p.stem().string() + "_" + name + ext)).string();
}

inline void write_file(const std::string& path, const std::string& text)
{
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw DomainError("cannot open '" + path + "' for writing");
    }
    f << text;
    if (!f) {
        throw DomainError("write to '" + path + "' failed");
    }
}

inline json manifest(const json& config, const Artifact& a)
{
    json m;
    m["config"] = config;
    m["software"] = {{"name", "coboson"}, {"version", kVersion}};
    m["tolerances"] = {{"tail_tol", config.value("tail_tol", 0.0)},
                       {"csv_digits", 17}};
    m["tail_bound"] = a.max_tail;
    m["results"] = a.results;
    return m;
}

/// CSV to `out` (stdout when empty) and the manifest next to it. Secondary
/// tables go to `<stem>_<name>.csv` with their own manifest.
inline void emit(const Artifact& a, const json& config, const std::string& out, std::ostream& stdout_)
{
    const json m = manifest(config, a);
    for (const auto& t : a.tables) {
        const std::string csv = t.header + "\n" + t.body;
        if (out.empty()) {
            if (!t.name.empty()) {
                stdout_ << "\n# " << t.name << "\n";
            }
            stdout_ << csv;
            continue;
        }
        const auto path = table_path(out, t.name);
        write_file(path, csv);
        json tm = m;
        tm["table"] = t.name.empty() ? "main" : t.name;
        write_file(path + ".meta.json", tm.dump(2) + "\n");
    }
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

inline Artifact cmd_approx(const RunConfig& c)
{
    if (c.direct()) {
        throw DomainError("approx takes only physical parameters (--gamma with --g or --x0)");
    }
    Artifact a;
    Table t{"", "g,gamma,x0,mu,valid,z_published,z_gaussian,width", ""};
    for (double g : strengths(c)) {
        const auto h = solve_equilibrium(InteractionSpec::inverse_power(*c.gamma, g));
        const auto gs = gaussian_schmidt(h.mu);
        t.body += num(g) + "," + num(*c.gamma) + "," + num(h.x0) + "," + num(h.mu) + "," + (h.valid ? "1" : "0") +
                  "," + num(z_from_mu(h.mu)) + "," + num(gs.z) + "," + num(gs.width) + "\n";
    }
    a.tables.push_back(std::move(t));
    return a;
}

inline Artifact cmd_spectrum(const RunConfig& c)
{
    const auto pts = resolve_points(c);
    const std::size_t reserve = c.N.empty() ? 0 : *std::max_element(c.N.begin(), c.N.end()) + 1;
    const std::size_t dims = pts.front().zs.size();
    std::string header = key_header(c) + ",j,lambda";
    for (std::size_t i = 0; i < dims; ++i) {
        header += ",l" + std::to_string(i);
    }
    auto chunks = parallel_map<Chunk>(pts.size(), c.threads, [&](std::size_t i) {
        SpectrumOptions opt;
        opt.reserve_modes = reserve;
        auto s = build_spectrum(pts[i].zs, c.tail_tol, opt);
        const std::size_t limit = c.modes.empty() ? s.size() : std::min(s.size(), c.modes.front());
        Chunk ch;
        ch.tail = s.tail();
        for (std::size_t j = 0; j < limit; ++j) {
            ch.rows += key(pts[i]) + "," + num(j) + "," + num(s.lambda(j));
            for (auto l : s.label(j)) {
                ch.rows += "," + std::to_string(l);
            }
            ch.rows += "\n";
        }
        ch.meta = {{"zs", pts[i].zs}, {"modes", s.size()}, {"tail", s.tail()}, {"purity", purity(pts[i].zs)}};
        return ch;
    });
    Artifact a;
    Table t{"", header, ""};
    gather(t, a, chunks);
    a.tables.push_back(std::move(t));
    return a;
}

inline Artifact cmd_entropy(const RunConfig& c)
{
    const auto pts = resolve_points(c);
    std::string header = key_header(c) + ",von_neumann,linear,min_entropy,max_entropy";
    for (double al : c.alpha) {
        header += ",renyi_" + tag(al);
    }
    Artifact a;
    Table t{"", header, ""};
    for (const auto& p : pts) {
        const auto e = entropies(p.zs, c.alpha);
        t.body += key(p) + "," + num(e.von_neumann) + "," + num(e.linear) + "," + num(e.min_entropy) + "," +
                  num(e.max_entropy);
        for (double r : e.renyi) {
            t.body += "," + num(r);
        }
        t.body += "\n";
    }
    a.results["units"] = "bits";
    a.tables.push_back(std::move(t));
    return a;
}

inline ChiTable chi_by_method(const RunConfig& c, const OccupationSpectrum& s, std::span<const double> zs,
                              std::size_t N)
{
    if (c.kind == "bosonic") {
        if (c.method != "dp") {
            throw DomainError("bosonic chi is only available with --method dp");
        }
        return chi_bose(s, N);
    }
    if (c.kind != "fermionic") {
        throw DomainError("--kind must be fermionic or bosonic");
    }
    if (c.method == "dp") {
        return chi_fermi_dp(s, N);
    }
    const auto M = power_sums_closed<Extended>(zs, static_cast<unsigned>(N));
    if (c.method == "newton") {
        return chi_fermi_newton<Extended>(M, N);
    }
    if (c.method == "partition") {
        ChiTable t;
        t.source = ChiSource::partition;
        t.logchi.assign(N + 1, 0.0);
        t.tail_error.assign(N + 1, 0.0);
        for (std::size_t n = 1; n <= N; ++n) {
            const auto r = chi_fermi_partition<Extended>(M, n);
            t.logchi[n] = r.value > 0 ? detail::to_log(r.value) : kNegInf;
            t.estimated_rel_error = std::max(t.estimated_rel_error, r.estimated_rel_error);
        }
        return t;
    }
    throw DomainError("--method must be dp, newton or partition");
}

inline Artifact cmd_chi(const RunConfig& c)
{
    const auto pts = resolve_points(c);
    const auto Ns = need_N(c);
    const std::size_t N = *std::max_element(Ns.begin(), Ns.end());
    auto chunks = parallel_map<Chunk>(pts.size(), c.threads, [&](std::size_t i) {
        const auto s = spectrum_for_pairs(pts[i].zs, N, c.tail_tol);
        const auto t = chi_by_method(c, s, pts[i].zs, N);
        Chunk ch;
        ch.tail = s.tail();
        for (std::size_t n = 0; n <= N; ++n) {
            ch.rows += key(pts[i]) + "," + num(n) + "," + num(t.chi(n)) + "," + num(t.log(n)) + "," +
                       num(n < t.tail_error.size() ? t.tail_error[n] : 0.0) + "\n";
        }
        ch.meta = {{"zs", pts[i].zs},
                   {"modes", s.size()},
                   {"tail", s.tail()},
                   {"estimated_rel_error", t.estimated_rel_error},
                   {"accuracy_warning", t.accuracy_warning}};
        return ch;
    });
    Artifact a;
    Table t{"", key_header(c) + ",n,chi,log_chi,tail_error", ""};
    gather(t, a, chunks);
    a.tables.push_back(std::move(t));
    return a;
}

inline Artifact cmd_ratio(const RunConfig& c)
{
    const auto pts = resolve_points(c);
    const auto Ns = need_N(c);
    const std::size_t N = *std::max_element(Ns.begin(), Ns.end());
    auto chunks = parallel_map<Chunk>(pts.size(), c.threads, [&](std::size_t i) {
        const auto s = spectrum_for_pairs(pts[i].zs, N + 1, c.tail_tol);
        const auto t = chi_fermi_dp(s, N + 1);
        const double P = purity(pts[i].zs);
        Chunk ch;
        ch.tail = s.tail();
        for (auto n : Ns) {
            const auto b = bounds(P, n);
            ch.rows += key(pts[i]) + "," + num(n) + "," + num(ratio(t, n)) + "," + num(b.lower) + "," +
                       num(b.upper) + "," + num(1.0 - P) + "\n";
        }
        return ch;
    });
    Artifact a;
    Table t{"", key_header(c) + ",N,ratio,lower,upper,SL", ""};
    gather(t, a, chunks);
    a.tables.push_back(std::move(t));
    return a;
}

inline Artifact cmd_populations(const RunConfig& c)
{
    const auto pts = resolve_points(c);
    const auto Ns = need_N(c);
    const std::size_t N = *std::max_element(Ns.begin(), Ns.end());
    const std::size_t reserve = std::max(N, c.modes.empty() ? 0 : *std::max_element(c.modes.begin(), c.modes.end()));
    auto chunks = parallel_map<Chunk>(pts.size(), c.threads, [&](std::size_t i) {
        const auto s = spectrum_for_pairs(pts[i].zs, reserve, c.tail_tol);
        Chunk ch;
        ch.tail = s.tail();
        json sums = json::array();
        for (auto n : Ns) {
            const auto p = populations(s, n);
            if (c.modes.empty()) {
                for (std::size_t j = 0; j < s.size(); ++j) {
                    ch.rows += key(pts[i]) + "," + num(n) + "," + num(j) + "," + num(p.n[j]) + "," + num(s.lambda(j)) + "\n";
                }
            } else {
                for (auto j : c.modes) {
                    if (j >= s.size()) {
                        throw CapacityError("mode " + std::to_string(j) + " lies beyond the retained spectrum");
                    }
                    ch.rows += key(pts[i]) + "," + num(n) + "," + num(j) + "," + num(p.n[j]) + "," + num(s.lambda(j)) + "\n";
                }
            }
            sums.push_back({{"N", n}, {"sum_residual", p.sum_residual}});
        }
        ch.meta = {{"zs", pts[i].zs}, {"modes", s.size()}, {"tail", s.tail()}, {"sum_rule", sums}};
        return ch;
    });
    Artifact a;
    Table t{"", key_header(c) + ",N,j,n,lambda", ""};
    gather(t, a, chunks);
    a.tables.push_back(std::move(t));
    return a;
}

inline std::vector<double> degeneracy_for(const RunConfig& c, std::size_t J)
{
    if (c.degeneracy == "1d") {
        return degeneracy_1d(J);
    }
    if (c.degeneracy == "2d") {
        return degeneracy_isotropic_2d(J);
    }
    throw DomainError("--degeneracy must be 1d or 2d");
}

inline std::vector<FitModel> fit_models(const RunConfig& c, bool required)
{
    std::vector<FitModel> out;
    for (const auto& m : c.fit) {
        if (m == "fd") {
            out.push_back(FitModel::fermi_dirac);
        } else if (m == "be") {
            out.push_back(FitModel::bose_einstein);
        } else {
            throw DomainError("--fit takes fd and/or be");
        }
    }
    if (required && out.empty()) {
        out = {FitModel::fermi_dirac, FitModel::bose_einstein};
    }
    return out;
}

inline std::string fit_row(const std::string& k, std::size_t N, const FitResult& f)
{
    return k + "," + num(N) + "," + (f.model == FitModel::fermi_dirac ? "fd" : "be") + "," + num(f.j_mu) + "," +
           num(f.T_eff) + "," + num(f.residual) + "," + (f.converged ? "1" : "0") + "," + num(f.window) + "," +
           num(f.evaluations) + "\n";
}

inline const char* kFitHeader = "N,model,j_mu,T_eff,residual,converged,window,evaluations";

/// A fit that does not converge is a solver failure (exit 3).
inline FitResult checked_fit(FitModel m, std::span<const double> d, std::span<const double> g, std::size_t N,
                             std::span<const double> zs)
{
    auto f = m == FitModel::fermi_dirac ? fit_fd(d, g, N) : fit_be(d, g, N);
    if (!f.converged) {
        throw SolverError(std::string(m == FitModel::fermi_dirac ? "FD" : "BE") + " fit did not converge at z_x = " +
                          num(zs[0]) + ", N = " + std::to_string(N));
    }
    return f;
}

struct DosChunk {
    Chunk dos;
    std::string fits;
};

inline Artifact cmd_dos(const RunConfig& c, bool fits_only)
{
    const auto pts = resolve_points(c);
    const auto Ns = need_N(c);
    const auto models = fit_models(c, fits_only);
    const std::size_t N = *std::max_element(Ns.begin(), Ns.end());
    auto chunks = parallel_map<DosChunk>(pts.size(), c.threads, [&](std::size_t i) {
        const auto s = spectrum_for_pairs(pts[i].zs, N, c.tail_tol);
        const auto g = degeneracy_for(c, s.size());
        DosChunk ch;
        ch.dos.tail = s.tail();
        for (auto n : Ns) {
            const auto d = dos(populations(s, n), g);
            if (!fits_only) {
                for (std::size_t j = 0; j < d.size(); ++j) {
                    ch.dos.rows += key(pts[i]) + "," + num(n) + "," + num(j) + "," + num(g[j]) + "," + num(d[j]) + "\n";
                }
            }
            for (auto m : models) {
                ch.fits += fit_row(key(pts[i]), n, checked_fit(m, d, g, n, pts[i].zs));
            }
        }
        return ch;
    });
    Artifact a;
    Table dos_t{"", key_header(c) + ",N,j,g,dos", ""};
    Table fit_t{fits_only ? "" : "fit", key_header(c) + "," + kFitHeader, ""};
    for (auto& ch : chunks) {
        dos_t.body += ch.dos.rows;
        fit_t.body += ch.fits;
        a.max_tail = std::max(a.max_tail, ch.dos.tail);
    }
    if (!fits_only) {
        a.tables.push_back(std::move(dos_t));
    }
    if (!models.empty()) {
        a.tables.push_back(std::move(fit_t));
    }
    return a;
}

inline Artifact cmd_counting(const RunConfig& c)
{
    const auto pts = resolve_points(c);
    const auto Ns = need_N(c);
    const std::size_t N = *std::max_element(Ns.begin(), Ns.end());
    const std::size_t tmax = c.t.empty() ? N : std::max(N, *std::max_element(c.t.begin(), c.t.end()));
    auto chunks = parallel_map<Chunk>(pts.size(), c.threads, [&](std::size_t i) {
        const auto s = spectrum_for_pairs(pts[i].zs, tmax, c.tail_tol);
        Chunk ch;
        ch.tail = s.tail();
        for (auto n : Ns) {
            const auto ts = c.t.empty() ? std::vector<std::size_t>{n} : c.t;
            for (auto t : ts) {
                const auto d = counting(s, n, t);
                for (std::size_t k = 0; k < d.probs.size(); ++k) {
                    ch.rows += key(pts[i]) + "," + num(n) + "," + num(t) + "," + num(k) + "," + num(d.probs[k]) +
                               "," + num(d.mean) + "," + num(d.variance) + "\n";
                }
            }
        }
        return ch;
    });
    Artifact a;
    Table t{"", key_header(c) + ",N,t,n,P,mean,variance", ""};
    gather(t, a, chunks);
    a.tables.push_back(std::move(t));
    return a;
}

struct DensityPoint {
    double g;
    HarmonicApprox approx;
};

inline Artifact cmd_density(const RunConfig& c)
{
    if (c.direct()) {
        throw DomainError("density takes only physical parameters (--gamma with --g or --x0)");
    }
    if (!c.epsilon.empty()) {
        throw DomainError("density profiles are one-dimensional; --epsilon is not accepted");
    }
    const auto Ns = need_N(c);
    std::vector<std::pair<DensityPoint, std::size_t>> jobs;
    for (double g : strengths(c)) {
        const auto h = solve_equilibrium(InteractionSpec::inverse_power(*c.gamma, g));
        for (auto n : Ns) {
            jobs.push_back({{g, h}, n});
        }
    }
    DensityOptions opt;
    opt.tail_tol = c.tail_tol;
    opt.grid.points = c.points;
    opt.grid.half_width = c.half_width;
    opt.prominence = c.prominence;
    opt.basis.validate = c.validate_basis;

    struct Out {
        std::string rows;
        std::string peak_row;
    };
    auto results = parallel_map<Out>(jobs.size(), c.threads, [&](std::size_t i) {
        const auto& [pt, n] = jobs[i];
        const auto r = density_profile(pt.approx, n, opt);
        Out o;
        const std::string k = num(pt.g) + "," + num(n) + ",";
        for (std::size_t q = 0; q < r.grid.x.size(); ++q) {
            o.rows += k + num(r.grid.x[q]) + "," + num(r.grid.rho_a[q]) + "," + num(r.grid.rho_b[q]) + "," +
                      num(r.grid.rho_total[q]) + "\n";
        }
        o.peak_row = num(pt.g) + "," + num(n) + "," + num(pt.approx.x0) + "," + num(r.basis.width) + "," +
                     num(pt.approx.x0 / r.basis.width) + "," + (pt.approx.valid ? "1" : "0") + "," +
                     num(r.basis.z_implied) + "," + num(r.grid.norm) + "," + num(r.peak_count) + "," +
                     to_string(r.regime) + "\n";
        return o;
    });
    Artifact a;
    Table prof{"", "g,N,x,rho_a,rho_b,rho_total", ""};
    Table pk{"peaks", "g,N,x0,width,x0_over_w,valid,z_implied,norm,peaks,regime", ""};
    for (auto& o : results) {
        prof.body += o.rows;
        pk.body += o.peak_row;
    }
    a.tables.push_back(std::move(prof));
    a.tables.push_back(std::move(pk));
    return a;
}

inline json arbitration_json(const oracle::ZxArbitration& r)
{
    return {{"mu", r.mu},
            {"x0", r.x0},
            {"svd_ratios", r.ratios},
            {"svd_ratio", r.ratio},
            {"ratio_spread", r.ratio_spread},
            {"z_published", r.z_published},
            {"z_gaussian", r.z_gaussian},
            {"selected_formula", r.selects_gaussian ? "gaussian" : "published"},
            {"selected", r.selected},
            {"mismatch", r.mismatch},
            {"grid_convergence", r.convergence}};
}

inline json product_json(const oracle::BoseProductReport& r)
{
    return {{"z_x", r.z_x},
            {"z_y", r.z_y},
            {"N", r.pairs},
            {"chi_multiset_2d", r.chi_2d},
            {"chi_product_of_1d", r.chi_product},
            {"relative_gap", r.relative_gap},
            {"truncated_modes", r.truncated_modes},
            {"chi_multiset_truncated", r.chi_truncated},
            {"fock_norm", r.fock_norm},
            {"fock_gap", r.fock_gap},
            {"product_form_holds", r.relative_gap < 1e-8},
            {"multiset_matches_fock", r.fock_gap < 1e-10}};
}

/// Oracle reports are JSON documents; they go where the CSV would.
inline json cmd_oracle(const RunConfig& c)
{
    json rep;
    if (c.report == "zx") {
        double mu = 0.0;
        std::vector<double> x0s;
        if (c.mu) {
            // direct: curvature ratio and separations
            if (c.gamma || !c.g.empty() || !c.epsilon.empty() || !c.zx.empty() || !c.zy.empty()) {
                throw DomainError("--mu takes only --x0; it excludes --gamma/--g and z values");
            }
            mu = *c.mu;
            x0s = c.x0.empty() ? std::vector<double>{0.0} : c.x0;
        } else {
            if (c.direct()) {
                throw DomainError("physical and direct parameters are mutually exclusive");
            }
            for (double g : strengths(c)) {
                const auto h = solve_equilibrium(InteractionSpec::inverse_power(*c.gamma, g));
                mu = h.mu;
                x0s.push_back(h.x0);
            }
        }
        rep["report"] = "zx_arbitration";
        rep["cases"] = json::array();
        for (double x0 : x0s) {
            rep["cases"].push_back(arbitration_json(oracle::arbitrate_zx(mu, x0)));
        }
        return rep;
    }
    if (c.report == "product") {
        if (c.zx.size() != 1 || c.zy.size() != 1) {
            throw DomainError("product report needs one --zx and one --zy");
        }
        rep["report"] = "bose_product_convention";
        rep["cases"] = json::array();
        for (auto n : need_N(c)) {
            rep["cases"].push_back(product_json(oracle::bose_product_check(c.zx[0], c.zy[0], n)));
        }
        return rep;
    }
    if (c.report == "chi") {
        const auto pts = resolve_points(c);
        const std::size_t J = c.modes.empty() ? oracle::kMaxOracleModes : c.modes.front();
        rep["report"] = "chi_bruteforce";
        rep["modes"] = J;
        rep["cases"] = json::array();
        for (const auto& p : pts) {
            const auto s = build_spectrum(p.zs, c.tail_tol).truncated(J);
            for (auto n : need_N(c)) {
                const bool fermi = c.kind != "bosonic";
                const auto kind = fermi ? ChiKind::fermionic : ChiKind::bosonic;
                const double brute = oracle::chi_bruteforce(s, n, kind);
                const auto t = fermi ? chi_fermi_dp(s, n) : chi_bose(s, n);
                rep["cases"].push_back({{"zs", p.zs},
                                        {"N", n},
                                        {"kind", fermi ? "fermionic" : "bosonic"},
                                        {"bruteforce", brute},
                                        {"dp", t.chi(n)},
                                        {"relative_difference", brute == 0.0 ? std::abs(t.chi(n))
                                                                             : std::abs(t.chi(n) / brute - 1.0)}});
            }
        }
        return rep;
    }
    throw DomainError("--report must be zx, product or chi");
}

// ---------------------------------------------------------------------------
// Figure presets
// ---------------------------------------------------------------------------

struct Panel {
    std::string file;
    RunConfig config;
};

inline RunConfig preset_base(const RunConfig& c, const std::string& sub)
{
    RunConfig r;
    r.subcommand = sub;
    r.tail_tol = c.tail_tol;
    r.threads = c.threads;
    return r;
}

inline std::vector<Panel> preset_panels(const RunConfig& c)
{
    std::vector<Panel> out;
    switch (c.preset) {
    case 1: {
        auto r = preset_base(c, "ratio");
        r.zx_sweep = "0.01:0.99:200";
        r.N = {1, 2, 5, 10, 15, 20, 150};
        out.push_back({"fig1_ratio.csv", r});
        break;
    }
    case 2:
        for (std::size_t n : {5, 10}) {
            auto r = preset_base(c, "populations");
            r.zx_sweep = "0.01:0.99:99";
            r.N = {n};
            r.modes = {0, 1, 2, 3, 4, 5, 6, 10, 20};
            out.push_back({"fig2_populations_N" + std::to_string(n) + ".csv", r});
        }
        break;
    case 3:
        for (std::size_t n : {10, 100}) {
            auto r = preset_base(c, "dos");
            r.zx = {0.1, 0.6, 0.85, 0.95, 0.99};
            r.N = {n};
            r.fit = {"fd", "be"};
            out.push_back({"fig3_dos_N" + std::to_string(n) + ".csv", r});
        }
        break;
    case 4:
        for (double z : {0.2, 0.5, 0.8, 0.95, 0.99}) {
            auto r = preset_base(c, "counting");
            r.zx = {z};
            r.N = {150};
            r.t = {150};
            out.push_back({"fig4_counting_zx" + tag(z) + ".csv", r});
        }
        break;
    case 5: {
        // x0 in units of the natural-orbital width at mu = sqrt(3)
        const double w = gaussian_schmidt(std::sqrt(3.0)).width;
        for (auto [label, ratio] : {std::pair{"weak", 0.5}, std::pair{"strong", 5.0}}) {
            auto r = preset_base(c, "density");
            r.gamma = 1.0;
            r.g = {strength_for_separation(1.0, ratio * w)};
            r.N = {1, 2, 3};
            r.prominence = c.prominence;
            r.points = c.points;
            r.validate_basis = c.validate_basis;
            out.push_back({std::string("fig5_density_") + label + ".csv", r});
        }
        break;
    }
    default:
        throw DomainError("--preset must be 1..5");
    }
    return out;
}

inline Artifact dispatch(const RunConfig& c);

inline json cmd_figure(const RunConfig& c, std::ostream& out)
{
    if (c.out_dir.empty()) {
        throw DomainError("figure needs --out-dir");
    }
    std::filesystem::create_directories(c.out_dir);
    json panels = json::array();
    double tail = 0.0;
    for (const auto& p : preset_panels(c)) {
        const auto a = dispatch(p.config);
        const auto path = (std::filesystem::path(c.out_dir) / p.file).string();
        const json cfg = p.config.resolved();
        emit(a, cfg, path, out);
        json files = json::array();
        for (const auto& t : a.tables) {
            files.push_back(std::filesystem::path(table_path(path, t.name)).filename().string());
        }
        panels.push_back({{"files", files}, {"config", cfg}, {"tail_bound", a.max_tail}, {"results", a.results}});
        tail = std::max(tail, a.max_tail);
    }
    json m;
    m["preset"] = c.preset;
    m["panels"] = panels;
    m["tail_bound"] = tail;
    m["tolerances"] = {{"tail_tol", c.tail_tol}, {"csv_digits", 17}};
    m["software"] = {{"name", "coboson"}, {"version", kVersion}};
    write_file((std::filesystem::path(c.out_dir) / ("fig" + std::to_string(c.preset) + "_manifest.json")).string(),
               m.dump(2) + "\n");
    return m;
}

inline Artifact dispatch(const RunConfig& c)
{
    const auto& s = c.subcommand;
    if (s == "approx") {
        return cmd_approx(c);
    }
    if (s == "spectrum") {
        return cmd_spectrum(c);
    }
    if (s == "entropy") {
        return cmd_entropy(c);
    }
    if (s == "chi") {
        return cmd_chi(c);
    }
    if (s == "ratio") {
        return cmd_ratio(c);
    }
    if (s == "populations") {
        return cmd_populations(c);
    }
    if (s == "dos") {
        return cmd_dos(c, false);
    }
    if (s == "fit") {
        return cmd_dos(c, true);
    }
    if (s == "counting") {
        return cmd_counting(c);
    }
    if (s == "density") {
        return cmd_density(c);
    }
    throw DomainError("unknown subcommand '" + s + "'");
}

/// Runs one resolved configuration and writes its artifacts.
inline void run(const RunConfig& c, std::ostream& out)
{
    if (c.format != "csv") {
        throw DomainError("only --format csv is supported");
    }
    if (c.threads < 1) {
        throw DomainError("--threads must be at least 1");
    }
    if (c.subcommand == "figure") {
        (void)cmd_figure(c, out);
        return;
    }
    if (c.subcommand == "oracle") {
        const json rep = cmd_oracle(c);
        const std::string text = rep.dump(2) + "\n";
        if (c.out.empty()) {
            out << text;
        } else {
            write_file(c.out, text);
            Artifact a;
            write_file(c.out + ".meta.json", manifest(c.resolved(), a).dump(2) + "\n");
        }
        return;
    }
    emit(dispatch(c), c.resolved(), c.out, out);
}

// ---------------------------------------------------------------------------
// Argument parsing
// ---------------------------------------------------------------------------

inline void add_common(CLI::App* s, RunConfig& c)
{
    s->add_option("--gamma", c.gamma, "inverse-power exponent of the interaction");
    s->add_option("--g", c.g, "interaction strengths")->delimiter(',');
    s->add_option("--x0", c.x0, "equilibrium separations (alternative to --g)")->delimiter(',');
    s->add_option("--epsilon", c.epsilon, "transverse trap anisotropies, one per extra axis")->delimiter(',');
    s->add_option("--zx-formula", c.zx_formula, "gaussian or published")->capture_default_str();
    s->add_option("--zx", c.zx, "generating parameters along x")->delimiter(',');
    s->add_option("--zx-sweep", c.zx_sweep, "start:stop:count");
    s->add_option("--zy", c.zy, "transverse generating parameters")->delimiter(',');
    s->add_option("--N", c.N, "pair numbers")->delimiter(',');
    s->add_option("--tail-tol", c.tail_tol, "discarded occupation mass")->capture_default_str();
    s->add_option("--out,-o", c.out, "CSV path (stdout when omitted)");
    s->add_option("--format", c.format)->capture_default_str();
    s->add_option("--threads", c.threads, "sweep workers")->capture_default_str();
}

/// Parses argv-style arguments (without the program name), runs, and maps
/// errors onto exit codes.
inline int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    RunConfig c;
    CLI::App app{"Composite-boson normalization, populations and density profiles"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);

    auto* approx = app.add_subcommand("approx", "equilibrium separation and curvature ratio");
    auto* spectrum = app.add_subcommand("spectrum", "Schmidt occupations");
    auto* entropy = app.add_subcommand("entropy", "entanglement entropies in bits");
    auto* chi = app.add_subcommand("chi", "normalization factors chi_n, n = 0..N");
    auto* ratio_cmd = app.add_subcommand("ratio", "chi_{N+1}/chi_N with its bounds");
    auto* pops = app.add_subcommand("populations", "mode populations n_j");
    auto* dos_cmd = app.add_subcommand("dos", "density of states, optionally with fits");
    auto* fit = app.add_subcommand("fit", "Fermi-Dirac / Bose-Einstein fits to the DOS");
    auto* count = app.add_subcommand("counting", "pair-number distribution in the first t modes");
    auto* dens = app.add_subcommand("density", "one-dimensional density profiles and peak counts");
    auto* fig = app.add_subcommand("figure", "figure presets 1..5");
    auto* orc = app.add_subcommand("oracle", "brute-force and grid cross-checks");

    for (auto* s : {approx, spectrum, entropy, chi, ratio_cmd, pops, dos_cmd, fit, count, dens, orc}) {
        add_common(s, c);
    }
    spectrum->add_option("--modes", c.modes, "rows to print")->delimiter(',');
    entropy->add_option("--alpha", c.alpha, "Renyi orders")->delimiter(',');
    chi->add_option("--kind", c.kind, "fermionic or bosonic")->capture_default_str();
    chi->add_option("--method", c.method, "dp, newton or partition")->capture_default_str();
    pops->add_option("--modes", c.modes, "mode indices to print")->delimiter(',');
    for (auto* s : {dos_cmd, fit}) {
        s->add_option("--degeneracy", c.degeneracy, "1d or 2d")->capture_default_str();
        s->add_option("--fit", c.fit, "fd, be")->delimiter(',');
    }
    count->add_option("--t", c.t, "window sizes (default N)")->delimiter(',');
    dens->add_option("--points", c.points, "grid points")->capture_default_str();
    dens->add_option("--half-width", c.half_width, "grid half-width (0 = automatic)")->capture_default_str();
    dens->add_option("--prominence", c.prominence, "peak prominence relative to max density")->capture_default_str();
    dens->add_flag("!--no-validate", c.validate_basis, "skip the grid check of the orbital basis");
    orc->add_option("--report", c.report, "zx, product or chi")->capture_default_str();
    orc->add_option("--mu", c.mu, "curvature ratio for the zx report");
    orc->add_option("--kind", c.kind, "fermionic or bosonic")->capture_default_str();
    orc->add_option("--modes", c.modes, "truncation for the chi report")->delimiter(',');
    fig->add_option("--preset", c.preset, "1..5")->required();
    fig->add_option("--out-dir", c.out_dir, "directory for the panel CSVs")->required();
    fig->add_option("--tail-tol", c.tail_tol)->capture_default_str();
    fig->add_option("--threads", c.threads)->capture_default_str();
    fig->add_option("--points", c.points, "grid points for preset 5")->capture_default_str();
    fig->add_option("--prominence", c.prominence)->capture_default_str();
    fig->add_flag("!--no-validate", c.validate_basis);

    std::vector<std::string> argv_store{"coboson_cli"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_store) {
        argv.push_back(a.data());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e, out, err); // --help, --version
        }
        (void)app.exit(e, err, err);
        return Exit::invalid;
    }
    c.subcommand = app.get_subcommands().front()->get_name();

    try {
        run(c, out);
    } catch (const CapacityError& e) {
        err << "capacity: " << e.what() << "\n";
        return Exit::capacity;
    } catch (const SolverError& e) {
        err << "solver: " << e.what() << "\n";
        return Exit::solver;
    } catch (const AccuracyError& e) {
        err << "accuracy: " << e.what() << "\n";
        return Exit::solver;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return Exit::invalid;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return Exit::invalid;
    }
    return Exit::ok;
}

} // namespace coboson::cli
