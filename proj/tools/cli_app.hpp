#pragma once

#include "qgraph/qgraph.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <functional>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace qgraph::cli {

using json = nlohmann::ordered_json;

enum ExitCode : int { ok = 0, usage = 2, numeric = 3, partial = 4 };

class UsageError : public Error {
public:
    using Error::Error;
};

inline std::string fmt17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline json to_json(Complex z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

inline json to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(to_json(m(i, j)));
        rows.push_back(std::move(row));
    }
    return rows;
}

/// Real number with "inf"/"-inf" spellings.
inline double parse_real(std::string_view s) {
    if (s == "inf" || s == "+inf") return infinity;
    if (s == "-inf") return -infinity;
    double v = 0.0;
    const char* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || ptr != end || !std::isfinite(v))
        throw UsageError("not a real number: '" + std::string(s) + "'");
    return v;
}

inline int parse_int(std::string_view s) {
    int v = 0;
    const char* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc{} || ptr != end) throw UsageError("not an integer: '" + std::string(s) + "'");
    return v;
}

inline std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = s.find(sep, start);
        out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

/// dirichlet | neumann | robin:B | robin-scaled:N:BETA
inline HalflineBC parse_bc(std::string_view s) {
    const auto parts = split(s, ':');
    if (parts[0] == "dirichlet" && parts.size() == 1) return Dirichlet{};
    if (parts[0] == "neumann" && parts.size() == 1) return Neumann{};
    if (parts[0] == "robin" && parts.size() == 2) return Robin{parse_real(parts[1])};
    if (parts[0] == "robin-scaled" && parts.size() == 3) return RobinScaled{parse_int(parts[1]), parse_real(parts[2])};
    throw UsageError("unknown boundary condition: '" + std::string(s) + "'");
}

/// A,C
inline PointInteraction parse_point(std::string_view s) {
    const auto parts = split(s, ',');
    if (parts.size() != 2) throw UsageError("--point expects A,C");
    return {parse_real(parts[0]), parse_real(parts[1])};
}

/// L,N
inline GridSpec parse_grid(std::string_view s) {
    const auto parts = split(s, ',');
    if (parts.size() != 2) throw UsageError("--grid expects L,N");
    GridSpec g{parse_real(parts[0]), parse_int(parts[1])};
    g.validate();
    return g;
}

inline Family parse_coupling_family(std::string_view s) {
    const auto f = parse_family(s);
    if (!f || *f == Family::custom) throw UsageError("unknown family: '" + std::string(s) + "'");
    return *f;
}

inline TargetFamily parse_target_family(std::string_view s) {
    if (s == "delta-prime-s") return TargetFamily::delta_prime_s;
    if (s == "delta-prime") return TargetFamily::delta_prime;
    throw UsageError("family must be delta-prime-s or delta-prime, got '" + std::string(s) + "'");
}

inline void emit_plain(std::ostream& out, const json& j, const std::string& prefix = "") {
    if (j.is_object() && j.size() == 2 && j.contains("re") && j.contains("im")) {
        out << prefix << " = " << fmt17(j["re"].get<double>()) << (j["im"].get<double>() < 0 ? " - " : " + ")
            << fmt17(std::abs(j["im"].get<double>())) << "i\n";
    } else if (j.is_object()) {
        for (const auto& [k, v] : j.items()) emit_plain(out, v, prefix.empty() ? k : prefix + "." + k);
    } else if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i) emit_plain(out, j[i], prefix + "[" + std::to_string(i) + "]");
    } else if (j.is_number_float()) {
        out << prefix << " = " << fmt17(j.get<double>()) << "\n";
    } else {
        out << prefix << " = " << j.dump() << "\n";
    }
}

inline void emit(std::ostream& out, const json& j, const std::string& format) {
    if (format == "json") {
        out << j.dump(2) << "\n";
    } else if (format == "plain") {
        emit_plain(out, j);
    } else {
        throw UsageError("--emit " + format + " is not available for this command");
    }
}

inline json stage_json(const StageResult& s) {
    json j;
    j["a"] = s.stage.a;
    j["b"] = s.stage.b;
    j["c"] = s.stage.c;
    j["per_channel_b"] = s.stage.per_channel_b;
    j["norm_sym"] = s.norm_sym;
    j["norm_comp"] = s.norm_comp;
    j["norm_total"] = s.norm_total;
    j["norm_total_outer"] = s.norm_total_outer;
    j["valid"] = s.valid;
    j["error"] = s.valid ? json(nullptr) : json(s.error);
    return j;
}

inline json fit_json(const ConvergenceReport& r) {
    json j;
    j["fitted_slope"] = r.fit ? json(r.fit->slope) : json(nullptr);
    j["fitted_intercept"] = r.fit ? json(r.fit->intercept) : json(nullptr);
    j["outer_fitted_slope"] = r.outer_fit ? json(r.outer_fit->slope) : json(nullptr);
    j["all_valid"] = r.all_valid();
    return j;
}

inline json error_json(const KernelError& e, double h) {
    json j;
    j["h"] = h;
    j["max_abs"] = e.max_abs;
    j["rms"] = e.rms;
    j["samples"] = e.samples;
    j["budget"] = oracle_budget(h);
    j["within_budget"] = e.max_abs < oracle_budget(h);
    return j;
}

/// Parses `args` (without the program name) and runs one subcommand.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Vertex couplings, scattering and resolvent kernels on star graphs", "qgraph"};
    app.require_subcommand(1);

    std::string emit_format = "auto";
    std::function<int()> action;

    // coupling
    std::string family, param = "0";
    int n = 2;
    bool to_ab_flag = false, validate_flag = false;
    std::vector<double> rescale;
    auto* coupling = app.add_subcommand("coupling", "Build a vertex coupling and its (A,B) data");
    coupling->add_option("--family", family, "delta | delta-prime-s | delta-p | delta-prime")->required();
    coupling->add_option("--n", n, "number of edges")->required();
    coupling->add_option("--param", param, "coupling parameter, inf allowed");
    coupling->add_flag("--to-ab", to_ab_flag, "include the (A,B) pair");
    coupling->add_flag("--validate", validate_flag, "include (A,B) admissibility diagnostics");
    coupling->add_option("--rescale", rescale, "edge lengths L1 L2")->expected(2);
    coupling->add_option("--emit", emit_format, "json | plain");
    coupling->callback([&] {
        action = [&] {
            const VertexCoupling c = make_coupling(parse_coupling_family(family), n, parse_real(param));
            json j;
            j["family"] = family;
            j["n"] = n;
            j["param"] = param;
            j["u"] = to_json(c.u());
            const ABPair ab = to_ab(c);
            if (to_ab_flag) {
                j["a"] = to_json(ab.a);
                j["b"] = to_json(ab.b);
            }
            bool admissible = true;
            if (validate_flag) {
                const ABDiagnostics d = validate_ab(ab);
                admissible = d.admissible;
                j["validation"] = {{"rank", d.rank},
                                   {"hermiticity_defect", d.hermiticity_defect},
                                   {"min_eigenvalue", d.min_eigenvalue},
                                   {"admissible", d.admissible}};
            }
            if (!rescale.empty()) {
                j["rescale"] = {{"from", rescale[0]}, {"to", rescale[1]}};
                j["u_rescaled"] = to_json(rescale_length(c, rescale[0], rescale[1]).u());
            }
            emit(out, j, emit_format == "auto" ? "json" : emit_format);
            if (!admissible) {
                err << "error: (A,B) pair is not admissible\n";
                return int(numeric);
            }
            return int(ok);
        };
    });

    // smatrix
    std::string s_family, s_param = "0";
    int s_n = 2;
    double k = 1.0;
    auto* smatrix = app.add_subcommand("smatrix", "On-shell scattering matrix at momentum k");
    smatrix->add_option("--family", s_family, "delta | delta-prime-s | delta-p | delta-prime")->required();
    smatrix->add_option("--n", s_n, "number of edges")->required();
    smatrix->add_option("--param", s_param, "coupling parameter, inf allowed");
    smatrix->add_option("--k", k, "momentum k > 0")->required();
    smatrix->add_option("--emit", emit_format, "json | plain");
    smatrix->callback([&] {
        action = [&] {
            const VertexCoupling c = make_coupling(parse_coupling_family(s_family), s_n, parse_real(s_param));
            const Matrix s = s_matrix(c, k);
            json j;
            j["family"] = s_family;
            j["n"] = s_n;
            j["param"] = s_param;
            j["k"] = k;
            j["s"] = to_json(s);
            j["unitarity_defect"] = linalg::unitarity_defect(s);
            emit(out, j, emit_format == "auto" ? "json" : emit_format);
            return int(ok);
        };
    });

    // greens
    std::string bc_text, grid_text;
    double kappa = 1.0, x = 0.0, y = 0.0;
    std::vector<std::string> point_texts;
    auto* greens = app.add_subcommand("greens", "Half-line resolvent kernel at energy -kappa^2");
    greens->add_option("--bc", bc_text, "dirichlet | neumann | robin:B | robin-scaled:N:BETA")->required();
    greens->add_option("--kappa", kappa, "kappa > 0");
    auto* x_opt = greens->add_option("--x", x, "first argument");
    auto* y_opt = greens->add_option("--y", y, "second argument");
    greens->add_option("--point", point_texts, "point interaction A,C (repeatable)")->allow_extra_args(false);
    greens->add_option("--grid", grid_text, "sample on the grid L,N instead of one point");
    greens->add_option("--emit", emit_format, "json | csv | plain");
    greens->callback([&] {
        action = [&] {
            const HalflineBC bc = parse_bc(bc_text);
            std::vector<PointInteraction> points;
            for (const auto& p : point_texts) points.push_back(parse_point(p));
            auto kernel = [&](double u, double v) { return krein_insert_all(bc, points, kappa, u, v); };
            if (!grid_text.empty()) {
                const GridSpec g = parse_grid(grid_text);
                const std::string format = emit_format == "auto" ? "csv" : emit_format;
                if (format != "csv") throw UsageError("--grid output is csv only");
                out << "x,y,re,im\n";
                for (int i = 0; i <= g.interior + 1; ++i)
                    for (int l = 0; l <= g.interior + 1; ++l) {
                        const double u = i * g.step(), v = l * g.step();
                        out << fmt17(u) << ',' << fmt17(v) << ',' << fmt17(kernel(u, v)) << ",0\n";
                    }
                return int(ok);
            }
            if (x_opt->count() == 0 || y_opt->count() == 0) throw UsageError("--x and --y are required without --grid");
            json j;
            j["bc"] = describe(bc);
            j["kappa"] = kappa;
            j["points"] = json::array();
            for (const auto& p : points) j["points"].push_back({{"a", p.a}, {"c", p.c}});
            j["x"] = x;
            j["y"] = y;
            j["value"] = to_json(Complex{kernel(x, y), 0.0});
            emit(out, j, emit_format == "auto" ? "json" : emit_format);
            return int(ok);
        };
    });

    // converge
    std::string c_family, c_grid = "12,400";
    int c_n = 2;
    double beta = 1.0, c_kappa = 1.0;
    std::vector<double> a_list;
    int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    auto* converge = app.add_subcommand("converge", "Norm-resolvent convergence sweep over a decreasing list of a");
    converge->add_option("--family", c_family, "delta-prime-s | delta-prime")->required();
    converge->add_option("--n", c_n, "number of edges")->required();
    converge->add_option("--beta", beta, "target coupling beta")->required();
    converge->add_option("--kappa", c_kappa, "kappa > 0");
    converge->add_option("--a-list", a_list, "comma-separated, strictly decreasing")->delimiter(',')->required();
    converge->add_option("--grid", c_grid, "quadrature grid L,N");
    converge->add_option("--emit", emit_format, "json | csv | plain");
    converge->add_option("--threads", threads, "worker threads for kernel sampling");
    converge->callback([&] {
        action = [&] {
            if (c_n < 1) throw UsageError("--n must be >= 1");
            const TargetFamily f = parse_target_family(c_family);
            const GridSpec g = parse_grid(c_grid);
            const ConvergenceReport r = convergence_sweep(f, beta, c_n, c_kappa, a_list, g, std::max(1, threads));
            const std::string format = emit_format == "auto" ? "csv" : emit_format;
            if (format == "csv") {
                out << "a,b,c,per_channel_b,norm_sym,norm_comp,norm_total\n";
                for (const auto& s : r.stages)
                    out << fmt17(s.stage.a) << ',' << fmt17(s.stage.b) << ',' << fmt17(s.stage.c) << ','
                        << fmt17(s.stage.per_channel_b) << ',' << (s.valid ? fmt17(s.norm_sym) : "nan") << ','
                        << (s.valid ? fmt17(s.norm_comp) : "nan") << ',' << (s.valid ? fmt17(s.norm_total) : "nan")
                        << "\n";
                out << "\n" << fit_json(r).dump(2) << "\n";
            } else {
                json j;
                j["family"] = std::string(to_string(f));
                j["n"] = c_n;
                j["beta"] = beta;
                j["kappa"] = c_kappa;
                j["grid"] = {{"length", g.length}, {"interior", g.interior}};
                j["stages"] = json::array();
                for (const auto& s : r.stages) j["stages"].push_back(stage_json(s));
                j.update(fit_json(r));
                emit(out, j, format);
            }
            for (const auto& s : r.stages)
                if (!s.valid) err << "stage a=" << fmt17(s.stage.a) << " invalid: " << s.error << "\n";
            return r.all_valid() ? int(ok) : int(partial);
        };
    });

    // oracle-check
    std::string o_bc, o_star;
    int o_n = 2;
    double o_beta = 1.0, o_kappa = 1.0, h = 3e-3;
    std::vector<std::string> o_points;
    bool order = false;
    auto* oracle = app.add_subcommand("oracle-check", "Compare analytic kernels with the finite-difference oracle");
    oracle->set_help_flag("--help", "Print this help message and exit");
    auto* bc_opt = oracle->add_option("--bc", o_bc, "half-line boundary condition");
    auto* star_opt = oracle->add_option("--star", o_star, "star target: delta-prime-s | delta-prime");
    bc_opt->excludes(star_opt);
    oracle->add_option("--n", o_n, "star edges");
    oracle->add_option("--beta", o_beta, "star coupling beta");
    oracle->add_option("--point", o_points, "point interaction A,C (repeatable, half-line only)")->allow_extra_args(false);
    oracle->add_option("--kappa", o_kappa, "kappa > 0");
    oracle->add_option("--h", h, "oracle grid step");
    oracle->add_flag("--order", order, "also run at h/2 and require an error ratio in [3,5]");
    oracle->add_option("--emit", emit_format, "json | plain");
    oracle->callback([&] {
        action = [&] {
            if (!(h > 0.0)) throw UsageError("--h must be positive");
            std::function<KernelError(double)> check;
            json j;
            if (!o_bc.empty()) {
                const HalflineBC bc = parse_bc(o_bc);
                std::vector<PointInteraction> points;
                for (const auto& p : o_points) points.push_back(parse_point(p));
                j["model"] = describe(bc);
                check = [bc, points, k = o_kappa](double step) { return oracle_check_halfline(bc, points, k, step); };
            } else if (!o_star.empty()) {
                const StarModel m = target_model(parse_target_family(o_star), o_n, o_beta);
                j["model"] = o_star + " n=" + std::to_string(o_n) + " beta=" + fmt17(o_beta);
                check = [m, k = o_kappa](double step) { return oracle_check_star(m, k, step); };
            } else {
                throw UsageError("oracle-check needs --bc or --star");
            }
            j["kappa"] = o_kappa;
            const KernelError e = check(h);
            j["error"] = error_json(e, h);
            bool pass = e.max_abs < oracle_budget(h);
            if (order) {
                const KernelError e2 = check(h / 2.0);
                const double ratio = e.max_abs / e2.max_abs;
                j["error_half"] = error_json(e2, h / 2.0);
                j["order_ratio"] = ratio;
                pass = pass && ratio >= 3.0 && ratio <= 5.0;
            }
            j["pass"] = pass;
            emit(out, j, emit_format == "auto" ? "json" : emit_format);
            if (!pass) {
                err << "error: oracle mismatch exceeds the O(h^2) budget\n";
                return int(numeric);
            }
            return int(ok);
        };
    });

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? int(ok) : int(usage);
    }

    try {
        return action();
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return usage;
    } catch (const InvalidArgument& e) {
        err << "invalid argument: " << e.what() << "\n";
        return usage;
    } catch (const PoleError& e) {
        err << "pole: " << e.what() << " (at " << fmt17(e.location().real()) << (e.location().imag() < 0 ? " - " : " + ")
            << fmt17(std::abs(e.location().imag())) << "i)\n";
        return numeric;
    } catch (const Error& e) {
        err << "numeric error: " << e.what() << "\n";
        return numeric;
    }
}

} // namespace qgraph::cli
